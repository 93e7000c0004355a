//! `anc-sim`: sweep, validate and reproduce drivers over the library.

use anc_core::modem::FrameConfig;
use anc_core::sim::{
    config_hash, emit_results, run_sweep, CodeSourceSpec, Mode, OutputFormat, SimConfig,
};
use anc_core::validate;
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "anc-sim", version, about = "Noncoherent FSK analog network coding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER/FER sweep over per-link Eb/N0
    Sweep(SweepArgs),
    /// Run the quadrature-oracle and special-function check suites
    Validate {
        /// Random vectors per oracle cell
        #[arg(long, default_value_t = 200)]
        draws: usize,
    },
    /// Re-run a canned experiment family with reduced caps
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key=value file supplying defaults; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Modulation order (2, 4 or 8)
    #[arg(long)]
    m: Option<usize>,
    /// Series truncation length
    #[arg(long)]
    nt: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// none | dvbs2-short-r12 | alist:PATH
    #[arg(long)]
    code: Option<String>,
    /// Frame length in bits for uncoded runs (coded runs take it from the code)
    #[arg(long)]
    frame_bits: Option<usize>,
    #[arg(long)]
    snr_start: Option<f64>,
    #[arg(long)]
    snr_stop: Option<f64>,
    #[arg(long)]
    snr_step: Option<f64>,
    #[arg(long)]
    frames_max: Option<u64>,
    #[arg(long)]
    errors_min: Option<u64>,
    /// Total decoder iterations per frame
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Experiment family: 2 (uncoded truncation floors),
    /// 3 (coded truncation gap), 4 (BICM vs BICM-ID)
    #[arg(long)]
    figure: u32,
    /// Full-scale caps (hours of runtime) instead of the reduced defaults
    #[arg(long)]
    full: bool,
    /// Output directory for one CSV per curve
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 0x414e_4321)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uncoded,
    Bicm,
    BicmId,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Uncoded => Mode::Uncoded,
            ModeArg::Bicm => Mode::Bicm,
            ModeArg::BicmId => Mode::BicmId,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => sweep(args),
        Command::Validate { draws } => run_validate(draws),
        Command::Reproduce(args) => reproduce(args),
    }
}

/// Flat key=value defaults; '#' starts a comment, blank lines ignored.
fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Flag value if present, else config-file value, else default.
fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => match file.get(key) {
            Some(s) => s
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key} = {s:?}: {e}")),
            None => Ok(default),
        },
    }
}

fn parse_code(s: &str) -> Result<Option<CodeSourceSpec>> {
    Ok(match s {
        "none" => None,
        "dvbs2-short-r12" => Some(CodeSourceSpec::Dvbs2ShortR12),
        other => match other.strip_prefix("alist:") {
            Some(path) => Some(CodeSourceSpec::Alist(path.to_string())),
            None => bail!("unknown code {other:?} (none | dvbs2-short-r12 | alist:PATH)"),
        },
    })
}

fn snr_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step <= 0.0 || stop < start {
        bail!("need snr-start <= snr-stop and snr-step > 0");
    }
    let n = ((stop - start) / step).round() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => load_config_file(p)?,
        None => HashMap::new(),
    };
    let mode = match args.mode.map(Mode::from) {
        Some(m) => m,
        None => match file.get("mode").map(String::as_str) {
            Some("uncoded") | None => Mode::Uncoded,
            Some("bicm") => Mode::Bicm,
            Some("bicm-id") => Mode::BicmId,
            Some(other) => bail!("unknown mode {other:?}"),
        },
    };
    let code_str = match &args.code {
        Some(s) => s.clone(),
        None => file.get("code").cloned().unwrap_or_else(|| "none".into()),
    };
    let code = parse_code(&code_str)?;

    let m = resolve(args.m, &file, "m", 2)?;
    let nt = resolve(args.nt, &file, "nt", 50)?;
    let frame_bits = resolve(args.frame_bits, &file, "frame-bits", 2048)?;
    let snr_start = resolve(args.snr_start, &file, "snr-start", 10.0)?;
    let snr_stop = resolve(args.snr_stop, &file, "snr-stop", 30.0)?;
    let snr_step = resolve(args.snr_step, &file, "snr-step", 2.0)?;
    let frames_max = resolve(args.frames_max, &file, "frames-max", 1000)?;
    let errors_min = resolve(args.errors_min, &file, "errors-min", 100)?;
    let iters = resolve(args.iters, &file, "iters", 30)?;
    let seed = resolve(args.seed, &file, "seed", 0)?;
    let workers = resolve(args.workers, &file, "workers", 1)?;
    let out = match args.out {
        Some(p) => p,
        None => PathBuf::from(file.get("out").cloned().unwrap_or_else(|| "sweep.csv".into())),
    };
    let format = match args.format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => match file.get("format").map(String::as_str) {
            Some("json") => OutputFormat::Json,
            Some("csv") | None => OutputFormat::Csv,
            Some(other) => bail!("unknown format {other:?}"),
        },
    };

    let frame = match &code {
        Some(spec) => {
            let c = anc_core::ldpc::LdpcCode::load(&spec.to_source())?;
            FrameConfig::new(m, c.k(), c.n())?
        }
        None => FrameConfig::new(m, frame_bits, frame_bits)?,
    };
    let cfg = SimConfig {
        frame,
        n_t: nt,
        mode,
        code,
        snr_db: snr_points(snr_start, snr_stop, snr_step)?,
        iterations: iters,
        errors_min,
        frames_max,
        seed,
        workers,
    };
    eprintln!(
        "sweep: {} points, config {}",
        cfg.snr_db.len(),
        config_hash(&cfg)
    );
    let records = run_sweep(&cfg)?;
    for r in &records {
        eprintln!(
            "  {:6.2} dB  frames {:6}  ber {:.3e}  fer {:.3e}{}",
            r.snr_db,
            r.frames,
            r.ber,
            r.fer,
            if r.capped { "  (capped)" } else { "" }
        );
    }
    let fmt = format;
    emit_results(&records, &cfg, fmt, &out)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn run_validate(draws: usize) -> Result<()> {
    let results = validate::run_all(draws)?;
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {:<32} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += u32::from(!r.passed);
    }
    if failed > 0 {
        bail!("{failed} validation check(s) failed");
    }
    Ok(())
}

fn reproduce(args: ReproduceArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let curves: Vec<(String, SimConfig)> = match args.figure {
        2 => uncoded_floor_curves(&args)?,
        3 => coded_truncation_curves(&args)?,
        4 => bicm_id_curves(&args)?,
        other => bail!("unknown figure {other} (expected 2, 3 or 4)"),
    };
    for (name, cfg) in curves {
        let path = args.out.join(format!("{name}.csv"));
        eprintln!("running {name} ({} points)...", cfg.snr_db.len());
        let records = run_sweep(&cfg)?;
        emit_results(&records, &cfg, OutputFormat::Csv, &path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

/// Uncoded binary FSK, truncation lengths 5..50: the short series floor.
fn uncoded_floor_curves(args: &ReproduceArgs) -> Result<Vec<(String, SimConfig)>> {
    let (frames_max, stop) = if args.full { (5000, 60.0) } else { (100, 44.0) };
    [5u32, 15, 25, 50]
        .iter()
        .map(|&nt| {
            Ok((
                format!("uncoded-m2-nt{nt}"),
                SimConfig {
                    frame: FrameConfig::new(2, 2048, 2048)?,
                    n_t: nt,
                    mode: Mode::Uncoded,
                    code: None,
                    snr_db: snr_points(8.0, stop, 4.0)?,
                    iterations: 1,
                    errors_min: 100,
                    frames_max,
                    seed: args.seed,
                    workers: args.workers,
                },
            ))
        })
        .collect()
}

/// Coded quaternary FSK, BICM: short versus long series truncation.
fn coded_truncation_curves(args: &ReproduceArgs) -> Result<Vec<(String, SimConfig)>> {
    let (frames_max, step) = if args.full { (2000, 0.5) } else { (30, 2.0) };
    let code = LoadedCode::dvbs2()?;
    [10u32, 50]
        .iter()
        .map(|&nt| {
            Ok((
                format!("bicm-m4-dvbs2-nt{nt}"),
                SimConfig {
                    frame: FrameConfig::new(4, code.k, code.n)?,
                    n_t: nt,
                    mode: Mode::Bicm,
                    code: Some(CodeSourceSpec::Dvbs2ShortR12),
                    snr_db: snr_points(18.0, 32.0, step)?,
                    iterations: 30,
                    errors_min: 100,
                    frames_max,
                    seed: args.seed,
                    workers: args.workers,
                },
            ))
        })
        .collect()
}

/// BICM against BICM-ID at equal total decoder iterations, M = 4 and 8.
fn bicm_id_curves(args: &ReproduceArgs) -> Result<Vec<(String, SimConfig)>> {
    let (frames_max, step) = if args.full { (2000, 0.5) } else { (30, 2.0) };
    let code = LoadedCode::dvbs2()?;
    let mut out = Vec::new();
    for &m in &[4usize, 8] {
        for (mode, tag) in [(Mode::Bicm, "bicm"), (Mode::BicmId, "bicm-id")] {
            out.push((
                format!("{tag}-m{m}-dvbs2"),
                SimConfig {
                    frame: FrameConfig::new(m, code.k, code.n)?,
                    n_t: 50,
                    mode,
                    code: Some(CodeSourceSpec::Dvbs2ShortR12),
                    snr_db: snr_points(16.0, 32.0, step)?,
                    iterations: 30,
                    errors_min: 100,
                    frames_max,
                    seed: args.seed,
                    workers: args.workers,
                },
            ));
        }
    }
    Ok(out)
}

struct LoadedCode {
    k: usize,
    n: usize,
}

impl LoadedCode {
    fn dvbs2() -> Result<Self> {
        let c = anc_core::ldpc::LdpcCode::load(&CodeSourceSpec::Dvbs2ShortR12.to_source())?;
        Ok(LoadedCode { k: c.k(), n: c.n() })
    }
}
