//! Monte Carlo experiment harness: end-to-end trials, SNR sweeps,
//! aggregation and machine-readable output.
//!
//! Reproducibility contract: (master seed, config) determines every
//! emitted counter exactly, independent of worker count. Frames are
//! processed in fixed-size batches and reduced in frame order, and the
//! stopping rule is evaluated only at batch boundaries, so scheduling
//! cannot influence which frames contribute.

use crate::channel::{bc_phase, ma_phase, relay_scale_factor, ChannelParams};
use crate::demod::{DemodConfig, Demodulator};
use crate::error::{Error, Result};
use crate::ldpc::{CheckRule, CodeSource, Decoder, LdpcCode};
use crate::modem::{hard_decision, map_bits_to_tones, FrameConfig, Interleaver};
use crate::rng::{frame_rng, run_rng, Stream};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Frames per scheduling batch; the stopping rule is checked only after
/// whole batches so results do not depend on the worker count.
const BATCH: u64 = 32;

/// Receiver operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Uncoded,
    Bicm,
    BicmId,
}

/// Complete description of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub frame: FrameConfig,
    /// Series truncation length for the demodulator.
    pub n_t: u32,
    pub mode: Mode,
    /// Channel code; required for the coded modes.
    pub code: Option<CodeSourceSpec>,
    /// Per-link Eb/N0 points in dB, E1 = E2 = E_R = 1.
    pub snr_db: Vec<f64>,
    /// Decoder iterations (total, both modes).
    pub iterations: usize,
    /// Minimum bit errors per point before stopping early.
    pub errors_min: u64,
    /// Hard cap on frames per point.
    pub frames_max: u64,
    pub seed: u64,
    pub workers: usize,
}

/// Serializable mirror of [`CodeSource`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeSourceSpec {
    Alist(String),
    Dvbs2ShortR12,
}

impl CodeSourceSpec {
    pub fn to_source(&self) -> CodeSource {
        match self {
            CodeSourceSpec::Alist(p) => CodeSource::Alist(p.into()),
            CodeSourceSpec::Dvbs2ShortR12 => CodeSource::Dvbs2ShortR12,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("no SNR points".into()));
        }
        if self.mode != Mode::Uncoded && self.code.is_none() {
            return Err(Error::Config("coded mode requires a code".into()));
        }
        if self.mode == Mode::Uncoded && self.frame.k != self.frame.l {
            return Err(Error::Config(format!(
                "uncoded mode requires K = L, got {} / {}",
                self.frame.k, self.frame.l
            )));
        }
        if self.frames_max == 0 || self.workers == 0 || self.iterations == 0 {
            return Err(Error::Config(
                "frames_max, workers and iterations must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Converts a per-link Eb/N0 point to the swept noise density:
    /// Eb/N0 = 1 / (mu r_S N0) with unit symbol energies.
    pub fn n0_at(&self, snr_db: f64) -> f64 {
        let ebn0 = 10f64.powf(snr_db / 10.0);
        1.0 / (self.frame.mu() as f64 * self.frame.rate() * ebn0)
    }
}

/// Aggregated result for one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub frame_errors: u64,
    pub fer: f64,
    pub seed: u64,
    pub config_hash: String,
    /// True when the frame cap stopped the point before `errors_min`
    /// bit errors accumulated.
    pub capped: bool,
    /// Wall time in seconds; excluded from CSV so that output bytes
    /// depend only on (seed, config).
    pub wall_time_s: f64,
}

/// Error counters from a single frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub bits: u64,
    pub frame_error: bool,
}

/// Immutable per-point context shared by all frames of one SNR point.
struct PointContext {
    cfg: SimConfig,
    p: ChannelParams,
    demod: Demodulator,
    code: Option<LdpcCode>,
    il: Interleaver,
    point: usize,
}

impl PointContext {
    fn new(cfg: &SimConfig, point: usize) -> Result<Self> {
        cfg.validate()?;
        let code = cfg
            .code
            .as_ref()
            .map(|s| LdpcCode::load(&s.to_source()))
            .transpose()?;
        if let Some(code) = &code {
            if code.n() != cfg.frame.l || code.k() != cfg.frame.k {
                return Err(Error::Config(format!(
                    "code dimensions {}/{} disagree with frame {}/{}",
                    code.k(),
                    code.n(),
                    cfg.frame.k,
                    cfg.frame.l
                )));
            }
        }
        let n0 = cfg.n0_at(cfg.snr_db[point]);
        let p = ChannelParams::unit_energy(n0, cfg.frame.m)?;
        let demod = Demodulator::new(
            DemodConfig {
                m: cfg.frame.m,
                n_t: cfg.n_t,
                use_feedback: cfg.mode == Mode::BicmId,
            },
            cfg.frame,
            p,
        )?;
        let il = Interleaver::random(
            cfg.frame.l,
            cfg.seed,
            &mut run_rng(cfg.seed, Stream::Interleaver),
        );
        Ok(Self {
            cfg: cfg.clone(),
            p,
            demod,
            code,
            il,
            point,
        })
    }

    /// One end-to-end frame: node 1 recovers u2. By symmetry of the model
    /// (E1 = E2) the opposite direction has identical statistics.
    fn run_frame(&self, frame: usize) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let fr = |s| frame_rng(cfg.seed, self.point, frame, s);
        let draw_bits = |stream, n: usize| -> Vec<u8> {
            let mut rng = fr(stream);
            (0..n).map(|_| rng.gen_range(0..2u8)).collect()
        };

        // both nodes transmit; only u2's recovery is scored
        let (c1, u2, c2) = match &self.code {
            Some(code) => {
                let u1 = draw_bits(Stream::DataNode1, cfg.frame.k);
                let u2 = draw_bits(Stream::DataNode2, cfg.frame.k);
                let c1 = self.il.interleave(&code.encode(&u1)?)?;
                let c2 = self.il.interleave(&code.encode(&u2)?)?;
                (c1, u2, c2)
            }
            None => {
                let c1 = draw_bits(Stream::DataNode1, cfg.frame.l);
                let u2 = draw_bits(Stream::DataNode2, cfg.frame.l);
                let c2 = u2.clone();
                (c1, u2, c2)
            }
        };
        let x1 = map_bits_to_tones(&c1, &cfg.frame)?;
        let x2 = map_bits_to_tones(&c2, &cfg.frame)?;

        let mut y_r = ma_phase(
            &x1,
            &x2,
            &self.p,
            &mut fr(Stream::Fading1ToRelay),
            &mut fr(Stream::Fading2ToRelay),
            &mut fr(Stream::NoiseRelay),
        )?;
        y_r.scale(relay_scale_factor(&self.p));
        let y = bc_phase(
            &y_r,
            &self.p,
            &mut fr(Stream::FadingRelayToNode),
            &mut fr(Stream::NoiseNode),
        )?;

        let decided: Vec<u8> = match (&self.code, cfg.mode) {
            (None, _) => {
                let z = self.demod.demodulate_frame(&y, &x1, None)?;
                hard_decision(&z)
            }
            (Some(code), _) => {
                let decoder = Decoder::new(code, CheckRule::SumProduct);
                self.demod
                    .bicm_id_receive(&y, &x1, code, &decoder, &self.il, cfg.iterations, true)?
                    .info_bits
            }
        };
        let bit_errors = decided.iter().zip(&u2).filter(|(a, b)| a != b).count() as u64;
        Ok(TrialOutcome {
            bit_errors,
            bits: u2.len() as u64,
            frame_error: bit_errors > 0,
        })
    }
}

/// Runs a single frame of one SNR point; deterministic in
/// (config, point, frame).
pub fn run_trial(cfg: &SimConfig, point: usize, frame: usize) -> Result<TrialOutcome> {
    PointContext::new(cfg, point)?.run_frame(frame)
}

/// Runs the full sweep. Results are bit-exact for a given (seed, config)
/// regardless of `workers`.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let hash = config_hash(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut records = Vec::with_capacity(cfg.snr_db.len());
    for point in 0..cfg.snr_db.len() {
        let started = Instant::now();
        let ctx = PointContext::new(cfg, point)?;
        let mut frames = 0u64;
        let mut bits = 0u64;
        let mut bit_errors = 0u64;
        let mut frame_errors = 0u64;
        while frames < cfg.frames_max {
            let batch = BATCH.min(cfg.frames_max - frames);
            let outcomes: Vec<TrialOutcome> = pool.install(|| {
                use rayon::prelude::*;
                (frames..frames + batch)
                    .into_par_iter()
                    .map(|f| ctx.run_frame(f as usize))
                    .collect::<Result<_>>()
            })?;
            for o in outcomes {
                frames += 1;
                bits += o.bits;
                bit_errors += o.bit_errors;
                frame_errors += u64::from(o.frame_error);
            }
            if bit_errors >= cfg.errors_min {
                break;
            }
        }
        records.push(BerRecord {
            snr_db: cfg.snr_db[point],
            frames,
            bit_errors,
            ber: bit_errors as f64 / bits as f64,
            frame_errors,
            fer: frame_errors as f64 / frames as f64,
            seed: cfg.seed,
            config_hash: hash.clone(),
            capped: bit_errors < cfg.errors_min,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(records)
}

/// Stable fingerprint of a configuration (first 16 hex digits of the
/// SHA-256 of its canonical JSON form).
pub fn config_hash(cfg: &SimConfig) -> String {
    // worker count cannot change results, so it is not part of the identity
    let mut canonical = cfg.clone();
    canonical.workers = 0;
    let json = serde_json::to_string(&canonical).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Output container for JSON emission; CSV carries the same per-record
/// fields minus wall time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SimConfig,
    pub config_hash: String,
    pub records: Vec<BerRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str =
    "snr_db,frames,bit_errors,ber,frame_errors,fer,seed,config_hash,capped";

/// Renders records to CSV text (deterministic bytes for fixed inputs).
pub fn to_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.snr_db,
            r.frames,
            r.bit_errors,
            r.ber,
            r.frame_errors,
            r.fer,
            r.seed,
            r.config_hash,
            r.capped
        ));
    }
    out
}

/// Writes records to `path` in the requested format.
pub fn emit_results(
    records: &[BerRecord],
    cfg: &SimConfig,
    format: OutputFormat,
    path: &Path,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => {
            let report = SweepReport {
                config: cfg.clone(),
                config_hash: config_hash(cfg),
                records: records.to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(format!("serialize: {e}")))?;
            s.push('\n');
            s
        }
    };
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uncoded_cfg() -> SimConfig {
        SimConfig {
            frame: FrameConfig::new(2, 256, 256).unwrap(),
            n_t: 15,
            mode: Mode::Uncoded,
            code: None,
            snr_db: vec![8.0, 14.0],
            iterations: 1,
            errors_min: 50,
            frames_max: 8,
            seed: 1234,
            workers: 1,
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = uncoded_cfg();
        let a = run_trial(&cfg, 0, 3).unwrap();
        let b = run_trial(&cfg, 0, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits, 256);
        // at 8 dB uncoded the link is error-prone, and distinct frames
        // should not all repeat the same error count
        let counts: Vec<u64> = (0..6)
            .map(|f| run_trial(&cfg, 0, f).unwrap().bit_errors)
            .collect();
        assert!(counts.iter().any(|&c| c != counts[0]));
    }

    #[test]
    fn high_snr_drives_errors_down() {
        // SNR must stay inside the truncation-converged region
        // (|y|^2 / N0 comparable to N_t or below the saturation knee);
        // far beyond it the truncated series stops discriminating.
        let mut cfg = uncoded_cfg();
        cfg.n_t = 50;
        cfg.snr_db = vec![8.0, 40.0];
        let errs = |point| -> u64 {
            (0..4)
                .map(|f| run_trial(&cfg, point, f).unwrap().bit_errors)
                .sum()
        };
        let low = errs(0);
        let high = errs(1);
        // 1024 bits per point: ~35% raw at 8 dB, under 2% at 40 dB
        assert!(low > 200, "low-SNR errors: {low}");
        assert!(high < 30, "high-SNR errors: {high}");
    }

    #[test]
    fn sweep_independent_of_worker_count() {
        let mut a_cfg = uncoded_cfg();
        a_cfg.frames_max = 40; // exercises a partial final batch
        let mut b_cfg = a_cfg.clone();
        b_cfg.workers = 8;
        let a = run_sweep(&a_cfg).unwrap();
        let b = run_sweep(&b_cfg).unwrap();
        assert_eq!(to_csv(&a), to_csv(&b));
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.frames, x.bit_errors, x.frame_errors), (y.frames, y.bit_errors, y.frame_errors));
        }
    }

    #[test]
    fn stopping_rule_and_capped_flag() {
        let mut cfg = uncoded_cfg();
        cfg.snr_db = vec![0.0]; // very noisy: errors_min reached in one batch
        cfg.errors_min = 10;
        cfg.frames_max = 1000;
        let r = &run_sweep(&cfg).unwrap()[0];
        assert!(r.bit_errors >= 10);
        assert!(!r.capped);
        assert!(r.frames < 1000);
        assert_eq!(r.frames % BATCH, 0);

        cfg.errors_min = u64::MAX; // unreachable: the cap must trigger
        cfg.frames_max = 64;
        let r = &run_sweep(&cfg).unwrap()[0];
        assert!(r.capped);
        assert_eq!(r.frames, 64);
    }

    #[test]
    fn ber_recomputable_from_counters() {
        let mut cfg = uncoded_cfg();
        cfg.snr_db = vec![6.0];
        cfg.frames_max = 4;
        let r = &run_sweep(&cfg).unwrap()[0];
        assert!((r.ber - r.bit_errors as f64 / (r.frames * 256) as f64).abs() < 1e-15);
        assert!((r.fer - r.frame_errors as f64 / r.frames as f64).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let mut cfg = uncoded_cfg();
        cfg.frames_max = 4;
        let records = run_sweep(&cfg).unwrap();
        let text = to_csv(&records);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for (line, r) in lines.zip(&records) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 9);
            assert_eq!(cols[0].parse::<f64>().unwrap(), r.snr_db);
            assert_eq!(cols[1].parse::<u64>().unwrap(), r.frames);
            assert_eq!(cols[2].parse::<u64>().unwrap(), r.bit_errors);
            assert!((cols[3].parse::<f64>().unwrap() - r.ber).abs() < 1e-9);
            assert_eq!(cols[7], r.config_hash);
            assert_eq!(cols[8].parse::<bool>().unwrap(), r.capped);
        }
        // empty input: header only
        assert_eq!(to_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn json_round_trip_and_hash_sensitivity() {
        let mut cfg = uncoded_cfg();
        cfg.frames_max = 2;
        let records = run_sweep(&cfg).unwrap();
        let dir = std::env::temp_dir().join("anc_sim_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        emit_results(&records, &cfg, OutputFormat::Json, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let report: SweepReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.records, records);
        assert_eq!(report.config, cfg);
        assert_eq!(report.config_hash, config_hash(&cfg));

        let mut other = cfg.clone();
        other.n_t = 16;
        assert_ne!(config_hash(&cfg), config_hash(&other));
        assert_eq!(config_hash(&cfg), config_hash(&cfg.clone()));
    }

    #[test]
    fn validation_rejects_inconsistent_configs() {
        let mut cfg = uncoded_cfg();
        cfg.snr_db.clear();
        assert!(run_sweep(&cfg).is_err());

        let mut cfg = uncoded_cfg();
        cfg.mode = Mode::Bicm;
        assert!(cfg.validate().is_err()); // coded mode without a code

        let mut cfg = uncoded_cfg();
        cfg.frame = FrameConfig::new(2, 100, 256).unwrap();
        assert!(cfg.validate().is_err()); // uncoded needs K = L
    }

    #[test]
    fn coded_sweep_runs_end_to_end() {
        let cfg = SimConfig {
            frame: FrameConfig::new(2, 1000, 2000).unwrap(),
            n_t: 15,
            mode: Mode::Bicm,
            code: Some(CodeSourceSpec::Alist(
                concat!(env!("CARGO_MANIFEST_DIR"), "/data/reg36_n2000.alist").into(),
            )),
            snr_db: vec![33.0],
            iterations: 30,
            errors_min: 1,
            frames_max: 2,
            seed: 99,
            workers: 1,
        };
        let r = &run_sweep(&cfg).unwrap()[0];
        // high SNR: the coded link is clean
        assert_eq!(r.bit_errors, 0);
        assert!(r.capped);
    }
}
