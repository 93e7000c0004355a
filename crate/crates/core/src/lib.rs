//! Link-level library for the analog network coded two-way relay channel
//! with noncoherent M-FSK.
//!
//! The receiver chain implements a closed-form noncoherent symbol
//! likelihood for the double-Rayleigh broadcast hop, a soft mapper feeding
//! per-bit LLRs to an LDPC decoder, and the BICM / BICM-ID iteration
//! between them. A Monte Carlo harness sweeps SNR and emits machine
//! readable error-rate records.

pub mod channel;
pub mod demod;
mod error;
pub mod ldpc;
pub mod modem;
pub mod numerics;
pub mod rng;
pub mod sim;
pub mod validate;

pub use error::{Error, Result};
