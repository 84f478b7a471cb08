//! Detection and localization of non-Gaussian vibrations in phase-sensitive
//! OTDR backscattering traces with third-order cumulant statistics.
//!
//! Modules:
//!
//! * [`stats`]: moment-form cumulant estimators, SNR arithmetic, histograms
//! * [`synth`]: seeded synthetic sequences and trace matrices
//! * [`detect`]: detrending, per-point profiles, peak/SNR/resolution readouts
//! * [`io`]: binary trace files, profile CSV, JSON reports
//! * [`config`]: `key = value` simulation configs
//! * [`experiment`]: Monte Carlo presets that regenerate the simulation figures

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod detect;
pub mod error;
pub mod experiment;
pub mod io;
pub mod stats;
pub mod synth;

pub use detect::{DetectionReport, Detector, HocProfile, Method};
pub use error::{Error, Result};
pub use experiment::{ExperimentPreset, Preset};
pub use stats::{LagPair, Sequence};
pub use synth::{Provenance, SimConfig, SquareDrive, TraceMatrix};
