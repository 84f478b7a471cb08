//! Shared fixtures for the criterion benches.

use hocdvs_core::{synth::synth_traces, SimConfig, TraceMatrix};

/// Full-size trace matrix (100 x 1500) for seed 0.
pub fn full_scale_traces() -> TraceMatrix {
    synth_traces(&SimConfig::full_scale()).expect("full-size config is valid")
}
