//! Command implementations behind the `hocdvs` binary.
//!
//! Each `cmd_*` function does the work and returns a core [`Error`] on
//! failure; [`exit_code`] maps errors onto the process exit-code contract:
//!
//! | code | meaning |
//! |-----:|---------|
//! | 0 | success |
//! | 1 | other failure |
//! | 2 | configuration or usage error |
//! | 3 | no detection |
//! | 4 | I/O or file-format error |

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hocdvs_core::io::{export_profile_csv, write_json, write_traces, ReportRecord};
use hocdvs_core::synth::synth_traces;
use hocdvs_core::{Detector, Error, ExperimentPreset, Method, Preset, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_DETECTION: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BadConfig(_)
        | Error::MissingKey(_)
        | Error::UnknownKey(_)
        | Error::BadValue { .. }
        | Error::UnknownPreset(_)
        | Error::UnknownMethod(_) => EXIT_CONFIG,
        Error::NoPeak => EXIT_NO_DETECTION,
        Error::Io { .. }
        | Error::TruncatedPayload { .. }
        | Error::NotATraceFile
        | Error::UnsupportedVersion(_)
        | Error::CorruptHeader(_)
        | Error::BadCsv { .. }
        | Error::Json(_) => EXIT_IO,
        _ => EXIT_FAILURE,
    }
}

/// Default location-SNR floor below which `analyze` reports no detection.
/// Calibrated on full-size noise-only traces (see README).
pub fn default_min_snr_db(method: Method) -> f64 {
    match method {
        Method::Hoc => 20.0,
        Method::MovingDifferential => 3.0,
        Method::MovingAverage => 8.0,
    }
}

/// Parses `a..b` (half-open) or `a..=b` (inclusive).
pub fn parse_seed_range(s: &str) -> Result<Range<u64>, Error> {
    let bad = || Error::BadValue {
        key: "seeds".into(),
        value: s.to_string(),
    };
    let (lo, hi, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        return Err(bad());
    };
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    let end = if inclusive { hi.checked_add(1).ok_or_else(bad)? } else { hi };
    if end <= lo {
        return Err(bad());
    }
    Ok(lo..end)
}

fn parse_override(s: &str) -> Result<(String, String), Error> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::BadValue {
        key: "set".into(),
        value: s.to_string(),
    })?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Summary printed by `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutcome {
    pub config_digest: String,
    pub seed: u64,
}

pub fn cmd_simulate(config_path: &Path, out_path: &Path) -> Result<SimulateOutcome, Error> {
    let cfg = SimConfig::load(config_path)?;
    let traces = synth_traces(&cfg)?;
    write_traces(out_path, &traces)?;
    Ok(SimulateOutcome {
        config_digest: cfg.digest(),
        seed: cfg.seed,
    })
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub method: Method,
    pub window: usize,
    pub pulse_width_points: usize,
    pub avg_len: usize,
    /// `None` uses [`default_min_snr_db`].
    pub min_snr_db: Option<f64>,
}

impl AnalyzeOptions {
    pub fn new(method: Method, window: usize) -> Self {
        Self {
            method,
            window,
            pulse_width_points: 10,
            avg_len: 5,
            min_snr_db: None,
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    #[serde(flatten)]
    pub record: ReportRecord,
    pub min_snr_db: f64,
    pub detected: bool,
}

pub const PROFILE_FILE: &str = "profile.csv";
pub const REPORT_FILE: &str = "report.json";

fn analysis_digest(trace_bytes: &[u8], opts: &AnalyzeOptions) -> String {
    let mut h = Sha256::new();
    h.update(trace_bytes);
    h.update(
        format!(
            "\nmethod = {}\nwindow = {}\npulse_width_points = {}\navg_len = {}\n",
            opts.method.as_str(),
            opts.window,
            opts.pulse_width_points,
            opts.avg_len
        )
        .as_bytes(),
    );
    hex::encode(&h.finalize()[..8])
}

/// Writes `profile.csv` and `report.json` into `out_dir`. A report below
/// the SNR floor is still written; the caller sees `detected == false`.
pub fn cmd_analyze(
    trace_path: &Path,
    opts: &AnalyzeOptions,
    out_dir: &Path,
) -> Result<AnalyzeReport, Error> {
    let bytes = fs::read(trace_path).map_err(|e| Error::Io {
        path: trace_path.to_path_buf(),
        source: e,
    })?;
    let traces = hocdvs_core::io::decode_traces(&bytes)?;
    let detector = Detector {
        method: opts.method,
        window: opts.window,
        avg_len: opts.avg_len,
        pulse_width_points: opts.pulse_width_points,
    };
    let profile = detector.profile(&traces)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    export_profile_csv(&profile, out_dir.join(PROFILE_FILE))?;
    let report = detector.report(&profile)?;
    let min_snr_db = opts.min_snr_db.unwrap_or_else(|| default_min_snr_db(opts.method));
    let out = AnalyzeReport {
        record: ReportRecord::new(&report, opts.window, analysis_digest(&bytes, opts)),
        min_snr_db,
        detected: report.location_snr_db >= min_snr_db,
    };
    write_json(out_dir.join(REPORT_FILE), &out)?;
    Ok(out)
}

pub fn cmd_experiment(
    preset: Preset,
    overrides: Vec<(String, String)>,
    seeds: Option<Range<u64>>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, Error> {
    let exp = ExperimentPreset::with_overrides(preset, overrides)?;
    exp.run(seeds.unwrap_or_else(|| preset.default_seeds()), out_dir)
}

#[derive(Debug, Parser)]
#[command(name = "hocdvs", version, about = "Third-order-cumulant vibration detection for phase-OTDR traces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a trace file from a key = value config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a detection profile and report for a trace file.
    Analyze {
        #[arg(long)]
        traces: PathBuf,
        /// hoc | mdiff | mavg (long names also accepted)
        #[arg(long, default_value = "hoc")]
        method: String,
        #[arg(long, default_value_t = hocdvs_core::detect::DEFAULT_WINDOW)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        pulse_width: usize,
        /// Block length for the moving-average method.
        #[arg(long, default_value_t = 5)]
        avg_len: usize,
        /// Location-SNR floor for a detection (dB).
        #[arg(long, allow_negative_numbers = true)]
        min_snr_db: Option<f64>,
    },
    /// Regenerate a figure data set.
    Experiment {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        /// Seed range, `a..b` or `a..=b`.
        #[arg(long)]
        seeds: Option<String>,
        /// Config override, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

fn dispatch(command: Command) -> Result<i32, Error> {
    match command {
        Command::Simulate { config, out } => {
            let o = cmd_simulate(&config, &out)?;
            println!("config_digest {}", o.config_digest);
            println!("seed {}", o.seed);
            Ok(EXIT_OK)
        }
        Command::Analyze {
            traces,
            method,
            window,
            out,
            pulse_width,
            avg_len,
            min_snr_db,
        } => {
            let opts = AnalyzeOptions {
                method: method.parse()?,
                window,
                pulse_width_points: pulse_width,
                avg_len,
                min_snr_db,
            };
            let r = cmd_analyze(&traces, &opts, &out)?;
            println!(
                "peak {} m (index {}), location SNR {:.2} dB",
                r.record.peak_position_m, r.record.peak_index, r.record.location_snr_db
            );
            if r.detected {
                Ok(EXIT_OK)
            } else {
                eprintln!("no detection: location SNR below {} dB", r.min_snr_db);
                Ok(EXIT_NO_DETECTION)
            }
        }
        Command::Experiment {
            preset,
            out,
            seeds,
            overrides,
        } => {
            let preset: Preset = preset.parse()?;
            let seeds = seeds.as_deref().map(parse_seed_range).transpose()?;
            let overrides = overrides
                .iter()
                .map(|s| parse_override(s))
                .collect::<Result<Vec<_>, _>>()?;
            for path in cmd_experiment(preset, overrides, seeds, &out)? {
                println!("{}", path.display());
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_seed_range("0..50").unwrap(), 0..50);
        assert_eq!(parse_seed_range("3..=5").unwrap(), 3..6);
        assert!(parse_seed_range("5..5").is_err());
        assert!(parse_seed_range("a..b").is_err());
        assert!(parse_seed_range("7").is_err());
    }

    #[test]
    fn exit_codes_follow_contract() {
        assert_eq!(exit_code(&Error::MissingKey("seed".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::UnknownPreset("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::NoPeak), EXIT_NO_DETECTION);
        assert_eq!(exit_code(&Error::NotATraceFile), EXIT_IO);
        assert_eq!(exit_code(&Error::ZeroSignal), EXIT_FAILURE);
    }

    #[test]
    fn overrides_split_on_first_equals() {
        assert_eq!(
            parse_override("noise_sigma = 0.2").unwrap(),
            ("noise_sigma".to_string(), "0.2".to_string())
        );
        assert!(parse_override("noise_sigma").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
