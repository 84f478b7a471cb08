use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("sequence is not centered (mean must be subtracted first)")]
    NotCentered,
    #[error("lag {lag} is not smaller than sequence length {len}")]
    LagTooLarge { lag: usize, len: usize },
    #[error("noise power must be positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("signal power is zero")]
    ZeroSignal,
    #[error("power must be non-negative, got {0}")]
    NegativePower(f64),
    #[error("mixed and noise-reference powers differ by more than 1% ({mixed} vs {noise})")]
    PowerMismatch { mixed: f64, noise: f64 },
    #[error("noise reference third cumulant {hoc:e} is below floor {floor:e}")]
    DegenerateNoiseReference { hoc: f64, floor: f64 },
    #[error("invalid histogram range: bins={bins}, lo={lo}, hi={hi}")]
    BadRange { bins: usize, lo: f64, hi: f64 },
    #[error("requested zero samples")]
    EmptyRequest,
    #[error("asymmetry interval [{lo}, {hi}) is not inside the truncation window")]
    BadInterval { lo: f64, hi: f64 },
    #[error("invalid square wave: {0}")]
    BadSquareWave(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("bad value for config key `{key}`: {value:?}")]
    BadValue { key: String, value: String },
    #[error("need at least 2 traces, got {0}")]
    TooFewTraces(usize),
    #[error("window {window} exceeds available traces {traces}")]
    WindowExceedsTraces { window: usize, traces: usize },
    #[error("invalid window: {0}")]
    BadWindow(String),
    #[error("traces are not detrended (column {column} has mean {mean:e})")]
    NotDetrended { column: usize, mean: f64 },
    #[error("profile has no detectable peak")]
    NoPeak,
    #[error("guard band {guard} leaves no background points")]
    BadGuard { guard: usize },
    #[error("profile background is identically zero")]
    ZeroBackground,
    #[error("no rising edge found left of index {peak}")]
    NoEdge { peak: usize },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("trace payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: u64, found: u64 },
    #[error("not a trace file (bad magic)")]
    NotATraceFile,
    #[error("unsupported trace file version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt trace header: {0}")]
    CorruptHeader(String),
    #[error("malformed CSV at line {line}: {reason}")]
    BadCsv { line: usize, reason: String },
    #[error("unknown experiment preset `{0}`")]
    UnknownPreset(String),
    #[error("unknown detection method `{0}`")]
    UnknownMethod(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
