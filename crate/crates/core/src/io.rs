//! Trace files, profile CSVs and JSON detection reports.
//!
//! Trace file layout (all little-endian):
//!
//! | offset | size | field            |
//! |-------:|-----:|------------------|
//! | 0      | 8    | magic `HOCDVS01` |
//! | 8      | 4    | version (u32)    |
//! | 12     | 4    | num_traces (u32) |
//! | 16     | 4    | fiber_points (u32) |
//! | 20     | 8    | meters_per_point (f64) |
//! | 28     | 8    | trace_rate_hz (f64) |
//! | 36     | 1    | provenance (u8)  |
//! | 37     | 4·W·M | f32 amplitudes, trace-major |

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::{DetectionReport, HocProfile, Method};
use crate::error::{Error, Result};
use crate::synth::{Provenance, TraceMatrix};

pub const TRACE_MAGIC: [u8; 8] = *b"HOCDVS01";
pub const TRACE_VERSION: u32 = 1;
pub const TRACE_HEADER_LEN: usize = 37;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceFileHeader {
    pub version: u32,
    pub num_traces: u32,
    pub fiber_points: u32,
    pub meters_per_point: f64,
    pub trace_rate_hz: f64,
    pub provenance: Provenance,
}

impl TraceFileHeader {
    pub fn for_matrix(traces: &TraceMatrix) -> Result<Self> {
        let dim = |n: usize, what: &str| {
            u32::try_from(n).map_err(|_| Error::CorruptHeader(format!("{what} {n} exceeds u32")))
        };
        Ok(Self {
            version: TRACE_VERSION,
            num_traces: dim(traces.num_traces(), "num_traces")?,
            fiber_points: dim(traces.fiber_points(), "fiber_points")?,
            meters_per_point: traces.meters_per_point,
            trace_rate_hz: traces.trace_rate_hz,
            provenance: traces.provenance,
        })
    }

    pub fn payload_len(&self) -> u64 {
        4 * self.num_traces as u64 * self.fiber_points as u64
    }

    pub fn to_bytes(&self) -> [u8; TRACE_HEADER_LEN] {
        let mut out = [0u8; TRACE_HEADER_LEN];
        out[0..8].copy_from_slice(&TRACE_MAGIC);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        out[12..16].copy_from_slice(&self.num_traces.to_le_bytes());
        out[16..20].copy_from_slice(&self.fiber_points.to_le_bytes());
        out[20..28].copy_from_slice(&self.meters_per_point.to_le_bytes());
        out[28..36].copy_from_slice(&self.trace_rate_hz.to_le_bytes());
        out[36] = self.provenance as u8;
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let magic_len = bytes.len().min(TRACE_MAGIC.len());
        if bytes[..magic_len] != TRACE_MAGIC[..magic_len] {
            return Err(Error::NotATraceFile);
        }
        if bytes.len() < TRACE_HEADER_LEN {
            return Err(Error::TruncatedPayload {
                expected: TRACE_HEADER_LEN as u64,
                found: bytes.len() as u64,
            });
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != TRACE_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let header = Self {
            version,
            num_traces: u32_at(12),
            fiber_points: u32_at(16),
            meters_per_point: f64_at(20),
            trace_rate_hz: f64_at(28),
            provenance: Provenance::try_from(bytes[36])?,
        };
        if header.num_traces == 0 || header.fiber_points == 0 {
            return Err(Error::CorruptHeader(format!(
                "empty geometry {}x{}",
                header.num_traces, header.fiber_points
            )));
        }
        Ok(header)
    }
}

/// Serializes a trace matrix to any writer.
pub fn write_traces_to<W: Write>(mut out: W, traces: &TraceMatrix) -> std::io::Result<()> {
    let header = TraceFileHeader::for_matrix(traces)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    out.write_all(&header.to_bytes())?;
    for v in traces.amplitudes() {
        out.write_all(&(*v as f32).to_le_bytes())?;
    }
    out.flush()
}

pub fn write_traces(path: impl AsRef<Path>, traces: &TraceMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_traces_to(BufWriter::new(file), traces).map_err(|e| Error::io(path, e))
}

/// Parses a complete trace file image.
pub fn decode_traces(bytes: &[u8]) -> Result<TraceMatrix> {
    let header = TraceFileHeader::from_bytes(bytes)?;
    let found = (bytes.len() - TRACE_HEADER_LEN) as u64;
    let expected = header.payload_len();
    if found < expected {
        return Err(Error::TruncatedPayload { expected, found });
    }
    if found > expected {
        return Err(Error::CorruptHeader(format!(
            "header declares {expected} payload bytes but file holds {found}"
        )));
    }
    let amplitudes = bytes[TRACE_HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    TraceMatrix::new(
        header.num_traces as usize,
        header.fiber_points as usize,
        amplitudes,
        header.meters_per_point,
        header.trace_rate_hz,
        header.provenance,
    )
    .map_err(|e| Error::CorruptHeader(e.to_string()))
}

pub fn read_traces(path: impl AsRef<Path>) -> Result<TraceMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_traces(&bytes)
}

/// Writes `position_m,value` rows, values with 12 fractional digits in
/// scientific notation.
pub fn write_profile_csv_to<W: Write>(mut out: W, profile: &HocProfile) -> std::io::Result<()> {
    writeln!(out, "position_m,value")?;
    for (i, v) in profile.values.iter().enumerate() {
        writeln!(out, "{},{:.12e}", profile.position_m(i), v)?;
    }
    out.flush()
}

pub fn export_profile_csv(profile: &HocProfile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_profile_csv_to(BufWriter::new(file), profile).map_err(|e| Error::io(path, e))
}

/// Reads `(position_m, value)` pairs back from a profile CSV.
pub fn read_profile_csv_from<R: BufRead>(input: R) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::BadCsv {
            line: n + 1,
            reason: e.to_string(),
        })?;
        if n == 0 {
            if line.trim() != "position_m,value" {
                return Err(Error::BadCsv {
                    line: 1,
                    reason: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        let bad = |reason: &str| Error::BadCsv {
            line: n + 1,
            reason: reason.to_string(),
        };
        let (pos, val) = line.split_once(',').ok_or_else(|| bad("expected two columns"))?;
        let pos = pos.trim().parse().map_err(|_| bad("bad position"))?;
        let val = val.trim().parse().map_err(|_| bad("bad value"))?;
        rows.push((pos, val));
    }
    Ok(rows)
}

pub fn read_profile_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_profile_csv_from(BufReader::new(file))
}

/// JSON form of a detection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub method: Method,
    pub peak_index: usize,
    pub peak_position_m: f64,
    pub location_snr_db: f64,
    pub spatial_resolution_m: Option<f64>,
    pub window: usize,
    pub config_digest: String,
}

impl ReportRecord {
    pub fn new(report: &DetectionReport, window: usize, config_digest: impl Into<String>) -> Self {
        Self {
            method: report.method,
            peak_index: report.peak_index,
            peak_position_m: report.peak_position_m,
            location_snr_db: report.location_snr_db,
            spatial_resolution_m: report.spatial_resolution_m,
            window,
            config_digest: config_digest.into(),
        }
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
