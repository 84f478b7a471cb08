//! Vibration localization from a stack of backscattering traces.
//!
//! The cumulant detector removes the across-trace mean at every fiber
//! point and then takes the mean cube of the residuals over a window of
//! consecutive traces. Gaussian noise (additive or polarization-induced)
//! averages towards zero, while an asymmetric drive leaves a peak at the
//! disturbed point. The moving-differential and moving-average profiles
//! are the classical baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::TraceMatrix;

/// Default number of consecutive traces per profile.
pub const DEFAULT_WINDOW: usize = 100;

/// Background for the location SNR excludes this many pulse widths on
/// each side of the peak.
pub const GUARD_PULSE_WIDTHS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Hoc,
    MovingDifferential,
    MovingAverage,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Hoc, Method::MovingDifferential, Method::MovingAverage];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Hoc => "hoc",
            Method::MovingDifferential => "moving_differential",
            Method::MovingAverage => "moving_average",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hoc" => Ok(Method::Hoc),
            "mdiff" | "moving_differential" => Ok(Method::MovingDifferential),
            "mavg" | "moving_average" => Ok(Method::MovingAverage),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// One detection statistic per fiber point.
#[derive(Debug, Clone, PartialEq)]
pub struct HocProfile {
    pub values: Vec<f64>,
    /// Traces used.
    pub window: usize,
    pub meters_per_point: f64,
    pub method: Method,
}

impl HocProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position_m(&self, index: usize) -> f64 {
        index as f64 * self.meters_per_point
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub method: Method,
    pub peak_index: usize,
    pub peak_position_m: f64,
    pub location_snr_db: f64,
    pub spatial_resolution_m: Option<f64>,
}

/// Subtracts the across-trace mean at every fiber point.
pub fn detrend(traces: &TraceMatrix) -> Result<TraceMatrix> {
    let w = traces.num_traces();
    if w < 2 {
        return Err(Error::TooFewTraces(w));
    }
    let mean = column_means(traces, w);
    let mut residuals: Vec<f64> = traces
        .traces()
        .flat_map(|row| row.iter().zip(&mean).map(|(x, m)| x - m))
        .collect();
    // second pass removes the rounding residue of the first
    let m = traces.fiber_points();
    let mut residue = vec![0.0; m];
    for row in residuals.chunks_exact(m) {
        residue.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
    }
    residue.iter_mut().for_each(|r| *r /= w as f64);
    if residue.iter().any(|r| *r != 0.0) {
        for row in residuals.chunks_exact_mut(m) {
            row.iter_mut().zip(&residue).for_each(|(v, r)| *v -= r);
        }
    }
    Ok(traces.with_amplitudes(residuals))
}

fn column_means(traces: &TraceMatrix, rows: usize) -> Vec<f64> {
    let mut sums = vec![0.0; traces.fiber_points()];
    for row in traces.traces().take(rows) {
        sums.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
    }
    sums.iter_mut().for_each(|s| *s /= rows as f64);
    sums
}

fn check_window(traces: &TraceMatrix, window: usize) -> Result<()> {
    if window < 2 {
        return Err(Error::BadWindow(format!("window {window} must be >= 2")));
    }
    if window > traces.num_traces() {
        return Err(Error::WindowExceedsTraces {
            window,
            traces: traces.num_traces(),
        });
    }
    Ok(())
}

/// Per-point zero-lag third cumulant over the first `window` residuals.
///
/// Input must already be detrended: every column mean within
/// `1e-9 * max(1, max|column|)` of zero.
pub fn hoc_profile(traces: &TraceMatrix, window: usize) -> Result<HocProfile> {
    check_window(traces, window)?;
    let means = column_means(traces, traces.num_traces());
    for (column, mean) in means.iter().enumerate() {
        let scale = traces
            .traces()
            .fold(1.0_f64, |acc, row| acc.max(row[column].abs()));
        if mean.abs() > 1e-9 * scale {
            return Err(Error::NotDetrended {
                column,
                mean: *mean,
            });
        }
    }
    let mut cubes = vec![0.0; traces.fiber_points()];
    for row in traces.traces().take(window) {
        cubes.iter_mut().zip(row).for_each(|(acc, v)| *acc += v * v * v);
    }
    cubes.iter_mut().for_each(|c| *c /= window as f64);
    Ok(HocProfile {
        values: cubes,
        window,
        meters_per_point: traces.meters_per_point,
        method: Method::Hoc,
    })
}

fn mean_abs_successive_diff<'a>(rows: impl Iterator<Item = &'a [f64]>, width: usize) -> Vec<f64> {
    let mut acc = vec![0.0; width];
    let mut prev: Option<&[f64]> = None;
    let mut pairs = 0usize;
    for row in rows {
        if let Some(p) = prev {
            acc.iter_mut()
                .zip(row.iter().zip(p))
                .for_each(|(a, (x, y))| *a += (x - y).abs());
            pairs += 1;
        }
        prev = Some(row);
    }
    acc.iter_mut().for_each(|a| *a /= pairs as f64);
    acc
}

/// Mean absolute difference between consecutive traces at each point.
pub fn moving_differential_profile(traces: &TraceMatrix, window: usize) -> Result<HocProfile> {
    check_window(traces, window)?;
    Ok(HocProfile {
        values: mean_abs_successive_diff(traces.traces().take(window), traces.fiber_points()),
        window,
        meters_per_point: traces.meters_per_point,
        method: Method::MovingDifferential,
    })
}

/// Averages non-overlapping blocks of `avg_len` traces, then takes the
/// moving differential of the block means.
pub fn moving_average_profile(
    traces: &TraceMatrix,
    window: usize,
    avg_len: usize,
) -> Result<HocProfile> {
    check_window(traces, window)?;
    if avg_len == 0 || avg_len > window {
        return Err(Error::BadWindow(format!(
            "avg_len {avg_len} must be in 1..={window}"
        )));
    }
    let blocks = window / avg_len;
    if blocks < 2 {
        return Err(Error::BadWindow(format!(
            "window {window} holds fewer than two blocks of {avg_len}"
        )));
    }
    let m = traces.fiber_points();
    let mut means = vec![0.0; blocks * m];
    for (b, block) in means.chunks_exact_mut(m).enumerate() {
        for row in traces.traces().skip(b * avg_len).take(avg_len) {
            block.iter_mut().zip(row).for_each(|(acc, v)| *acc += v);
        }
        block.iter_mut().for_each(|v| *v /= avg_len as f64);
    }
    Ok(HocProfile {
        values: mean_abs_successive_diff(means.chunks_exact(m), m),
        window,
        meters_per_point: traces.meters_per_point,
        method: Method::MovingAverage,
    })
}

/// Index and position of the largest `|value|`; ties go to the lowest index.
pub fn locate_peak(profile: &HocProfile) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in profile.values.iter().enumerate() {
        let a = v.abs();
        if a.is_finite() && a > best.map_or(0.0, |(_, b)| b) {
            best = Some((i, a));
        }
    }
    let (index, _) = best.ok_or(Error::NoPeak)?;
    Ok((index, profile.position_m(index)))
}

/// `10 log10(v[peak]^2 / mean(v[m]^2 : |m - peak| > guard))`.
pub fn location_snr(profile: &HocProfile, peak: usize, guard: usize) -> Result<f64> {
    let peak_value = *profile.values.get(peak).ok_or(Error::NoPeak)?;
    let (sum, count) = profile
        .values
        .iter()
        .enumerate()
        .filter(|(m, _)| m.abs_diff(peak) > guard)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v * v, c + 1));
    if count == 0 {
        return Err(Error::BadGuard { guard });
    }
    let background = sum / count as f64;
    if background == 0.0 {
        return Err(Error::ZeroBackground);
    }
    if peak_value == 0.0 {
        return Err(Error::NoPeak);
    }
    Ok(10.0 * (peak_value * peak_value / background).log10())
}

/// 10%-to-90% rise distance (meters) on the left flank of `peak`.
///
/// Levels are taken between the peak magnitude and the local background,
/// the mean `|value|` over the pulse width just beyond the search span
/// (or the span minimum when the profile starts too close). Crossings are
/// linearly interpolated, searching at most three pulse widths left.
pub fn spatial_resolution(
    profile: &HocProfile,
    peak: usize,
    pulse_width_points: usize,
) -> Result<f64> {
    if pulse_width_points == 0 {
        return Err(Error::BadWindow("pulse width must be >= 1".into()));
    }
    let mags: Vec<f64> = profile.values.iter().map(|v| v.abs()).collect();
    let top = *mags.get(peak).ok_or(Error::NoPeak)?;
    let span = 3 * pulse_width_points;
    let lo = peak.saturating_sub(span);
    let bg_start = peak.saturating_sub(span + pulse_width_points);
    let background = if lo > bg_start {
        mags[bg_start..lo].iter().sum::<f64>() / (lo - bg_start) as f64
    } else {
        mags[lo..=peak].iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let amplitude = top - background;
    if !(amplitude > 0.0) {
        return Err(Error::NoEdge { peak });
    }
    let crossing = |level: f64| -> Result<f64> {
        (lo..peak)
            .rev()
            .find(|&j| mags[j] < level)
            .map(|j| j as f64 + (level - mags[j]) / (mags[j + 1] - mags[j]))
            .ok_or(Error::NoEdge { peak })
    };
    let x90 = crossing(background + 0.9 * amplitude)?;
    let x10 = crossing(background + 0.1 * amplitude)?;
    Ok((x90 - x10) * profile.meters_per_point)
}

/// Full localization pipeline for one trace matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    pub method: Method,
    pub window: usize,
    /// Block length for [`Method::MovingAverage`].
    pub avg_len: usize,
    pub pulse_width_points: usize,
}

impl Detector {
    pub fn new(method: Method, pulse_width_points: usize) -> Self {
        Self {
            method,
            window: DEFAULT_WINDOW,
            avg_len: 5,
            pulse_width_points,
        }
    }

    pub fn with_window(self, window: usize) -> Self {
        Self { window, ..self }
    }

    pub fn profile(&self, traces: &TraceMatrix) -> Result<HocProfile> {
        match self.method {
            Method::Hoc => hoc_profile(&detrend(traces)?, self.window),
            Method::MovingDifferential => moving_differential_profile(traces, self.window),
            Method::MovingAverage => moving_average_profile(traces, self.window, self.avg_len),
        }
    }

    pub fn report(&self, profile: &HocProfile) -> Result<DetectionReport> {
        let (peak_index, peak_position_m) = locate_peak(profile)?;
        let guard = GUARD_PULSE_WIDTHS * self.pulse_width_points;
        Ok(DetectionReport {
            method: profile.method,
            peak_index,
            peak_position_m,
            location_snr_db: location_snr(profile, peak_index, guard)?,
            spatial_resolution_m: spatial_resolution(profile, peak_index, self.pulse_width_points)
                .ok(),
        })
    }

    pub fn analyze(&self, traces: &TraceMatrix) -> Result<(HocProfile, DetectionReport)> {
        let profile = self.profile(traces)?;
        let report = self.report(&profile)?;
        Ok((profile, report))
    }
}
