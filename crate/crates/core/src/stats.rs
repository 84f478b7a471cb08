//! Centered moments, third-order cumulant estimators, SNR arithmetic and
//! histograms.
//!
//! Every cumulant estimator here works in moment form: the third cumulant
//! of a zero-mean process equals its third moment, so the estimators only
//! accept [`Sequence`]s that have been centered. Centering is never done
//! silently; call [`center`] first.

use crate::error::{Error, Result};

/// A finite real-valued sample sequence, optionally known to be zero-mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    samples: Vec<f64>,
    centered: bool,
}

impl Sequence {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self {
            samples,
            centered: false,
        })
    }

    /// Wraps samples that the caller asserts are already zero-mean.
    ///
    /// The mean must be zero within `1e-12 * max(1, max|x|)`.
    pub fn from_centered(samples: Vec<f64>) -> Result<Self> {
        let seq = Self::new(samples)?;
        if seq.mean().abs() > centering_tolerance(&seq.samples) {
            return Err(Error::NotCentered);
        }
        Ok(Self {
            centered: true,
            ..seq
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; a `Sequence` holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Multiplies every sample by `a`. Zero mean is preserved.
    pub fn scaled(&self, a: f64) -> Sequence {
        Sequence {
            samples: self.samples.iter().map(|x| a * x).collect(),
            centered: self.centered,
        }
    }
}

fn centering_tolerance(xs: &[f64]) -> f64 {
    let max_abs = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    1e-12 * max_abs.max(1.0)
}

/// The lag pair `(tau1, tau2)` of the lagged third-cumulant estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LagPair {
    pub tau1: usize,
    pub tau2: usize,
}

impl LagPair {
    pub const ZERO: LagPair = LagPair { tau1: 0, tau2: 0 };

    pub fn new(tau1: usize, tau2: usize) -> Self {
        Self { tau1, tau2 }
    }

    pub fn max_lag(&self) -> usize {
        self.tau1.max(self.tau2)
    }
}

/// Subtracts the sample mean.
///
/// A second correction pass removes the rounding residue left by the
/// first, so large offsets still come out zero-mean within tolerance.
pub fn center(x: &Sequence) -> Sequence {
    let mean = x.mean();
    let mut samples: Vec<f64> = x.samples.iter().map(|v| v - mean).collect();
    let residue = samples.iter().sum::<f64>() / samples.len() as f64;
    if residue != 0.0 {
        samples.iter_mut().for_each(|v| *v -= residue);
    }
    Sequence {
        samples,
        centered: true,
    }
}

fn require_centered(x: &Sequence) -> Result<()> {
    if x.centered {
        Ok(())
    } else {
        Err(Error::NotCentered)
    }
}

/// Joint third cumulant `E{x1 x2 x3}` of three zero-mean sequences.
pub fn joint_cumulant3(x1: &Sequence, x2: &Sequence, x3: &Sequence) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::LengthMismatch(x1.len(), x2.len()));
    }
    if x1.len() != x3.len() {
        return Err(Error::LengthMismatch(x1.len(), x3.len()));
    }
    require_centered(x1)?;
    require_centered(x2)?;
    require_centered(x3)?;
    let sum: f64 = x1
        .samples
        .iter()
        .zip(&x2.samples)
        .zip(&x3.samples)
        .map(|((a, b), c)| a * b * c)
        .sum();
    Ok(sum / x1.len() as f64)
}

/// Lagged third-cumulant estimate `c3(tau1, tau2)`.
///
/// Sums `x(t) x(t+tau1) x(t+tau2)` over the `N - max(tau1, tau2)` indices
/// where every factor exists and divides by that same count.
pub fn third_cumulant_lagged(x: &Sequence, lags: LagPair) -> Result<f64> {
    let n = x.len();
    let max_lag = lags.max_lag();
    if max_lag >= n {
        return Err(Error::LagTooLarge {
            lag: max_lag,
            len: n,
        });
    }
    require_centered(x)?;
    let s = &x.samples;
    let count = n - max_lag;
    let sum: f64 = (0..count)
        .map(|t| s[t] * s[t + lags.tau1] * s[t + lags.tau2])
        .sum();
    Ok(sum / count as f64)
}

/// Zero-lag third cumulant: the mean cube of a centered sequence.
pub fn third_cumulant_zero_lag(x: &Sequence) -> Result<f64> {
    require_centered(x)?;
    Ok(mean_cube(&x.samples))
}

/// Third moment about a fixed `origin`, with no centering requirement.
///
/// Used when a sequence is derived from a zero-mean parent and must be
/// measured in the parent's frame rather than re-centered.
pub fn third_moment_about(x: &Sequence, origin: f64) -> f64 {
    let sum: f64 = x
        .samples
        .iter()
        .map(|v| {
            let d = v - origin;
            d * d * d
        })
        .sum();
    sum / x.len() as f64
}

pub(crate) fn mean_cube(xs: &[f64]) -> f64 {
    xs.iter().map(|v| v * v * v).sum::<f64>() / xs.len() as f64
}

/// Mean-square power.
pub fn power(x: &Sequence) -> f64 {
    x.samples.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// `10 log10(p_signal / p_noise)`.
///
/// A zero signal power yields negative infinity; use [`snr_db_strict`]
/// to reject it instead.
pub fn snr_db(p_signal: f64, p_noise: f64) -> Result<f64> {
    if !(p_noise > 0.0) {
        return Err(Error::NonPositiveNoise(p_noise));
    }
    if !(p_signal >= 0.0) {
        return Err(Error::NegativePower(p_signal));
    }
    Ok(10.0 * (p_signal / p_noise).log10())
}

pub fn snr_db_strict(p_signal: f64, p_noise: f64) -> Result<f64> {
    let db = snr_db(p_signal, p_noise)?;
    if db == f64::NEG_INFINITY {
        return Err(Error::ZeroSignal);
    }
    Ok(db)
}

/// Relative power mismatch allowed between the mixture and the noise
/// reference in [`snr2_db`].
pub const SNR2_POWER_TOLERANCE: f64 = 0.01;

/// Floor on the noise-reference cumulant, relative to `power^(3/2)`.
pub const SNR2_DEGENERATE_FLOOR: f64 = 1e-3;

/// Output SNR of the cumulant detector: `10 log10(|c3(mixed)| / |c3(noise_ref)|)`.
///
/// Both inputs must be centered and carry the same power (within 1%).
pub fn snr2_db(mixed: &Sequence, noise_ref: &Sequence) -> Result<f64> {
    let hoc_mixed = third_cumulant_zero_lag(mixed)?;
    let hoc_noise = third_cumulant_zero_lag(noise_ref)?;
    let p_mixed = power(mixed);
    let p_noise = power(noise_ref);
    if (p_mixed - p_noise).abs() > SNR2_POWER_TOLERANCE * p_mixed.max(p_noise) {
        return Err(Error::PowerMismatch {
            mixed: p_mixed,
            noise: p_noise,
        });
    }
    let floor = SNR2_DEGENERATE_FLOOR * p_noise.powf(1.5);
    if !(hoc_noise.abs() >= floor) || hoc_noise == 0.0 {
        return Err(Error::DegenerateNoiseReference {
            hoc: hoc_noise,
            floor,
        });
    }
    Ok(10.0 * (hoc_mixed.abs() / hoc_noise.abs()).log10())
}

/// Equal-width histogram over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Every sample offered, in range or not.
    pub total: u64,
    /// Samples outside `[lo, hi]` (or NaN); counted in `total` only.
    pub out_of_range: u64,
}

impl Histogram {
    pub fn in_range(&self) -> u64 {
        self.total - self.out_of_range
    }

    /// Fraction of all samples falling in `[a, b)`, summed over whole bins.
    pub fn fraction_between(&self, a: f64, b: f64) -> f64 {
        let hits: u64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| self.bin_edges[*i] >= a && self.bin_edges[*i + 1] <= b)
            .map(|(_, c)| c)
            .sum();
        hits as f64 / self.total as f64
    }
}

/// Bins are half-open `[e_b, e_{b+1})` except the last, which is closed.
pub fn histogram(x: &Sequence, bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    if bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::BadRange { bins, lo, hi });
    }
    let width = (hi - lo) / bins as f64;
    let mut bin_edges: Vec<f64> = (0..bins).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);
    let mut counts = vec![0u64; bins];
    let mut out_of_range = 0;
    for &v in &x.samples {
        if !(v >= lo && v <= hi) {
            out_of_range += 1;
            continue;
        }
        let mut b = (((v - lo) / width).floor() as usize).min(bins - 1);
        // the float division can land one bin off near an edge
        if b > 0 && v < bin_edges[b] {
            b -= 1;
        } else if b + 1 < bins && v >= bin_edges[b + 1] {
            b += 1;
        }
        counts[b] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        total: x.len() as u64,
        out_of_range,
    })
}
