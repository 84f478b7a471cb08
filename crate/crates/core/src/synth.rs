//! Seeded generation of every synthetic input: truncated Gaussian
//! sequences, their asymmetrized variants, square waves, noisy mixtures
//! and full backscattering trace matrices carrying a vibration event.
//!
//! All generators draw from ChaCha8 streams keyed by `(seed, stream)`, so
//! output is bit-identical across runs and platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::stats::{power, Sequence};

/// Half-width of the truncation window for the reference Gaussian.
pub const TRUNCATION: f64 = 3.46;

/// Sample count of the reference Gaussian sequence `K1`.
pub const K1_LENGTH: usize = 99_947;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` i.i.d. standard-normal draws from stream `stream` of `seed`.
pub fn gen_gaussian(n: usize, seed: u64, stream: u64) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut rng = rng_for(seed, stream);
    Sequence::new((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

/// Standard-normal draws restricted to `[-TRUNCATION, TRUNCATION]` by
/// rejection.
pub fn gen_truncated_gaussian(n: usize, seed: u64) -> Result<Sequence> {
    gen_truncated_gaussian_counted(n, seed).map(|(seq, _)| seq)
}

/// As [`gen_truncated_gaussian`], also returning how many raw draws were
/// rejected.
pub fn gen_truncated_gaussian_counted(n: usize, seed: u64) -> Result<(Sequence, u64)> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut rng = rng_for(seed, 0);
    let mut rejected = 0;
    let mut samples = Vec::with_capacity(n);
    while samples.len() < n {
        let v: f64 = rng.sample(StandardNormal);
        if v.abs() <= TRUNCATION {
            samples.push(v);
        } else {
            rejected += 1;
        }
    }
    Ok((Sequence::new(samples)?, rejected))
}

/// A half-open value interval `[lo, hi)` whose samples get mirrored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetrySpec {
    lo: f64,
    hi: f64,
}

impl AsymmetrySpec {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || lo < -TRUNCATION || hi > TRUNCATION {
            return Err(Error::BadInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v < self.hi
    }

    /// The interval reflected through zero, `[-hi, -lo)`.
    ///
    /// Mirroring maps `[lo, hi)` onto `(-hi, -lo]`; the half-open ends differ
    /// only on a measure-zero boundary.
    pub fn mirrored(&self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

/// Fragmentary intervals producing `K2..K6`, each holding ~10% of the
/// standard normal mass.
pub fn k_intervals() -> [AsymmetrySpec; 5] {
    [
        AsymmetrySpec { lo: -3.46, hi: -1.28 },
        AsymmetrySpec { lo: -1.28, hi: -0.84 },
        AsymmetrySpec { lo: -0.84, hi: -0.52 },
        AsymmetrySpec { lo: -0.52, hi: -0.25 },
        AsymmetrySpec { lo: -0.25, hi: 0.0 },
    ]
}

/// Negates every sample inside `spec`. Length is unchanged and the
/// result is not centered.
pub fn asymmetrize(x: &Sequence, spec: &AsymmetrySpec) -> Sequence {
    let samples = x
        .samples()
        .iter()
        .map(|&v| if spec.contains(v) { -v } else { v })
        .collect();
    Sequence::new(samples).expect("non-empty input")
}

/// Discrete square wave with an integer period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareWaveSpec {
    pub duty: f64,
    pub period_samples: usize,
    pub amplitude: f64,
    pub phase_samples: i64,
}

impl SquareWaveSpec {
    pub fn new(duty: f64, period_samples: usize, amplitude: f64, phase_samples: i64) -> Result<Self> {
        let spec = Self {
            duty,
            period_samples,
            amplitude,
            phase_samples,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duty > 0.0 && self.duty < 1.0) {
            return Err(Error::BadSquareWave(format!("duty {} not in (0, 1)", self.duty)));
        }
        if self.period_samples < 2 {
            return Err(Error::BadSquareWave(format!(
                "period {} shorter than 2 samples",
                self.period_samples
            )));
        }
        if self.high_samples() < 1 {
            return Err(Error::BadSquareWave(format!(
                "duty {} rounds to zero high samples per period",
                self.duty
            )));
        }
        Ok(())
    }

    /// High samples per period, `round(duty * period)`.
    pub fn high_samples(&self) -> usize {
        (self.duty * self.period_samples as f64).round() as usize
    }
}

pub fn gen_square_wave(n: usize, spec: &SquareWaveSpec) -> Result<Sequence> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    let period = spec.period_samples as i64;
    let high = spec.high_samples() as i64;
    let samples = (0..n as i64)
        .map(|i| {
            if (i - spec.phase_samples).rem_euclid(period) < high {
                spec.amplitude
            } else {
                0.0
            }
        })
        .collect();
    Sequence::new(samples)
}

/// Adds white Gaussian noise scaled so the realized
/// `10 log10(power(signal) / power(noise))` equals `snr1_db` exactly.
pub fn mix_at_snr1(signal: &Sequence, snr1_db: f64, seed: u64) -> Result<Sequence> {
    let p_signal = power(signal);
    if p_signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let noise = gen_gaussian(signal.len(), seed, 0)?;
    let gain = (p_signal / (power(&noise) * 10f64.powf(snr1_db / 10.0))).sqrt();
    let samples = signal
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(s, n)| s + gain * n)
        .collect();
    Sequence::new(samples)
}

/// Continuous-time square drive applied to the vibration source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareDrive {
    pub freq_hz: f64,
    pub duty: f64,
    /// Phase offset as a fraction of one cycle, in `[0, 1)`.
    pub phase: f64,
}

impl SquareDrive {
    /// 1.0 while the drive is high at time `t` (seconds), else 0.0.
    pub fn level_at(&self, t: f64) -> f64 {
        if (self.freq_hz * t + self.phase).rem_euclid(1.0) < self.duty {
            1.0
        } else {
            0.0
        }
    }
}

/// Full description of a synthetic backscattering experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub fiber_points: usize,
    pub num_traces: usize,
    /// Spatial extent of the probe pulse, in fiber sampling points.
    pub pulse_width_points: usize,
    pub meters_per_point: f64,
    /// Probe repetition rate.
    pub trace_rate_hz: f64,
    pub vibration_point: usize,
    pub vibration: SquareDrive,
    /// Perturbation amplitude relative to the RMS speckle baseline.
    pub vibration_depth: f64,
    pub noise_sigma: f64,
    pub sop_sigma: f64,
    pub seed: u64,
}

impl SimConfig {
    /// 1500 points at 1 m, 100 traces at 10 kHz, a 10-point (100 ns)
    /// pulse and a 700 Hz, 20%-duty drive at point 1049.
    pub fn full_scale() -> Self {
        Self {
            fiber_points: 1500,
            num_traces: 100,
            pulse_width_points: 10,
            meters_per_point: 1.0,
            trace_rate_hz: 10_000.0,
            vibration_point: 1049,
            vibration: SquareDrive {
                freq_hz: 700.0,
                duty: 0.2,
                phase: 0.0,
            },
            vibration_depth: 0.5,
            noise_sigma: 0.1,
            sop_sigma: 0.02,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadConfig(msg));
        if self.fiber_points == 0 || self.num_traces == 0 {
            return bad(format!(
                "geometry {}x{} must be non-empty",
                self.num_traces, self.fiber_points
            ));
        }
        if self.pulse_width_points == 0 {
            return bad("pulse_width_points must be >= 1".into());
        }
        if self.vibration_point >= self.fiber_points {
            return bad(format!(
                "vibration_point {} outside fiber of {} points",
                self.vibration_point, self.fiber_points
            ));
        }
        if !(self.meters_per_point > 0.0 && self.meters_per_point.is_finite()) {
            return bad(format!("meters_per_point {} must be positive", self.meters_per_point));
        }
        if !(self.trace_rate_hz > 0.0 && self.trace_rate_hz.is_finite()) {
            return bad(format!("trace_rate_hz {} must be positive", self.trace_rate_hz));
        }
        if !(0.0..=1.0).contains(&self.vibration_depth) {
            return bad(format!("vibration_depth {} not in [0, 1]", self.vibration_depth));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite())
            || !(self.sop_sigma >= 0.0 && self.sop_sigma.is_finite())
        {
            return bad("noise sigmas must be finite and >= 0".into());
        }
        let d = &self.vibration;
        if !(d.duty > 0.0 && d.duty < 1.0) {
            return bad(format!("vibration_duty {} not in (0, 1)", d.duty));
        }
        if !(d.freq_hz >= 0.0 && d.freq_hz.is_finite()) {
            return bad(format!("vibration_freq_hz {} must be >= 0", d.freq_hz));
        }
        if !(0.0..1.0).contains(&d.phase) {
            return bad(format!("vibration_phase {} not in [0, 1)", d.phase));
        }
        Ok(())
    }

    /// Drive level for trace `i`, sampled at the trace epoch.
    pub fn drive_level(&self, trace: usize) -> f64 {
        self.vibration.level_at(trace as f64 / self.trace_rate_hz)
    }

    /// Triangular pulse-overlap weight of fiber point `m`.
    pub fn overlap_weight(&self, m: usize) -> f64 {
        let dist = m.abs_diff(self.vibration_point) as f64;
        (1.0 - dist / self.pulse_width_points as f64).max(0.0)
    }
}

/// Where a trace matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Provenance {
    Synthetic = 0,
    Recorded = 1,
}

impl TryFrom<u8> for Provenance {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Provenance::Synthetic),
            1 => Ok(Provenance::Recorded),
            other => Err(Error::CorruptHeader(format!("unknown provenance {other}"))),
        }
    }
}

/// `num_traces x fiber_points` backscattering amplitudes, stored
/// trace-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMatrix {
    num_traces: usize,
    fiber_points: usize,
    amplitudes: Vec<f64>,
    pub meters_per_point: f64,
    pub trace_rate_hz: f64,
    pub provenance: Provenance,
}

impl TraceMatrix {
    pub fn new(
        num_traces: usize,
        fiber_points: usize,
        amplitudes: Vec<f64>,
        meters_per_point: f64,
        trace_rate_hz: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if num_traces == 0 || fiber_points == 0 {
            return Err(Error::BadConfig(format!(
                "trace matrix {num_traces}x{fiber_points} must be non-empty"
            )));
        }
        if amplitudes.len() != num_traces * fiber_points {
            return Err(Error::BadConfig(format!(
                "{} amplitudes do not fill {num_traces}x{fiber_points}",
                amplitudes.len()
            )));
        }
        if let Some(pos) = amplitudes.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadConfig(format!("non-finite amplitude at offset {pos}")));
        }
        Ok(Self {
            num_traces,
            fiber_points,
            amplitudes,
            meters_per_point,
            trace_rate_hz,
            provenance,
        })
    }

    pub fn num_traces(&self) -> usize {
        self.num_traces
    }

    pub fn fiber_points(&self) -> usize {
        self.fiber_points
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn trace(&self, i: usize) -> &[f64] {
        &self.amplitudes[i * self.fiber_points..(i + 1) * self.fiber_points]
    }

    pub fn traces(&self) -> impl Iterator<Item = &[f64]> {
        self.amplitudes.chunks_exact(self.fiber_points)
    }

    pub fn get(&self, trace: usize, point: usize) -> f64 {
        self.amplitudes[trace * self.fiber_points + point]
    }

    pub fn column(&self, point: usize) -> Vec<f64> {
        self.traces().map(|t| t[point]).collect()
    }

    /// Same metadata, new amplitudes of identical shape.
    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<f64>) -> Self {
        debug_assert_eq!(amplitudes.len(), self.amplitudes.len());
        Self {
            amplitudes,
            ..self.clone()
        }
    }

    /// Multiplies every amplitude by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        self.with_amplitudes(self.amplitudes.iter().map(|v| a * v).collect())
    }
}

/// Static speckle amplitude per fiber point: the normalized magnitude of
/// the unit phasors of the `pulse_width_points` scatterers inside the
/// pulse window. Depends only on `fiber_points`, `pulse_width_points` and
/// `seed`.
pub fn speckle_baseline(cfg: &SimConfig) -> Vec<f64> {
    let p = cfg.pulse_width_points;
    let mut rng = rng_for(cfg.seed, 0);
    let phasors: Vec<(f64, f64)> = (0..cfg.fiber_points + p - 1)
        .map(|_| {
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            (theta.cos(), theta.sin())
        })
        .collect();
    let norm = (p as f64).sqrt();
    phasors
        .windows(p)
        .map(|w| {
            let (re, im) = w.iter().fold((0.0, 0.0), |(a, b), (c, s)| (a + c, b + s));
            re.hypot(im) / norm
        })
        .collect()
}

/// Realized mean-square power of the vibration perturbation at the
/// vibration point over all traces.
pub fn perturbation_power(cfg: &SimConfig) -> f64 {
    let scale = cfg.vibration_depth;
    let sum: f64 = (0..cfg.num_traces)
        .map(|i| (scale * cfg.drive_level(i)).powi(2))
        .sum();
    sum / cfg.num_traces as f64
}

/// Additive noise sigma giving input SNR `snr1_db` at the vibration point.
pub fn noise_sigma_for_snr1(cfg: &SimConfig, snr1_db: f64) -> Result<f64> {
    let p = perturbation_power(cfg);
    if p == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok((p / 10f64.powf(snr1_db / 10.0)).sqrt())
}

/// Synthesizes a trace matrix:
///
/// `x_i[m] = (1 + eta_i) * (b[m] + depth * k(m) * s(i)) + n_i[m]`
///
/// with `b` the speckle baseline (unit mean power), `k` the triangular overlap kernel around
/// the vibration point `p`, `s(i)` the drive sampled at trace epoch `i`,
/// `eta_i ~ N(0, sop_sigma^2)` per trace and `n_i[m] ~ N(0, noise_sigma^2)`.
pub fn synth_traces(cfg: &SimConfig) -> Result<TraceMatrix> {
    cfg.validate()?;
    let baseline = speckle_baseline(cfg);
    let scale = cfg.vibration_depth;
    let kernel: Vec<f64> = (0..cfg.fiber_points).map(|m| cfg.overlap_weight(m)).collect();

    let mut rng = rng_for(cfg.seed, 1);
    let mut amplitudes = Vec::with_capacity(cfg.num_traces * cfg.fiber_points);
    for i in 0..cfg.num_traces {
        let level = scale * cfg.drive_level(i);
        let eta: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.sop_sigma;
        for (b, k) in baseline.iter().zip(&kernel) {
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * cfg.noise_sigma;
            amplitudes.push((1.0 + eta) * (b + level * k) + noise);
        }
    }
    TraceMatrix::new(
        cfg.num_traces,
        cfg.fiber_points,
        amplitudes,
        cfg.meters_per_point,
        cfg.trace_rate_hz,
        Provenance::Synthetic,
    )
}
