//! Seeded Monte Carlo experiments that regenerate the simulation figures
//! as data: cumulant versus asymmetry, output SNR versus calculated length
//! and input SNR, and end-to-end localization at fiber scale.
//!
//! Seeds run in parallel; results are collected in seed order before any
//! aggregation, so output is identical for any thread count.

use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::CONFIG_KEYS;
use crate::detect::{
    detrend, hoc_profile, locate_peak, moving_differential_profile, spatial_resolution,
    DetectionReport, Detector, Method,
};
use crate::error::{Error, Result};
use crate::io::{write_json, ReportRecord};
use crate::stats::{center, power, snr2_db, third_cumulant_zero_lag, third_moment_about};
use crate::synth::{
    asymmetrize, gen_gaussian, gen_square_wave, gen_truncated_gaussian, k_intervals,
    mix_at_snr1, synth_traces, SimConfig, SquareWaveSpec, K1_LENGTH,
};

pub const DUTY_CYCLES: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const FIG2A_LENGTHS: [usize; 5] = [20, 40, 80, 120, 240];
pub const FIG2B_SNR1_DB: [f64; 5] = [-6.0, -3.0, 0.0, 3.0, 6.0];
pub const FIG2B_LENGTH: usize = 120;
/// Square-wave period (samples) for the output-SNR sweeps.
pub const FIG2_PERIOD: usize = 10;

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Cumulant of one `K_n` sequence averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    /// 1 for the symmetric reference, 2..=6 for the asymmetrized variants.
    pub k_index: usize,
    pub mean_c3: f64,
    pub std_c3: f64,
    pub stderr_c3: f64,
}

/// Per-seed third cumulants of `K1..K6`.
///
/// `K1` is a centered truncated Gaussian of length 99947. `K2..K6` mirror
/// one fragmentary interval of `K1` each and are measured as third
/// moments about `K1`'s zero mean.
pub fn fig1_values(seed: u64) -> Result<[f64; 6]> {
    let k1 = center(&gen_truncated_gaussian(K1_LENGTH, seed)?);
    let mut out = [0.0; 6];
    out[0] = third_cumulant_zero_lag(&k1)?;
    for (slot, interval) in out[1..].iter_mut().zip(k_intervals().iter()) {
        *slot = third_moment_about(&asymmetrize(&k1, interval), 0.0);
    }
    Ok(out)
}

pub fn fig1_asymmetry(seeds: &[u64]) -> Result<Vec<Fig1Row>> {
    let per_seed: Vec<[f64; 6]> = seeds
        .par_iter()
        .map(|&s| fig1_values(s))
        .collect::<Result<_>>()?;
    Ok((0..6)
        .map(|k| {
            let column: Vec<f64> = per_seed.iter().map(|v| v[k]).collect();
            let (mean, std) = mean_std(&column);
            Fig1Row {
                k_index: k + 1,
                mean_c3: mean,
                std_c3: std,
                stderr_c3: std / (column.len() as f64).sqrt(),
            }
        })
        .collect())
}

/// One noise realization of the output-SNR comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr2Trial {
    pub hoc_mixed: f64,
    pub hoc_noise: f64,
    /// `None` when the noise reference was too symmetric for a ratio.
    pub snr2_db: Option<f64>,
}

/// Square wave plus noise at `snr1_db` against an equal-power pure noise
/// reference, both centered.
pub fn snr2_trial(length: usize, duty: f64, snr1_db: f64, seed: u64) -> Result<Snr2Trial> {
    let spec = SquareWaveSpec::new(duty, FIG2_PERIOD, 1.0, 0)?;
    let signal = gen_square_wave(length, &spec)?;
    let mixed = center(&mix_at_snr1(&signal, snr1_db, seed)?);
    let noise = center(&gen_gaussian(length, seed, 1)?);
    let noise = noise.scaled((power(&mixed) / power(&noise)).sqrt());
    let snr2 = match snr2_db(&mixed, &noise) {
        Ok(db) => Some(db),
        Err(Error::DegenerateNoiseReference { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Snr2Trial {
        hoc_mixed: third_cumulant_zero_lag(&mixed)?,
        hoc_noise: third_cumulant_zero_lag(&noise)?,
        snr2_db: snr2,
    })
}

/// Output SNR aggregated over noise realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snr2Stats {
    /// `10 log10(mean|c3(mixed)| / mean|c3(noise)|)` over all seeds.
    pub mean_snr2_db: f64,
    /// Spread of the per-seed dB values (non-degenerate seeds only).
    pub std_snr2_db: f64,
    pub mean_abs_hoc_mixed: f64,
    pub mean_abs_hoc_noise: f64,
    pub valid_seeds: usize,
    pub degenerate_seeds: usize,
}

pub fn snr2_over_seeds(length: usize, duty: f64, snr1_db: f64, seeds: &[u64]) -> Result<Snr2Stats> {
    let trials: Vec<Snr2Trial> = seeds
        .par_iter()
        .map(|&s| snr2_trial(length, duty, snr1_db, s))
        .collect::<Result<_>>()?;
    let n = trials.len() as f64;
    let mean_abs_hoc_mixed = trials.iter().map(|t| t.hoc_mixed.abs()).sum::<f64>() / n;
    let mean_abs_hoc_noise = trials.iter().map(|t| t.hoc_noise.abs()).sum::<f64>() / n;
    let per_seed: Vec<f64> = trials.iter().filter_map(|t| t.snr2_db).collect();
    let (_, std) = if per_seed.is_empty() {
        (0.0, f64::NAN)
    } else {
        mean_std(&per_seed)
    };
    Ok(Snr2Stats {
        mean_snr2_db: 10.0 * (mean_abs_hoc_mixed / mean_abs_hoc_noise).log10(),
        std_snr2_db: std,
        mean_abs_hoc_mixed,
        mean_abs_hoc_noise,
        valid_seeds: per_seed.len(),
        degenerate_seeds: trials.len() - per_seed.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2Row {
    pub duty: f64,
    pub length: usize,
    pub snr1_db: f64,
    #[serde(flatten)]
    pub stats: Snr2Stats,
}

pub fn fig2a_length_sweep(seeds: &[u64], lengths: &[usize], duties: &[f64]) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::new();
    for &duty in duties {
        for &length in lengths {
            rows.push(Fig2Row {
                duty,
                length,
                snr1_db: 0.0,
                stats: snr2_over_seeds(length, duty, 0.0, seeds)?,
            });
        }
    }
    Ok(rows)
}

pub fn fig2b_snr_sweep(
    seeds: &[u64],
    snr1s: &[f64],
    duties: &[f64],
    length: usize,
) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::new();
    for &duty in duties {
        for &snr1_db in snr1s {
            rows.push(Fig2Row {
                duty,
                length,
                snr1_db,
                stats: snr2_over_seeds(length, duty, snr1_db, seeds)?,
            });
        }
    }
    Ok(rows)
}

/// One fiber-scale localization run, analyzed by both detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct E2eRun {
    pub duty: f64,
    pub seed: u64,
    pub config_digest: String,
    pub hoc: DetectionReport,
    pub mdiff: DetectionReport,
}

impl E2eRun {
    pub fn hit(&self, cfg: &SimConfig) -> bool {
        self.hoc.peak_index.abs_diff(cfg.vibration_point) <= cfg.pulse_width_points
    }
}

pub fn e2e_run(cfg: &SimConfig) -> Result<E2eRun> {
    let traces = synth_traces(cfg)?;
    let window = cfg.num_traces.min(crate::detect::DEFAULT_WINDOW);
    let analyze = |method| -> Result<DetectionReport> {
        Detector::new(method, cfg.pulse_width_points)
            .with_window(window)
            .analyze(&traces)
            .map(|(_, r)| r)
    };
    Ok(E2eRun {
        duty: cfg.vibration.duty,
        seed: cfg.seed,
        config_digest: cfg.digest(),
        hoc: analyze(Method::Hoc)?,
        mdiff: analyze(Method::MovingDifferential)?,
    })
}

/// Runs every duty cycle for every seed on copies of `base`.
pub fn e2e_localization(base: &SimConfig, duties: &[f64], seeds: &[u64]) -> Result<Vec<E2eRun>> {
    let configs: Vec<SimConfig> = duties
        .iter()
        .flat_map(|&duty| {
            seeds.iter().map(move |&seed| {
                let mut cfg = base.clone();
                cfg.vibration.duty = duty;
                cfg.seed = seed;
                cfg
            })
        })
        .collect();
    configs.par_iter().map(e2e_run).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct E2eSummary {
    pub duty: f64,
    pub runs: usize,
    pub hit_rate: f64,
    pub mean_hoc_location_snr_db: f64,
    pub mean_mdiff_location_snr_db: f64,
    /// 1 for the duty cycle with the highest mean HOC location SNR.
    pub snr_rank: usize,
}

pub fn summarize_e2e(base: &SimConfig, runs: &[E2eRun]) -> Vec<E2eSummary> {
    let mut duties: Vec<f64> = Vec::new();
    for r in runs {
        if !duties.contains(&r.duty) {
            duties.push(r.duty);
        }
    }
    let mut rows: Vec<E2eSummary> = duties
        .iter()
        .map(|&duty| {
            let group: Vec<&E2eRun> = runs.iter().filter(|r| r.duty == duty).collect();
            let n = group.len() as f64;
            E2eSummary {
                duty,
                runs: group.len(),
                hit_rate: group.iter().filter(|r| r.hit(base)).count() as f64 / n,
                mean_hoc_location_snr_db: group.iter().map(|r| r.hoc.location_snr_db).sum::<f64>()
                    / n,
                mean_mdiff_location_snr_db: group
                    .iter()
                    .map(|r| r.mdiff.location_snr_db)
                    .sum::<f64>()
                    / n,
                snr_rank: 0,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| {
        rows[b]
            .mean_hoc_location_snr_db
            .total_cmp(&rows[a].mean_hoc_location_snr_db)
    });
    for (rank, &i) in order.iter().enumerate() {
        rows[i].snr_rank = rank + 1;
    }
    rows
}

/// Rise distances of both detectors on a noise-free run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeRow {
    pub seed: u64,
    pub hoc_sr_m: f64,
    pub mdiff_sr_m: f64,
    pub ratio: f64,
}

/// Noise-free (additive and polarization) runs of `base` per seed.
pub fn edge_sharpening(base: &SimConfig, seeds: &[u64]) -> Result<Vec<EdgeRow>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let mut cfg = base.clone();
            cfg.seed = seed;
            cfg.noise_sigma = 0.0;
            cfg.sop_sigma = 0.0;
            let traces = synth_traces(&cfg)?;
            let window = cfg.num_traces.min(crate::detect::DEFAULT_WINDOW);
            let p = cfg.pulse_width_points;
            let hoc = hoc_profile(&detrend(&traces)?, window)?;
            let mdiff = moving_differential_profile(&traces, window)?;
            let hoc_sr_m = spatial_resolution(&hoc, locate_peak(&hoc)?.0, p)?;
            let mdiff_sr_m = spatial_resolution(&mdiff, locate_peak(&mdiff)?.0, p)?;
            Ok(EdgeRow {
                seed,
                hoc_sr_m,
                mdiff_sr_m,
                ratio: hoc_sr_m / mdiff_sr_m,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1Asymmetry,
    Fig2aLengthSweep,
    Fig2bSnrSweep,
    E2eLocalization,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Fig1Asymmetry,
        Preset::Fig2aLengthSweep,
        Preset::Fig2bSnrSweep,
        Preset::E2eLocalization,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1Asymmetry => "fig1_asymmetry",
            Preset::Fig2aLengthSweep => "fig2a_length_sweep",
            Preset::Fig2bSnrSweep => "fig2b_snr_sweep",
            Preset::E2eLocalization => "e2e_localization",
        }
    }

    pub fn default_seeds(&self) -> Range<u64> {
        match self {
            Preset::Fig1Asymmetry => 0..50,
            Preset::Fig2aLengthSweep | Preset::Fig2bSnrSweep => 0..20_000,
            Preset::E2eLocalization => 0..100,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// A preset plus `key = value` overrides of the fiber-scale config.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub preset: Preset,
    pub overrides: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    preset: &'a str,
    seed_start: u64,
    seed_end: u64,
    config_digest: String,
    files: Vec<String>,
}

#[derive(Serialize)]
struct E2eReportEntry {
    duty: f64,
    seed: u64,
    hoc: ReportRecord,
    moving_differential: ReportRecord,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl ExperimentPreset {
    pub fn new(preset: Preset) -> Self {
        Self {
            preset,
            overrides: Vec::new(),
        }
    }

    pub fn with_overrides(preset: Preset, overrides: Vec<(String, String)>) -> Result<Self> {
        for (key, _) in &overrides {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::UnknownKey(key.clone()));
            }
        }
        Ok(Self { preset, overrides })
    }

    /// Full-size config with overrides applied.
    pub fn sim_config(&self) -> Result<SimConfig> {
        let mut cfg = SimConfig::full_scale();
        for (k, v) in &self.overrides {
            cfg.set_key(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Digest of everything except the seed list.
    pub fn digest(&self) -> Result<String> {
        let mut text = format!("preset = {}\n", self.preset.name());
        text.push_str(&self.sim_config()?.to_kv_string());
        let hash = Sha256::digest(text.as_bytes());
        Ok(hex::encode(&hash[..8]))
    }

    /// Runs the preset and writes its CSV/JSON files into `out_dir`.
    /// Returns the written paths.
    pub fn run(&self, seeds: Range<u64>, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let out_dir = out_dir.as_ref();
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let seed_list: Vec<u64> = seeds.clone().collect();
        if seed_list.is_empty() {
            return Err(Error::BadConfig("empty seed range".into()));
        }
        let mut files: Vec<(String, String)> = Vec::new();
        match self.preset {
            Preset::Fig1Asymmetry => {
                let mut csv = String::from("k_index,mean_c3,std_c3,stderr_c3\n");
                for r in fig1_asymmetry(&seed_list)? {
                    writeln!(csv, "{},{},{},{}", r.k_index, r.mean_c3, r.std_c3, r.stderr_c3)
                        .unwrap();
                }
                files.push(("fig1_asymmetry.csv".into(), csv));
            }
            Preset::Fig2aLengthSweep => {
                let rows = fig2a_length_sweep(&seed_list, &FIG2A_LENGTHS, &DUTY_CYCLES)?;
                files.push(("fig2a_length_sweep.csv".into(), fig2_csv(&rows)));
            }
            Preset::Fig2bSnrSweep => {
                let rows =
                    fig2b_snr_sweep(&seed_list, &FIG2B_SNR1_DB, &DUTY_CYCLES, FIG2B_LENGTH)?;
                files.push(("fig2b_snr_sweep.csv".into(), fig2_csv(&rows)));
            }
            Preset::E2eLocalization => {
                let base = self.sim_config()?;
                let runs = e2e_localization(&base, &DUTY_CYCLES, &seed_list)?;
                files.extend(e2e_files(&base, &runs)?);
                let mut csv = String::from("seed,hoc_sr_m,mdiff_sr_m,ratio\n");
                for r in edge_sharpening(&base, &seed_list)? {
                    writeln!(csv, "{},{},{},{}", r.seed, r.hoc_sr_m, r.mdiff_sr_m, r.ratio)
                        .unwrap();
                }
                files.push(("e2e_resolution.csv".into(), csv));
            }
        }
        let manifest = Manifest {
            preset: self.preset.name(),
            seed_start: seeds.start,
            seed_end: seeds.end,
            config_digest: self.digest()?,
            files: files.iter().map(|(n, _)| n.clone()).collect(),
        };
        let mut paths = Vec::new();
        for (name, text) in &files {
            let path = out_dir.join(name);
            write_text(&path, text)?;
            paths.push(path);
        }
        let manifest_path = out_dir.join("manifest.json");
        write_json(&manifest_path, &manifest)?;
        paths.push(manifest_path);
        Ok(paths)
    }
}

fn fig2_csv(rows: &[Fig2Row]) -> String {
    let mut csv = String::from(
        "duty,length,snr1_db,mean_snr2_db,std_snr2_db,mean_abs_hoc_mixed,mean_abs_hoc_noise,valid_seeds,degenerate_seeds\n",
    );
    for r in rows {
        let s = &r.stats;
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.duty,
            r.length,
            r.snr1_db,
            s.mean_snr2_db,
            s.std_snr2_db,
            s.mean_abs_hoc_mixed,
            s.mean_abs_hoc_noise,
            s.valid_seeds,
            s.degenerate_seeds
        )
        .unwrap();
    }
    csv
}

fn e2e_files(base: &SimConfig, runs: &[E2eRun]) -> Result<Vec<(String, String)>> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let mut runs_csv = String::from(
        "duty,seed,peak_index,hit,hoc_location_snr_db,mdiff_location_snr_db,hoc_sr_m,mdiff_sr_m\n",
    );
    for r in runs {
        writeln!(
            runs_csv,
            "{},{},{},{},{},{},{},{}",
            r.duty,
            r.seed,
            r.hoc.peak_index,
            r.hit(base),
            r.hoc.location_snr_db,
            r.mdiff.location_snr_db,
            opt(r.hoc.spatial_resolution_m),
            opt(r.mdiff.spatial_resolution_m)
        )
        .unwrap();
    }
    let mut summary_csv = String::from(
        "duty,runs,hit_rate,mean_hoc_location_snr_db,mean_mdiff_location_snr_db,snr_rank\n",
    );
    for s in summarize_e2e(base, runs) {
        writeln!(
            summary_csv,
            "{},{},{},{},{},{}",
            s.duty,
            s.runs,
            s.hit_rate,
            s.mean_hoc_location_snr_db,
            s.mean_mdiff_location_snr_db,
            s.snr_rank
        )
        .unwrap();
    }
    let window = base.num_traces.min(crate::detect::DEFAULT_WINDOW);
    let reports: Vec<E2eReportEntry> = runs
        .iter()
        .map(|r| E2eReportEntry {
            duty: r.duty,
            seed: r.seed,
            hoc: ReportRecord::new(&r.hoc, window, r.config_digest.clone()),
            moving_differential: ReportRecord::new(&r.mdiff, window, r.config_digest.clone()),
        })
        .collect();
    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    Ok(vec![
        ("e2e_runs.csv".into(), runs_csv),
        ("e2e_summary.csv".into(), summary_csv),
        ("e2e_reports.json".into(), json),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!(
            "fig3".parse::<Preset>(),
            Err(Error::UnknownPreset(name)) if name == "fig3"
        ));
    }

    #[test]
    fn overrides_must_name_config_keys() {
        let ok = ExperimentPreset::with_overrides(
            Preset::E2eLocalization,
            vec![("noise_sigma".into(), "0.2".into())],
        )
        .unwrap();
        assert_eq!(ok.sim_config().unwrap().noise_sigma, 0.2);
        assert!(matches!(
            ExperimentPreset::with_overrides(
                Preset::E2eLocalization,
                vec![("bogus".into(), "1".into())]
            ),
            Err(Error::UnknownKey(_))
        ));
    }

    #[test]
    fn snr2_trial_is_deterministic() {
        let a = snr2_trial(120, 0.1, 0.0, 5).unwrap();
        let b = snr2_trial(120, 0.1, 0.0, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.hoc_mixed > 0.0);
    }

    #[test]
    fn summary_ranks_by_hoc_snr() {
        let cfg = SimConfig::full_scale();
        let report = |snr| DetectionReport {
            method: Method::Hoc,
            peak_index: 1049,
            peak_position_m: 1049.0,
            location_snr_db: snr,
            spatial_resolution_m: None,
        };
        let run = |duty, snr| E2eRun {
            duty,
            seed: 0,
            config_digest: String::new(),
            hoc: report(snr),
            mdiff: report(1.0),
        };
        let rows = summarize_e2e(&cfg, &[run(0.1, 5.0), run(0.2, 9.0), run(0.3, 7.0)]);
        let ranks: Vec<usize> = rows.iter().map(|r| r.snr_rank).collect();
        assert_eq!(ranks, vec![3, 1, 2]);
        assert!(rows.iter().all(|r| r.hit_rate == 1.0));
    }
}
