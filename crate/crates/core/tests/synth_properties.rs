use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use hocdvs_core::stats::histogram;
use hocdvs_core::synth::{
    asymmetrize, gen_square_wave, gen_truncated_gaussian, gen_truncated_gaussian_counted,
    k_intervals, synth_traces, AsymmetrySpec, SquareWaveSpec, K1_LENGTH, TRUNCATION,
};
use hocdvs_core::{Sequence, SimConfig};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

#[test]
fn rejection_rate_matches_normal_tail() {
    let n = 2_000_000;
    let (_, rejected) = gen_truncated_gaussian_counted(n, 1).unwrap();
    let draws = (n as u64 + rejected) as f64;
    let p = 2.0 * (1.0 - std_normal().cdf(TRUNCATION));
    let se = (p * (1.0 - p) / draws).sqrt();
    let rate = rejected as f64 / draws;
    assert!((rate - p).abs() < 4.0 * se, "rate {rate}, oracle {p}");
    assert!((p - 0.00054).abs() < 0.00001);
}

#[test]
fn k1_has_zero_mean_and_unit_variance() {
    for seed in 0..10 {
        let x = gen_truncated_gaussian(K1_LENGTH, seed).unwrap();
        let n = x.len() as f64;
        let mean = x.mean();
        let var = x.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "seed {seed}: mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "seed {seed}: var {var}");
    }
}

#[test]
fn each_fragmentary_interval_holds_ten_percent() {
    let normal = std_normal();
    let mass = normal.cdf(TRUNCATION) - normal.cdf(-TRUNCATION);
    for seed in 0..5 {
        let x = gen_truncated_gaussian(K1_LENGTH, seed).unwrap();
        let n = x.len() as f64;
        for iv in k_intervals() {
            let oracle = (normal.cdf(iv.hi()) - normal.cdf(iv.lo())) / mass;
            let frac = x.samples().iter().filter(|&&v| iv.contains(v)).count() as f64 / n;
            let se = (oracle * (1.0 - oracle) / n).sqrt();
            assert!((frac - 0.10).abs() <= 0.005, "{iv:?}: {frac}");
            assert!((oracle - 0.10).abs() <= 0.005, "{iv:?}: oracle {oracle}");
            assert!((frac - oracle).abs() < 4.0 * se, "{iv:?}: {frac} vs {oracle}");
        }
    }
}

#[test]
fn histogram_of_k1_is_bell_shaped_with_ten_percent_left_tail() {
    let x = gen_truncated_gaussian(K1_LENGTH, 2).unwrap();
    let h = histogram(&x, 100, -TRUNCATION, TRUNCATION).unwrap();
    assert_eq!(h.out_of_range, 0);
    let peak = (0..100).max_by_key(|&b| h.counts[b]).unwrap();
    assert!((40..60).contains(&peak), "peak bin {peak}");
    assert!(h.counts[0] < h.counts[25] && h.counts[25] < h.counts[peak]);
    assert!(h.counts[99] < h.counts[75] && h.counts[75] < h.counts[peak]);
    // [-3.46, -1.28) ends inside a bin; take that bin pro rata
    let edge = -1.28;
    let b = h.bin_edges.iter().rposition(|&e| e <= edge).unwrap();
    let share = (edge - h.bin_edges[b]) / (h.bin_edges[b + 1] - h.bin_edges[b]);
    let frac = h.fraction_between(-TRUNCATION, h.bin_edges[b])
        + share * h.counts[b] as f64 / h.total as f64;
    assert!((frac - 0.10).abs() <= 0.005, "{frac}");
}

#[test]
fn square_wave_power_equals_duty() {
    for (duty, period) in [(0.1, 10), (0.2, 10), (0.3, 10), (0.4, 10), (0.25, 8)] {
        let spec = SquareWaveSpec::new(duty, period, 1.0, 3).unwrap();
        let x = gen_square_wave(period * 50, &spec).unwrap();
        let p = x.samples().iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((p - duty).abs() < 1e-12);
    }
    let spec = SquareWaveSpec::new(0.5, 4, 2.0, 0).unwrap();
    let x = gen_square_wave(4, &spec).unwrap();
    assert_eq!(x.samples(), &[2.0, 2.0, 0.0, 0.0]);
}

fn small_config() -> impl Strategy<Value = SimConfig> {
    (
        1usize..=12,
        2usize..=60,
        1usize..=6,
        any::<u64>(),
        0.05f64..0.95,
        0.0f64..1.0,
        0.0f64..0.3,
        0.0f64..0.1,
    )
        .prop_flat_map(|(w, m, p, seed, duty, depth, noise, sop)| {
            (0..m).prop_map(move |vp| {
                let mut cfg = SimConfig::full_scale();
                cfg.num_traces = w;
                cfg.fiber_points = m;
                cfg.pulse_width_points = p;
                cfg.vibration_point = vp;
                cfg.seed = seed;
                cfg.vibration.duty = duty;
                cfg.vibration_depth = depth;
                cfg.noise_sigma = noise;
                cfg.sop_sigma = sop;
                cfg
            })
        })
}

proptest! {
    #[test]
    fn identical_configs_give_identical_traces(cfg in small_config()) {
        prop_assert_eq!(synth_traces(&cfg).unwrap(), synth_traces(&cfg.clone()).unwrap());
    }

    #[test]
    fn quiet_trace_differences_follow_the_drive(cfg in small_config()) {
        let mut cfg = cfg;
        cfg.noise_sigma = 0.0;
        cfg.sop_sigma = 0.0;
        let t = synth_traces(&cfg).unwrap();
        for i in 0..cfg.num_traces {
            let ds = cfg.drive_level(i) - cfg.drive_level(0);
            for m in 0..cfg.fiber_points {
                let want = cfg.vibration_depth * cfg.overlap_weight(m) * ds;
                let got = t.get(i, m) - t.get(0, m);
                prop_assert!((got - want).abs() <= 1e-12, "trace {} point {}: {} vs {}", i, m, got, want);
                if m.abs_diff(cfg.vibration_point) >= cfg.pulse_width_points {
                    prop_assert_eq!(got, 0.0);
                }
            }
        }
    }

    #[test]
    fn mirroring_twice_restores_the_flipped_subset(
        raw in prop::collection::vec(-TRUNCATION..TRUNCATION, 1..300),
        a in -TRUNCATION..TRUNCATION,
        b in -TRUNCATION..TRUNCATION,
    ) {
        prop_assume!(a != b);
        let spec = AsymmetrySpec::new(a.min(b), a.max(b)).unwrap();
        let mirror = spec.mirrored();
        let x = Sequence::new(raw).unwrap();
        let y = asymmetrize(&x, &spec);
        let z = asymmetrize(&y, &mirror);
        for (&orig, &back) in x.samples().iter().zip(z.samples()) {
            let in_mirror_closure = orig >= mirror.lo() && orig <= mirror.hi();
            if !in_mirror_closure {
                prop_assert_eq!(orig, back);
            }
        }
    }
}
