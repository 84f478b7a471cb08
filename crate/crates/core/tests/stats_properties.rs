use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use hocdvs_core::experiment::snr2_over_seeds;
use hocdvs_core::stats::{
    center, histogram, power, snr_db, third_cumulant_lagged, third_cumulant_zero_lag,
};
use hocdvs_core::synth::gen_gaussian;
use hocdvs_core::{LagPair, Sequence};

fn naive_lagged(x: &[f64], tau1: usize, tau2: usize) -> f64 {
    let n = x.len();
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if j == i + tau1 && k == i + tau2 {
                    sum += x[i] * x[j] * x[k];
                    count += 1;
                }
            }
        }
    }
    sum / count as f64
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

proptest! {
    #[test]
    fn lagged_estimator_matches_triple_loop(
        raw in prop::collection::vec(-5.0f64..5.0, 9..=64),
        tau1 in 0usize..=8,
        tau2 in 0usize..=8,
    ) {
        let x = center(&Sequence::new(raw).unwrap());
        let got = third_cumulant_lagged(&x, LagPair::new(tau1, tau2)).unwrap();
        let want = naive_lagged(x.samples(), tau1, tau2);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs(), "{} vs {}", got, want);
    }

    #[test]
    fn odd_symmetric_data_has_zero_cumulant(raw in prop::collection::vec(-100.0f64..100.0, 1..200)) {
        let max = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut both = raw.clone();
        both.extend(raw.iter().map(|v| -v));
        let c3 = third_cumulant_zero_lag(&center(&Sequence::new(both).unwrap())).unwrap();
        prop_assert!(c3.abs() <= 1e-12 * max.powi(3).max(f64::MIN_POSITIVE), "{}", c3);
    }

    #[test]
    fn zero_lag_cumulant_scales_cubically(
        raw in prop::collection::vec(-10.0f64..10.0, 2..200),
        a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0],
    ) {
        let x = center(&Sequence::new(raw).unwrap());
        let base = third_cumulant_zero_lag(&x).unwrap();
        let scaled = third_cumulant_zero_lag(&x.scaled(a)).unwrap();
        let want = a.powi(3) * base;
        prop_assert!((scaled - want).abs() <= 1e-12 * want.abs().max(1e-300), "{} vs {}", scaled, want);
    }

    #[test]
    fn equal_powers_are_zero_db(p in 1e-12f64..1e12) {
        prop_assert_eq!(snr_db(p, p).unwrap(), 0.0);
    }

    #[test]
    fn snr_db_increases_with_signal_power(p1 in 1e-9f64..1e9, factor in 1.000001f64..1e3, pn in 1e-6f64..1e6) {
        prop_assert!(snr_db(p1 * factor, pn).unwrap() > snr_db(p1, pn).unwrap());
    }

    #[test]
    fn histogram_ignores_sample_order(
        raw in prop::collection::vec(-4.0f64..4.0, 1..300),
        bins in 1usize..40,
        shuffle_seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let mut shuffled = raw.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let a = histogram(&Sequence::new(raw).unwrap(), bins, -3.0, 3.0).unwrap();
        let b = histogram(&Sequence::new(shuffled).unwrap(), bins, -3.0, 3.0).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn exponential_third_cumulant_is_two_over_lambda_cubed() {
    let lambda = 2.0;
    let exp = Exp::new(lambda).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let raw: Vec<f64> = (0..1_000_000).map(|_| exp.sample(&mut rng)).collect();
    let x = center(&Sequence::new(raw).unwrap());
    let c3 = third_cumulant_zero_lag(&x).unwrap();
    let cubes: Vec<f64> = x.samples().iter().map(|v| v.powi(3)).collect();
    let (_, sd) = mean_sd(&cubes);
    let se = sd / (cubes.len() as f64).sqrt();
    let want = 2.0 / lambda.powi(3);
    assert!((c3 - want).abs() < 4.0 * se, "c3 {c3}, want {want}, se {se}");
}

#[test]
fn gaussian_zero_lag_null_over_seeds() {
    let c3: Vec<f64> = (0..200u64)
        .map(|s| third_cumulant_zero_lag(&center(&gen_gaussian(100_000, s, 0).unwrap())).unwrap())
        .collect();
    let (mean, sd) = mean_sd(&c3);
    assert!(mean.abs() < 4.0 * sd / (c3.len() as f64).sqrt(), "{mean}");
}

#[test]
fn gaussian_lagged_null_within_bootstrap_error() {
    use rand::Rng;
    let x = center(&gen_gaussian(50_000, 5, 0).unwrap());
    let s = x.samples();
    for (t1, t2) in [(0, 0), (1, 0), (1, 3), (4, 2), (8, 8)] {
        let est = third_cumulant_lagged(&x, LagPair::new(t1, t2)).unwrap();
        let terms: Vec<f64> = (0..s.len() - t1.max(t2))
            .map(|t| s[t] * s[t + t1] * s[t + t2])
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let boots: Vec<f64> = (0..200)
            .map(|_| {
                (0..terms.len())
                    .map(|_| terms[rng.random_range(0..terms.len())])
                    .sum::<f64>()
                    / terms.len() as f64
            })
            .collect();
        let (_, se) = mean_sd(&boots);
        assert!(est.abs() < 4.0 * se, "lags ({t1},{t2}): {est} vs se {se}");
    }
}

#[test]
fn ten_percent_duty_beats_zero_db() {
    let seeds: Vec<u64> = (0..2000).collect();
    let stats = snr2_over_seeds(120, 0.1, 0.0, &seeds).unwrap();
    assert!(stats.mean_snr2_db > 0.0, "{stats:?}");
}

#[test]
fn power_of_centered_gaussian_is_near_one() {
    let x = center(&gen_gaussian(200_000, 3, 0).unwrap());
    assert!((power(&x) - 1.0).abs() < 0.02);
}
