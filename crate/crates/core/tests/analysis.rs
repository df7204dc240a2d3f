// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use decohere::analysis::stats::{compensated_sum, ks_critical_value, ks_p_value, ks_statistic, mean_and_se};
use decohere::analysis::{law_distance, non_increasing_within_bands, run_ensemble, Bootstrap, Dynamics, EnsembleSpec, Probe};
use decohere::jump::simulate_jump_trajectory;
use decohere::sde::ItoMethod;
use decohere::states::make_gaussian_state;
use decohere::{BathParams, GridSpec, RngStream, Scheme, Sign};

fn spec(dynamics: Dynamics, n: usize, seed: u64, sign: Sign) -> EnsembleSpec {
    let g = GridSpec::new(8.0, 64).unwrap();
    let rho0 = make_gaussian_state(&g, 0.0, 0.0, 0.5).unwrap();
    let params = BathParams::new(1.0, 4.0, 2.0, 25.0, sign).unwrap();
    EnsembleSpec::new(rho0, params, dynamics, vec![0.25, 0.5], n, seed)
}

fn ito() -> Dynamics {
    Dynamics::Sde {
        scheme: Scheme::SdeIto,
        dt: 2e-3,
        n_nodes: 64,
        ito_method: ItoMethod::Milstein,
        free_flow: true,
    }
}

/// Brute-force `sup_x |F_a(x) − F_b(x)|` over all sample points.
fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&x| (cdf(a, x) - cdf(b, x)).abs()).fold(0.0, f64::max)
}

#[test]
fn kolmogorov_tail_reference_values() {
    // Q(1.3581) ≈ 0.05 and Q(1.6276) ≈ 0.01 for the limiting distribution.
    let big = 1_000_000_000usize;
    let d = |lambda: f64| lambda / ((big / 2) as f64).sqrt();
    assert!((ks_p_value(d(1.3581), big, big) - 0.05).abs() < 2e-4);
    assert!((ks_p_value(d(1.6276), big, big) - 0.01).abs() < 1e-4);
    assert!((ks_critical_value(0.05, 100, 100) - 1.3581 * (0.02f64).sqrt()).abs() < 1e-3);
    assert_eq!(ks_p_value(0.0, 50, 50), 1.0);
}

#[test]
fn compensated_sum_recovers_cancelled_mass() {
    let v = [1e16, 1.0, -1e16, 1.0];
    assert_eq!(compensated_sum(v), 2.0);
    let (m, se) = mean_and_se(&[2.0, 4.0]);
    assert_eq!((m, se), (3.0, 1.0));
}

#[test]
fn ensembles_are_reproducible() {
    let dyn_jump = Dynamics::Jump { dt_max: 2e-3 };
    let a = run_ensemble(spec(dyn_jump, 12, 5, Sign::Plus)).unwrap();
    let b = run_ensemble(spec(dyn_jump, 12, 5, Sign::Plus)).unwrap();
    assert_eq!(a, b);
    let c = run_ensemble(spec(dyn_jump, 12, 6, Sign::Plus)).unwrap();
    assert_ne!(a.means, c.means);
}

#[test]
fn single_path_ensemble_is_the_trajectory() {
    let s = spec(Dynamics::Jump { dt_max: 2e-3 }, 1, 9, Sign::Plus);
    let summary = run_ensemble(s.clone()).unwrap();
    let path = simulate_jump_trajectory(&s.rho0, &s.params, &s.sample_times, 2e-3, RngStream::new(9, 0)).unwrap();
    assert_eq!(summary.means, path.records);
    assert!(summary.std_errors.iter().all(|r| r.kinetic_energy == 0.0));
}

#[test]
fn identical_ensembles_have_zero_distance() {
    let a = run_ensemble(spec(ito(), 40, 3, Sign::Plus)).unwrap();
    for p in 0..Probe::defaults().len() {
        let d = law_distance(&a, &a, p, 0.5, None).unwrap();
        assert_eq!(d.ks_statistic, 0.0);
        assert!(d.ks_statistic <= ks_critical_value(0.05, 40, 40));
    }
    assert!(law_distance(&a, &a, 0, 0.3, None).is_err());
    assert!(law_distance(&a, &a, 7, 0.5, None).is_err());
}

#[test]
fn noise_sign_does_not_change_the_law() {
    let plus = run_ensemble(spec(ito(), 400, 100, Sign::Plus)).unwrap();
    let minus = run_ensemble(spec(ito(), 400, 200, Sign::Minus)).unwrap();
    for p in 0..Probe::defaults().len() {
        let d = law_distance(&plus, &minus, p, 0.5, None).unwrap();
        assert!(d.p_value > 0.01, "{}: p = {}", d.observable, d.p_value);
    }
}

#[test]
fn bootstrap_band_brackets_the_statistic() {
    let a = run_ensemble(spec(ito(), 100, 1, Sign::Plus)).unwrap();
    let b = run_ensemble(spec(Dynamics::Jump { dt_max: 2e-3 }, 100, 2, Sign::Plus)).unwrap();
    let boot = Bootstrap { resamples: 200, level: 0.95, seed: 4 };
    let d = law_distance(&a, &b, 0, 0.5, Some(boot)).unwrap();
    let (lo, hi) = d.band.unwrap();
    assert!(lo <= d.ks_statistic && d.ks_statistic <= hi);
    assert_eq!(law_distance(&a, &b, 0, 0.5, Some(boot)).unwrap(), d);
    assert!(non_increasing_within_bands(&[d.clone(), d]));
}

#[test]
fn trend_check_without_bands() {
    let mk = |ks| decohere::analysis::LawDistance {
        observable: "x".into(),
        time: 1.0,
        samples_a: vec![],
        samples_b: vec![],
        ks_statistic: ks,
        p_value: 1.0,
        mean_gap: 0.0,
        mean_gap_se: 0.0,
        band: None,
    };
    assert!(non_increasing_within_bands(&[mk(0.3), mk(0.2), mk(0.2)]));
    assert!(!non_increasing_within_bands(&[mk(0.2), mk(0.3)]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ks_statistic_matches_brute_force(
        a in prop::collection::vec(-5i32..5, 1..40),
        b in prop::collection::vec(-5i32..5, 1..40),
    ) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        prop_assert!((ks_statistic(&a, &b) - ks_brute(&a, &b)).abs() < 1e-15);
    }
}
