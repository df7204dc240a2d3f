// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria 1–10. One line per criterion goes straight to stderr,
//! so the summary is visible even when the harness captures output.
//!
//! `DECOHERE_ACCEPTANCE=1,3,7` restricts the run to the listed criteria.
//! Criterion 10 re-runs whichever of 1–9 were selected.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;

use decohere::analysis::coherence::{annealed_rate, fit_decay_rate, quenched_rate};
use decohere::analysis::ensemble::diagonal_band_mass;
use decohere::analysis::{law_distance, non_increasing_within_bands, property_suite, run_ensemble, Bootstrap, Dynamics, EnsembleSpec, Probe};
use decohere::annealed::{predicted_moments, solve_annealed};
use decohere::collision::{collision_apply, half_erfc};
use decohere::jump::default_dt_max;
use decohere::sde::{noise_covariance, noise_covariance_half_exponent, noise_kappa, ItoMethod, NoiseModel, PairedNoise, SdeIntegrator};
use decohere::states::{make_gaussian_state, random_mixed_state};
use decohere::trajectory::JumpStats;
use decohere::{BathParams, DensityKernel, GridSpec, RngStream, Scheme, Sign, TrajectoryOptions};

// Tolerances.
const KINETIC_REL_TOL: f64 = 1e-4;
const POSITION_REL_TOL: f64 = 1e-3;
const TRACE_TOL: f64 = 1e-13;
const HERMITICITY_TOL: f64 = 1e-12;
const POSITIVITY_FLOOR: f64 = -1e-9;
const BOUND_SLACK: f64 = 1e-12;
const SIGMAS: f64 = 3.0;
const GAP_SHRINK: f64 = 1.5;

// Runtime limits.
const ANNEALED_LIMIT: Duration = Duration::from_secs(60);
const COLLISION_LIMIT: Duration = Duration::from_secs(120);
const PROPERTY_LIMIT: Duration = Duration::from_secs(300);

// Seeds.
const SEED_COLLISIONS: u64 = 3;
const SEED_MEAN_LAWS: u64 = 4;
const SEED_LAW: u64 = 5;
const SEED_SCHEMES: u64 = 6;
const SEED_COVARIANCE: u64 = 7;
const SEED_DECOHERENCE: u64 = 8;
const SEED_PROPERTIES: u64 = 9;

struct Verdict {
    pass: bool,
    /// Failure whose documented cause was confirmed.
    expected_fail: bool,
    lines: Vec<String>,
    /// Statistic compared bit for bit by the reproducibility check.
    stat: Vec<f64>,
}

impl Verdict {
    fn status(&self) -> &'static str {
        match (self.pass, self.expected_fail) {
            (true, _) => "PASS",
            (false, true) => "FAIL (expected)",
            (false, false) => "FAIL",
        }
    }
}

fn emit(line: &str) {
    let mut e = std::io::stderr().lock();
    let _ = writeln!(e, "{line}");
}

fn bath(alpha: f64, rate: f64, sign: Sign) -> BathParams {
    BathParams::new(alpha, 4.0, 2.0, rate, sign).unwrap()
}

fn packet(grid: &GridSpec, width: f64) -> DensityKernel {
    make_gaussian_state(grid, 0.0, 0.0, width).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

// 1 and 2 ----------------------------------------------------------------

const ANNEALED_TIMES: [f64; 3] = [0.5, 1.0, 2.0];

/// Relative errors of the kinetic energy (all times) and the position moment
/// (last time) on a `2L` box with `n` nodes, plus the states.
fn annealed_errors(half_width: f64, n: usize) -> (Vec<f64>, f64, Vec<DensityKernel>, Duration) {
    let g = GridSpec::new(half_width, n).unwrap();
    let rho0 = packet(&g, 0.5);
    let params = bath(1.0, 200.0, Sign::Plus);
    let start = Instant::now();
    let run = solve_annealed(&rho0, &params, &ANNEALED_TIMES, 1e-3).unwrap();
    let elapsed = start.elapsed();
    let (k0, x0, m0) = (rho0.kinetic_energy(), rho0.position_moment(), rho0.mixed_moment());
    // 4α²/β₀ = 2 for α = 1, β₀ = 2.
    let k_err = run.records.iter().map(|r| (r.kinetic_energy / (k0 + 2.0 * r.time) - 1.0).abs()).collect();
    let t = 2.0;
    let x_pred = x0 + m0 * t + k0 * t * t + 2.0 / 3.0 * t * t * t;
    let x_err = (run.records[2].position_moment / x_pred - 1.0).abs();
    (k_err, x_err, run.states, elapsed)
}

fn criterion_1() -> Verdict {
    let (k_err, _, states, elapsed) = annealed_errors(10.0, 256);
    let worst = k_err.iter().copied().fold(0.0, f64::max);
    let pass = worst <= KINETIC_REL_TOL && elapsed <= ANNEALED_LIMIT;
    Verdict {
        pass,
        expected_fail: false,
        lines: vec![format!(
            "annealed kinetic energy vs E0 + 2t at t = 0.5, 1, 2: worst rel err {worst:.2e} (tol {KINETIC_REL_TOL:.0e}), {} (limit {})",
            secs(elapsed),
            secs(ANNEALED_LIMIT)
        )],
        stat: states.iter().map(|s| s.kinetic_energy()).collect(),
    }
}

fn criterion_2() -> Verdict {
    let (_, err, states, _) = annealed_errors(10.0, 256);
    let mut lines = vec![format!(
        "annealed position moment vs cubic law at t = 2 (L = 10, n = 256): rel err {err:.2e} (tol {POSITION_REL_TOL:.0e})"
    )];
    let mut stat: Vec<f64> = states.iter().map(|s| s.position_moment()).collect();
    let pass = err <= POSITION_REL_TOL;
    let mut expected_fail = false;
    if !pass {
        // The packet reaches ⟨X²⟩ ≈ 9.6 at t = 2, so its tails wrap around the
        // periodic box [−10, 10). Refining the grid leaves the error unchanged;
        // widening the box removes it.
        let edge = states[2].boundary_mass(16);
        let (_, fine, _, _) = annealed_errors(10.0, 512);
        let (_, wide, _, _) = annealed_errors(20.0, 512);
        let resolution_independent = (fine - err).abs() <= 1e-2 * err;
        let box_limited = wide <= POSITION_REL_TOL;
        expected_fail = resolution_independent && box_limited && edge > 1e-3;
        lines.push(format!(
            "  cause: periodic wrap-around; edge mass {edge:.2e}, rel err {fine:.2e} at n = 512 (same box), \
             {wide:.2e} at L = 20, n = 512 -> {}",
            if box_limited { "PASS" } else { "FAIL" }
        ));
        if !expected_fail {
            lines.push("  documented cause NOT confirmed".into());
        }
        stat.extend([fine, wide]);
    }
    Verdict { pass, expected_fail, lines, stat }
}

// 3 ----------------------------------------------------------------------

fn criterion_3() -> Verdict {
    let g = GridSpec::new(10.0, 128).unwrap();
    let start = Instant::now();
    let mut worst = [0.0f64; 4]; // trace, hermiticity, −floor, bound ratio
    let mut violations = 0usize;
    for trial in 0..1000u64 {
        let mut rng = RngStream::new(SEED_COLLISIONS, trial).rng();
        let rho = random_mixed_state(&g, 6, &mut rng);
        let alpha = rng.random_range(0.0..1.5);
        let rate = alpha * alpha + rng.random_range(0.5..500.0);
        let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let p = rng.random_range(-3.0..3.0);
        let x = rng.random_range(-6.0..6.0);
        let params = BathParams::new(alpha, 4.0, 2.0, rate, sign).unwrap();
        let out = collision_apply(&rho, p, x, &params).unwrap();
        let tr = (out.trace().unwrap() - rho.trace().unwrap()).abs();
        let herm = out.hermiticity_defect();
        let floor = out.positivity_floor();
        let bound = 2.0 * (alpha * alpha / rate + alpha / rate.sqrt() * (-2.0 * p * p).exp());
        let diff = out.combine(1.0, &rho, -1.0);
        let mut ratio: f64 = 0.0;
        let mut bound_ok = true;
        for q in [1.0, 2.0] {
            let lhs = diff.schatten_norm(q).unwrap();
            let rhs = bound * rho.schatten_norm(q).unwrap();
            bound_ok &= lhs <= rhs + BOUND_SLACK;
            if rhs > 0.0 {
                ratio = ratio.max(lhs / rhs);
            }
        }
        let ok = tr <= TRACE_TOL && herm <= HERMITICITY_TOL && floor >= POSITIVITY_FLOOR && bound_ok;
        violations += usize::from(!ok);
        worst[0] = worst[0].max(tr);
        worst[1] = worst[1].max(herm);
        worst[2] = worst[2].max(-floor);
        worst[3] = worst[3].max(ratio);
    }
    let elapsed = start.elapsed();
    Verdict {
        pass: violations == 0 && elapsed <= COLLISION_LIMIT,
        expected_fail: false,
        lines: vec![format!(
            "collision structure over 1000 draws: {violations} violations; worst trace drift {:.1e}, hermiticity {:.1e}, \
             floor {:.1e}, S_q jump/bound {:.3}; {} (limit {})",
            worst[0],
            worst[1],
            -worst[2],
            worst[3],
            secs(elapsed),
            secs(COLLISION_LIMIT)
        )],
        stat: worst.to_vec(),
    }
}

// 4 ----------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let g = GridSpec::new(16.0, 128).unwrap();
    let rho0 = packet(&g, 0.5);
    let params = bath(1.0, 200.0, Sign::Plus);
    let times = vec![0.5, 1.0, 2.0];
    let spec = EnsembleSpec::new(rho0.clone(), params, Dynamics::Jump { dt_max: default_dt_max(&params) }, times.clone(), 2000, SEED_MEAN_LAWS);
    let start = Instant::now();
    let s = run_ensemble(spec).unwrap();
    let elapsed = start.elapsed();
    let mut pass = s.failures.is_empty();
    let mut lines = vec![format!(
        "jump mean laws, N = 200, M = 2000, grid 128 on [-16, 16): {} s, {} failed paths",
        elapsed.as_secs(),
        s.failures.len()
    )];
    let mut stat = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let (kp, xp) = predicted_moments(&rho0, &params, t).unwrap();
        let (km, ks) = (s.means[k].kinetic_energy, s.std_errors[k].kinetic_energy);
        let (xm, xs) = (s.means[k].position_moment, s.std_errors[k].position_moment);
        let zk = (km - kp) / ks;
        let zx = (xm - xp) / xs;
        pass &= zk.abs() <= SIGMAS && zx.abs() <= SIGMAS;
        lines.push(format!("  t = {t}: K {km:.5} vs {kp:.5} (z = {zk:+.2}), X {xm:.5} vs {xp:.5} (z = {zx:+.2})"));
        stat.extend([km, ks, xm, xs]);
    }
    let annealed = solve_annealed(&rho0, &params, &[1.0], 1e-3).unwrap();
    let k1 = s.time_index(1.0).unwrap();
    let dist = s.mean_kernels.as_ref().unwrap()[k1].combine(1.0, &annealed.states[0], -1.0).hilbert_schmidt_norm();
    let se = s.kernel_std_errors.as_ref().unwrap()[k1];
    pass &= dist <= SIGMAS * se;
    lines.push(format!("  t = 1: ||mean kernel - annealed||_S2 = {dist:.3e}, {:.2} standard errors", dist / se));
    stat.extend([dist, se]);
    Verdict { pass, expected_fail: false, lines, stat }
}

// 5 ----------------------------------------------------------------------

fn criterion_5() -> Verdict {
    let g = GridSpec::new(10.0, 128).unwrap();
    let rho0 = packet(&g, 0.5);
    let rates = [25.0, 100.0, 400.0];
    let m = 1000;
    let sde = Dynamics::Sde { scheme: Scheme::SdeIto, dt: 1e-3, n_nodes: 64, ito_method: ItoMethod::Milstein, free_flow: true };
    let reference = run_ensemble(EnsembleSpec::new(rho0.clone(), bath(1.0, rates[0], Sign::Plus), sde, vec![1.0], m, SEED_LAW)).unwrap();
    let mut pass = reference.failures.is_empty();
    let mut lines = Vec::new();
    let mut stat = Vec::new();
    let mut per_probe: Vec<Vec<_>> = vec![Vec::new(); Probe::defaults().len()];
    for (k, &n) in rates.iter().enumerate() {
        let params = bath(1.0, n, Sign::Plus);
        let mut spec = EnsembleSpec::new(rho0.clone(), params, Dynamics::Jump { dt_max: default_dt_max(&params) }, vec![1.0], m, SEED_LAW + 1 + k as u64);
        spec.mean_kernels = false;
        spec.s1_jump_paths = 10;
        let jumps = run_ensemble(spec).unwrap();
        pass &= jumps.failures.is_empty();
        let s2 = jumps.max_jump_s2_ratio().unwrap();
        let s1 = jumps.max_jump_s1_ratio().unwrap();
        let bound_ok = s2 <= 1.0 && s1 <= 1.0 + 1e-9 && jumps.max_jump_s2().unwrap() <= JumpStats::pathwise_bound(&params);
        pass &= bound_ok;
        let mut cells = Vec::new();
        for (p, seq) in per_probe.iter_mut().enumerate() {
            let boot = Bootstrap { resamples: 200, level: 0.95, seed: SEED_LAW + 1000 + (k * 16 + p) as u64 };
            let d = law_distance(&jumps, &reference, p, 1.0, Some(boot)).unwrap();
            let (lo, hi) = d.band.unwrap();
            cells.push(format!("{:.3} [{lo:.3}, {hi:.3}]", d.ks_statistic));
            stat.extend([d.ks_statistic, lo, hi]);
            seq.push(d);
        }
        stat.extend([s1, s2]);
        lines.push(format!(
            "  N = {n:>3}: KS {}; max jump/bound S2 {s2:.3}, S1 {s1:.3}{}",
            cells.join(", "),
            if bound_ok { "" } else { " BOUND VIOLATED" }
        ));
    }
    let trends: Vec<bool> = per_probe.iter().map(|seq| non_increasing_within_bands(seq)).collect();
    pass &= trends.iter().all(|&b| b);
    lines.insert(
        0,
        format!(
            "KS(jump, sde-ito) at t = 1, M = {m}, grid 128: non-increasing within 95% bootstrap bands per probe: {:?}",
            trends
        ),
    );
    Verdict { pass, expected_fail: false, lines, stat }
}

// 6 ----------------------------------------------------------------------

fn scheme_gap(integ: &SdeIntegrator, rho0: &DensityKernel, dt: f64, stream: RngStream) -> f64 {
    let opts = TrajectoryOptions { keep_snapshots: true, ..Default::default() };
    let run = |scheme| {
        let mut rng = stream.rng();
        let r = if dt > 1e-3 {
            integ.simulate_with_source(rho0, &[1.0], dt, scheme, stream, &opts, &mut PairedNoise::new(rng))
        } else {
            integ.simulate_with_source(rho0, &[1.0], dt, scheme, stream, &opts, &mut rng)
        };
        r.unwrap().snapshots.unwrap().remove(0)
    };
    run(Scheme::SdeIto).combine(1.0, &run(Scheme::SdeStrat), -1.0).hilbert_schmidt_norm()
}

fn criterion_6() -> Verdict {
    let g = GridSpec::new(10.0, 128).unwrap();
    let rho0 = packet(&g, 0.5);
    let mut pass = true;
    let mut lines = vec!["Ito vs Stratonovich terminal S2 gap at t = 1, shared Brownian path, dt 2e-3 -> 1e-3:".to_string()];
    let mut stat = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        let params = bath(1.0, 200.0, sign);
        let integ = SdeIntegrator::new(NoiseModel::new(&g, &params, 64).unwrap());
        let stream = RngStream::new(SEED_SCHEMES, 0);
        let coarse = scheme_gap(&integ, &rho0, 2e-3, stream);
        let fine = scheme_gap(&integ, &rho0, 1e-3, stream);
        let ratio = coarse / fine;
        pass &= ratio >= GAP_SHRINK;
        lines.push(format!("  sign {:+}: {coarse:.3e} -> {fine:.3e}, shrink x{ratio:.2} (need >= {GAP_SHRINK})", sign.value()));
        stat.extend([coarse, fine]);
    }
    Verdict { pass, expected_fail: false, lines, stat }
}

// 7 ----------------------------------------------------------------------

const COVARIANCE_PAIRS: [(f64, f64); 5] = [(0.0, 0.0), (0.0, 1.0), (-1.0, 1.0), (0.5, 2.0), (-2.0, -0.5)];

fn criterion_7() -> Verdict {
    let g = GridSpec::new(8.0, 128).unwrap();
    let node = |x: f64| ((x + g.half_width()) / g.spacing()).round() as usize;
    let draws = 10_000;
    let dt = 1e-3;
    let mut pass = true;
    let mut lines = vec![format!("noise covariance from {draws} increments vs kappa^2 * int gamma gamma (3 SE):")];
    let mut stat = Vec::new();
    for (s, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let params = bath(1.0, 200.0, sign);
        let model = NoiseModel::new(&g, &params, 64).unwrap();
        let mut rng = RngStream::new(SEED_COVARIANCE, s as u64).rng();
        let mut products = vec![Vec::with_capacity(draws); COVARIANCE_PAIRS.len()];
        for _ in 0..draws {
            let inc = model.sample_increment(&mut rng, dt);
            for (k, &(x, y)) in COVARIANCE_PAIRS.iter().enumerate() {
                products[k].push(inc.field[node(x)] * inc.field[node(y)] / dt);
            }
        }
        for (k, &(x, y)) in COVARIANCE_PAIRS.iter().enumerate() {
            let (emp, se) = decohere::analysis::stats::mean_and_se(&products[k]);
            let exact = noise_covariance(x, y, &params);
            let alt = noise_covariance_half_exponent(x, y, &params);
            let z = (emp - exact) / se;
            pass &= z.abs() <= SIGMAS;
            let exponent = if x != y {
                // emp = κ²√π e^{−c (X−X')²} (erfc_½(−R−m) − erfc_½(R−m))
                let m = 0.5 * (x + y);
                let r = params.cutoff();
                let base = noise_kappa(&params).powi(2) * std::f64::consts::PI.sqrt() * (half_erfc(-r - m) - half_erfc(r - m));
                format!(", fitted exponent {:.3} (quadrature 0.25, e^(-Y^2/2) form 0.5)", -(emp / base).ln() / ((x - y) * (x - y)))
            } else {
                String::new()
            };
            lines.push(format!(
                "  sign {:+} ({x:+}, {y:+}): {emp:.5e} vs {exact:.5e} (z = {z:+.2}); e^(-Y^2/2) form {alt:.5e} (z = {:+.1}){exponent}",
                sign.value(),
                (emp - alt) / se
            ));
            stat.extend([emp, se]);
        }
    }
    Verdict { pass, expected_fail: false, lines, stat }
}

// 8 ----------------------------------------------------------------------

fn criterion_8() -> Verdict {
    let g = GridSpec::new(8.0, 64).unwrap();
    let rho0 = packet(&g, 1.0);
    let d = 4; // Y = d·h = 1
    let y = d as f64 * g.spacing();
    let times = vec![0.25, 0.5, 0.75, 1.0];
    let dynamics = Dynamics::Sde { scheme: Scheme::SdeStrat, dt: 1e-3, n_nodes: 64, ito_method: ItoMethod::Milstein, free_flow: false };
    let base = diagonal_band_mass(&rho0, d);
    let mut pass = true;
    let mut lines = vec![format!("quenched vs annealed decoherence at Y = {y}, Stratonovich ensemble M = 1000, H0 switched off:")];
    let mut stat = Vec::new();
    for (s, sign) in [Sign::Plus, Sign::Minus].into_iter().enumerate() {
        let params = bath(1.0, 200.0, sign);
        let mut spec = EnsembleSpec::new(rho0.clone(), params, dynamics, times.clone(), 1000, SEED_DECOHERENCE + s as u64);
        spec.coherence_offsets = vec![d];
        spec.mean_kernels = false;
        let summary = run_ensemble(spec).unwrap();
        let rates: Vec<f64> = summary
            .paths
            .iter()
            .map(|p| fit_decay_rate(&times, &p.coherence[0].iter().map(|c| c / base).collect::<Vec<_>>()))
            .collect();
        let (mean, se) = decohere::analysis::stats::mean_and_se(&rates);
        let annealed = annealed_rate(y, &params);
        let z = (annealed - mean) / se;
        pass &= summary.failures.is_empty() && z >= SIGMAS;
        lines.push(format!(
            "  sign {:+}: fitted {mean:.5} +- {se:.1e}, annealed {annealed:.5}, predicted quenched {:.5}; gap {:.1} sigma",
            sign.value(),
            quenched_rate(d, &rho0, &params),
            z
        ));
        stat.extend([mean, se]);
    }
    Verdict { pass, expected_fail: false, lines, stat }
}

// 9 ----------------------------------------------------------------------

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let report = property_suite(1000, RngStream::new(SEED_PROPERTIES, 0)).unwrap();
    let elapsed = start.elapsed();
    let mut lines = vec![format!(
        "property suite: 1000 trials, {} evaluations, {} violations; {} (limit {})",
        report.evaluations(),
        report.violations(),
        secs(elapsed),
        secs(PROPERTY_LIMIT)
    )];
    for c in report.checks.iter().filter(|c| c.violations > 0) {
        lines.push(format!("  {}: {} violations, worst {:.3e}", c.name, c.violations, c.worst));
    }
    Verdict {
        pass: report.violations() == 0 && elapsed <= PROPERTY_LIMIT,
        expected_fail: false,
        stat: report.checks.iter().flat_map(|c| [c.worst, c.evaluations as f64]).collect(),
        lines,
    }
}

// -------------------------------------------------------------------------

const CRITERIA: [(u8, fn() -> Verdict); 9] = [
    (1, criterion_1),
    (2, criterion_2),
    (3, criterion_3),
    (4, criterion_4),
    (5, criterion_5),
    (6, criterion_6),
    (7, criterion_7),
    (8, criterion_8),
    (9, criterion_9),
];

fn selected() -> Vec<u8> {
    match std::env::var("DECOHERE_ACCEPTANCE") {
        Ok(s) if !s.trim().is_empty() => s.split(',').map(|v| v.trim().parse().expect("criterion number")).collect(),
        _ => (1..=10).collect(),
    }
}

fn print(id: u8, v: &Verdict) {
    emit(&format!("criterion {id:>2}  {:<15} {}", v.status(), v.lines[0]));
    for l in &v.lines[1..] {
        emit(&format!("{:>28}{l}", ""));
    }
}

#[test]
fn acceptance_criteria() {
    let chosen = selected();
    let mut results: Vec<(u8, Verdict)> = Vec::new();
    for (id, f) in CRITERIA {
        if chosen.contains(&id) {
            let v = f();
            print(id, &v);
            results.push((id, v));
        }
    }

    if chosen.contains(&10) {
        // Re-run in a pool with a different thread count; every statistic
        // must come back with identical bits.
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let mut mismatched = Vec::new();
        for (id, first) in &results {
            let f = CRITERIA.iter().find(|(k, _)| k == id).unwrap().1;
            let again = pool.install(f);
            let same = first.stat.len() == again.stat.len()
                && first.stat.iter().zip(&again.stat).all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                mismatched.push(*id);
            }
        }
        let ids: Vec<u8> = results.iter().map(|(id, _)| *id).collect();
        let v = Verdict {
            pass: mismatched.is_empty() && !ids.is_empty(),
            expected_fail: false,
            lines: vec![format!(
                "reproducibility: criteria {ids:?} re-run with the same seeds on 3 threads; bit-exact mismatches: {mismatched:?}"
            )],
            stat: Vec::new(),
        };
        print(10, &v);
        results.push((10, v));
    }

    let failed: Vec<u8> = results.iter().filter(|(_, v)| !v.pass && !v.expected_fail).map(|(id, _)| *id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
