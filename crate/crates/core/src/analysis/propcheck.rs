// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Randomized checks of the operator identities and inequalities that the
//! dynamics rely on: Schatten norms of rank-one operators and projector
//! differences, the mixed-moment Cauchy–Schwarz bound, invariance and
//! contraction of Schatten norms, the moment identities for multipliers
//! `θ[ρ]`, and the free-flow moment laws.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{gamma, theta_inf_multiplier, theta_p_multiplier, BathParams, KernelMultiplier, Sign};
use crate::environment::RngStream;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{lp_norm, DensityKernel};
use crate::propagate::free_evolve;
use crate::states::{inner, normalize, random_mixed_state, random_smooth_wave, wave_norm};

/// Tolerance of equality checks, relative to `max(1, |rhs|)`.
pub const EQUALITY_TOLERANCE: f64 = 1e-8;
/// Slack of inequality checks.
pub const INEQUALITY_SLACK: f64 = 1e-10;
/// Tolerance of the finite-difference checks of the free flow.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-5;
/// Step of the centered differences.
pub const DERIVATIVE_STEP: f64 = 1e-4;

const SCHATTEN_EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
const MAX_STORED_STATES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Equality,
    Inequality,
    Derivative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub kind: CheckKind,
    pub evaluations: usize,
    pub violations: usize,
    /// Largest `(lhs − rhs)/max(1,|rhs|)` for inequalities, largest
    /// `|lhs − rhs|/max(1,|rhs|)` otherwise.
    pub worst: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub check: String,
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
    pub state: Option<DensityKernel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyReport {
    pub grid: GridSpec,
    pub trials: usize,
    pub rng: RngStream,
    pub checks: Vec<CheckSummary>,
    pub counterexamples: Vec<Counterexample>,
}

impl PropertyReport {
    pub fn violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn evaluations(&self) -> usize {
        self.checks.iter().map(|c| c.evaluations).sum()
    }

    /// Human-readable table, one line per check.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<36} {:>11} {:>11} {:>10} {:>12}\n",
            "check", "kind", "evaluations", "violations", "worst"
        );
        for c in &self.checks {
            s.push_str(&format!(
                "{:<36} {:>11} {:>11} {:>10} {:>12.3e}\n",
                c.name,
                format!("{:?}", c.kind).to_lowercase(),
                c.evaluations,
                c.violations,
                c.worst
            ));
        }
        s
    }
}

/// Default grid of the suite: 128 nodes on `[−10, 10)`.
pub fn default_property_grid() -> GridSpec {
    GridSpec::new(10.0, 128).expect("valid grid")
}

pub fn property_suite(trials: usize, rng: RngStream) -> Result<PropertyReport> {
    property_suite_on(&default_property_grid(), trials, rng)
}

pub fn property_suite_on(grid: &GridSpec, trials: usize, stream: RngStream) -> Result<PropertyReport> {
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("property suite needs at least 100 trials, got {trials}")));
    }
    let mut ledger = Ledger::default();
    let mut rng = stream.rng();
    for trial in 0..trials {
        run_trial(grid, trial, &mut rng, &mut ledger);
    }
    Ok(PropertyReport {
        grid: grid.clone(),
        trials,
        rng: stream,
        checks: ledger.checks,
        counterexamples: ledger.counterexamples,
    })
}

#[derive(Default)]
struct Ledger {
    checks: Vec<CheckSummary>,
    counterexamples: Vec<Counterexample>,
}

impl Ledger {
    fn entry(&mut self, name: &str, kind: CheckKind) -> &mut CheckSummary {
        if let Some(i) = self.checks.iter().position(|c| c.name == name) {
            return &mut self.checks[i];
        }
        self.checks.push(CheckSummary {
            name: name.to_string(),
            kind,
            evaluations: 0,
            violations: 0,
            worst: 0.0,
        });
        self.checks.last_mut().unwrap()
    }

    #[allow(clippy::too_many_arguments)]
    fn check(
        &mut self,
        name: &str,
        kind: CheckKind,
        trial: usize,
        lhs: f64,
        rhs: f64,
        detail: impl FnOnce() -> String,
        state: Option<&DensityKernel>,
    ) {
        let scale = rhs.abs().max(1.0);
        let (margin, ok) = match kind {
            CheckKind::Equality => {
                let m = (lhs - rhs).abs() / scale;
                (m, m <= EQUALITY_TOLERANCE)
            }
            CheckKind::Inequality => {
                let m = (lhs - rhs) / scale;
                (m, lhs <= rhs + INEQUALITY_SLACK)
            }
            CheckKind::Derivative => {
                let m = (lhs - rhs).abs() / scale;
                (m, m <= DERIVATIVE_TOLERANCE)
            }
        };
        let ok = ok && lhs.is_finite() && rhs.is_finite();
        let e = self.entry(name, kind);
        e.evaluations += 1;
        if e.evaluations == 1 || margin > e.worst {
            e.worst = margin;
        }
        if !ok {
            e.violations += 1;
            let keep = self.counterexamples.len() < MAX_STORED_STATES;
            self.counterexamples.push(Counterexample {
                check: name.to_string(),
                trial,
                lhs,
                rhs,
                detail: detail(),
                state: if keep { state.cloned() } else { None },
            });
        }
    }
}

/// Range of `β₀` drawn for the multiplier checks. The width of `θ_∞` is
/// `√β₀/2`. Holding it above 2.5 grid spacings keeps the Fourier tail
/// `e^{−k²β₀/8}` at the grid cutoff `π/Δx` below `e^{−30}`; narrower kernels
/// alias and break the discrete moment identities.
fn beta0_range(grid: &GridSpec) -> std::ops::Range<f64> {
    let lo = (5.0 * grid.spacing()).powi(2).clamp(0.01, 3.0);
    lo..3.8
}

fn schatten_all(sv: &[f64]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (o, &p) in out.iter_mut().zip(&SCHATTEN_EXPONENTS) {
        *o = lp_norm(sv, p);
    }
    out
}

fn norms(k: &DensityKernel) -> [f64; 5] {
    schatten_all(k.singular_values().as_slice())
}

/// Non-Hermitian test kernel: a mixed state twisted by a random phase on one
/// side plus a rank-one term.
fn random_general_kernel(grid: &GridSpec, rng: &mut ChaCha8Rng) -> DensityKernel {
    let rho = random_mixed_state(grid, 8, rng);
    let a = rng.random_range(-2.0..2.0);
    let b = rng.random_range(-1.0..1.0);
    let phi = random_smooth_wave(grid, 1.0, rng);
    let psi = random_smooth_wave(grid, 1.0, rng);
    let c = rng.random_range(0.0..0.5);
    let mut k = rho.clone();
    let xs = grid.positions();
    let v = k.values_mut();
    for j in 0..xs.len() {
        for i in 0..xs.len() {
            v[(i, j)] = v[(i, j)] * Complex64::from_polar(1.0, a * xs[i] + b * xs[i] * xs[i])
                + phi[i] * psi[j].conj() * c;
        }
    }
    k
}

fn run_trial(grid: &GridSpec, trial: usize, rng: &mut ChaCha8Rng, led: &mut Ledger) {
    use CheckKind::*;
    let xs = grid.positions();
    let spread = (grid.half_width() - 8.5).clamp(0.5, 3.0);

    // Rank-one operators.
    let mut phi = random_smooth_wave(grid, spread, rng);
    let mut psi = random_smooth_wave(grid, spread, rng);
    let sa = rng.random_range(0.2..3.0);
    let sb = rng.random_range(0.2..3.0);
    phi.iter_mut().for_each(|z| *z *= sa);
    psi.iter_mut().for_each(|z| *z *= sb);
    let rank_one = DensityKernel::outer(grid, &phi, &psi);
    let expect = wave_norm(grid, &phi) * wave_norm(grid, &psi);
    for (p, v) in SCHATTEN_EXPONENTS.iter().zip(norms(&rank_one)) {
        led.check("rank-one-norm", Equality, trial, v, expect, || format!("p = {p}"), None);
    }

    // Difference of two projectors.
    normalize(grid, &mut phi);
    normalize(grid, &mut psi);
    match trial % 10 {
        0 => {
            // make ψ orthogonal to φ
            let o = inner(grid, &phi, &psi);
            for (a, b) in psi.iter_mut().zip(&phi) {
                *a -= o * b;
            }
            normalize(grid, &mut psi);
        }
        1 => psi.clone_from(&phi),
        _ => {}
    }
    // 1 − |⟨φ|ψ⟩|² as the squared norm of the part of ψ orthogonal to φ,
    // which stays accurate when ψ ≈ φ.
    let o = inner(grid, &phi, &psi);
    let perp: Vec<Complex64> = psi.iter().zip(&phi).map(|(b, a)| b - o * a).collect();
    let overlap = o.norm_sqr();
    let gap = wave_norm(grid, &perp).powi(2);
    let dist: f64 = phi.iter().zip(&psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * grid.spacing();
    let diff = DensityKernel::outer(grid, &phi, &phi).combine(1.0, &DensityKernel::outer(grid, &psi, &psi), -1.0);
    for (p, v) in SCHATTEN_EXPONENTS.iter().zip(norms(&diff)) {
        let c = if p.is_infinite() { 1.0 } else { 2f64.powf(1.0 / p) };
        let rhs = c * gap.sqrt();
        led.check("projector-distance", Equality, trial, v, rhs, || format!("p = {p}, |<φ|ψ>|² = {overlap}"), None);
        led.check("projector-distance-bound", Inequality, trial, v, c * dist.sqrt(), || format!("p = {p}"), None);
    }

    // Mixed moment against position and kinetic moments.
    let rho = random_mixed_state(grid, 8, rng);
    let kin = rho.kinetic_energy();
    let (ga, gb, gc, gd) = (
        rng.random_range(0.5..3.0),
        rng.random_range(0.2..2.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-1.0..1.0),
    );
    let g = move |x: f64| ga * (gb * x + gc).sin() + gd;
    for (label, lhs, gg) in [
        ("g(X) = X", rho.mixed_moment(), rho.position_moment()),
        ("g(X) = a sin(bX + c) + d", rho.mixed_moment_with(g), rho.diagonal_weighted(|x| g(x) * g(x))),
    ] {
        led.check(
            "mixed-moment-bound",
            Inequality,
            trial,
            lhs.abs(),
            2.0 * (gg * kin).max(0.0).sqrt(),
            || label.to_string(),
            Some(&rho),
        );
    }

    // Schatten norms: adjoint, isometries, multipliers.
    let sigma = random_general_kernel(grid, rng);
    let base = norms(&sigma);
    for (p, (a, b)) in SCHATTEN_EXPONENTS.iter().zip(norms(&sigma.adjoint()).iter().zip(base)) {
        led.check("adjoint-invariance", Equality, trial, *a, b, || format!("p = {p}"), None);
    }
    let t = rng.random_range(0.0..2.0);
    let chi_a = rng.random_range(-3.0..3.0);
    let phase = KernelMultiplier::from_fn(grid, |i, j| Complex64::from_polar(1.0, chi_a * ((xs[i]).sin() - (xs[j]).sin())));
    for (label, u) in [("free flow", free_evolve(&sigma, t)), ("phase multiplication", phase.apply(&sigma))] {
        for (p, (a, b)) in SCHATTEN_EXPONENTS.iter().zip(norms(&u).iter().zip(base)) {
            led.check("isometry-invariance", Equality, trial, *a, b, || format!("{label}, p = {p}"), None);
        }
    }
    let pm = rng.random_range(-3.0..3.0);
    let beta0 = rng.random_range(beta0_range(grid));
    let bath = BathParams::new(1.0, 4.0, beta0, 10.0, Sign::Plus).expect("valid bath");
    let theta_p = theta_p_multiplier(grid, pm);
    let theta_i = theta_inf_multiplier(grid, &bath);
    for (label, m) in [("theta_p", &theta_p), ("theta_inf", &theta_i)] {
        for (p, (a, b)) in SCHATTEN_EXPONENTS.iter().zip(norms(&m.apply(&sigma)).iter().zip(base)) {
            led.check("multiplier-contraction", Inequality, trial, *a, b, || format!("{label}, p = {p}"), None);
        }
    }
    let amp = rng.random_range(0.1..2.0);
    let x0 = rng.random_range(-4.0..4.0);
    let gam: Vec<f64> = xs.iter().map(|&x| amp * gamma(x - x0)).collect();
    let left = KernelMultiplier::from_fn(grid, |i, _| Complex64::new(gam[i], 0.0));
    let right = KernelMultiplier::from_fn(grid, |_, j| Complex64::new(gam[j], 0.0));
    for (label, m) in [("left", &left), ("right", &right)] {
        for (p, (a, b)) in SCHATTEN_EXPONENTS.iter().zip(norms(&m.apply(&sigma)).iter().zip(base)) {
            led.check("bounded-multiplication", Inequality, trial, *a, amp * b, || format!("{label}, p = {p}"), None);
        }
    }

    // Moments of θ[ρ] for θ_p (θ(0)=1, θ'(0)=2ip, θ''(0)=−(1+4p²)) and θ_∞
    // (θ(0)=1, θ'(0)=0, θ''(0)=−4/β₀).
    let tr = rho.trace_complex().re;
    let mean_p = rho.mean_momentum();
    let mean_x = rho.diagonal_weighted(|x| x);
    let xx = rho.position_moment();
    let mix = rho.mixed_moment();
    for (label, m, dk, dm) in [
        ("theta_p", &theta_p, 4.0 * pm * mean_p + (1.0 + 4.0 * pm * pm) * tr, 4.0 * pm * mean_x),
        ("theta_inf", &theta_i, 4.0 / beta0 * tr, 0.0),
    ] {
        let out = m.apply(&rho);
        let info = || format!("{label}, p = {pm}, beta0 = {beta0}");
        led.check("position-moment-under-multiplier", Equality, trial, out.position_moment(), xx, info, Some(&rho));
        led.check("kinetic-energy-under-multiplier", Equality, trial, out.kinetic_energy(), kin + dk, info, Some(&rho));
        led.check("mixed-moment-under-multiplier", Equality, trial, out.mixed_moment(), mix + dm, info, Some(&rho));
    }

    // Free flow: derivatives of the moments and distance to the start.
    let t0 = rng.random_range(0.0..0.5);
    let h = DERIVATIVE_STEP;
    let at = free_evolve(&rho, t0);
    let plus = free_evolve(&at, h);
    let minus = free_evolve(&at, -h);
    let d_xx = (plus.position_moment() - minus.position_moment()) / (2.0 * h);
    let d_mix = (plus.mixed_moment() - minus.mixed_moment()) / (2.0 * h);
    let info = || format!("t = {t0}");
    led.check("free-flow-position-derivative", Derivative, trial, d_xx, at.mixed_moment(), info, Some(&rho));
    led.check("free-flow-mixed-derivative", Derivative, trial, d_mix, 2.0 * at.kinetic_energy(), info, Some(&rho));
    for t in [0.01, 0.1, 1.0] {
        let d = free_evolve(&rho, t).combine(1.0, &rho, -1.0);
        let s1: f64 = d.eigenvalues().iter().map(|v| v.abs()).sum();
        led.check(
            "free-flow-distance",
            Inequality,
            trial,
            s1,
            2.0 * (kin * t).sqrt(),
            || format!("t = {t}"),
            Some(&rho),
        );
    }
}
