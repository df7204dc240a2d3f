// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Decay of the off-diagonal part of the kernel as a function of the
//! separation `Y = X − X'`.

use serde::{Deserialize, Serialize};

use crate::analysis::ensemble::diagonal_band_mass;
use crate::collision::{gamma_inf_kernel, theta_inf, BathParams};
use crate::kernel::DensityKernel;

/// Relative coherence at each separation `Y_d = d·h`, `d = 0..=n/2`:
/// `Σ_i |ρ_t(X_{i+d}, X_i)| / Σ_i |ρ_0(X_{i+d}, X_i)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProfile {
    pub separations: Vec<f64>,
    pub ratios: Vec<f64>,
}

pub fn coherence_profile(rho: &DensityKernel, rho0: &DensityKernel) -> CoherenceProfile {
    let n = rho.n();
    let h = rho.grid().spacing();
    let mut separations = Vec::with_capacity(n / 2 + 1);
    let mut ratios = Vec::with_capacity(n / 2 + 1);
    for d in 0..=n / 2 {
        let base = diagonal_band_mass(rho0, d);
        separations.push(d as f64 * h);
        ratios.push(if base > 0.0 {
            diagonal_band_mass(rho, d) / base
        } else {
            f64::NAN
        });
    }
    CoherenceProfile { separations, ratios }
}

/// Least-squares rate `λ` of `r(t) = e^{−λt}` through the origin of
/// `(t, −ln r)`.
pub fn fit_decay_rate(times: &[f64], ratios: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (&t, &r) in times.iter().zip(ratios) {
        num += -t * r.ln();
        den += t * t;
    }
    num / den
}

/// Annealed decay rate `α²(1 − θ_∞(Y))`.
pub fn annealed_rate(y: f64, params: &BathParams) -> f64 {
    params.alpha() * params.alpha() * (1.0 - theta_inf(y, params.beta0()))
}

/// Quenched decay rate `α²(1 − θ_∞(Y) − γ̄_∞(Y))`, where `γ̄_∞` is the
/// average of `γ_∞(X_{i+d}, X_i)` weighted by `|ρ_0(X_{i+d}, X_i)|`.
pub fn quenched_rate(d: usize, rho0: &DensityKernel, params: &BathParams) -> f64 {
    let grid = rho0.grid();
    let n = grid.n_points();
    let k = gamma_inf_kernel(grid, params);
    let v = rho0.values();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n.saturating_sub(d) {
        let w = v[(i + d, i)].norm();
        num += w * k.get(i + d, i).re;
        den += w;
    }
    let y = d as f64 * grid.spacing();
    annealed_rate(y, params) - params.alpha() * params.alpha() * num / den
}
