// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Initial states and random test states.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::DensityKernel;

/// Normalized Gaussian wave packet
/// `ψ(X) ∝ exp(−(X−c)²/(4σ²) + i p X)` sampled on the grid.
pub fn gaussian_wave(grid: &GridSpec, center: f64, momentum: f64, width: f64) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| {
            let a = -(x - center).powi(2) / (4.0 * width * width);
            Complex64::from_polar(a.exp(), momentum * x)
        })
        .collect();
    normalize(grid, &mut psi);
    psi
}

/// Scale `ψ` to unit discrete norm `Σ|ψ|²h = 1`.
pub fn normalize(grid: &GridSpec, psi: &mut [Complex64]) {
    let norm = wave_norm(grid, psi);
    if norm > 0.0 {
        psi.iter_mut().for_each(|z| *z /= norm);
    }
}

pub fn wave_norm(grid: &GridSpec, psi: &[Complex64]) -> f64 {
    (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing()).sqrt()
}

/// `⟨φ|ψ⟩ = Σ conj(φ) ψ h`.
pub fn inner(grid: &GridSpec, phi: &[Complex64], psi: &[Complex64]) -> Complex64 {
    phi.iter()
        .zip(psi)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        * grid.spacing()
}

/// Pure Gaussian state `|ψ⟩⟨ψ|` with unit trace.
pub fn make_gaussian_state(
    grid: &GridSpec,
    center: f64,
    momentum: f64,
    width: f64,
) -> Result<DensityKernel> {
    let l = grid.half_width();
    if !(width > 0.0) {
        return Err(Error::Precondition(format!("width must be positive, got {width}")));
    }
    if 6.0 * width >= l || center.abs() + 6.0 * width >= l {
        return Err(Error::Precondition(format!(
            "grid half-width {l} too small for center {center} and width {width} \
             (need |center| + 6·width < L)"
        )));
    }
    let psi = gaussian_wave(grid, center, momentum, width);
    Ok(DensityKernel::outer(grid, &psi, &psi))
}

/// Random smooth wave function: a superposition of up to three Gaussian
/// packets with centers in `[-spread, spread]`, widths in `[0.5, 1.0]` and
/// momenta in `[-2, 2]`. Normalized.
pub fn random_smooth_wave<R: Rng + ?Sized>(grid: &GridSpec, spread: f64, rng: &mut R) -> Vec<Complex64> {
    let n = grid.n_points();
    let packets = rng.random_range(1..=3);
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..packets {
        let c = rng.random_range(-spread..=spread);
        let w = rng.random_range(0.5..=1.0);
        let p = rng.random_range(-2.0..=2.0);
        let amp = Complex64::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        for (j, z) in psi.iter_mut().enumerate() {
            let x = grid.x(j);
            let a = -(x - c).powi(2) / (4.0 * w * w);
            *z += amp * Complex64::from_polar(a.exp(), p * x);
        }
    }
    normalize(grid, &mut psi);
    psi
}

/// Random mixed state `Σ λ_j |ψ_j⟩⟨ψ_j|` of rank `1..=max_rank` with smooth,
/// well-localized components and Dirichlet-like weights.
pub fn random_mixed_state<R: Rng + ?Sized>(grid: &GridSpec, max_rank: usize, rng: &mut R) -> DensityKernel {
    let rank = rng.random_range(1..=max_rank.max(1));
    let spread = (grid.half_width() - 8.5).clamp(0.5, 3.0);
    let mut weights: Vec<f64> = (0..rank).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let n = grid.n_points();
    let mut rho = DensityKernel::zeros(grid);
    for w in weights {
        let psi = random_smooth_wave(grid, spread, rng);
        let v = rho.values_mut();
        for j in 0..n {
            let b = psi[j].conj() * w;
            for i in 0..n {
                v[(i, j)] += psi[i] * b;
            }
        }
    }
    rho
}
