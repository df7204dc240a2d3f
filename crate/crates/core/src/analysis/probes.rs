// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Bounded linear observables `ρ ↦ Tr(Aρ)` used to compare ensembles.

use serde::{Deserialize, Serialize};

use crate::kernel::DensityKernel;
use crate::states::gaussian_wave;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Probe {
    /// Multiplication by `exp(−(X−c)²/(2w²))`.
    PositionBump { center: f64, width: f64 },
    /// Projector onto the normalized Gaussian packet with the given center,
    /// momentum and width.
    GaussianProjector { center: f64, momentum: f64, width: f64 },
    /// `g(P)` with `g(k) = exp(−(k−c)²/(2w²))`.
    MomentumBump { center: f64, width: f64 },
}

impl Probe {
    /// Centered position bump, projector onto the `(0, 0, 0.5)` packet and
    /// centered momentum bump.
    pub fn defaults() -> Vec<Probe> {
        vec![
            Probe::PositionBump { center: 0.0, width: 1.0 },
            Probe::GaussianProjector { center: 0.0, momentum: 0.0, width: 0.5 },
            Probe::MomentumBump { center: 0.0, width: 1.0 },
        ]
    }

    pub fn label(&self) -> String {
        match self {
            Probe::PositionBump { center, width } => format!("position-bump(c={center},w={width})"),
            Probe::GaussianProjector { center, momentum, width } => {
                format!("gaussian-projector(c={center},p={momentum},w={width})")
            }
            Probe::MomentumBump { center, width } => format!("momentum-bump(c={center},w={width})"),
        }
    }

    /// `Tr(Aρ)` (real part; `A` is self-adjoint).
    pub fn evaluate(&self, rho: &DensityKernel) -> f64 {
        match *self {
            Probe::PositionBump { center, width } => {
                rho.diagonal_weighted(|x| (-(x - center).powi(2) / (2.0 * width * width)).exp())
            }
            Probe::GaussianProjector { center, momentum, width } => {
                let grid = rho.grid();
                let h = grid.spacing();
                let phi = gaussian_wave(grid, center, momentum, width);
                let v = rho.values();
                let n = rho.n();
                let mut s = num_complex::Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let mut col = num_complex::Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        col += phi[i].conj() * v[(i, j)];
                    }
                    s += col * phi[j];
                }
                s.re * h * h
            }
            Probe::MomentumBump { center, width } => {
                let k = rho.grid().momentum_nodes();
                rho.momentum_density()
                    .iter()
                    .zip(&k)
                    .map(|(w, kk)| w * (-(kk - center).powi(2) / (2.0 * width * width)).exp())
                    .sum()
            }
        }
    }
}
