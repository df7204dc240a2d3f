// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Periodic position grid and the matching discrete momentum nodes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)`.
///
/// Kernels living on this grid carry the continuum scaling convention: the
/// operator with kernel `ρ(X, X')` corresponds to the matrix `spacing · ρ_ij`,
/// so traces are `Σ ρ_ii · spacing` and Schatten norms are the singular-value
/// norms of the scaled matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    n_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "n_points must be a power of two >= 16, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    /// Position of node `j`, `X_j = -L + j·h`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Spacing of the momentum lattice, `2π / 2L`.
    #[inline]
    pub fn momentum_spacing(&self) -> f64 {
        PI / self.half_width
    }

    /// Momentum nodes in FFT order: `0, dk, …, (n/2 - 1) dk, -n/2 dk, …, -dk`.
    pub fn momentum_nodes(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = self.momentum_spacing();
        (0..n)
            .map(|m| if m < n / 2 { m as f64 * dk } else { (m - n) as f64 * dk })
            .collect()
    }

    /// Separation of two nodes with index offset `d = j − l`, measured on
    /// the periodic grid: the offset is wrapped into `[−n/2, n/2]`, so the
    /// result lies in `[−L, L]` and is odd in `d`.
    #[inline]
    pub fn separation(&self, d: i64) -> f64 {
        let n = self.n_points as i64;
        let half = n / 2;
        let mut w = d % n;
        if w > half {
            w -= n;
        } else if w < -half {
            w += n;
        }
        w as f64 * self.spacing()
    }
}
