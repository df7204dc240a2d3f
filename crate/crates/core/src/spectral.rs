// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! FFT machinery shared by the propagators and the momentum observables.
//!
//! Kernels are stored column-major, so column `l` of the matrix is the
//! contiguous vector `ρ(·, X_l)`. An operator `A` that acts on the first
//! index ("column operator") is applied to every column in one batched FFT
//! call, and the two-sided action `ρ ↦ A ρ A†` is obtained as
//! `(A (A ρ)†)†`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

thread_local! {
    static PLANS: RefCell<HashMap<usize, (Plan, Plan)>> = RefCell::new(HashMap::new());
}

/// Forward/inverse plans for length `n`, cached per thread.
pub(crate) fn plans(n: usize) -> (Plan, Plan) {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// Batched column transforms with a reusable scratch buffer.
pub(crate) struct ColumnFft {
    n: usize,
    fwd: Plan,
    inv: Plan,
    scratch: Vec<Complex64>,
}

impl ColumnFft {
    pub(crate) fn new(n: usize) -> Self {
        let (fwd, inv) = plans(n);
        let len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    #[inline]
    pub(crate) fn forward(&mut self, data: &mut [Complex64]) {
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    #[inline]
    pub(crate) fn inverse(&mut self, data: &mut [Complex64]) {
        self.inv.process_with_scratch(data, &mut self.scratch);
    }

    /// Multiply row `j` of every column by `diag[j]`.
    #[inline]
    pub(crate) fn scale_rows(&self, data: &mut [Complex64], diag: &[Complex64]) {
        debug_assert_eq!(diag.len(), self.n);
        for col in data.chunks_exact_mut(self.n) {
            for (z, d) in col.iter_mut().zip(diag) {
                *z *= d;
            }
        }
    }

    /// Applies `Fourier⁻¹ · diag(k_mult) · Fourier` to every column. The
    /// `1/n` normalization must be folded into `k_mult` by the caller.
    pub(crate) fn fourier_multiply(&mut self, data: &mut [Complex64], k_mult: &[Complex64]) {
        self.forward(data);
        self.scale_rows(data, k_mult);
        self.inverse(data);
    }

    /// `ρ ↦ A ρ A†` for a column operator `A` given as a closure on the
    /// column-major buffer.
    pub(crate) fn sandwich<F>(&mut self, m: &mut DMatrix<Complex64>, mut op: F)
    where
        F: FnMut(&mut Self, &mut [Complex64]),
    {
        op(self, m.as_mut_slice());
        m.adjoint_mut();
        op(self, m.as_mut_slice());
        m.adjoint_mut();
    }

    /// Unnormalized momentum representation `F ρ F†` (with `F` the plain DFT).
    pub(crate) fn to_momentum(&mut self, m: &mut DMatrix<Complex64>) {
        self.sandwich(m, |s, d| s.forward(d));
    }
}

/// `exp(-i t k²/2) / n` in FFT order, the free propagator multiplier.
pub(crate) fn free_phases(k: &[f64], t: f64) -> Vec<Complex64> {
    let inv_n = 1.0 / k.len() as f64;
    k.iter()
        .map(|&kk| Complex64::from_polar(inv_n, -0.5 * t * kk * kk))
        .collect()
}

/// `exp(-i τ V_j)` on the position nodes.
pub(crate) fn potential_phases(v: &[f64], tau: f64) -> Vec<Complex64> {
    v.iter().map(|&vj| Complex64::from_polar(1.0, -tau * vj)).collect()
}
