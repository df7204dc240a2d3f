// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Free and potential propagators acting on density kernels.

use num_complex::Complex64;

use crate::grid::GridSpec;
use crate::kernel::DensityKernel;
use crate::spectral::{free_phases, potential_phases, ColumnFft};

/// `e^{−itH₀} ρ e^{itH₀}` with `H₀ = −½Δ`, exact on the periodic grid.
pub fn free_evolve(rho: &DensityKernel, t: f64) -> DensityKernel {
    let mut out = rho.clone();
    free_evolve_in_place(&mut out, t);
    out
}

pub fn free_evolve_in_place(rho: &mut DensityKernel, t: f64) {
    if t == 0.0 {
        return;
    }
    let n = rho.n();
    let k = rho.grid().momentum_nodes();
    let phases = free_phases(&k, t);
    let mut fft = ColumnFft::new(n);
    fft.sandwich(rho.values_mut(), |f, d| f.fourier_multiply(d, &phases));
}

/// One Strang step for `H₀ + V`: half potential, full free step, half
/// potential, applied as `U ρ U†`.
pub fn split_step_evolve(rho: &DensityKernel, potential: &[f64], dt: f64) -> DensityKernel {
    let mut out = rho.clone();
    let mut prop = StrangPropagator::new(rho.grid(), potential.to_vec());
    prop.advance_steps(&mut out, dt, 1);
    out
}

/// Repeated Strang steps with a fixed potential. Consecutive half-steps of
/// the potential are merged, so `s` steps cost `s` free transforms per side.
pub struct StrangPropagator {
    k: Vec<f64>,
    potential: Vec<f64>,
    fft: ColumnFft,
    zero_potential: bool,
}

impl StrangPropagator {
    pub fn new(grid: &GridSpec, potential: Vec<f64>) -> Self {
        assert_eq!(potential.len(), grid.n_points());
        let zero_potential = potential.iter().all(|&v| v == 0.0);
        Self {
            k: grid.momentum_nodes(),
            potential,
            fft: ColumnFft::new(grid.n_points()),
            zero_potential,
        }
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Advance by `duration` using the smallest number of equal steps that
    /// keeps each step `≤ dt_max`. Returns the number of steps taken.
    pub fn advance(&mut self, rho: &mut DensityKernel, duration: f64, dt_max: f64) -> usize {
        if duration <= 0.0 {
            return 0;
        }
        let steps = (duration / dt_max).ceil().max(1.0) as usize;
        self.advance_steps(rho, duration / steps as f64, steps);
        steps
    }

    pub fn advance_steps(&mut self, rho: &mut DensityKernel, dt: f64, steps: usize) {
        if steps == 0 {
            return;
        }
        let kin = free_phases(&self.k, dt);
        if self.zero_potential {
            let kin_total = free_phases(&self.k, dt * steps as f64);
            self.fft
                .sandwich(rho.values_mut(), |f, d| f.fourier_multiply(d, &kin_total));
            return;
        }
        let half = potential_phases(&self.potential, 0.5 * dt);
        let full = potential_phases(&self.potential, dt);
        self.fft.sandwich(rho.values_mut(), |f, d| {
            strang_columns(f, d, &half, &full, &kin, steps)
        });
    }
}

fn strang_columns(
    f: &mut ColumnFft,
    data: &mut [Complex64],
    half: &[Complex64],
    full: &[Complex64],
    kin: &[Complex64],
    steps: usize,
) {
    f.scale_rows(data, half);
    for s in 0..steps {
        f.fourier_multiply(data, kin);
        if s + 1 < steps {
            f.scale_rows(data, full);
        } else {
            f.scale_rows(data, half);
        }
    }
}
