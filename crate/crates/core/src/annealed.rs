// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! The averaged (annealed) master equation
//! `∂ₜρ = −i[H₀, ρ] − α²(ρ − θ_∞[ρ])` and its closed-form moment laws.

use crate::collision::{theta_inf, BathParams, KernelMultiplier};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{DensityKernel, ObservableRecord};
use crate::propagate::free_evolve_in_place;
use crate::trajectory::validate_sample_times;

use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnealedRun {
    pub params: BathParams,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<DensityKernel>,
    pub records: Vec<ObservableRecord>,
}

impl AnnealedRun {
    /// State at a sample time, if that time was requested.
    pub fn state_at(&self, t: f64) -> Option<&DensityKernel> {
        self.times.iter().position(|&s| s == t).map(|i| &self.states[i])
    }
}

/// Entrywise relaxation factor `exp(−α² τ (1 − θ_∞(X−X')))`.
pub fn dissipation_multiplier(grid: &GridSpec, params: &BathParams, tau: f64) -> KernelMultiplier {
    let a2 = params.alpha() * params.alpha();
    let b0 = params.beta0();
    KernelMultiplier::from_separation(grid, |y| {
        Complex64::new((-a2 * tau * (1.0 - theta_inf(y, b0))).exp(), 0.0)
    })
}

pub fn solve_annealed(
    rho0: &DensityKernel,
    params: &BathParams,
    times: &[f64],
    dt: f64,
) -> Result<AnnealedRun> {
    solve_annealed_with(rho0, params, times, dt, true)
}

/// Strang splitting: free half-step, exact dissipative step, free half-step.
/// With `free_flow = false` the `H₀` part is dropped and the solution is the
/// entrywise exponential itself.
pub fn solve_annealed_with(
    rho0: &DensityKernel,
    params: &BathParams,
    times: &[f64],
    dt: f64,
    free_flow: bool,
) -> Result<AnnealedRun> {
    params.validate()?;
    validate_sample_times(times)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let grid = rho0.grid();
    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let mut records = Vec::with_capacity(times.len());
    for &ts in times {
        let span = ts - t;
        if span > 0.0 {
            if free_flow {
                let steps = (span / dt).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                let m = dissipation_multiplier(grid, params, h);
                free_evolve_in_place(&mut rho, 0.5 * h);
                for s in 0..steps {
                    m.apply_in_place(&mut rho);
                    free_evolve_in_place(&mut rho, if s + 1 == steps { 0.5 * h } else { h });
                }
            } else {
                dissipation_multiplier(grid, params, span).apply_in_place(&mut rho);
            }
        }
        t = ts;
        records.push(rho.observables(t));
        states.push(rho.clone());
    }
    Ok(AnnealedRun {
        params: *params,
        dt,
        times: times.to_vec(),
        states,
        records,
    })
}

/// Expected kinetic energy and position moment at time `t`:
/// `K₀ + 4α²t/β₀` and `X₀ + M₀t + K₀t² + 4α²t³/(3β₀)`, where `M₀` is the
/// mixed moment of `ρ₀`.
pub fn predicted_moments(rho0: &DensityKernel, params: &BathParams, t: f64) -> Result<(f64, f64)> {
    let k0 = rho0.kinetic_energy();
    let x0 = rho0.position_moment();
    let m0 = rho0.mixed_moment();
    let cs = 2.0 * (x0 * k0).max(0.0).sqrt();
    if m0.abs() > cs + 1e-8 {
        return Err(Error::Precondition(format!(
            "mixed moment {m0} exceeds 2√(Tr(XρX)·Tr((i∇)ρ(i∇))) = {cs}"
        )));
    }
    let c = 4.0 * params.alpha() * params.alpha() / params.beta0();
    Ok((k0 + c * t, x0 + m0 * t + k0 * t * t + c * t * t * t / 3.0))
}
