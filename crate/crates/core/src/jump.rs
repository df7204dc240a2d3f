// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-deterministic dynamics: unitary flow under `H₀ + V` between
//! collisions, collision maps at the event times.

use crate::collision::{gamma_inf_profile, BathParams, CollisionWorkspace};
use crate::environment::{PppSampler, RngStream};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::DensityKernel;
use crate::propagate::{free_evolve, StrangPropagator};
use crate::trajectory::{
    validate_sample_times, JumpNorms, JumpStats, Recorder, Scheme, TrajectoryOptions, TrajectoryResult,
};

/// Default bound on the splitting step, `0.01/√N`.
pub fn default_dt_max(params: &BathParams) -> f64 {
    0.01 / params.rate().sqrt()
}

/// Compensating potential `V = ±α√(N−α²) γ_∞` on the grid.
pub fn compensating_potential(grid: &GridSpec, params: &BathParams) -> Vec<f64> {
    let amp = params.sign().value() * params.compensation_amplitude();
    gamma_inf_profile(grid, params)
        .into_iter()
        .map(|g| amp * g)
        .collect()
}

pub fn simulate_jump_trajectory(
    rho0: &DensityKernel,
    params: &BathParams,
    sample_times: &[f64],
    dt_max: f64,
    rng: RngStream,
) -> Result<TrajectoryResult> {
    simulate_jump_trajectory_with(rho0, params, sample_times, dt_max, rng, &TrajectoryOptions::default())
}

pub fn simulate_jump_trajectory_with(
    rho0: &DensityKernel,
    params: &BathParams,
    sample_times: &[f64],
    dt_max: f64,
    rng: RngStream,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryResult> {
    params.validate()?;
    validate_sample_times(sample_times)?;
    if !(dt_max > 0.0) {
        return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt_max}")));
    }
    let grid = rho0.grid().clone();
    let mut prop = StrangPropagator::new(&grid, compensating_potential(&grid, params));
    let mut ws = CollisionWorkspace::new(&grid);
    let mut events = PppSampler::new(params, &rng);
    let mut next = events.next();
    let mut recorder = Recorder::new(*opts, sample_times.len());
    let mut stats = JumpStats::default();
    let a = params.alpha() * params.alpha() / params.rate();
    let b = params.alpha() / params.rate().sqrt();

    let mut rho = rho0.clone();
    let mut t = 0.0;
    let mut event_count = 0;
    for &ts in sample_times {
        while let Some(e) = next.filter(|e| e.time <= ts) {
            prop.advance(&mut rho, e.time - t, dt_max);
            t = e.time;
            let bound = 2.0 * (a + b * (-2.0 * e.momentum * e.momentum).exp());
            match opts.jump_norms {
                JumpNorms::None => ws.apply(&mut rho, e.momentum, e.position, params)?,
                JumpNorms::S2 => {
                    let before = rho.hilbert_schmidt_norm();
                    let jump = ws.apply_measured(&mut rho, e.momentum, e.position, params)?;
                    stats.max_s2 = stats.max_s2.max(jump);
                    stats.max_s2_ratio = stats.max_s2_ratio.max(jump / (bound * before));
                }
                JumpNorms::S1AndS2 => {
                    let prev = rho.clone();
                    let before = rho.hilbert_schmidt_norm();
                    let jump = ws.apply_measured(&mut rho, e.momentum, e.position, params)?;
                    stats.max_s2 = stats.max_s2.max(jump);
                    stats.max_s2_ratio = stats.max_s2_ratio.max(jump / (bound * before));
                    let s1_before: f64 = prev.eigenvalues().iter().map(|v| v.abs()).sum();
                    let s1: f64 = rho
                        .combine(1.0, &prev, -1.0)
                        .eigenvalues()
                        .iter()
                        .map(|v| v.abs())
                        .sum();
                    stats.max_s1 = Some(stats.max_s1.unwrap_or(0.0).max(s1));
                    stats.max_s1_ratio =
                        Some(stats.max_s1_ratio.unwrap_or(0.0).max(s1 / (bound * s1_before)));
                }
            }
            event_count += 1;
            next = events.next();
        }
        prop.advance(&mut rho, ts - t, dt_max);
        t = ts;
        recorder.record(&rho, t)?;
    }
    stats.events = event_count;
    Ok(TrajectoryResult {
        scheme: Scheme::Jump,
        params: *params,
        sample_times: sample_times.to_vec(),
        snapshots: recorder.snapshots(),
        records: recorder.records,
        event_count,
        rng,
        min_positivity_floor: recorder.min_floor,
        jumps: (opts.jump_norms != JumpNorms::None).then_some(stats),
    })
}

/// Interaction picture `e^{itH₀} ρ_t e^{−itH₀}`.
pub fn filtered_state(rho_t: &DensityKernel, t: f64) -> DensityKernel {
    free_evolve(rho_t, -t)
}
