// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! WebAssembly entry points used by `www/index.html`.
//!
//! Each exported function returns a flat `Float64Array` of fixed-width rows.
//! The plain Rust functions with the `_rows` suffix carry the logic and are
//! what the native tests call.

use wasm_bindgen::prelude::*;

use decohere::analysis::coherence::{annealed_rate, quenched_rate};
use decohere::annealed::{predicted_moments, solve_annealed};
use decohere::environment::{sample_ppp, RngStream};
use decohere::states::make_gaussian_state;
use decohere::{BathParams, GridSpec, Sign};

/// Grid shared by all browser computations.
pub const WEB_POINTS: usize = 128;
pub const WEB_HALF_WIDTH: f64 = 10.0;
/// Step of the annealed solver.
pub const WEB_DT: f64 = 1e-3;
/// Cap on exported events, to keep the page responsive.
pub const MAX_EVENTS: usize = 200_000;

fn grid() -> GridSpec {
    GridSpec::new(WEB_HALF_WIDTH, WEB_POINTS).expect("valid grid")
}

fn bath(alpha: f64, beta0: f64, cutoff: f64, rate: f64) -> Result<BathParams, String> {
    BathParams::new(alpha, cutoff, beta0, rate, Sign::Plus).map_err(|e| e.to_string())
}

/// Rows `(t, K, K_predicted, X, X_predicted)` of the averaged dynamics from a
/// centered Gaussian of the given width, at `samples` evenly spaced times up
/// to `t_max`.
pub fn annealed_curve_rows(
    alpha: f64,
    beta0: f64,
    cutoff: f64,
    width: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if !(t_max > 0.0 && t_max <= 5.0) || samples == 0 || samples > 200 {
        return Err("need 0 < t_max <= 5 and 1..=200 samples".into());
    }
    // the rate does not enter the averaged dynamics
    let params = bath(alpha, beta0, cutoff, alpha * alpha + 1.0)?;
    let rho0 = make_gaussian_state(&grid(), 0.0, 0.0, width).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (1..=samples).map(|k| t_max * k as f64 / samples as f64).collect();
    let run = solve_annealed(&rho0, &params, &times, WEB_DT).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(5 * samples);
    for (t, rec) in times.iter().zip(&run.records) {
        let (k, x) = predicted_moments(&rho0, &params, *t).map_err(|e| e.to_string())?;
        out.extend([*t, rec.kinetic_energy, k, rec.position_moment, x]);
    }
    Ok(out)
}

/// Rows `(time, position, momentum)` of the collision stream on `(0, horizon]`.
pub fn collision_event_rows(
    alpha: f64,
    beta0: f64,
    cutoff: f64,
    rate: f64,
    horizon: f64,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let params = bath(alpha, beta0, cutoff, rate)?;
    if rate * horizon > MAX_EVENTS as f64 / 2.0 {
        return Err(format!("rate × horizon too large (limit {})", MAX_EVENTS / 2));
    }
    let events = sample_ppp(&params, horizon, &RngStream::new(seed, 0)).map_err(|e| e.to_string())?;
    Ok(events
        .iter()
        .take(MAX_EVENTS)
        .flat_map(|e| [e.time, e.position, e.momentum])
        .collect())
}

/// Rows `(Y, annealed rate, quenched rate)` for separations on the grid up to
/// `y_max`, with the quenched rate weighted by a centered Gaussian of the
/// given width.
pub fn decoherence_rate_rows(alpha: f64, beta0: f64, cutoff: f64, width: f64, y_max: f64) -> Result<Vec<f64>, String> {
    let params = bath(alpha, beta0, cutoff, alpha * alpha + 1.0)?;
    let g = grid();
    let rho0 = make_gaussian_state(&g, 0.0, 0.0, width).map_err(|e| e.to_string())?;
    let d_max = ((y_max / g.spacing()).floor() as usize).min(WEB_POINTS / 2);
    let mut out = Vec::with_capacity(3 * (d_max + 1));
    for d in 0..=d_max {
        let y = d as f64 * g.spacing();
        out.extend([y, annealed_rate(y, &params), quenched_rate(d, &rho0, &params)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn annealed_curve(
    alpha: f64,
    beta0: f64,
    cutoff: f64,
    width: f64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    annealed_curve_rows(alpha, beta0, cutoff, width, t_max, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn collision_events(
    alpha: f64,
    beta0: f64,
    cutoff: f64,
    rate: f64,
    horizon: f64,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    collision_event_rows(alpha, beta0, cutoff, rate, horizon, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn decoherence_rates(alpha: f64, beta0: f64, cutoff: f64, width: f64, y_max: f64) -> Result<Vec<f64>, JsError> {
    decoherence_rate_rows(alpha, beta0, cutoff, width, y_max).map_err(|e| JsError::new(&e))
}
