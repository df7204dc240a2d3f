// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Diffusive limit: the stochastic Lindblad equation
//! `i dρ = [H₀ dt + dW, ρ] + iα²(θ_∞[ρ] − ρ) dt` (Itô) and its Stratonovich
//! form with the re-coherent kernel `γ_∞(X, X')`.
//!
//! The Brownian potential is `W(X) = ±κ Σ_q √w_q γ(X − x_q) B_q` with
//! Gauss–Legendre nodes `x_q` on `[−R, R]` and independent Brownian motions
//! `B_q`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::collision::{gamma, gamma_inf_kernel, half_erfc, theta_inf, BathParams};
use crate::environment::RngStream;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::DensityKernel;
use crate::quadrature::gauss_legendre;
use crate::spectral::{free_phases, ColumnFft};
use crate::trajectory::{validate_sample_times, Recorder, Scheme, TrajectoryOptions, TrajectoryResult};

pub const DEFAULT_NOISE_NODES: usize = 64;
pub const DEFAULT_SDE_DT: f64 = 1e-3;

/// Factorized covariance of the Brownian potential field.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    params: BathParams,
    grid: GridSpec,
    kappa: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    basis: DMatrix<f64>,
}

/// `κ = α/√(2R) · (β₀/(8−β₀))^{1/4}`.
pub fn noise_kappa(params: &BathParams) -> f64 {
    let b0 = params.beta0();
    params.alpha() / (2.0 * params.cutoff()).sqrt() * (b0 / (8.0 - b0)).powf(0.25)
}

/// Closed form of `κ² ∫_{−R}^{R} γ(X−x) γ(X'−x) dx`
/// `= κ² √π e^{−(X−X')²/4} (erfc_½(−R−m) − erfc_½(R−m))`, `m = (X+X')/2`.
pub fn noise_covariance(x: f64, y: f64, params: &BathParams) -> f64 {
    noise_covariance_with_exponent(x, y, params, 0.25)
}

/// The same expression with Gaussian prefactor `e^{−(X−X')²/2}`. It differs
/// from the quadrature of `κ² ∫γγ` and is kept for comparison.
pub fn noise_covariance_half_exponent(x: f64, y: f64, params: &BathParams) -> f64 {
    noise_covariance_with_exponent(x, y, params, 0.5)
}

fn noise_covariance_with_exponent(x: f64, y: f64, params: &BathParams, c: f64) -> f64 {
    let k = noise_kappa(params);
    let r = params.cutoff();
    let m = 0.5 * (x + y);
    k * k * PI.sqrt() * (-c * (x - y) * (x - y)).exp() * (half_erfc(-r - m) - half_erfc(r - m))
}

impl NoiseModel {
    pub fn new(grid: &GridSpec, params: &BathParams, n_nodes: usize) -> Result<Self> {
        params.validate()?;
        if n_nodes < 32 {
            return Err(Error::InvalidParameter(format!(
                "noise model needs at least 32 nodes, got {n_nodes}"
            )));
        }
        let r = params.cutoff();
        let kappa = noise_kappa(params);
        let (nodes, weights) = gauss_legendre(n_nodes, -r, r);
        let xs = grid.positions();
        let basis = DMatrix::from_fn(xs.len(), n_nodes, |i, q| {
            kappa * weights[q].sqrt() * gamma(xs[i] - nodes[q])
        });
        Ok(Self {
            params: *params,
            grid: grid.clone(),
            kappa,
            nodes,
            weights,
            basis,
        })
    }

    pub fn params(&self) -> &BathParams {
        &self.params
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// `C = B Bᵀ`, the covariance of `W_1` on the grid.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Quadrature covariance `κ² Σ_q w_q γ(X−x_q) γ(X'−x_q)` at arbitrary points.
    pub fn covariance_at(&self, x: f64, y: f64) -> f64 {
        let k2 = self.kappa * self.kappa;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&q, &w)| w * gamma(x - q) * gamma(y - q))
            .sum::<f64>()
            * k2
    }

    /// Builds the increment `±√dt · B ξ`.
    pub fn increment(&self, xi: Vec<f64>, dt: f64) -> NoiseIncrement {
        assert_eq!(xi.len(), self.n_nodes());
        let scale = self.params.sign().value() * dt.sqrt();
        let field = (&self.basis * DVector::from_column_slice(&xi)) * scale;
        NoiseIncrement {
            xi,
            dt,
            field: field.data.into(),
        }
    }

    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> NoiseIncrement {
        let xi = (0..self.n_nodes()).map(|_| rng.sample(StandardNormal)).collect();
        self.increment(xi, dt)
    }
}

/// One time step of the Brownian field.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseIncrement {
    pub xi: Vec<f64>,
    pub dt: f64,
    /// `W_{t+dt}(X_i) − W_t(X_i)`.
    pub field: Vec<f64>,
}

/// Source of the standard normal vectors `ξ` driving the field.
pub trait NoiseSource {
    fn fill(&mut self, xi: &mut [f64]);
}

impl NoiseSource for ChaCha8Rng {
    fn fill(&mut self, xi: &mut [f64]) {
        for v in xi {
            *v = self.sample(StandardNormal);
        }
    }
}

/// Merges consecutive pairs of draws, `(ξ₁ + ξ₂)/√2`, so that a run with
/// step `2dt` sees the same Brownian path as a run with step `dt` fed from
/// the inner source.
pub struct PairedNoise<S> {
    inner: S,
    buf: Vec<f64>,
}

impl<S: NoiseSource> PairedNoise<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, buf: Vec::new() }
    }
}

impl<S: NoiseSource> NoiseSource for PairedNoise<S> {
    fn fill(&mut self, xi: &mut [f64]) {
        self.buf.resize(xi.len(), 0.0);
        self.inner.fill(xi);
        self.inner.fill(&mut self.buf);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in xi.iter_mut().zip(&self.buf) {
            *a = (*a + b) * s;
        }
    }
}

/// Discretization of the Itô equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ItoMethod {
    /// `1 + a dt − iΔW`.
    EulerMaruyama,
    /// Adds the second-order term `−½(ΔW² − Var ΔW)`.
    #[default]
    Milstein,
}

/// Precomputed tables for stepping either form of the limit equation.
///
/// All stochastic and dissipative terms act entrywise on the kernel. Per
/// entry, with `D = ΔW(X) − ΔW(X')`:
///
/// * Itô: `1 + a dt − iD − ½(D² − V dt)` where `a = α²(θ_∞ − 1)` and `V` is
///   the variance rate of `D` (the last term only for Milstein);
/// * Stratonovich (Heun): `1 + z + z²/2` with `z = b dt − iD` and
///   `b = α²(θ_∞ + γ_∞ − 1)`.
///
/// The free flow is split symmetrically around the entrywise update.
#[derive(Clone, Debug)]
pub struct SdeIntegrator {
    model: NoiseModel,
    ito_drift: Vec<f64>,
    var_rate: DMatrix<f64>,
    strat_drift: DMatrix<f64>,
    pub ito_method: ItoMethod,
    pub free_flow: bool,
}

impl SdeIntegrator {
    pub fn new(model: NoiseModel) -> Self {
        let grid = model.grid().clone();
        let params = *model.params();
        let n = grid.n_points();
        let a2 = params.alpha() * params.alpha();
        let ito_drift: Vec<f64> = (-(n as i64 - 1)..n as i64)
            .map(|d| a2 * (theta_inf(grid.separation(d), params.beta0()) - 1.0))
            .collect();
        let c = model.covariance();
        let var_rate = DMatrix::from_fn(n, n, |i, j| (c[(i, i)] + c[(j, j)] - 2.0 * c[(i, j)]).max(0.0));
        let gk = gamma_inf_kernel(&grid, &params);
        let strat_drift =
            DMatrix::from_fn(n, n, |i, j| ito_drift[i + n - 1 - j] + a2 * gk.get(i, j).re);
        Self {
            model,
            ito_drift,
            var_rate,
            strat_drift,
            ito_method: ItoMethod::default(),
            free_flow: true,
        }
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    /// Variance rate of `W(X_i) − W(X_j)`.
    pub fn difference_variance(&self) -> &DMatrix<f64> {
        &self.var_rate
    }

    /// Entrywise update of one Itô step, without the free flow.
    pub fn ito_kick(&self, rho: &mut DensityKernel, inc: &NoiseIncrement) {
        let n = rho.n();
        let dt = inc.dt;
        let w = &inc.field;
        let milstein = self.ito_method == ItoMethod::Milstein;
        let v = rho.values_mut();
        for j in 0..n {
            let wj = w[j];
            let col = v.column_mut(j);
            for (i, z) in col.into_iter().enumerate() {
                let d = w[i] - wj;
                let mut re = 1.0 + self.ito_drift[i + n - 1 - j] * dt;
                if milstein {
                    re -= 0.5 * (d * d - self.var_rate[(i, j)] * dt);
                }
                *z *= Complex64::new(re, -d);
            }
        }
    }

    /// Entrywise update of one Stratonovich (Heun) step, without the free flow.
    pub fn strat_kick(&self, rho: &mut DensityKernel, inc: &NoiseIncrement) {
        let n = rho.n();
        let dt = inc.dt;
        let w = &inc.field;
        let v = rho.values_mut();
        for j in 0..n {
            let wj = w[j];
            let col = v.column_mut(j);
            for (i, z) in col.into_iter().enumerate() {
                let x = Complex64::new(self.strat_drift[(i, j)] * dt, -(w[i] - wj));
                *z *= x * x * 0.5 + x + 1.0;
            }
        }
    }

    fn kick(&self, scheme: Scheme, rho: &mut DensityKernel, inc: &NoiseIncrement) {
        match scheme {
            Scheme::SdeIto => self.ito_kick(rho, inc),
            Scheme::SdeStrat => self.strat_kick(rho, inc),
            other => panic!("{} is not a diffusive scheme", other.name()),
        }
    }

    /// One full step: free half-step, entrywise update, free half-step.
    pub fn step(&self, scheme: Scheme, rho: &DensityKernel, inc: &NoiseIncrement) -> DensityKernel {
        let mut out = rho.clone();
        let k = out.grid().momentum_nodes();
        let half = free_phases(&k, 0.5 * inc.dt);
        let mut fft = ColumnFft::new(out.n());
        if self.free_flow {
            fft.sandwich(out.values_mut(), |f, d| f.fourier_multiply(d, &half));
        }
        self.kick(scheme, &mut out, inc);
        if self.free_flow {
            fft.sandwich(out.values_mut(), |f, d| f.fourier_multiply(d, &half));
        }
        out
    }

    pub fn simulate(
        &self,
        rho0: &DensityKernel,
        sample_times: &[f64],
        dt: f64,
        scheme: Scheme,
        rng: RngStream,
        opts: &TrajectoryOptions,
    ) -> Result<TrajectoryResult> {
        let mut source = rng.rng();
        self.simulate_with_source(rho0, sample_times, dt, scheme, rng, opts, &mut source)
    }

    /// As [`SdeIntegrator::simulate`] with an explicit source of normals.
    /// The step between consecutive sample times is `span / ceil(span/dt)`.
    #[allow(clippy::too_many_arguments)]
    pub fn simulate_with_source<S: NoiseSource + ?Sized>(
        &self,
        rho0: &DensityKernel,
        sample_times: &[f64],
        dt: f64,
        scheme: Scheme,
        rng: RngStream,
        opts: &TrajectoryOptions,
        source: &mut S,
    ) -> Result<TrajectoryResult> {
        validate_sample_times(sample_times)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !matches!(scheme, Scheme::SdeIto | Scheme::SdeStrat) {
            return Err(Error::InvalidParameter(format!(
                "{} is not a diffusive scheme",
                scheme.name()
            )));
        }
        if rho0.grid() != self.model.grid() {
            return Err(Error::Mismatch("initial state and noise model use different grids".into()));
        }
        let n = rho0.n();
        let k = rho0.grid().momentum_nodes();
        let mut fft = ColumnFft::new(n);
        let mut recorder = Recorder::new(*opts, sample_times.len());
        let mut rho = rho0.clone();
        let mut xi = vec![0.0; self.model.n_nodes()];
        let mut t = 0.0;
        for &ts in sample_times {
            let span = ts - t;
            if span > 0.0 {
                let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                let half = free_phases(&k, 0.5 * h);
                let full = free_phases(&k, h);
                if self.free_flow {
                    fft.sandwich(rho.values_mut(), |f, d| f.fourier_multiply(d, &half));
                }
                for s in 0..steps {
                    source.fill(&mut xi);
                    let inc = self.model.increment(xi.clone(), h);
                    self.kick(scheme, &mut rho, &inc);
                    if self.free_flow {
                        let phases = if s + 1 == steps { &half } else { &full };
                        fft.sandwich(rho.values_mut(), |f, d| f.fourier_multiply(d, phases));
                    }
                }
            }
            t = ts;
            recorder.record(&rho, t)?;
        }
        Ok(TrajectoryResult {
            scheme,
            params: *self.model.params(),
            sample_times: sample_times.to_vec(),
            snapshots: recorder.snapshots(),
            records: recorder.records,
            event_count: 0,
            rng,
            min_positivity_floor: recorder.min_floor,
            jumps: None,
        })
    }
}

/// One Itô (Milstein) step with free half-steps on both sides.
pub fn ito_step(rho: &DensityKernel, inc: &NoiseIncrement, integrator: &SdeIntegrator) -> DensityKernel {
    integrator.step(Scheme::SdeIto, rho, inc)
}

/// One Stratonovich (Heun) step with free half-steps on both sides.
pub fn strat_step(rho: &DensityKernel, inc: &NoiseIncrement, integrator: &SdeIntegrator) -> DensityKernel {
    integrator.step(Scheme::SdeStrat, rho, inc)
}

/// Convenience wrapper building the noise model with
/// [`DEFAULT_NOISE_NODES`] nodes.
pub fn simulate_sde_trajectory(
    rho0: &DensityKernel,
    params: &BathParams,
    sample_times: &[f64],
    dt: f64,
    scheme: Scheme,
    rng: RngStream,
) -> Result<TrajectoryResult> {
    let model = NoiseModel::new(rho0.grid(), params, DEFAULT_NOISE_NODES)?;
    SdeIntegrator::new(model).simulate(rho0, sample_times, dt, scheme, rng, &TrajectoryOptions::default())
}
