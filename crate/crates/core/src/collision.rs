// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Instantaneous collisions with bath particles and the kernel multipliers
//! derived from them.
//!
//! All multipliers act entrywise on the kernel: `m[ρ](X, X') = m(X, X') ρ(X, X')`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::DensityKernel;
use crate::quadrature::gauss_legendre;

/// Gauss–Legendre nodes used for the Stratonovich kernel.
pub const GAMMA_INF_NODES: usize = 128;

/// Branch of the imaginary transmission amplitude `±i√(1−α²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: i64) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// Physical constants of the bath and the coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBath", into = "RawBath")]
pub struct BathParams {
    alpha: f64,
    cutoff: f64,
    beta0: f64,
    beta: f64,
    rate: f64,
    sign: Sign,
}

#[derive(Serialize, Deserialize)]
struct RawBath {
    alpha: f64,
    cutoff: f64,
    beta0: f64,
    rate: f64,
    sign: Sign,
}

impl TryFrom<RawBath> for BathParams {
    type Error = Error;
    fn try_from(r: RawBath) -> Result<Self> {
        BathParams::new(r.alpha, r.cutoff, r.beta0, r.rate, r.sign)
    }
}

impl From<BathParams> for RawBath {
    fn from(b: BathParams) -> Self {
        RawBath {
            alpha: b.alpha,
            cutoff: b.cutoff,
            beta0: b.beta0,
            rate: b.rate,
            sign: b.sign,
        }
    }
}

impl BathParams {
    /// `beta` is derived from `1/β₀ = 1/β + 1/4`.
    pub fn new(alpha: f64, cutoff: f64, beta0: f64, rate: f64, sign: Sign) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidParameter(format!("cutoff must be positive, got {cutoff}")));
        }
        if !(beta0 > 0.0 && beta0 < 4.0) {
            return Err(Error::InvalidParameter(format!(
                "beta0 must lie in (0,4), got {beta0}"
            )));
        }
        if !(rate.is_finite() && rate > alpha * alpha) {
            return Err(Error::InvalidParameter(format!(
                "rate must exceed alpha² (rate = {rate}, alpha² = {})",
                alpha * alpha
            )));
        }
        Ok(Self {
            alpha,
            cutoff,
            beta0,
            beta: 4.0 * beta0 / (4.0 - beta0),
            rate,
            sign,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::new(self.alpha, self.cutoff, self.beta0, rate, self.sign)
    }

    pub fn with_sign(&self, sign: Sign) -> Self {
        Self { sign, ..*self }
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.cutoff, self.beta0, self.rate, self.sign)
    }

    /// Variance `1/β` of the bath momentum distribution.
    pub fn momentum_variance(&self) -> f64 {
        1.0 / self.beta
    }

    /// Amplitude `α√(N−α²)` of the compensating potential.
    pub fn compensation_amplitude(&self) -> f64 {
        self.alpha * (self.rate - self.alpha * self.alpha).sqrt()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.cutoff, self.beta0, self.rate, self.sign).map(|_| ())
    }
}

/// Entrywise kernel multiplier `m(X_i, X_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMultiplier {
    grid: GridSpec,
    values: DMatrix<Complex64>,
}

impl KernelMultiplier {
    pub fn new(grid: GridSpec, values: DMatrix<Complex64>) -> Self {
        assert_eq!(values.nrows(), grid.n_points());
        assert_eq!(values.ncols(), grid.n_points());
        Self { grid, values }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(grid: &GridSpec, mut f: F) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            values: DMatrix::from_fn(n, n, |i, j| f(i, j)),
        }
    }

    /// Multiplier depending only on `X_i − X_j`.
    pub fn from_separation<F: Fn(f64) -> Complex64>(grid: &GridSpec, f: F) -> Self {
        let n = grid.n_points() as i64;
        let table: Vec<Complex64> = (-(n - 1)..n).map(|d| f(grid.separation(d))).collect();
        let off = (n - 1) as usize;
        let values = DMatrix::from_fn(n as usize, n as usize, |i, j| table[i + off - j]);
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[(i, j)]
    }

    pub fn apply(&self, rho: &DensityKernel) -> DensityKernel {
        let mut out = rho.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, rho: &mut DensityKernel) {
        assert_eq!(rho.grid(), &self.grid, "multiplier and kernel grids differ");
        rho.values_mut().component_mul_assign(&self.values);
    }

    /// Largest `|m(X, X) − 1|`; zero for trace-preserving multipliers.
    pub fn diagonal_defect(&self) -> f64 {
        (0..self.grid.n_points())
            .map(|i| (self.values[(i, i)] - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

/// `γ(X) = e^{−X²/2}`.
#[inline]
pub fn gamma(x: f64) -> f64 {
    (-0.5 * x * x).exp()
}

/// `θ_p(Y) = e^{2ipY − Y²/2}`.
#[inline]
pub fn theta_p(p: f64, y: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * y * y).exp(), 2.0 * p * y)
}

/// `θ_∞(Y) = e^{−2Y²/β₀}`, the bath average of `θ_p`.
#[inline]
pub fn theta_inf(y: f64, beta0: f64) -> f64 {
    (-2.0 * y * y / beta0).exp()
}

pub fn theta_p_multiplier(grid: &GridSpec, p: f64) -> KernelMultiplier {
    KernelMultiplier::from_separation(grid, |y| theta_p(p, y))
}

pub fn theta_inf_multiplier(grid: &GridSpec, params: &BathParams) -> KernelMultiplier {
    let b0 = params.beta0();
    KernelMultiplier::from_separation(grid, |y| Complex64::new(theta_inf(y, b0), 0.0))
}

/// `i(γ(·−x) ρ − ρ γ(·−x))`: entrywise multiplication by
/// `i(γ(X−x) − γ(X'−x))`.
pub fn gamma_commutator(rho: &DensityKernel, x: f64) -> DensityKernel {
    let g: Vec<f64> = rho.grid().positions().iter().map(|&xi| gamma(xi - x)).collect();
    let n = rho.n();
    let mut out = rho.clone();
    let v = out.values_mut();
    for j in 0..n {
        for i in 0..n {
            v[(i, j)] *= Complex64::new(0.0, g[i] - g[j]);
        }
    }
    out
}

/// Apply the scaled collision map `I^N_{p,x}` to `ρ`.
pub fn collision_apply(rho: &DensityKernel, p: f64, x: f64, params: &BathParams) -> Result<DensityKernel> {
    let mut out = rho.clone();
    CollisionWorkspace::new(rho.grid()).apply(&mut out, p, x, params)?;
    Ok(out)
}

/// Reusable buffers for applying many collisions on one grid.
pub struct CollisionWorkspace {
    grid: GridSpec,
    theta: Vec<Complex64>,
    gam: Vec<f64>,
}

impl CollisionWorkspace {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            theta: vec![Complex64::new(0.0, 0.0); 2 * n - 1],
            gam: vec![0.0; n],
        }
    }

    /// In-place `ρ ← I^N_{p,x}[ρ]`, entrywise multiplication by
    /// `1 − α²/N + (α²/N) θ_p(X−X') ± i (α/√N)√(1−α²/N) e^{−2p²} (γ(X−x) − γ(X'−x))`.
    pub fn apply(&mut self, rho: &mut DensityKernel, p: f64, x: f64, params: &BathParams) -> Result<()> {
        self.apply_inner::<false>(rho, p, x, params).map(|_| ())
    }

    /// As [`CollisionWorkspace::apply`], returning the jump size
    /// `‖I[ρ] − ρ‖_{S₂}`.
    pub fn apply_measured(&mut self, rho: &mut DensityKernel, p: f64, x: f64, params: &BathParams) -> Result<f64> {
        self.apply_inner::<true>(rho, p, x, params)
    }

    fn apply_inner<const MEASURE: bool>(
        &mut self,
        rho: &mut DensityKernel,
        p: f64,
        x: f64,
        params: &BathParams,
    ) -> Result<f64> {
        params.validate()?;
        assert_eq!(rho.grid(), &self.grid);
        let n = self.grid.n_points();
        let h = self.grid.spacing();
        let a = params.alpha() * params.alpha() / params.rate();
        if a == 0.0 {
            return Ok(0.0);
        }
        let b = params.sign().value() * (params.alpha() / params.rate().sqrt()) * (1.0 - a).sqrt()
            * (-2.0 * p * p).exp();
        let off = n - 1;
        for (idx, t) in self.theta.iter_mut().enumerate() {
            let d = idx as i64 - off as i64;
            let y = self.grid.separation(d);
            *t = theta_p(p, y) * a + (1.0 - a);
        }
        for (i, g) in self.gam.iter_mut().enumerate() {
            *g = b * gamma(self.grid.x(i) - x);
        }
        let mut jump = 0.0;
        let v = rho.values_mut();
        for j in 0..n {
            let gj = self.gam[j];
            let col = v.column_mut(j);
            for (i, z) in col.into_iter().enumerate() {
                let m = self.theta[i + off - j] + Complex64::new(0.0, self.gam[i] - gj);
                if MEASURE {
                    jump += (m - 1.0).norm_sqr() * z.norm_sqr();
                }
                *z *= m;
            }
        }
        Ok(h * jump.sqrt())
    }
}

/// Complementary error function with the `1/√π` normalization,
/// `(1/√π)∫_x^∞ e^{−y²} dy`, i.e. half of the standard `erfc`.
#[inline]
pub fn half_erfc(x: f64) -> f64 {
    0.5 * erfc(x)
}

/// Compensating potential profile
/// `γ_∞(X) = (1/2R) ∫_{−R}^{R} ∫ e^{−2p²} γ(X−x) μ_m(dp) dx`
/// `= (√(2πβ₀)/4R) (erfc_½((X−R)/√2) − erfc_½((X+R)/√2))`.
pub fn gamma_inf_eval(x: f64, params: &BathParams) -> f64 {
    let r = params.cutoff();
    let s2 = 2f64.sqrt();
    (2.0 * PI * params.beta0()).sqrt() / (4.0 * r)
        * (half_erfc((x - r) / s2) - half_erfc((x + r) / s2))
}

/// `γ_∞` on the grid nodes.
pub fn gamma_inf_profile(grid: &GridSpec, params: &BathParams) -> Vec<f64> {
    grid.positions().iter().map(|&x| gamma_inf_eval(x, params)).collect()
}

/// Re-coherent Stratonovich kernel
/// `γ_∞(X, X') = (1/2R) · ½ √(β₀/(8−β₀)) ∫_{−R}^{R} (γ(X−x) − γ(X'−x))² dx`,
/// by Gauss–Legendre quadrature with [`GAMMA_INF_NODES`] nodes. Real,
/// symmetric, zero on the diagonal.
///
/// With this normalization `α² γ_∞(X, X')` equals half the variance rate of
/// `W(X) − W(X')` for the limit noise field.
pub fn gamma_inf_kernel(grid: &GridSpec, params: &BathParams) -> KernelMultiplier {
    let n = grid.n_points();
    let r = params.cutoff();
    let b0 = params.beta0();
    let pref = 0.5 * (b0 / (8.0 - b0)).sqrt() / (2.0 * r);
    let (nodes, weights) = gauss_legendre(GAMMA_INF_NODES, -r, r);
    let xs = grid.positions();
    let g = DMatrix::from_fn(n, nodes.len(), |i, q| gamma(xs[i] - nodes[q]) * weights[q].sqrt());
    let s = &g * g.transpose();
    let values = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(pref * (s[(i, i)] + s[(j, j)] - 2.0 * s[(i, j)]).max(0.0), 0.0)
        }
    });
    KernelMultiplier::new(grid.clone(), values)
}
