// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense density-operator kernels and the observables computed from them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::spectral::ColumnFft;

/// Imaginary diagonal tolerated by [`DensityKernel::trace`].
pub const TRACE_IMAG_TOLERANCE: f64 = 1e-10;

/// Kernel `ρ(X_i, X_j)` of a trace-class operator sampled on a grid.
///
/// The matrix is stored column-major; entry `(i, j)` is `ρ(X_i, X_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityKernel {
    grid: GridSpec,
    values: DMatrix<Complex64>,
}

impl DensityKernel {
    pub fn new(grid: GridSpec, values: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Mismatch(format!(
                "kernel is {}x{}, grid has {n} points",
                values.nrows(),
                values.ncols()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            values: DMatrix::zeros(n, n),
        }
    }

    /// `|φ⟩⟨ψ|` for wave functions sampled on the grid.
    pub fn outer(grid: &GridSpec, phi: &[Complex64], psi: &[Complex64]) -> Self {
        let n = grid.n_points();
        assert_eq!(phi.len(), n);
        assert_eq!(psi.len(), n);
        let values = DMatrix::from_fn(n, n, |i, j| phi[i] * psi[j].conj());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn<F>(grid: &GridSpec, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let n = grid.n_points();
        Self {
            grid: grid.clone(),
            values: DMatrix::from_fn(n, n, |i, j| f(i, j)),
        }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> DMatrix<Complex64> {
        self.values
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.grid.n_points()
    }

    fn check_same_grid(&self, other: &Self) {
        assert_eq!(self.grid, other.grid, "kernels live on different grids");
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        self.check_same_grid(other);
        let values = self.values.map(|z| z * a) + other.values.map(|z| z * b);
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.map(|z| z * a),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.adjoint(),
        }
    }

    /// `(ρ + ρ†)/2` scaled by the grid spacing: the matrix whose spectrum
    /// approximates the operator spectrum.
    pub fn hermitized_scaled(&self) -> DMatrix<Complex64> {
        let h = self.grid.spacing();
        let mut m = self.values.adjoint();
        m += &self.values;
        m.scale_mut(0.5 * h);
        m
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in j..n {
                let d = (self.values[(i, j)] - self.values[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Replace the stored values by their Hermitian part.
    pub fn symmetrize(&mut self) {
        let n = self.n();
        for j in 0..n {
            for i in j..n {
                let a = self.values[(i, j)];
                let b = self.values[(j, i)].conj();
                let m = (a + b) * 0.5;
                self.values[(i, j)] = m;
                self.values[(j, i)] = m.conj();
            }
        }
    }

    /// `Tr ρ = Σ ρ(X_i, X_i) · h`.
    pub fn trace(&self) -> Result<f64> {
        let z = self.trace_complex();
        if z.im.abs() >= TRACE_IMAG_TOLERANCE {
            return Err(Error::NotHermitian(z.im));
        }
        Ok(z.re)
    }

    pub fn trace_complex(&self) -> Complex64 {
        let h = self.grid.spacing();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.n() {
            s += self.values[(i, i)];
        }
        s * h
    }

    /// `‖ρ‖_{S_p}` for `p ∈ [1, ∞]`; pass `f64::INFINITY` for the operator norm.
    pub fn schatten_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Schatten exponent must be >= 1, got {p}"
            )));
        }
        if p == 2.0 {
            return Ok(self.hilbert_schmidt_norm());
        }
        let sv = self.singular_values();
        Ok(lp_norm(sv.as_slice(), p))
    }

    /// Singular values of the spacing-scaled matrix.
    pub fn singular_values(&self) -> DVector<f64> {
        let h = self.grid.spacing();
        (&self.values * Complex64::new(h, 0.0)).singular_values()
    }

    /// `‖ρ‖_{S_2}`, computed directly from the entries.
    pub fn hilbert_schmidt_norm(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr ρ²` of the Hermitian part.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.n();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                s += (self.values[(i, j)] * self.values[(j, i)]).re;
            }
        }
        s * h * h
    }

    /// Eigenvalues of the Hermitized, spacing-scaled matrix (unordered).
    pub fn eigenvalues(&self) -> DVector<f64> {
        self.hermitized_scaled().symmetric_eigenvalues()
    }

    /// Smallest eigenvalue of the Hermitized, spacing-scaled matrix.
    pub fn positivity_floor(&self) -> f64 {
        self.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Momentum-space diagonal `w_k`, in FFT order, normalized so that
    /// `Σ_k w_k = Tr ρ`.
    pub fn momentum_density(&self) -> Vec<f64> {
        let n = self.n();
        let h = self.grid.spacing();
        let mut fft = ColumnFft::new(n);
        let mut m = self.values.clone();
        fft.to_momentum(&mut m);
        let scale = h / n as f64;
        (0..n).map(|k| m[(k, k)].re * scale).collect()
    }

    /// `Tr((i∇) ρ (i∇)) = Σ_k k² w_k`.
    pub fn kinetic_energy(&self) -> f64 {
        let k = self.grid.momentum_nodes();
        self.momentum_density()
            .iter()
            .zip(&k)
            .map(|(w, kk)| w * kk * kk)
            .sum()
    }

    /// Mean momentum `Tr(P ρ)` with `P = −i∇`.
    pub fn mean_momentum(&self) -> f64 {
        let k = self.grid.momentum_nodes();
        self.momentum_density()
            .iter()
            .zip(&k)
            .map(|(w, kk)| w * kk)
            .sum()
    }

    /// `Tr(X ρ X) = Σ X_i² ρ_ii h`.
    pub fn position_moment(&self) -> f64 {
        self.diagonal_weighted(|x| x * x)
    }

    /// `Tr(g(X) ρ)` for a real function `g`.
    pub fn diagonal_weighted<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let h = self.grid.spacing();
        (0..self.n())
            .map(|i| g(self.grid.x(i)) * self.values[(i, i)].re)
            .sum::<f64>()
            * h
    }

    /// `Tr(P ρ X + X ρ P)`, the time derivative of `Tr(XρX)` under the free
    /// flow. See [`DensityKernel::mixed_moment_with`].
    pub fn mixed_moment(&self) -> f64 {
        self.mixed_moment_with(|x| x)
    }

    /// `Tr(P ρ g(X) + g(X) ρ P) = 2 Re Tr(P ρ g)` with the spectral momentum
    /// operator `P = −i∇` (Hermitian part of `ρ`).
    ///
    /// Under `i∂ₜψ = −½Δψ` this is `∂ₜ Tr(X ρ X)` when `g(X) = X`. With the
    /// literal operator `i∇ = −P` the same quantity has the opposite sign.
    pub fn mixed_moment_with<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let n = self.n();
        let h = self.grid.spacing();
        // (Pρ)_jj = Σ_l c(j−l) ρ_lj with the circulant symbol of P.
        let c = circulant_symbol(&self.grid, |k| k);
        let mut acc = 0.0;
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..n {
                let d = (j + n - l) % n;
                s += c[d] * (self.values[(l, j)] + self.values[(j, l)].conj()) * 0.5;
            }
            acc += g(self.grid.x(j)) * s.re;
        }
        2.0 * h * acc
    }

    /// Fraction of the diagonal mass within `points` nodes of either edge.
    pub fn boundary_mass(&self, points: usize) -> f64 {
        let n = self.n();
        let h = self.grid.spacing();
        let edge: f64 = (0..points.min(n))
            .chain(n.saturating_sub(points)..n)
            .map(|i| self.values[(i, i)].re.abs())
            .sum();
        edge * h
    }

    /// Returns every observable recorded along trajectories.
    pub fn observables(&self, time: f64) -> ObservableRecord {
        let trace = self.trace_complex().re;
        let purity = self.purity();
        ObservableRecord {
            time,
            trace,
            kinetic_energy: self.kinetic_energy(),
            position_moment: self.position_moment(),
            mixed_moment: self.mixed_moment(),
            purity,
            s2_norm: self.hilbert_schmidt_norm(),
        }
    }
}

/// `c(d) = (1/n) Σ_m f(k_m) e^{2πi m d / n}`: first column of the circulant
/// matrix representing `f(P)` in position space.
pub(crate) fn circulant_symbol<F: Fn(f64) -> f64>(grid: &GridSpec, f: F) -> Vec<Complex64> {
    let n = grid.n_points();
    let k = grid.momentum_nodes();
    let mut buf: Vec<Complex64> = k.iter().map(|&kk| Complex64::new(f(kk), 0.0)).collect();
    let mut fft = ColumnFft::new(n);
    fft.inverse(&mut buf);
    let inv_n = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv_n);
    buf
}

pub(crate) fn lp_norm(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum();
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// Scalar observables of one state at one time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub trace: f64,
    pub kinetic_energy: f64,
    pub position_moment: f64,
    pub mixed_moment: f64,
    pub purity: f64,
    pub s2_norm: f64,
}

impl ObservableRecord {
    pub const FIELDS: [&'static str; 6] = [
        "trace",
        "kinetic_energy",
        "position_moment",
        "mixed_moment",
        "purity",
        "s2_norm",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.trace,
            self.kinetic_energy,
            self.position_moment,
            self.mixed_moment,
            self.purity,
            self.s2_norm,
        ]
    }

    pub fn from_values(time: f64, v: [f64; 6]) -> Self {
        Self {
            time,
            trace: v[0],
            kinetic_energy: v[1],
            position_moment: v[2],
            mixed_moment: v[3],
            purity: v[4],
            s2_norm: v[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.values().iter().all(|v| v.is_finite())
    }
}
