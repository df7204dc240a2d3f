// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Reference computations for the integration tests. Everything here is
//! written independently of the library numerics: adaptive Simpson
//! integration, Gauss–Hermite rules from the Golub–Welsch eigenproblem,
//! closed-form Gaussian packets and high-order finite differences.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || (depth < 42 && delta.abs() <= 15.0 * tol) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Gauss–Hermite nodes and weights for `∫ f(x) e^{−x²} dx`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(n, n, |i, k| {
        if i + 1 == k || k + 1 == i {
            (i.max(k) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Expectation of `f(p)` for `p ~ N(0, var)`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F, var: f64, n: usize) -> f64 {
    let (x, w) = gauss_hermite(n);
    let s = (2.0 * var).sqrt();
    x.iter().zip(&w).map(|(&x, &w)| w * f(s * x)).sum::<f64>() / std::f64::consts::PI.sqrt()
}

/// Normalized packet `(2πσ²)^{−1/4} exp(−(x−c)²/(4σ²) + i p x)` and its
/// derivative.
pub fn packet(x: f64, c: f64, p: f64, s: f64) -> (Complex64, Complex64) {
    let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.25);
    let psi = Complex64::from_polar(norm * (-(x - c).powi(2) / (4.0 * s * s)).exp(), p * x);
    let d = psi * Complex64::new(-(x - c) / (2.0 * s * s), p);
    (psi, d)
}

/// Eighth-order central derivative of a periodic sample vector.
pub fn fd_derivative(v: &[Complex64], h: f64) -> Vec<Complex64> {
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in C.iter().enumerate() {
                let s = k + 1;
                acc += (v[(i + s) % n] - v[(i + n - s) % n]) * *c;
            }
            acc / h
        })
        .collect()
}
