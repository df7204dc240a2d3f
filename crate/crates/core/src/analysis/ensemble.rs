// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Ensembles of independent paths with deterministic, order-fixed reduction.
//!
//! Trajectory `i` always draws from stream `(seed, i)`. Paths are computed in
//! chunks (in parallel with the `parallel` feature) and folded strictly in
//! index order with compensated sums, so a summary depends only on the `EnsembleSpec`,
//! never on the thread count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::probes::Probe;
use crate::analysis::stats::{mean_and_se, CompensatedSum};
use crate::collision::BathParams;
use crate::environment::RngStream;
use crate::error::{Error, Result};
use crate::jump::simulate_jump_trajectory_with;
use crate::kernel::{DensityKernel, ObservableRecord};
use crate::sde::{ItoMethod, NoiseModel, SdeIntegrator};
use crate::trajectory::{
    validate_sample_times, JumpNorms, JumpStats, Scheme, TrajectoryOptions, TrajectoryResult,
    DEFAULT_POSITIVITY_TOLERANCE,
};

/// Paths evaluated per parallel batch.
const CHUNK: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Dynamics {
    Jump {
        dt_max: f64,
    },
    Sde {
        scheme: Scheme,
        dt: f64,
        n_nodes: usize,
        ito_method: ItoMethod,
        free_flow: bool,
    },
}

impl Dynamics {
    pub fn scheme(&self) -> Scheme {
        match self {
            Dynamics::Jump { .. } => Scheme::Jump,
            Dynamics::Sde { scheme, .. } => *scheme,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub rho0: DensityKernel,
    pub params: BathParams,
    pub dynamics: Dynamics,
    pub sample_times: Vec<f64>,
    pub n_trajectories: usize,
    pub seed: u64,
    pub probes: Vec<Probe>,
    /// Diagonal offsets `d` at which `Σ_i |ρ(X_{i+d}, X_i)|` is recorded.
    pub coherence_offsets: Vec<usize>,
    pub mean_kernels: bool,
    pub jump_norms: JumpNorms,
    /// Paths with index below this value also measure `S₁` jump sizes.
    pub s1_jump_paths: usize,
    pub positivity_tolerance: f64,
    /// Largest tolerated fraction of broken paths.
    pub max_failure_fraction: f64,
}

impl EnsembleSpec {
    pub fn new(
        rho0: DensityKernel,
        params: BathParams,
        dynamics: Dynamics,
        sample_times: Vec<f64>,
        n_trajectories: usize,
        seed: u64,
    ) -> Self {
        Self {
            rho0,
            params,
            dynamics,
            sample_times,
            n_trajectories,
            seed,
            probes: Probe::defaults(),
            coherence_offsets: Vec::new(),
            mean_kernels: true,
            jump_norms: JumpNorms::S2,
            s1_jump_paths: 0,
            positivity_tolerance: DEFAULT_POSITIVITY_TOLERANCE,
            max_failure_fraction: 0.01,
        }
    }
}

/// Per-path data retained by an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDigest {
    pub index: usize,
    pub records: Vec<ObservableRecord>,
    /// `[probe][time]`.
    pub probes: Vec<Vec<f64>>,
    /// `[offset][time]`.
    pub coherence: Vec<Vec<f64>>,
    pub event_count: usize,
    pub jumps: Option<JumpStats>,
    pub min_positivity_floor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub scheme: Scheme,
    pub params: BathParams,
    pub seed: u64,
    pub n_trajectories: usize,
    /// `(index, reason)` of every broken path.
    pub failures: Vec<(usize, String)>,
    pub times: Vec<f64>,
    pub means: Vec<ObservableRecord>,
    pub std_errors: Vec<ObservableRecord>,
    pub mean_kernels: Option<Vec<DensityKernel>>,
    /// Standard error of each mean kernel in `S₂`.
    pub kernel_std_errors: Option<Vec<f64>>,
    pub probes: Vec<Probe>,
    pub coherence_offsets: Vec<usize>,
    /// Successful paths in index order.
    pub paths: Vec<PathDigest>,
}

impl EnsembleSummary {
    pub fn n_completed(&self) -> usize {
        self.paths.len()
    }

    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }

    /// Values of probe `p` at time index `k`, one per path.
    pub fn probe_samples(&self, p: usize, k: usize) -> Vec<f64> {
        self.paths.iter().map(|d| d.probes[p][k]).collect()
    }

    /// Values of observable field `f` (see [`ObservableRecord::FIELDS`]).
    pub fn field_samples(&self, f: usize, k: usize) -> Vec<f64> {
        self.paths.iter().map(|d| d.records[k].values()[f]).collect()
    }

    pub fn max_jump_s2(&self) -> Option<f64> {
        self.fold_jumps(|j| Some(j.max_s2))
    }

    pub fn max_jump_s1(&self) -> Option<f64> {
        self.fold_jumps(|j| j.max_s1)
    }

    pub fn max_jump_s2_ratio(&self) -> Option<f64> {
        self.fold_jumps(|j| Some(j.max_s2_ratio))
    }

    pub fn max_jump_s1_ratio(&self) -> Option<f64> {
        self.fold_jumps(|j| j.max_s1_ratio)
    }

    fn fold_jumps<F: Fn(&JumpStats) -> Option<f64>>(&self, f: F) -> Option<f64> {
        self.paths
            .iter()
            .filter_map(|d| d.jumps.as_ref().and_then(&f))
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    }

    pub fn min_positivity_floor(&self) -> f64 {
        self.paths
            .iter()
            .map(|d| d.min_positivity_floor)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Prepared ensemble: shared read-only tables plus the spec.
pub struct EnsembleRunner {
    spec: EnsembleSpec,
    integrator: Option<SdeIntegrator>,
}

impl EnsembleRunner {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        spec.params.validate()?;
        validate_sample_times(&spec.sample_times)?;
        if spec.n_trajectories == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one trajectory".into()));
        }
        let integrator = match spec.dynamics {
            Dynamics::Jump { dt_max } => {
                if !(dt_max > 0.0) {
                    return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt_max}")));
                }
                None
            }
            Dynamics::Sde {
                scheme,
                n_nodes,
                ito_method,
                free_flow,
                ..
            } => {
                if !matches!(scheme, Scheme::SdeIto | Scheme::SdeStrat) {
                    return Err(Error::InvalidParameter(format!(
                        "{} is not a diffusive scheme",
                        scheme.name()
                    )));
                }
                let model = NoiseModel::new(spec.rho0.grid(), &spec.params, n_nodes)?;
                let mut integ = SdeIntegrator::new(model);
                integ.ito_method = ito_method;
                integ.free_flow = free_flow;
                Some(integ)
            }
        };
        Ok(Self { spec, integrator })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Simulates path `index` and returns it with its sampled states.
    pub fn path(&self, index: usize) -> Result<TrajectoryResult> {
        let spec = &self.spec;
        let stream = RngStream::new(spec.seed, index as u64);
        let opts = TrajectoryOptions {
            keep_snapshots: true,
            jump_norms: if index < spec.s1_jump_paths {
                JumpNorms::S1AndS2
            } else {
                spec.jump_norms
            },
            positivity_tolerance: spec.positivity_tolerance,
        };
        match (&spec.dynamics, &self.integrator) {
            (Dynamics::Jump { dt_max }, _) => {
                simulate_jump_trajectory_with(&spec.rho0, &spec.params, &spec.sample_times, *dt_max, stream, &opts)
            }
            (Dynamics::Sde { scheme, dt, .. }, Some(integ)) => {
                integ.simulate(&spec.rho0, &spec.sample_times, *dt, *scheme, stream, &opts)
            }
            _ => unreachable!("integrator prepared in new()"),
        }
    }

    /// Path `index` reduced to the data kept by the summary.
    pub fn digest(&self, index: usize) -> Result<(PathDigest, Vec<DensityKernel>)> {
        let res = self.path(index)?;
        let snaps = res.snapshots.unwrap_or_default();
        let probes = self
            .spec
            .probes
            .iter()
            .map(|p| snaps.iter().map(|s| p.evaluate(s)).collect())
            .collect();
        let coherence = self
            .spec
            .coherence_offsets
            .iter()
            .map(|&d| snaps.iter().map(|s| diagonal_band_mass(s, d)).collect())
            .collect();
        Ok((
            PathDigest {
                index,
                records: res.records,
                probes,
                coherence,
                event_count: res.event_count,
                jumps: res.jumps,
                min_positivity_floor: res.min_positivity_floor,
            },
            snaps,
        ))
    }

    pub fn run(&self) -> Result<EnsembleSummary> {
        let spec = &self.spec;
        let m = spec.n_trajectories;
        let nt = spec.sample_times.len();
        let n = spec.rho0.n();
        let mut acc = Accumulator::new(nt, n, spec.mean_kernels);
        let mut paths = Vec::with_capacity(m);
        let mut failures = Vec::new();
        let mut start = 0;
        while start < m {
            let end = (start + CHUNK).min(m);
            for (i, out) in (start..end).zip(self.chunk(start, end)) {
                match out {
                    Ok((digest, snaps)) => {
                        acc.add(&digest, &snaps);
                        paths.push(digest);
                    }
                    Err(e) if e.is_numerical() => failures.push((i, e.to_string())),
                    Err(e) => return Err(e),
                }
            }
            start = end;
        }
        if failures.len() as f64 > spec.max_failure_fraction * m as f64 || paths.is_empty() {
            return Err(Error::EnsembleAborted {
                failed: failures.len(),
                total: m,
            });
        }
        for (i, reason) in &failures {
            log::warn!("trajectory {i} dropped: {reason}");
        }
        let (means, std_errors) = record_statistics(&paths, &spec.sample_times);
        let (mean_kernels, kernel_std_errors) = acc.finish(&spec.rho0);
        Ok(EnsembleSummary {
            scheme: spec.dynamics.scheme(),
            params: spec.params,
            seed: spec.seed,
            n_trajectories: m,
            failures,
            times: spec.sample_times.clone(),
            means,
            std_errors,
            mean_kernels,
            kernel_std_errors,
            probes: spec.probes.clone(),
            coherence_offsets: spec.coherence_offsets.clone(),
            paths,
        })
    }

    #[cfg(feature = "parallel")]
    fn chunk(&self, start: usize, end: usize) -> Vec<Result<(PathDigest, Vec<DensityKernel>)>> {
        use rayon::prelude::*;
        (start..end).into_par_iter().map(|i| self.digest(i)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn chunk(&self, start: usize, end: usize) -> Vec<Result<(PathDigest, Vec<DensityKernel>)>> {
        (start..end).map(|i| self.digest(i)).collect()
    }
}

pub fn run_ensemble(spec: EnsembleSpec) -> Result<EnsembleSummary> {
    EnsembleRunner::new(spec)?.run()
}

/// `Σ_i |ρ(X_{i+d}, X_i)|` over all in-range pairs.
pub fn diagonal_band_mass(rho: &DensityKernel, d: usize) -> f64 {
    let n = rho.n();
    let v = rho.values();
    (0..n.saturating_sub(d)).map(|i| v[(i + d, i)].norm()).sum()
}

/// Two-pass means and standard errors of every record field.
fn record_statistics(paths: &[PathDigest], times: &[f64]) -> (Vec<ObservableRecord>, Vec<ObservableRecord>) {
    let mut means = Vec::with_capacity(times.len());
    let mut ses = Vec::with_capacity(times.len());
    let mut column = Vec::with_capacity(paths.len());
    for (k, &t) in times.iter().enumerate() {
        let mut mu = [0.0; 6];
        let mut se = [0.0; 6];
        for f in 0..6 {
            column.clear();
            column.extend(paths.iter().map(|d| d.records[k].values()[f]));
            (mu[f], se[f]) = mean_and_se(&column);
        }
        means.push(ObservableRecord::from_values(t, mu));
        ses.push(ObservableRecord::from_values(t, se));
    }
    (means, ses)
}

/// Order-fixed compensated accumulation of sampled kernels.
struct Accumulator {
    count: usize,
    kernels: Option<Vec<(DMatrix<Complex64>, DMatrix<Complex64>)>>,
    s2_squares: Vec<CompensatedSum>,
}

impl Accumulator {
    fn new(nt: usize, n: usize, kernels: bool) -> Self {
        Self {
            count: 0,
            kernels: kernels.then(|| vec![(DMatrix::zeros(n, n), DMatrix::zeros(n, n)); nt]),
            s2_squares: vec![CompensatedSum::default(); nt],
        }
    }

    fn add(&mut self, d: &PathDigest, snaps: &[DensityKernel]) {
        self.count += 1;
        for (k, rec) in d.records.iter().enumerate() {
            self.s2_squares[k].add(rec.s2_norm * rec.s2_norm);
        }
        if let Some(kernels) = self.kernels.as_mut() {
            for ((sum, comp), s) in kernels.iter_mut().zip(snaps) {
                for ((a, c), x) in sum.iter_mut().zip(comp.iter_mut()).zip(s.values().iter()) {
                    neumaier(&mut a.re, &mut c.re, x.re);
                    neumaier(&mut a.im, &mut c.im, x.im);
                }
            }
        }
    }

    /// Mean kernels and their `S₂` standard errors
    /// `√((mean ‖ρ_i‖² − ‖ρ̄‖²)/(M−1))`.
    fn finish(self, rho0: &DensityKernel) -> (Option<Vec<DensityKernel>>, Option<Vec<f64>>) {
        let Some(ks) = self.kernels else {
            return (None, None);
        };
        let m = self.count as f64;
        let mut out = Vec::with_capacity(ks.len());
        let mut kse = Vec::with_capacity(ks.len());
        for (k, (sum, comp)) in ks.into_iter().enumerate() {
            let mean = (sum + comp) / Complex64::new(m, 0.0);
            let kernel = DensityKernel::new(rho0.grid().clone(), mean).expect("grid shape");
            let norm = kernel.hilbert_schmidt_norm();
            let se = if self.count > 1 {
                ((self.s2_squares[k].value() / m - norm * norm).max(0.0) / (m - 1.0)).sqrt()
            } else {
                0.0
            };
            kse.push(se);
            out.push(kernel);
        }
        (Some(out), Some(kse))
    }
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
