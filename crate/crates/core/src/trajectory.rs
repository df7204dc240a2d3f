// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Output of one simulated path, shared by the jump and diffusive solvers.

use serde::{Deserialize, Serialize};

use crate::collision::BathParams;
use crate::environment::RngStream;
use crate::error::{Error, Result};
use crate::kernel::{DensityKernel, ObservableRecord};

/// Most negative eigenvalue tolerated at a sample time before a path is
/// declared broken.
pub const DEFAULT_POSITIVITY_TOLERANCE: f64 = 1e-6;

/// Which dynamics produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Jump,
    SdeIto,
    SdeStrat,
    Annealed,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Jump => "jump",
            Scheme::SdeIto => "sde-ito",
            Scheme::SdeStrat => "sde-strat",
            Scheme::Annealed => "annealed",
        }
    }
}

/// How much work to spend on per-event jump diagnostics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpNorms {
    /// Nothing recorded.
    None,
    /// `S₂` size of every jump; cheap, computed from the entries.
    #[default]
    S2,
    /// `S₂` and `S₁` (one Hermitian eigensolve per event).
    S1AndS2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub keep_snapshots: bool,
    pub jump_norms: JumpNorms,
    pub positivity_tolerance: f64,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            keep_snapshots: false,
            jump_norms: JumpNorms::S2,
            positivity_tolerance: DEFAULT_POSITIVITY_TOLERANCE,
        }
    }
}

/// Largest jumps `‖ρ_{T_j} − ρ_{T_j⁻}‖` seen along a path.
///
/// The ratios divide each jump by the single-collision bound
/// `2(α²/N + (α/√N) e^{−2p²}) ‖ρ_{T_j⁻}‖`, so a ratio above one is a
/// violation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpStats {
    pub events: usize,
    pub max_s2: f64,
    pub max_s2_ratio: f64,
    pub max_s1: Option<f64>,
    pub max_s1_ratio: Option<f64>,
}

impl JumpStats {
    /// Pathwise bound `2(α²/N + α/√N)` for unit-trace states.
    pub fn pathwise_bound(params: &BathParams) -> f64 {
        let n = params.rate();
        let a = params.alpha();
        2.0 * (a * a / n + a / n.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub scheme: Scheme,
    pub params: BathParams,
    pub sample_times: Vec<f64>,
    pub records: Vec<ObservableRecord>,
    pub snapshots: Option<Vec<DensityKernel>>,
    pub event_count: usize,
    pub rng: RngStream,
    /// Smallest eigenvalue seen at any sample time.
    pub min_positivity_floor: f64,
    pub jumps: Option<JumpStats>,
}

/// Checks that sample times are finite, non-negative and strictly increasing.
pub fn validate_sample_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("no sample times given".into()));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("sample times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Records observables and checks the positivity floor of a sampled state.
pub(crate) struct Recorder {
    opts: TrajectoryOptions,
    pub(crate) records: Vec<ObservableRecord>,
    pub(crate) snapshots: Vec<DensityKernel>,
    pub(crate) min_floor: f64,
}

impl Recorder {
    pub(crate) fn new(opts: TrajectoryOptions, capacity: usize) -> Self {
        Self {
            opts,
            records: Vec::with_capacity(capacity),
            snapshots: Vec::new(),
            min_floor: f64::INFINITY,
        }
    }

    pub(crate) fn record(&mut self, rho: &DensityKernel, t: f64) -> Result<()> {
        let rec = rho.observables(t);
        if !rec.is_finite() {
            return Err(Error::Breakdown {
                time: t,
                reason: "non-finite observable".into(),
            });
        }
        let floor = rho.positivity_floor();
        self.min_floor = self.min_floor.min(floor);
        if floor < -self.opts.positivity_tolerance {
            return Err(Error::Breakdown {
                time: t,
                reason: format!(
                    "positivity floor {floor:e} below -{:e}; trace {}, purity {}",
                    self.opts.positivity_tolerance, rec.trace, rec.purity
                ),
            });
        }
        let boundary = rho.boundary_mass(3);
        if boundary > 1e-12 {
            log::warn!("t = {t}: mass {boundary:e} within 3 nodes of the grid edge");
        }
        self.records.push(rec);
        if self.opts.keep_snapshots {
            self.snapshots.push(rho.clone());
        }
        Ok(())
    }

    pub(crate) fn snapshots(&mut self) -> Option<Vec<DensityKernel>> {
        self.opts
            .keep_snapshots
            .then(|| std::mem::take(&mut self.snapshots))
    }
}
