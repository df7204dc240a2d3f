// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Heavy quantum particle in one dimension under random collisions with
//! light bath particles.
//!
//! Three descriptions of the reduced dynamics are provided on a periodic
//! position grid: the microscopic jump process driven by a Poisson stream of
//! collisions, its diffusive limit (a stochastic Lindblad equation in Itô and
//! Stratonovich form) and the deterministic annealed master equation.

pub mod analysis;
pub mod annealed;
pub mod collision;
#[cfg(feature = "files")]
pub mod config;
pub mod environment;
pub mod error;
pub mod grid;
pub mod jump;
pub mod kernel;
pub mod propagate;
pub mod quadrature;
#[cfg(feature = "files")]
pub mod results;
#[cfg(feature = "files")]
pub mod run;
pub mod sde;
pub(crate) mod spectral;
pub mod states;
pub mod trajectory;

pub use collision::{BathParams, Sign};
pub use environment::{CollisionEvent, RngStream};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use kernel::{DensityKernel, ObservableRecord};
pub use trajectory::{Scheme, TrajectoryOptions, TrajectoryResult};
