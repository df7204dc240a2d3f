// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Ensembles of paths and the statistics used to compare them.

pub mod coherence;
pub mod ensemble;
pub mod law;
pub mod probes;
pub mod propcheck;
pub mod stats;

pub use coherence::{annealed_rate, coherence_profile, fit_decay_rate, quenched_rate, CoherenceProfile};
pub use ensemble::{run_ensemble, Dynamics, EnsembleRunner, EnsembleSpec, EnsembleSummary, PathDigest};
pub use law::{law_distance, non_increasing_within_bands, Bootstrap, LawDistance};
pub use probes::Probe;
pub use propcheck::{property_suite, property_suite_on, PropertyReport};
