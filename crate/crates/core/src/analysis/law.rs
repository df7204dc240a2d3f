// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Distance between the laws of a scalar observable under two ensembles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::ensemble::EnsembleSummary;
use crate::analysis::stats::{ks_bootstrap_band, ks_p_value, ks_statistic, mean_and_se};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawDistance {
    pub observable: String,
    pub time: f64,
    pub samples_a: Vec<f64>,
    pub samples_b: Vec<f64>,
    pub ks_statistic: f64,
    /// Asymptotic two-sample p-value.
    pub p_value: f64,
    /// Difference of sample means, `a − b`.
    pub mean_gap: f64,
    /// Standard error of `mean_gap`.
    pub mean_gap_se: f64,
    /// Bootstrap percentile band of `ks_statistic`, when requested.
    pub band: Option<(f64, f64)>,
}

/// Bootstrap settings for [`law_distance`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

/// KS comparison of probe `probe` at time `t` between two ensembles.
pub fn law_distance(
    a: &EnsembleSummary,
    b: &EnsembleSummary,
    probe: usize,
    t: f64,
    bootstrap: Option<Bootstrap>,
) -> Result<LawDistance> {
    let (Some(ka), Some(kb)) = (a.time_index(t), b.time_index(t)) else {
        return Err(Error::Mismatch(format!("time {t} is not sampled by both ensembles")));
    };
    if probe >= a.probes.len() || probe >= b.probes.len() {
        return Err(Error::Mismatch(format!("probe {probe} is not recorded by both ensembles")));
    }
    if a.probes[probe] != b.probes[probe] {
        return Err(Error::Mismatch(format!(
            "probe {probe} differs: {} vs {}",
            a.probes[probe].label(),
            b.probes[probe].label()
        )));
    }
    Ok(compare_samples(
        a.probes[probe].label(),
        t,
        a.probe_samples(probe, ka),
        b.probe_samples(probe, kb),
        bootstrap,
    ))
}

/// True when a sequence of distances, ordered by increasing `N`, never
/// rises significantly: each lower band edge stays at or below the previous
/// upper band edge. Without bands the point statistics must not increase.
pub fn non_increasing_within_bands(seq: &[LawDistance]) -> bool {
    seq.windows(2).all(|w| match (w[0].band, w[1].band) {
        (Some((_, hi)), Some((lo, _))) => lo <= hi,
        _ => w[1].ks_statistic <= w[0].ks_statistic,
    })
}

/// KS comparison of two raw samples.
pub fn compare_samples(
    observable: String,
    time: f64,
    samples_a: Vec<f64>,
    samples_b: Vec<f64>,
    bootstrap: Option<Bootstrap>,
) -> LawDistance {
    let d = ks_statistic(&samples_a, &samples_b);
    let p = ks_p_value(d, samples_a.len(), samples_b.len());
    let (ma, sa) = mean_and_se(&samples_a);
    let (mb, sb) = mean_and_se(&samples_b);
    let band = bootstrap.map(|bs| {
        let mut rng = ChaCha8Rng::seed_from_u64(bs.seed);
        ks_bootstrap_band(&samples_a, &samples_b, bs.resamples, bs.level, &mut rng)
    });
    LawDistance {
        observable,
        time,
        samples_a,
        samples_b,
        ks_statistic: d,
        p_value: p,
        mean_gap: ma - mb,
        mean_gap_se: (sa * sa + sb * sb).sqrt(),
        band,
    }
}
