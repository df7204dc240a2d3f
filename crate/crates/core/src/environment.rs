// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! The bath: a Poisson point process of collision marks `(T_j, x_j, p_j)`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::collision::BathParams;
use crate::error::{Error, Result};

/// Header line of the delimited event export.
pub const EVENTS_HEADER: &str = "# decohere-events v1";

/// Addressable random stream. Every `(seed, stream_id)` pair selects an
/// independent ChaCha8 sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One collision mark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub time: f64,
    pub position: f64,
    pub momentum: f64,
}

/// Lazy sampler of the collision process on `(0, ∞)`.
///
/// Inter-arrival times are exponential with rate `N`, positions uniform on
/// `[−R, R]`, momenta centered Gaussian with variance `1/β`. The draws of
/// one event are taken in that order.
pub struct PppSampler<R: Rng> {
    rng: R,
    clock: f64,
    cutoff: f64,
    wait: Exp<f64>,
    momentum: Normal<f64>,
}

impl PppSampler<ChaCha8Rng> {
    pub fn new(params: &BathParams, stream: &RngStream) -> Self {
        Self::with_rng(params, stream.rng())
    }
}

impl<R: Rng> PppSampler<R> {
    pub fn with_rng(params: &BathParams, rng: R) -> Self {
        Self {
            rng,
            clock: 0.0,
            cutoff: params.cutoff(),
            wait: Exp::new(params.rate()).expect("rate validated positive"),
            momentum: Normal::new(0.0, params.momentum_variance().sqrt())
                .expect("variance validated positive"),
        }
    }

    /// Time of the last event drawn so far.
    pub fn clock(&self) -> f64 {
        self.clock
    }
}

impl<R: Rng> Iterator for PppSampler<R> {
    type Item = CollisionEvent;

    fn next(&mut self) -> Option<CollisionEvent> {
        loop {
            let dt = self.wait.sample(&mut self.rng);
            let time = self.clock + dt;
            let position = self.rng.random_range(-self.cutoff..=self.cutoff);
            let momentum = self.momentum.sample(&mut self.rng);
            // A zero waiting time (or one lost to rounding) would repeat a
            // time stamp; such a draw is skipped to keep times strictly
            // increasing.
            if time > self.clock {
                self.clock = time;
                return Some(CollisionEvent {
                    time,
                    position,
                    momentum,
                });
            }
        }
    }
}

/// All events in `(0, horizon]`, in increasing time order.
pub fn sample_ppp(params: &BathParams, horizon: f64, stream: &RngStream) -> Result<Vec<CollisionEvent>> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    Ok(PppSampler::new(params, stream)
        .take_while(|e| e.time <= horizon)
        .collect())
}

/// Write events as `time,position,momentum` rows under a versioned header.
/// Values use the shortest representation that parses back exactly.
pub fn write_events<W: Write>(events: &[CollisionEvent], mut out: W) -> Result<()> {
    writeln!(out, "{EVENTS_HEADER}")?;
    writeln!(out, "time,position,momentum")?;
    for e in events {
        writeln!(out, "{:?},{:?},{:?}", e.time, e.position, e.momentum)?;
    }
    Ok(())
}

pub fn read_events<R: BufRead>(input: R) -> Result<Vec<CollisionEvent>> {
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != EVENTS_HEADER {
        return Err(Error::Format(format!("unexpected event header {header:?}")));
    }
    let columns = lines.next().transpose()?.unwrap_or_default();
    if columns.trim() != "time,position,momentum" {
        return Err(Error::Format(format!("unexpected event columns {columns:?}")));
    }
    let mut events = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("event row {}: {e}", k + 1)))?;
        if f.len() != 3 {
            return Err(Error::Format(format!("event row {} has {} fields", k + 1, f.len())));
        }
        events.push(CollisionEvent {
            time: f[0],
            position: f[1],
            momentum: f[2],
        });
    }
    Ok(events)
}
