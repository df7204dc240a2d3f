// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a plain-text key–value file (TOML syntax).
//!
//! ```text
//! mode = "jump"
//! seed = 7
//! trajectories = 200
//!
//! [grid]
//! points = 128
//! half_width = 16.0
//!
//! [bath]
//! alpha = 1.0
//! beta0 = 2.0
//! cutoff = 4.0
//! rate = 200.0
//! sign = 1
//!
//! [time]
//! horizon = 2.0
//! samples = [0.5, 1.0, 2.0]
//! ```
//!
//! Only `mode` is required; every other key has a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::collision::{BathParams, Sign};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::kernel::DensityKernel;
use crate::sde::{ItoMethod, DEFAULT_NOISE_NODES};
use crate::states::make_gaussian_state;
use crate::trajectory::Scheme;

pub const DEFAULT_POINTS: usize = 256;
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SEED: u64 = 0;
/// Largest seed the text format can hold (TOML integers are signed).
pub const MAX_SEED: u64 = i64::MAX as u64;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_COMPARE_RATES: [f64; 3] = [25.0, 100.0, 400.0];
pub const DEFAULT_COMPARE_TRAJECTORIES: usize = 1000;
/// Smallest ensemble accepted by `compare`.
pub const MIN_COMPARE_TRAJECTORIES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Annealed,
    Jump,
    Sde,
    Compare,
    Propcheck,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Annealed, Mode::Jump, Mode::Sde, Mode::Compare, Mode::Propcheck];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Annealed => "annealed",
            Mode::Jump => "jump",
            Mode::Sde => "sde",
            Mode::Compare => "compare",
            Mode::Propcheck => "propcheck",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Gaussian initial wave packet `(center, momentum, width)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialState {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            center: 0.0,
            momentum: 0.0,
            width: 0.5,
        }
    }
}

/// Fully validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub trajectories: usize,
    pub trials: usize,
    pub rates: Vec<f64>,
    pub out: Option<PathBuf>,
    pub grid: GridSpec,
    pub bath: BathParams,
    pub state: InitialState,
    pub horizon: f64,
    pub sample_times: Vec<f64>,
    pub dt: f64,
    /// Splitting step of the jump solver; `None` means `0.01/√N`.
    pub dt_max: Option<f64>,
    pub sde_scheme: Scheme,
    pub ito_method: ItoMethod,
    pub n_nodes: usize,
    pub snapshots: bool,
    pub export_events: bool,
}

impl RunConfig {
    /// Defaults for the given mode.
    pub fn new(mode: Mode) -> Self {
        parse_config(&format!("mode = \"{}\"\n", mode.name())).expect("defaults are valid")
    }

    pub fn initial_state(&self) -> Result<DensityKernel> {
        make_gaussian_state(&self.grid, self.state.center, self.state.momentum, self.state.width)
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max.unwrap_or_else(|| crate::jump::default_dt_max(&self.bath))
    }

    /// Canonical text form; `parse_config(&c.to_text())` returns `c`.
    pub fn to_text(&self) -> String {
        let raw = RawConfig {
            mode: Some(self.mode.name().to_string()),
            seed: Some(self.seed),
            trajectories: Some(self.trajectories as u64),
            trials: Some(self.trials as u64),
            rates: Some(self.rates.clone()),
            out: self.out.as_ref().map(|p| p.to_string_lossy().into_owned()),
            grid: Some(RawGrid {
                points: Some(self.grid.n_points() as u64),
                half_width: Some(self.grid.half_width()),
            }),
            bath: Some(RawBath {
                alpha: Some(self.bath.alpha()),
                beta0: Some(self.bath.beta0()),
                cutoff: Some(self.bath.cutoff()),
                rate: Some(self.bath.rate()),
                sign: Some(self.bath.sign().value() as i64),
            }),
            state: Some(RawState {
                center: Some(self.state.center),
                momentum: Some(self.state.momentum),
                width: Some(self.state.width),
            }),
            time: Some(RawTime {
                horizon: Some(self.horizon),
                samples: Some(self.sample_times.clone()),
                dt: Some(self.dt),
                dt_max: self.dt_max,
            }),
            sde: Some(RawSde {
                scheme: Some(scheme_name(self.sde_scheme).to_string()),
                ito_method: Some(ito_method_name(self.ito_method).to_string()),
                nodes: Some(self.n_nodes as u64),
            }),
            output: Some(RawOutput {
                snapshots: Some(self.snapshots),
                events: Some(self.export_events),
            }),
        };
        toml::to_string(&raw).expect("config serializes")
    }
}

fn scheme_name(s: Scheme) -> &'static str {
    match s {
        Scheme::SdeStrat => "stratonovich",
        _ => "ito",
    }
}

fn ito_method_name(m: ItoMethod) -> &'static str {
    match m {
        ItoMethod::EulerMaruyama => "euler-maruyama",
        ItoMethod::Milstein => "milstein",
    }
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectories: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<RawGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bath: Option<RawBath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<RawState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<RawTime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sde: Option<RawSde>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<u64>,
    half_width: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    alpha: Option<f64>,
    beta0: Option<f64>,
    cutoff: Option<f64>,
    rate: Option<f64>,
    sign: Option<i64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    center: Option<f64>,
    momentum: Option<f64>,
    width: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    horizon: Option<f64>,
    samples: Option<Vec<f64>>,
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt_max: Option<f64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSde {
    scheme: Option<String>,
    ito_method: Option<String>,
    nodes: Option<u64>,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    snapshots: Option<bool>,
    events: Option<bool>,
}

const TOP_KEYS: [&str; 12] = [
    "mode", "seed", "trajectories", "trials", "rates", "out", "grid", "bath", "state", "time", "sde", "output",
];

fn section_keys(section: &str) -> &'static [&'static str] {
    match section {
        "grid" => &["points", "half_width"],
        "bath" => &["alpha", "beta0", "cutoff", "rate", "sign"],
        "state" => &["center", "momentum", "width"],
        "time" => &["horizon", "samples", "dt", "dt_max"],
        "sde" => &["scheme", "ito_method", "nodes"],
        "output" => &["snapshots", "events"],
        _ => &[],
    }
}

/// Reports unknown keys by their dotted name before typed decoding.
fn check_keys(table: &toml::Table) -> Result<()> {
    for (k, v) in table {
        if !TOP_KEYS.contains(&k.as_str()) {
            return Err(Error::config(k, "unknown key"));
        }
        let allowed = section_keys(k);
        if allowed.is_empty() {
            continue;
        }
        let Some(sub) = v.as_table() else {
            return Err(Error::config(k, "expected a section"));
        };
        for sk in sub.keys() {
            if !allowed.contains(&sk.as_str()) {
                return Err(Error::config(format!("{k}.{sk}"), "unknown key"));
            }
        }
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse()
        .map_err(|e: toml::de::Error| Error::config("<syntax>", e.message().to_string()))
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    from_table(parse_table(text)?)
}

/// Like [`parse_config`], with the mode given by the caller. A `mode` key in
/// the text must agree with it.
pub fn parse_config_for(text: &str, mode: Mode) -> Result<RunConfig> {
    let mut table = parse_table(text)?;
    match table.get("mode").map(|v| v.as_str()) {
        None => {
            table.insert("mode".into(), toml::Value::String(mode.name().into()));
        }
        Some(Some(m)) if m == mode.name() => {}
        Some(other) => {
            return Err(Error::config(
                "mode",
                format!("config selects {:?} but {} was requested", other.unwrap_or("?"), mode.name()),
            ))
        }
    }
    from_table(table)
}

fn from_table(table: toml::Table) -> Result<RunConfig> {
    check_keys(&table)?;
    let raw: RawConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::config("<value>", e.message().to_string()))?;

    let mode_name = raw.mode.ok_or_else(|| Error::config("mode", "missing required key"))?;
    let mode = Mode::from_name(&mode_name).ok_or_else(|| {
        Error::config(
            "mode",
            format!("unknown mode {mode_name:?}; expected annealed, jump, sde, compare or propcheck"),
        )
    })?;

    let g = raw.grid.unwrap_or_default();
    let points = g.points.unwrap_or(DEFAULT_POINTS as u64) as usize;
    let half_width = positive("grid.half_width", g.half_width.unwrap_or(DEFAULT_HALF_WIDTH))?;
    let grid = GridSpec::new(half_width, points).map_err(|e| Error::config("grid.points", e.to_string()))?;

    let b = raw.bath.unwrap_or_default();
    let sign = match b.sign.unwrap_or(1) {
        1 => Sign::Plus,
        -1 => Sign::Minus,
        s => return Err(Error::config("bath.sign", format!("must be 1 or -1, got {s}"))),
    };
    let bath = BathParams::new(
        b.alpha.unwrap_or(1.0),
        b.cutoff.unwrap_or(4.0),
        b.beta0.unwrap_or(2.0),
        b.rate.unwrap_or(200.0),
        sign,
    )
    .map_err(|e| {
        let reason = match e {
            Error::InvalidParameter(r) => r,
            other => other.to_string(),
        };
        let key = if reason.starts_with("beta0") {
            "bath.beta0"
        } else if reason.starts_with("rate") {
            "bath.rate"
        } else if reason.starts_with("cutoff") {
            "bath.cutoff"
        } else {
            "bath.alpha"
        };
        Error::config(key, reason)
    })?;

    let s = raw.state.unwrap_or_default();
    let d = InitialState::default();
    let state = InitialState {
        center: finite("state.center", s.center.unwrap_or(d.center))?,
        momentum: finite("state.momentum", s.momentum.unwrap_or(d.momentum))?,
        width: positive("state.width", s.width.unwrap_or(d.width))?,
    };
    make_gaussian_state(&grid, state.center, state.momentum, state.width)
        .map_err(|e| Error::config("state", e.to_string()))?;

    let t = raw.time.unwrap_or_default();
    let horizon = positive("time.horizon", t.horizon.unwrap_or(1.0))?;
    let sample_times = t
        .samples
        .unwrap_or_else(|| (1..=4).map(|k| horizon * k as f64 / 4.0).collect());
    if sample_times.is_empty() {
        return Err(Error::config("time.samples", "no sample times"));
    }
    if sample_times.iter().any(|&s| !(s >= 0.0 && s <= horizon)) {
        return Err(Error::config("time.samples", format!("sample times must lie in [0, {horizon}]")));
    }
    if sample_times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("time.samples", "sample times must be strictly increasing"));
    }
    let dt = positive("time.dt", t.dt.unwrap_or(DEFAULT_DT))?;
    let dt_max = t.dt_max.map(|v| positive("time.dt_max", v)).transpose()?;

    let q = raw.sde.unwrap_or_default();
    let sde_scheme = match q.scheme.as_deref().unwrap_or("ito") {
        "ito" => Scheme::SdeIto,
        "stratonovich" => Scheme::SdeStrat,
        other => {
            return Err(Error::config("sde.scheme", format!("expected ito or stratonovich, got {other:?}")))
        }
    };
    let ito_method = match q.ito_method.as_deref().unwrap_or("milstein") {
        "milstein" => ItoMethod::Milstein,
        "euler-maruyama" => ItoMethod::EulerMaruyama,
        other => {
            return Err(Error::config(
                "sde.ito_method",
                format!("expected milstein or euler-maruyama, got {other:?}"),
            ))
        }
    };
    let n_nodes = q.nodes.unwrap_or(DEFAULT_NOISE_NODES as u64) as usize;
    if n_nodes < 32 {
        return Err(Error::config("sde.nodes", format!("need at least 32 noise nodes, got {n_nodes}")));
    }

    let default_trajectories = if mode == Mode::Compare { DEFAULT_COMPARE_TRAJECTORIES } else { 1 };
    let trajectories = raw.trajectories.unwrap_or(default_trajectories as u64) as usize;
    if trajectories == 0 {
        return Err(Error::config("trajectories", "must be at least 1"));
    }
    if mode == Mode::Compare && trajectories < MIN_COMPARE_TRAJECTORIES {
        return Err(Error::config(
            "trajectories",
            format!("compare needs at least {MIN_COMPARE_TRAJECTORIES} trajectories, got {trajectories}"),
        ));
    }
    let trials = raw.trials.unwrap_or(DEFAULT_TRIALS as u64) as usize;
    if trials < 100 {
        return Err(Error::config("trials", format!("need at least 100 trials, got {trials}")));
    }
    let rates = raw.rates.unwrap_or_else(|| DEFAULT_COMPARE_RATES.to_vec());
    if rates.is_empty() {
        return Err(Error::config("rates", "empty list"));
    }
    for &n in &rates {
        bath.with_rate(n).map_err(|e| Error::config("rates", e.to_string()))?;
    }
    if rates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("rates", "rates must be strictly increasing"));
    }

    let o = raw.output.unwrap_or_default();
    Ok(RunConfig {
        mode,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        trajectories,
        trials,
        rates,
        out: raw.out.map(PathBuf::from),
        grid,
        bath,
        state,
        horizon,
        sample_times,
        dt,
        dt_max,
        sde_scheme,
        ito_method,
        n_nodes,
        snapshots: o.snapshots.unwrap_or(false),
        export_events: o.events.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(e: Error) -> (String, String) {
        match e {
            Error::Config { key, reason } => (key, reason),
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("mode = \"annealed\"").unwrap();
        assert_eq!(c.grid.n_points(), 256);
        assert_eq!(c.grid.half_width(), 10.0);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.seed, 0);
        assert_eq!(c.sample_times, vec![0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn mode_is_required() {
        let (k, r) = key_of(parse_config("seed = 3").unwrap_err());
        assert_eq!(k, "mode");
        assert!(r.contains("missing"));
    }

    #[test]
    fn unknown_keys_are_named() {
        assert_eq!(key_of(parse_config("mode = \"jump\"\ncolour = 1").unwrap_err()).0, "colour");
        let e = parse_config("mode = \"jump\"\n[bath]\ngamma = 1.0").unwrap_err();
        assert_eq!(key_of(e).0, "bath.gamma");
    }

    #[test]
    fn bath_invariants_are_checked() {
        let (k, r) = key_of(parse_config("mode = \"jump\"\n[bath]\nbeta0 = 5").unwrap_err());
        assert_eq!(k, "bath.beta0");
        assert!(r.contains("beta0 must lie in (0,4)"), "{r}");
        let (k, r) = key_of(parse_config("mode = \"jump\"\n[bath]\nrate = 1\nalpha = 2").unwrap_err());
        assert_eq!(k, "bath.rate");
        assert!(r.contains("rate must exceed alpha²"), "{r}");
    }

    #[test]
    fn samples_must_fit_horizon() {
        let e = parse_config("mode = \"sde\"\n[time]\nhorizon = 1.0\nsamples = [0.5, 1.5]").unwrap_err();
        assert_eq!(key_of(e).0, "time.samples");
    }

    #[test]
    fn state_must_fit_grid() {
        let e = parse_config("mode = \"sde\"\n[state]\ncenter = 8.0").unwrap_err();
        assert_eq!(key_of(e).0, "state");
    }

    #[test]
    fn requested_mode_fills_or_must_match() {
        assert_eq!(parse_config_for("seed = 1", Mode::Sde).unwrap().mode, Mode::Sde);
        assert_eq!(parse_config_for("mode = \"sde\"", Mode::Sde).unwrap().mode, Mode::Sde);
        assert_eq!(key_of(parse_config_for("mode = \"jump\"", Mode::Sde).unwrap_err()).0, "mode");
    }

    #[test]
    fn canonical_text_round_trips() {
        for m in Mode::ALL {
            let mut c = RunConfig::new(m);
            c.dt_max = Some(1e-3 / 3.0);
            c.out = Some("runs/a b.csv".into());
            assert_eq!(parse_config(&c.to_text()).unwrap(), c);
        }
    }
}
