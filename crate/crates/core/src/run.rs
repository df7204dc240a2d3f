// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Dispatch of a [`RunConfig`] to the solvers and assembly of the
//! [`ResultFile`].
//!
//! Random streams: path `i` of an ensemble with seed `s` uses stream
//! `(s, i)`, so a single-trajectory run reproduces path 0 of the ensemble.
//! In `compare` mode the diffusive ensemble uses seed `s` and the jump
//! ensemble for the `k`-th rate uses `s + 1 + k`.

use std::path::Path;
use std::time::Instant;

use crate::analysis::ensemble::{run_ensemble, Dynamics, EnsembleSpec, EnsembleSummary};
use crate::analysis::law::{law_distance, non_increasing_within_bands, Bootstrap};
use crate::analysis::propcheck::property_suite_on;
use crate::annealed::{predicted_moments, solve_annealed};
use crate::config::{Mode, RunConfig};
use crate::environment::{sample_ppp, write_events, RngStream};
use crate::error::{Error, Result};
use crate::jump::simulate_jump_trajectory_with;
use crate::kernel::{DensityKernel, ObservableRecord};
use crate::results::{events_path, fmt_f64, write_atomic, Metadata, RecordRow, ResultFile, Snapshot, Table};
use crate::sde::{NoiseModel, SdeIntegrator};
use crate::trajectory::{TrajectoryOptions, TrajectoryResult};

/// Bootstrap resamples behind the bands of the `compare` table.
pub const COMPARE_BOOTSTRAP_RESAMPLES: usize = 200;
pub const COMPARE_BOOTSTRAP_LEVEL: f64 = 0.95;

/// Runs a configuration in memory.
pub fn run(config: &RunConfig) -> Result<ResultFile> {
    if config.seed > crate::config::MAX_SEED {
        return Err(Error::config("seed", format!("must not exceed {}", crate::config::MAX_SEED)));
    }
    let start = Instant::now();
    let mut out = Assembly::default();
    match config.mode {
        Mode::Annealed => run_annealed(config, &mut out)?,
        Mode::Jump | Mode::Sde if config.trajectories == 1 => run_single(config, &mut out)?,
        Mode::Jump | Mode::Sde => run_many(config, &mut out)?,
        Mode::Compare => run_compare(config, &mut out)?,
        Mode::Propcheck => run_propcheck(config, &mut out)?,
    }
    Ok(ResultFile {
        metadata: Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            grid_points: config.grid.n_points(),
            half_width: config.grid.half_width(),
            status: out.status.unwrap_or_else(|| "ok".into()),
            snapshot_count: out.snapshots.len(),
        },
        config: config.clone(),
        records: out.records,
        tables: out.tables,
        snapshots: out.snapshots,
    })
}

/// Runs a configuration and writes the result (and requested sidecars) to
/// `path`. The result is written even when its status reports failed checks.
pub fn run_to_file(config: &RunConfig, path: &Path) -> Result<ResultFile> {
    let result = run(config)?;
    if config.export_events && config.mode == Mode::Jump {
        let events = sample_ppp(&config.bath, config.horizon, &RngStream::new(config.seed, 0))?;
        let mut buf = Vec::new();
        write_events(&events, &mut buf)?;
        write_atomic(&events_path(path), &buf)?;
    }
    result.write(path)?;
    Ok(result)
}

#[derive(Default)]
struct Assembly {
    records: Vec<RecordRow>,
    tables: Vec<Table>,
    snapshots: Vec<Snapshot>,
    status: Option<String>,
}

impl Assembly {
    fn push_records(&mut self, path: usize, recs: &[ObservableRecord]) {
        self.records
            .extend(recs.iter().map(|r| RecordRow { path, record: r.clone() }));
    }

    fn push_snapshots(&mut self, path: u64, times: &[f64], kernels: Vec<DensityKernel>) {
        self.snapshots.extend(
            times
                .iter()
                .zip(kernels)
                .map(|(&time, kernel)| Snapshot { time, path, kernel }),
        );
    }
}

fn predicted_table(config: &RunConfig, rho0: &DensityKernel) -> Result<Table> {
    let mut t = Table::new("predicted", &["time", "kinetic_energy", "position_moment"]);
    for &s in &config.sample_times {
        let (k, x) = predicted_moments(rho0, &config.bath, s)?;
        t.push(vec![fmt_f64(s), fmt_f64(k), fmt_f64(x)]);
    }
    Ok(t)
}

fn run_annealed(config: &RunConfig, out: &mut Assembly) -> Result<()> {
    let rho0 = config.initial_state()?;
    let run = solve_annealed(&rho0, &config.bath, &config.sample_times, config.dt)?;
    out.push_records(0, &run.records);
    out.tables.push(predicted_table(config, &rho0)?);
    if config.snapshots {
        out.push_snapshots(0, &config.sample_times, run.states);
    }
    Ok(())
}

fn sde_integrator(config: &RunConfig) -> Result<SdeIntegrator> {
    let mut integ = SdeIntegrator::new(NoiseModel::new(&config.grid, &config.bath, config.n_nodes)?);
    integ.ito_method = config.ito_method;
    Ok(integ)
}

fn run_single(config: &RunConfig, out: &mut Assembly) -> Result<()> {
    let rho0 = config.initial_state()?;
    let opts = TrajectoryOptions {
        keep_snapshots: config.snapshots,
        ..TrajectoryOptions::default()
    };
    let stream = RngStream::new(config.seed, 0);
    let res: TrajectoryResult = match config.mode {
        Mode::Jump => {
            simulate_jump_trajectory_with(&rho0, &config.bath, &config.sample_times, config.dt_max(), stream, &opts)?
        }
        _ => sde_integrator(config)?.simulate(&rho0, &config.sample_times, config.dt, config.sde_scheme, stream, &opts)?,
    };
    out.push_records(0, &res.records);
    out.tables.push(predicted_table(config, &rho0)?);
    if let Some(j) = res.jumps {
        let mut t = Table::new("jumps", &["path", "events", "max_s2", "max_s2_ratio"]);
        t.push(vec!["0".into(), j.events.to_string(), fmt_f64(j.max_s2), fmt_f64(j.max_s2_ratio)]);
        out.tables.push(t);
    }
    if let Some(snaps) = res.snapshots {
        out.push_snapshots(0, &config.sample_times, snaps);
    }
    Ok(())
}

fn dynamics(config: &RunConfig, jump: bool) -> Dynamics {
    if jump {
        Dynamics::Jump {
            dt_max: config.dt_max(),
        }
    } else {
        Dynamics::Sde {
            scheme: config.sde_scheme,
            dt: config.dt,
            n_nodes: config.n_nodes,
            ito_method: config.ito_method,
            free_flow: true,
        }
    }
}

fn ensemble_table(summary: &EnsembleSummary) -> Table {
    let mut t = Table::new("ensemble_mean", &["time", "field", "mean", "std_error"]);
    for (k, &s) in summary.times.iter().enumerate() {
        let (m, e) = (summary.means[k].values(), summary.std_errors[k].values());
        for (f, name) in ObservableRecord::FIELDS.iter().enumerate() {
            t.push(vec![fmt_f64(s), name.to_string(), fmt_f64(m[f]), fmt_f64(e[f])]);
        }
    }
    t
}

fn failure_table(summary: &EnsembleSummary) -> Option<Table> {
    if summary.failures.is_empty() {
        return None;
    }
    let mut t = Table::new("failures", &["path", "reason"]);
    for (i, r) in &summary.failures {
        t.push(vec![i.to_string(), sanitize(r)]);
    }
    Some(t)
}

/// Keeps free text inside one cell.
fn sanitize(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

fn run_many(config: &RunConfig, out: &mut Assembly) -> Result<()> {
    let rho0 = config.initial_state()?;
    let mut spec = EnsembleSpec::new(
        rho0.clone(),
        config.bath,
        dynamics(config, config.mode == Mode::Jump),
        config.sample_times.clone(),
        config.trajectories,
        config.seed,
    );
    spec.mean_kernels = config.snapshots;
    let summary = run_ensemble(spec)?;
    for d in &summary.paths {
        out.push_records(d.index, &d.records);
    }
    out.tables.push(ensemble_table(&summary));
    out.tables.push(predicted_table(config, &rho0)?);
    if config.mode == Mode::Jump {
        let mut t = Table::new("jumps", &["path", "events", "max_s2", "max_s2_ratio"]);
        for d in &summary.paths {
            if let Some(j) = d.jumps {
                t.push(vec![d.index.to_string(), j.events.to_string(), fmt_f64(j.max_s2), fmt_f64(j.max_s2_ratio)]);
            }
        }
        out.tables.push(t);
    }
    out.tables.extend(failure_table(&summary));
    if let Some(kernels) = summary.mean_kernels {
        out.push_snapshots(u64::MAX, &config.sample_times, kernels);
    }
    Ok(())
}

fn run_compare(config: &RunConfig, out: &mut Assembly) -> Result<()> {
    let rho0 = config.initial_state()?;
    let t = *config.sample_times.last().expect("validated non-empty");
    let mut sde_spec = EnsembleSpec::new(
        rho0.clone(),
        config.bath,
        dynamics(config, false),
        config.sample_times.clone(),
        config.trajectories,
        config.seed,
    );
    sde_spec.mean_kernels = false;
    let sde = run_ensemble(sde_spec)?;
    let mut table = Table::new(
        "law_distance",
        &[
            "rate", "probe", "time", "ks", "p_value", "band_lo", "band_hi", "mean_gap", "mean_gap_se", "max_jump_ratio",
        ],
    );
    let mut per_probe = vec![Vec::new(); sde.probes.len()];
    for (k, &rate) in config.rates.iter().enumerate() {
        let params = config.bath.with_rate(rate)?;
        let mut spec = EnsembleSpec::new(
            rho0.clone(),
            params,
            Dynamics::Jump {
                dt_max: config.dt_max.unwrap_or_else(|| crate::jump::default_dt_max(&params)),
            },
            config.sample_times.clone(),
            config.trajectories,
            config.seed.wrapping_add(1 + k as u64),
        );
        spec.mean_kernels = false;
        let jump = run_ensemble(spec)?;
        let ratio = jump.max_jump_s2_ratio().unwrap_or(f64::NAN);
        for (p, seq) in per_probe.iter_mut().enumerate() {
            let d = law_distance(
                &jump,
                &sde,
                p,
                t,
                Some(Bootstrap {
                    resamples: COMPARE_BOOTSTRAP_RESAMPLES,
                    level: COMPARE_BOOTSTRAP_LEVEL,
                    seed: config.seed.wrapping_add(1000 + (k * 16 + p) as u64),
                }),
            )?;
            let (lo, hi) = d.band.expect("bootstrap requested");
            table.push(vec![
                fmt_f64(rate),
                sanitize(&d.observable),
                fmt_f64(t),
                fmt_f64(d.ks_statistic),
                fmt_f64(d.p_value),
                fmt_f64(lo),
                fmt_f64(hi),
                fmt_f64(d.mean_gap),
                fmt_f64(d.mean_gap_se),
                fmt_f64(ratio),
            ]);
            seq.push(d);
        }
        out.tables.extend(failure_table(&jump));
    }
    let mut trend = Table::new("ks_trend", &["probe", "non_increasing_within_bands"]);
    for (p, seq) in per_probe.iter().enumerate() {
        trend.push(vec![sanitize(&sde.probes[p].label()), non_increasing_within_bands(seq).to_string()]);
    }
    out.tables.push(table);
    out.tables.push(trend);
    out.tables.extend(failure_table(&sde));
    Ok(())
}

fn run_propcheck(config: &RunConfig, out: &mut Assembly) -> Result<()> {
    let report = property_suite_on(&config.grid, config.trials, RngStream::new(config.seed, 0))?;
    let mut checks = Table::new("property_checks", &["check", "kind", "evaluations", "violations", "worst"]);
    for c in &report.checks {
        checks.push(vec![
            c.name.clone(),
            format!("{:?}", c.kind).to_lowercase(),
            c.evaluations.to_string(),
            c.violations.to_string(),
            fmt_f64(c.worst),
        ]);
    }
    out.tables.push(checks);
    if !report.counterexamples.is_empty() {
        let mut t = Table::new("counterexamples", &["check", "trial", "lhs", "rhs", "detail"]);
        for c in &report.counterexamples {
            t.push(vec![c.check.clone(), c.trial.to_string(), fmt_f64(c.lhs), fmt_f64(c.rhs), sanitize(&c.detail)]);
        }
        out.tables.push(t);
        out.status = Some(format!("failed: {} property violations", report.violations()));
    }
    Ok(())
}

/// Process exit code for a run outcome: 0 on success, 1 for configuration
/// and input errors, 2 for numerical failures (including failed checks).
pub fn exit_code(outcome: &Result<ResultFile>) -> i32 {
    match outcome {
        Ok(r) if r.metadata.is_ok() => 0,
        Ok(_) => 2,
        Err(e) if e.is_numerical() => 2,
        Err(_) => 1,
    }
}
