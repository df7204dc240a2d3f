// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use decohere::config::{parse_config, parse_config_for, Mode, RunConfig};
use decohere::results::{kernels_path, read_kernels, write_kernels, ResultFile, Snapshot, KERNELS_MAGIC};
use decohere::run::{exit_code, run, run_to_file};
use decohere::Error;

fn mode() -> impl Strategy<Value = Mode> {
    prop::sample::select(Mode::ALL.to_vec())
}

prop_compose! {
    fn config_text()(
        mode in mode(),
        seed in 0..=decohere::config::MAX_SEED,
        points in prop::sample::select(vec![64u64, 128, 256]),
        half_width in 6.0f64..12.0,
        alpha in 0.0f64..1.5,
        beta0 in 0.05f64..3.95,
        cutoff in 1.0f64..5.0,
        rate in 3.0f64..500.0,
        minus in any::<bool>(),
        center in -1.0f64..1.0,
        momentum in -2.0f64..2.0,
        width in 0.4f64..0.9,
        horizon in 0.1f64..3.0,
        dt in 1e-4f64..1e-2,
        strat in any::<bool>(),
        nodes in 32u64..96,
        snapshots in any::<bool>(),
    ) -> String {
        format!(
            "mode = \"{}\"\nseed = {seed}\n\
             [grid]\npoints = {points}\nhalf_width = {half_width:?}\n\
             [bath]\nalpha = {alpha:?}\nbeta0 = {beta0:?}\ncutoff = {cutoff:?}\nrate = {rate:?}\nsign = {}\n\
             [state]\ncenter = {center:?}\nmomentum = {momentum:?}\nwidth = {width:?}\n\
             [time]\nhorizon = {horizon:?}\ndt = {dt:?}\n\
             [sde]\nscheme = \"{}\"\nnodes = {nodes}\n\
             [output]\nsnapshots = {snapshots}\n",
            mode.name(),
            if minus { -1 } else { 1 },
            if strat { "stratonovich" } else { "ito" },
        )
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(text in config_text()) {
        let c = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&c.to_text()).unwrap(), c.clone());
        prop_assert_eq!(c.to_text(), parse_config(&c.to_text()).unwrap().to_text());
    }
}

#[test]
fn config_errors_name_the_key() {
    let key = |text: &str| match parse_config(text).unwrap_err() {
        Error::Config { key, .. } => key,
        other => panic!("{other}"),
    };
    assert_eq!(key("mode = \"jump\"\n[bath]\nbeta0 = 4.5\n"), "bath.beta0");
    assert_eq!(key("mode = \"jump\"\n[bath]\nalpha = 3.0\nrate = 4.0\n"), "bath.rate");
    assert_eq!(key("mode = \"nope\"\n"), "mode");
    assert_eq!(key("mode = \"jump\"\n[grid]\npoints = 100\n"), "grid.points");
    assert!(parse_config_for("mode = \"jump\"\n", Mode::Sde).is_err());
    assert_eq!(parse_config_for("seed = 1\n", Mode::Sde).unwrap().mode, Mode::Sde);
}

#[test]
fn kernel_sidecar_layout() {
    let config = parse_config("mode = \"annealed\"\n[grid]\npoints = 64\nhalf_width = 8.0\n").unwrap();
    let rho = config.initial_state().unwrap();
    let snaps = vec![Snapshot { time: 0.5, path: 3, kernel: rho.clone() }];
    let mut buf = Vec::new();
    write_kernels(&snaps, &mut buf).unwrap();
    assert_eq!(buf.len(), 8 + 8 + 4 * 8 + 64 * 64 * 16);
    assert_eq!(&buf[..8], &KERNELS_MAGIC);
    assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 1);
    assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.5);
    // entry (0, 1) follows entry (0, 0) in row-major order
    let base = 48;
    let re01 = f64::from_le_bytes(buf[base + 16..base + 24].try_into().unwrap());
    assert_eq!(re01, rho.values()[(0, 1)].re);
    assert_eq!(read_kernels(&buf[..], &config).unwrap(), snaps);

    let bad = parse_config("mode = \"annealed\"\n[grid]\npoints = 32\nhalf_width = 8.0\n").unwrap();
    assert!(read_kernels(&buf[..], &bad).is_err());
    assert!(read_kernels(&buf[1..], &config).is_err());
}

#[test]
fn annealed_run_round_trips_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("annealed.csv");
    let config = parse_config(
        "mode = \"annealed\"\n[grid]\npoints = 64\nhalf_width = 8.0\n[time]\nhorizon = 0.5\ndt = 0.01\n[output]\nsnapshots = true\n",
    )
    .unwrap();
    let written = run_to_file(&config, &path).unwrap();
    assert!(written.metadata.is_ok());
    assert!(kernels_path(&path).exists());
    let back = ResultFile::read(&path).unwrap();
    assert_eq!(back.config, written.config);
    assert_eq!(back.records, written.records);
    assert_eq!(back.tables, written.tables);
    assert_eq!(back.snapshots, written.snapshots);
    assert_eq!(back.snapshots.len(), config.sample_times.len());
}

#[test]
fn repeated_runs_differ_only_in_wall_clock() {
    let config: RunConfig = parse_config(
        "mode = \"jump\"\nseed = 7\ntrajectories = 3\n[grid]\npoints = 64\nhalf_width = 8.0\n[bath]\nrate = 25.0\n[time]\nhorizon = 0.2\n",
    )
    .unwrap();
    let mut a = run(&config).unwrap();
    let mut b = run(&config).unwrap();
    assert_eq!(exit_code(&Ok(a.clone())), 0);
    a.metadata.wall_clock_seconds = 0.0;
    b.metadata.wall_clock_seconds = 0.0;
    assert_eq!(a.to_text(), b.to_text());
}
