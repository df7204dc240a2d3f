// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decohere::config::{parse_config_for, Mode, RunConfig};
use decohere::results::ResultFile;
use decohere::run::{exit_code, run_to_file};
use decohere::{Error, Result};

/// Exit code for invalid configuration or arguments.
const EXIT_CONFIG: u8 = 1;

#[derive(Parser)]
#[command(name = "decohere", version, about = "Heavy particle under random collisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the averaged master equation.
    Annealed(RunArgs),
    /// Simulate the collision (jump) process.
    Jump(RunArgs),
    /// Simulate the diffusive limit.
    Sde(RunArgs),
    /// Compare jump and diffusive laws over a list of collision rates.
    Compare(RunArgs),
    /// Run the randomized operator property suite.
    Propcheck(RunArgs),
    /// Print the fully resolved configuration and exit.
    ShowConfig {
        #[arg(value_parser = parse_mode)]
        mode: Mode,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Key–value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long, value_name = "INT", value_parser = clap::value_parser!(u64).range(..=decohere::config::MAX_SEED))]
    seed: Option<u64>,
    /// Result file; defaults to `out` from the config, then `<mode>.csv`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads for ensembles (0 = all cores).
    #[arg(long, env = "DECOHERE_THREADS", default_value_t = 0)]
    threads: usize,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    Mode::from_name(s).ok_or_else(|| format!("unknown mode {s:?}"))
}

fn resolve(mode: Mode, args: &RunArgs) -> Result<RunConfig> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config {
                key: "--config".into(),
                reason: format!("{}: {e}", p.display()),
            })?,
        None => String::new(),
    };
    let mut config = parse_config_for(&text, mode)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

fn init_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("thread pool already initialised: {e}");
    }
}

fn report(result: &ResultFile, path: &std::path::Path) {
    let m = &result.metadata;
    println!(
        "{}: {} records, {} snapshots, status {}, {:.2} s",
        path.display(),
        result.records.len(),
        m.snapshot_count,
        m.status,
        m.wall_clock_seconds
    );
    for t in &result.tables {
        if matches!(t.name.as_str(), "law_distance" | "ks_trend" | "property_checks" | "counterexamples" | "failures") {
            println!("\n[{}]\n{}", t.name, t.columns.join(","));
            for r in &t.rows {
                println!("{}", r.join(","));
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mode, args) = match &cli.command {
        Command::Annealed(a) => (Mode::Annealed, a),
        Command::Jump(a) => (Mode::Jump, a),
        Command::Sde(a) => (Mode::Sde, a),
        Command::Compare(a) => (Mode::Compare, a),
        Command::Propcheck(a) => (Mode::Propcheck, a),
        Command::ShowConfig { mode, args } => {
            return match resolve(*mode, args) {
                Ok(c) => {
                    print!("{}", c.to_text());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("decohere: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
            };
        }
    };
    let config = match resolve(mode, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("decohere: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    init_threads(args.threads);
    let path = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", mode.name())));
    let outcome = run_to_file(&config, &path);
    match &outcome {
        Ok(r) => report(r, &path),
        Err(e) => eprintln!("decohere: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
