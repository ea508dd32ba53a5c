use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use heleshaw_core::io::{exit_status, run_experiment, Command, ExperimentSpec};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Finite-m simulation of the density equation.
    Simulate,
    /// Incompressible spheroid radius R(t).
    Spheroid,
    /// Tumor ball inside a mushy annulus.
    Twophase,
    /// One-dimensional traveling-wave profile, plus an optional PDE run.
    Travelingwave,
    /// Convergence study in m against the geometric spheroid.
    Msweep,
    /// Recompute diagnostics from an existing snapshots.csv in --out.
    Diagnose,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Spheroid => Command::Spheroid,
            Cmd::Twophase => Command::Twophase,
            Cmd::Travelingwave => Command::Travelingwave,
            Cmd::Msweep => Command::Msweep,
            Cmd::Diagnose => Command::Diagnose,
        }
    }
}

/// Porous-medium tumor growth models and their Hele-Shaw limit.
///
/// Exit status: 0 success, 1 invalid input, 2 numerical failure,
/// 3 failed --check.
#[derive(Debug, Parser)]
#[command(name = "heleshaw-lab", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for msweep.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Verify the command's acceptance criteria.
    #[arg(long)]
    check: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors are validation errors; clap's own code 2 means blow-up here
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let spec = ExperimentSpec {
        command: args.command.into(),
        config: args.config,
        out_dir: args.out,
        jobs: args.jobs as usize,
        check: args.check,
    };
    let result = run_experiment(&spec);
    match &result {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if spec.check {
                for c in &outcome.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    println!("{tag} {}: {}", c.name, c.detail);
                }
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_status(&result, spec.check).code() as u8)
}
