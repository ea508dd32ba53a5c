//! Runs one command of the `heleshaw-lab` tool and writes its outputs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{read_config, ExperimentConfig};
use super::output::{self, fmt as f17};
use crate::diagnostics::{self, front_speed_estimate, msweep_convergence, MsweepReport};
use crate::error::{Error, Result};
use crate::laws::{GrowthLaw, Reaction};
use crate::mesh::{self, Field, NormKind};
use crate::sharp_interface::{
    geometric_reference, radial_pressure_solve, spheroid_evolve, traveling_wave_profile,
    two_phase_evolve, FrontEvent, FrontState, FrontTrajectory, SHOOTING_TOL,
};
use crate::solver::{barenblatt, run, BoundsLog, InitialData, SimConfig, SimState, SnapshotSeries};

/// Tolerances of the `--check` mode.
pub mod tolerance {
    pub const BARENBLATT_L1: f64 = 2e-2;
    pub const MASS_MARGIN: f64 = 1e-6;
    pub const TERMINAL_SPEED: f64 = 5e-3;
    pub const WAVE_SPEED: f64 = 0.1;
    pub const WAVE_PROFILE: f64 = 1e-8;
    pub const WAVE_WINDOW: f64 = -5.0;
    pub const MUSHY_LEVEL: f64 = 1e-8;
    pub const MONOTONE_SLACK: f64 = 0.05;
    /// Fraction of the run over which the wave speed is measured.
    pub const SPEED_WINDOW: f64 = 0.6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Simulate,
    Spheroid,
    Twophase,
    Travelingwave,
    Msweep,
    Diagnose,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Simulate,
        Command::Spheroid,
        Command::Twophase,
        Command::Travelingwave,
        Command::Msweep,
        Command::Diagnose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Spheroid => "spheroid",
            Command::Twophase => "twophase",
            Command::Travelingwave => "travelingwave",
            Command::Msweep => "msweep",
            Command::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: PathBuf,
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Human-readable summary lines.
    pub summary: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Validation = 1,
    Numerical = 2,
    CheckFailed = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

pub fn exit_status(result: &Result<Outcome>, check: bool) -> ExitStatus {
    match result {
        Ok(o) if check && !o.all_passed() => ExitStatus::CheckFailed,
        Ok(_) => ExitStatus::Success,
        Err(e) if e.is_numerical() => ExitStatus::Numerical,
        Err(_) => ExitStatus::Validation,
    }
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: Command,
    version: &'static str,
    scheme: String,
    config: &'a ExperimentConfig,
    events: &'a [FrontEvent],
    warnings: &'a [String],
    checks: &'a [CheckResult],
}

fn scheme_note(cfg: &ExperimentConfig) -> String {
    match &cfg.sim {
        Some(sim) => format!(
            "{:?} finite volume, cell-centered {:?} mesh, cfl_theta {}",
            sim.scheme,
            sim.mesh.geometry(),
            sim.cfl_theta
        ),
        None => "RK4 sharp-interface integration with shooting for the pressure".into(),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    if spec.jobs == 0 {
        return Err(Error::InvalidConfig("--jobs must be at least 1".into()));
    }
    let cfg = read_config(&spec.config)?;
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    let mut outcome = Outcome::default();
    let mut events = Vec::new();
    match spec.command {
        Command::Simulate => simulate(&cfg, &spec.out_dir, &mut outcome)?,
        Command::Spheroid => spheroid(&cfg, &spec.out_dir, &mut outcome)?,
        Command::Twophase => events = twophase(&cfg, &spec.out_dir, &mut outcome)?,
        Command::Travelingwave => travelingwave(&cfg, &spec.out_dir, &mut outcome)?,
        Command::Msweep => msweep(&cfg, &spec.out_dir, spec.jobs, &mut outcome)?,
        Command::Diagnose => diagnose(&cfg, &spec.out_dir, &mut outcome)?,
    }
    let record = RunRecord {
        command: spec.command,
        version: env!("CARGO_PKG_VERSION"),
        scheme: scheme_note(&cfg),
        config: &cfg,
        events: &events,
        warnings: &outcome.warnings,
        checks: &outcome.checks,
    };
    output::write_json(&record, &spec.out_dir.join(output::RUN_JSON))?;
    Ok(outcome)
}

fn write_run(series: &SnapshotSeries, dir: &Path) -> Result<()> {
    output::write_snapshots(series, dir)?;
    output::write_diagnostics(&series.diagnostics, &dir.join(output::DIAGNOSTICS))
}

/// Bounds, mass estimate and barrier checks shared by PDE runs.
fn run_checks(series: &SnapshotSeries, sim: &SimConfig, out: &mut Outcome) {
    let bounds = series.bounds.check(sim);
    out.checks.push(CheckResult::new(
        "linf_bounds",
        bounds.is_ok(),
        bounds.err().unwrap_or_else(|| "within bounds".into()),
    ));
    let margin = series
        .diagnostics
        .iter()
        .map(|d| d.mass_bound_margin)
        .fold(f64::NEG_INFINITY, f64::max);
    out.checks.push(CheckResult::new(
        "mass_bound",
        margin <= tolerance::MASS_MARGIN,
        format!("margin {margin:.3e} (limit {:.0e})", tolerance::MASS_MARGIN),
    ));
    let escaped = series.diagnostics.iter().find(|d| {
        d.support_radius_rho
            .is_some_and(|r| r > d.barrier_radius + sim.mesh.spacing())
    });
    out.checks.push(CheckResult::new(
        "finite_propagation",
        escaped.is_none(),
        match escaped {
            Some(d) => format!("support beyond the barrier at t = {}", d.t),
            None => "support inside the barrier".into(),
        },
    ));
    if let Reaction::Pressure { law } = &sim.reaction {
        if let Ok(r) = law.stiffness_constant() {
            let worst = series
                .diagnostics
                .iter()
                .filter_map(|d| d.semiconvexity_slack)
                .fold(f64::INFINITY, f64::min);
            if worst < -0.05 * r {
                out.warnings.push(format!(
                    "semiconvexity slack {worst:.3e} below -0.05 r_Φ = {:.3e}",
                    -0.05 * r
                ));
            }
        }
    }
    out.warnings.extend(series.warnings.iter().cloned());
}

fn barenblatt_error(series: &SnapshotSeries, sim: &SimConfig) -> Option<f64> {
    let InitialData::Barenblatt { t0, scale } = sim.initial else {
        return None;
    };
    if sim.reaction != Reaction::None {
        return None;
    }
    let last = series.final_state()?;
    let mesh = sim.mesh;
    let dim = mesh.dimension();
    let exact = Field::from_fn(mesh, |x| {
        barenblatt(x.abs(), t0 + last.t, sim.m, dim, scale)
    })
    .ok()?;
    let err = mesh::l1_distance(&last.rho, &exact).ok()?;
    Some(err / mesh::norm(&exact, NormKind::L1).ok()?)
}

fn simulate(cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let sim = cfg.require_sim()?;
    let series = run(sim)?;
    write_run(&series, dir)?;
    out.summary.push(format!(
        "{} snapshots, {} steps, final mass {}",
        series.snapshots.len(),
        series.dt_history.len(),
        f17(series.diagnostics.last().map_or(0.0, |d| d.mass))
    ));
    if let Some(err) = barenblatt_error(&series, sim) {
        out.summary.push(format!(
            "relative L1 error against the Barenblatt solution {err:.4e}"
        ));
        out.checks.push(CheckResult::new(
            "barenblatt_l1",
            err <= tolerance::BARENBLATT_L1,
            format!("{err:.4e} (limit {:.0e})", tolerance::BARENBLATT_L1),
        ));
    }
    run_checks(&series, sim, out);
    Ok(())
}

fn front_spec(cfg: &ExperimentConfig) -> Result<&super::config::FrontSpec> {
    cfg.front
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("this command needs a [front] section".into()))
}

fn spheroid(cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let law = cfg.growth_law()?;
    let front = front_spec(cfg)?;
    let traj = spheroid_evolve(front.r0, law, front.dim, front.final_time, front.dt)?;
    output::write_series(&traj, false, &dir.join(output::SERIES))?;
    let last = traj.samples.last().expect("trajectory has samples");
    let target = law.asymptotic_speed();
    let rel = (last.speed - target).abs() / target;
    out.summary.push(format!(
        "R(T) = {}, R'(T) = {}, asymptotic speed {}",
        f17(last.r),
        f17(last.speed),
        f17(target)
    ));
    out.checks.push(CheckResult::new(
        "terminal_speed",
        rel <= tolerance::TERMINAL_SPEED,
        format!(
            "relative deviation {rel:.3e} (limit {:.0e})",
            tolerance::TERMINAL_SPEED
        ),
    ));
    Ok(())
}

/// `q` exactness before the first event and speed dominance over the
/// spheroid law at equal radius.
pub fn two_phase_checks(
    traj: &FrontTrajectory,
    init: &FrontState,
    law: &GrowthLaw,
) -> Result<Vec<CheckResult>> {
    let first_event = traj.events.first().map_or(f64::INFINITY, |e| e.t);
    let growth = law.rate(0.0);
    let q_err = traj
        .samples
        .iter()
        .filter(|s| s.t < first_event && init.q > 0.0)
        .map(|s| {
            let exact = init.q * (growth * (s.t - init.t)).exp();
            (s.q - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let mut slowest = f64::INFINITY;
    for s in traj.samples.iter().filter(|s| s.q > 0.0) {
        let g = radial_pressure_solve(s.r, law, init.dim, SHOOTING_TOL)?.gradient;
        slowest = slowest.min(s.speed - g);
    }
    Ok(vec![
        CheckResult::new(
            "mushy_level_exponential",
            q_err <= tolerance::MUSHY_LEVEL,
            format!("max relative error {q_err:.3e}"),
        ),
        CheckResult::new(
            "two_phase_speed_dominates",
            slowest >= 0.0,
            if slowest.is_finite() {
                format!("min(R1' - |∇p|) = {slowest:.3e}")
            } else {
                "no mushy samples".into()
            },
        ),
    ])
}

fn twophase(cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<Vec<FrontEvent>> {
    let law = cfg.growth_law()?;
    let front = front_spec(cfg)?;
    let r2 = front
        .r2
        .ok_or_else(|| Error::InvalidConfig("twophase needs front.R2".into()))?;
    let init = FrontState {
        t: 0.0,
        r1: front.r0,
        q: front.q0,
        r2,
        dim: front.dim,
    };
    let traj = two_phase_evolve(init, law, front.final_time, front.dt)?;
    output::write_series(&traj, true, &dir.join(output::SERIES))?;
    for e in &traj.events {
        out.summary
            .push(format!("{:?} at t = {}", e.kind, f17(e.t)));
    }
    out.checks.extend(two_phase_checks(&traj, &init, law)?);
    Ok(traj.events)
}

fn travelingwave(cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let law = cfg.growth_law()?;
    let wave = cfg
        .wave
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("travelingwave needs a [wave] section".into()))?;
    let profile = traveling_wave_profile(law, wave.s_min, wave.n)?;
    output::write_profile(&profile, &dir.join(output::PROFILE))?;
    let speed = law.asymptotic_speed();
    out.summary.push(format!("asymptotic speed {}", f17(speed)));
    if let GrowthLaw::Linear { rate, homeostatic } = law {
        // backward integration amplifies round-off like e^{√a |s|}, so the
        // closed form is compared on the window where it is meaningful
        let err = profile
            .iter()
            .filter(|(s, _)| *s >= tolerance::WAVE_WINDOW)
            .map(|&(s, p)| (p - homeostatic * (1.0 - (rate.sqrt() * s).exp())).abs())
            .fold(0.0, f64::max);
        out.checks.push(CheckResult::new(
            "wave_profile",
            err <= tolerance::WAVE_PROFILE,
            format!(
                "max deviation from the exponential profile on [{}, 0]: {err:.3e}",
                tolerance::WAVE_WINDOW
            ),
        ));
    }
    if let Some(sim) = &cfg.sim {
        let series = run(sim)?;
        write_run(&series, dir)?;
        let est = front_speed_estimate(&series, tolerance::SPEED_WINDOW, sim.thresholds.pressure)?;
        let rel = (est - speed).abs() / speed;
        out.summary
            .push(format!("measured front speed {}", f17(est)));
        out.checks.push(CheckResult::new(
            "wave_speed",
            rel <= tolerance::WAVE_SPEED,
            format!("measured {est:.5} vs {speed:.5}, relative deviation {rel:.3e}"),
        ));
        run_checks(&series, sim, out);
    }
    Ok(())
}

fn m_dir(dir: &Path, m: f64) -> PathBuf {
    dir.join(format!("m_{m}"))
}

/// Runs every exponent of the sweep on a pool of `jobs` workers. Results
/// come back in exponent order whatever the scheduling.
pub fn sweep_runs(
    sim: &SimConfig,
    m_list: &[f64],
    jobs: usize,
) -> Result<Vec<(f64, SnapshotSeries)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Solver(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<SnapshotSeries>> = pool.install(|| {
        m_list
            .par_iter()
            .map(|&m| run(&sim.with_exponent(m)))
            .collect()
    });
    m_list
        .iter()
        .zip(results)
        .map(|(&m, r)| r.map(|s| (m, s)))
        .collect()
}

/// Sweep in `m` against the geometric spheroid started from the initial
/// indicator.
pub fn sweep_report(
    sim: &SimConfig,
    runs: &[(f64, SnapshotSeries)],
    reference_dt: f64,
) -> Result<(MsweepReport, Vec<diagnostics::ReferenceFrame>)> {
    let law = sim
        .reaction
        .growth_law()
        .ok_or_else(|| Error::InvalidConfig("msweep needs a growth law".into()))?;
    let r0 = match sim.initial {
        InitialData::Indicator { radius, .. } => radius,
        _ => {
            return Err(Error::InvalidConfig(
                "msweep compares against a spheroid and needs indicator initial data".into(),
            ))
        }
    };
    let dim = sim.mesh.dimension();
    let traj = spheroid_evolve(r0, law, dim, sim.final_time, reference_dt)?;
    let reference = geometric_reference(&traj, law, &sim.mesh, &sim.snapshot_times)?;
    let report = msweep_convergence(runs, &reference, law)?;
    Ok((report, reference))
}

fn msweep(cfg: &ExperimentConfig, dir: &Path, jobs: usize, out: &mut Outcome) -> Result<()> {
    let sim = cfg.require_sim()?;
    let spec = cfg
        .msweep
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("msweep needs an [msweep] section".into()))?;
    let runs = sweep_runs(sim, &spec.m_list, jobs)?;
    let (report, reference) = sweep_report(sim, &runs, spec.reference_dt)?;
    for (m, series) in &runs {
        let sub = m_dir(dir, *m);
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        write_run(series, &sub)?;
        out.warnings
            .extend(series.warnings.iter().map(|w| format!("m = {m}: {w}")));
    }
    let ref_dir = dir.join("reference");
    std::fs::create_dir_all(&ref_dir).map_err(|e| Error::io(&ref_dir, e))?;
    let ref_series = SnapshotSeries {
        snapshots: reference
            .into_iter()
            .map(|f| SimState {
                t: f.t,
                rho: f.rho,
                p: f.p,
                c: None,
            })
            .collect(),
        dt_history: Vec::new(),
        bounds: Default::default(),
        diagnostics: Vec::new(),
        warnings: Vec::new(),
    };
    output::write_snapshots(&ref_series, &ref_dir)?;
    output::write_msweep_report(&report, &dir.join(output::MSWEEP_REPORT))?;
    for row in &report.rows {
        out.summary.push(format!(
            "m = {}: L1(rho) {:.4e}, L1(p) {:.4e}, graph {:.4e}, compl {:.4e}",
            row.m, row.l1_rho_vs_ref, row.l1_p_vs_ref, row.graph_residual, row.compl_residual
        ));
    }
    out.checks.extend(sweep_checks(&report));
    Ok(())
}

pub fn sweep_checks(report: &MsweepReport) -> Vec<CheckResult> {
    let graph: Vec<f64> = report.rows.iter().map(|r| r.graph_residual).collect();
    let strictly = graph.windows(2).all(|w| w[1] < w[0]);
    let mut checks = Vec::new();
    for column in ["l1_rho_vs_ref", "l1_p_vs_ref", "compl_residual"] {
        let ok = !report.non_monotone.iter().any(|c| c == column);
        checks.push(CheckResult::new(
            &format!("msweep_{column}_monotone"),
            ok,
            format!(
                "non-increasing in m within {:.0}% per step",
                tolerance::MONOTONE_SLACK * 100.0
            ),
        ));
    }
    checks.push(CheckResult::new(
        "msweep_graph_residual_decreasing",
        strictly,
        graph
            .iter()
            .map(|g| format!("{g:.3e}"))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    checks
}

fn diagnose(cfg: &ExperimentConfig, dir: &Path, out: &mut Outcome) -> Result<()> {
    let sim = cfg.require_sim()?;
    let snapshots = output::read_snapshots(&dir.join(output::SNAPSHOTS), &sim.mesh)?;
    let mut bounds = BoundsLog::default();
    for s in &snapshots {
        bounds.min_rho = bounds.min_rho.min(s.rho.min());
        bounds.max_rho = bounds.max_rho.max(s.rho.max());
        bounds.max_p = bounds.max_p.max(s.p.max());
        if let Some(c) = &s.c {
            bounds.min_c = bounds.min_c.min(c.min());
            bounds.max_c = bounds.max_c.max(c.max());
        }
    }
    let mut series = SnapshotSeries {
        snapshots,
        dt_history: Vec::new(),
        bounds,
        diagnostics: Vec::new(),
        warnings: Vec::new(),
    };
    series.diagnostics = diagnostics::snapshot_records(&series, sim)?;
    output::write_diagnostics(&series.diagnostics, &dir.join(output::DIAGNOSTICS))?;
    if let Some(last) = series.diagnostics.last() {
        out.summary.push(format!(
            "t = {}: complementarity {:.4e}, graph {:.4e}, mass margin {:.4e}",
            f17(last.t),
            last.complementarity_residual,
            last.graph_residual,
            last.mass_bound_margin
        ));
    }
    if let Some((t, jump)) =
        diagnostics::detect_pressure_jump(&series, diagnostics::default_jump_threshold(sim))
    {
        out.summary
            .push(format!("pressure jump of {jump:.4} near t = {t:.6}"));
    }
    run_checks(&series, sim, out);
    Ok(())
}
