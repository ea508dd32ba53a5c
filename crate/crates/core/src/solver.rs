//! Finite-volume time integration of `∂ρ/∂t = Δρ^m + ρ Φ(p[, c])`,
//! optionally coupled to the nutrient equation `∂c/∂t = Δc - ρ Ψ(p, c)`.
//!
//! The default scheme is explicit and monotone under [`stable_dt`]; the
//! pressure is always recomputed from the density, never integrated on its
//! own. A linearized backward-Euler diffusion step is available for large
//! `m` but carries no comparison guarantee.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::laws::{max_density, PressureLaw, Reaction};
use crate::mesh::{support_radius, BoundaryCondition, Field, Mesh, Stencil};

/// Relative slack allowed on the discrete L∞ bounds.
pub const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    SemiImplicit,
}

/// A density level: either a number or the saturation value
/// `max_density(m, p_M)` of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Value(f64),
    Max(MaxLevel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxLevel {
    Max,
}

impl Level {
    pub const MAX: Level = Level::Max(MaxLevel::Max);

    fn resolve(&self, saturation: Option<f64>) -> Result<f64> {
        match (self, saturation) {
            (Level::Value(v), _) => Ok(*v),
            (Level::Max(_), Some(s)) => Ok(s),
            (Level::Max(_), None) => Err(Error::InvalidConfig(
                "level = \"max\" needs a growth law with a homeostatic pressure".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `level` on `|x| < radius`.
    Indicator { radius: f64, level: Level },
    /// Saturated core `|x| < inner` surrounded by a mushy annulus of
    /// density `mushy` out to `outer`.
    TwoRing { inner: f64, outer: f64, mushy: f64 },
    /// Constant sub-saturated density in a ball.
    BallConstant { radius: f64, level: f64 },
    /// Piecewise-linear profile through `(x, ρ)` points, zero outside.
    Table { points: Vec<(f64, f64)> },
    /// Source-type self-similar solution of the pure porous medium
    /// equation at time `t0`.
    Barenblatt { t0: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pressure: f64,
    pub density: f64,
}

impl Thresholds {
    pub fn defaults(homeostatic: Option<f64>) -> Self {
        Self {
            pressure: 1e-3 * homeostatic.unwrap_or(1.0),
            density: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: f64,
    pub reaction: Reaction,
    pub mesh: Mesh,
    pub final_time: f64,
    pub cfl_theta: f64,
    pub scheme: Scheme,
    pub snapshot_times: Vec<f64>,
    pub initial: InitialData,
    /// Initial nutrient level (constant); only used with nutrient laws.
    pub initial_nutrient: Option<f64>,
    pub thresholds: Thresholds,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        PressureLaw::new(self.m)?;
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "final time T = {} must be positive",
                self.final_time
            )));
        }
        if !(self.cfl_theta > 0.0 && self.cfl_theta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl_theta = {} must lie in (0, 1)",
                self.cfl_theta
            )));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidConfig(
                    "snapshot times must be strictly increasing".into(),
                ));
            }
        }
        if let (Some(first), Some(last)) = (self.snapshot_times.first(), self.snapshot_times.last())
        {
            if *first < 0.0 || *last > self.final_time {
                return Err(Error::InvalidConfig(
                    "snapshot times must lie in [0, T]".into(),
                ));
            }
        }
        if !(self.thresholds.pressure > 0.0 && self.thresholds.density > 0.0) {
            return Err(Error::InvalidConfig(
                "front thresholds must be positive".into(),
            ));
        }
        if let Some(law) = self.reaction.nutrient() {
            let c0 = self.initial_nutrient.unwrap_or(law.far_field());
            if !(0.0..=law.far_field()).contains(&c0) {
                return Err(Error::InvalidConfig(format!(
                    "initial nutrient {c0} must lie in [0, c_B = {}]",
                    law.far_field()
                )));
            }
        }
        Ok(())
    }

    pub fn pressure_law(&self) -> Result<PressureLaw> {
        PressureLaw::new(self.m)
    }

    pub fn homeostatic_pressure(&self) -> Option<f64> {
        self.reaction.homeostatic_pressure()
    }

    /// `max_density(m, p_M)` when the reaction has a homeostatic pressure.
    pub fn saturation(&self) -> Option<f64> {
        self.homeostatic_pressure()
            .map(|pm| max_density(self.m, pm))
    }

    /// Same run with a different exponent.
    pub fn with_exponent(&self, m: f64) -> SimConfig {
        SimConfig { m, ..self.clone() }
    }

    fn next_stop(&self, t: f64) -> f64 {
        self.snapshot_times
            .iter()
            .copied()
            .find(|&s| s > t)
            .unwrap_or(self.final_time)
            .min(self.final_time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub rho: Field,
    pub p: Field,
    pub c: Option<Field>,
}

impl SimState {
    pub fn new(t: f64, rho: Field, c: Option<Field>, pressure: &PressureLaw) -> Self {
        let p = rho.map(|r| pressure.pressure_of_density(r));
        Self { t, rho, p, c }
    }

    pub fn mesh(&self) -> &Mesh {
        self.rho.mesh()
    }
}

/// Extremes of the state observed over every time step of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsLog {
    pub min_rho: f64,
    pub max_rho: f64,
    pub max_p: f64,
    pub min_c: f64,
    pub max_c: f64,
}

impl Default for BoundsLog {
    fn default() -> Self {
        Self {
            min_rho: f64::INFINITY,
            max_rho: f64::NEG_INFINITY,
            max_p: f64::NEG_INFINITY,
            min_c: f64::INFINITY,
            max_c: f64::NEG_INFINITY,
        }
    }
}

impl BoundsLog {
    fn record(&mut self, state: &SimState) {
        self.min_rho = self.min_rho.min(state.rho.min());
        self.max_rho = self.max_rho.max(state.rho.max());
        self.max_p = self.max_p.max(state.p.max());
        if let Some(c) = &state.c {
            self.min_c = self.min_c.min(c.min());
            self.max_c = self.max_c.max(c.max());
        }
    }

    /// Checks `0 ≤ ρ ≤ max_density`, `p ≤ p_M` and `0 ≤ c ≤ c_B`.
    pub fn check(&self, config: &SimConfig) -> std::result::Result<(), String> {
        if self.min_rho < 0.0 {
            return Err(format!("negative density {}", self.min_rho));
        }
        if let (Some(pm), Some(sat)) = (config.homeostatic_pressure(), config.saturation()) {
            if self.max_p > pm * (1.0 + BOUND_SLACK) {
                return Err(format!("pressure {} exceeds p_M = {pm}", self.max_p));
            }
            if self.max_rho > sat * (1.0 + BOUND_SLACK) {
                return Err(format!(
                    "density {} exceeds max_density = {sat}",
                    self.max_rho
                ));
            }
        }
        if let Some(law) = config.reaction.nutrient() {
            if self.min_c < 0.0 || self.max_c > law.far_field() * (1.0 + BOUND_SLACK) {
                return Err(format!(
                    "nutrient range [{}, {}] leaves [0, c_B = {}]",
                    self.min_c,
                    self.max_c,
                    law.far_field()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotSeries {
    pub snapshots: Vec<SimState>,
    pub dt_history: Vec<f64>,
    pub bounds: BoundsLog,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub warnings: Vec<String>,
}

impl SnapshotSeries {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn final_state(&self) -> Option<&SimState> {
        self.snapshots.last()
    }
}

/// Largest explicit step allowed at `state`:
/// `θ h² / (2 d (m-1) max p + h² sup|Φ|)`, further limited by the nutrient
/// diffusion when nutrients are active and by the gap to the next snapshot.
pub fn stable_dt(state: &SimState, config: &SimConfig) -> f64 {
    let band = (0, state.rho.len() - 1);
    step_limit(
        config,
        state,
        state.p.max().max(0.0),
        state.rho.max().max(0.0),
        band,
    )
}

fn step_limit(
    config: &SimConfig,
    state: &SimState,
    max_p: f64,
    max_rho: f64,
    band: (usize, usize),
) -> f64 {
    let mesh = state.mesh();
    let h = mesh.spacing();
    let d = mesh.dimension() as f64;
    let theta = config.cfl_theta;
    let gap = config.next_stop(state.t) - state.t;
    let rate = config.reaction.max_abs_rate();
    let mut dt = match config.scheme {
        Scheme::Explicit => {
            let denom = 2.0 * d * (config.m - 1.0) * max_p + h * h * rate;
            if denom > 0.0 {
                theta * h * h / denom
            } else {
                f64::INFINITY
            }
        }
        Scheme::SemiImplicit => {
            // Reaction and front-crossing limits only.
            let (lo, hi) = band;
            let speed = if lo < hi {
                state.p.values()[lo..=hi]
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs() / h)
                    .fold(0.0, f64::max)
            } else {
                0.0
            };
            let mut dt = f64::INFINITY;
            if rate > 0.0 {
                dt = dt.min(theta / rate);
            }
            if speed > 0.0 {
                dt = dt.min(theta * h / speed);
            }
            dt
        }
    };
    if config.reaction.nutrient().is_some() {
        dt = dt.min(theta * h * h / (2.0 * d + h * h * max_rho));
    }
    dt.min(gap)
}

/// In-place integrator reusing the stencil and work buffers across steps.
pub struct Integrator<'a> {
    config: &'a SimConfig,
    pressure: PressureLaw,
    stencil: Stencil,
    state: SimState,
    work: Vec<f64>,
    work_c: Vec<f64>,
    /// Cells outside `[lo, hi]` have zero density.
    lo: usize,
    hi: usize,
    max_p: f64,
    max_rho: f64,
    bounds: BoundsLog,
}

impl<'a> Integrator<'a> {
    pub fn new(config: &'a SimConfig, state: SimState) -> Result<Self> {
        let pressure = config.pressure_law()?;
        let stencil = state.mesh().stencil();
        let n = state.rho.len();
        let (lo, hi) = occupied_range(state.rho.values());
        let mut bounds = BoundsLog::default();
        bounds.record(&state);
        Ok(Self {
            config,
            pressure,
            stencil,
            max_p: state.p.max().max(0.0),
            max_rho: state.rho.max().max(0.0),
            state,
            work: vec![0.0; n],
            work_c: vec![0.0; n],
            lo,
            hi,
            bounds,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    /// Extremes seen since construction.
    pub fn bounds(&self) -> BoundsLog {
        self.bounds
    }

    pub fn stable_dt(&self) -> f64 {
        step_limit(
            self.config,
            &self.state,
            self.max_p,
            self.max_rho,
            (
                self.lo.saturating_sub(1),
                (self.hi + 1).min(self.state.rho.len() - 1),
            ),
        )
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let n = self.state.rho.len();
        let t_new = self.state.t + dt;
        let active = self.lo <= self.hi;
        let lo = self.lo.saturating_sub(1);
        let hi = (self.hi + 1).min(n - 1);
        if active {
            match self.config.scheme {
                Scheme::Explicit => self.explicit_density(dt, lo, hi),
                Scheme::SemiImplicit => self.implicit_density(dt, lo, hi),
            }
        }
        if self.state.c.is_some() {
            self.nutrient_update(dt);
        }
        if active {
            // Commit the density and refresh the pressure on the band.
            let rho = self.state.rho.values_mut();
            rho[lo..=hi].copy_from_slice(&self.work[lo..=hi]);
            let p = self.state.p.values_mut();
            let (mut max_p, mut max_rho, mut min_rho) = (0.0f64, 0.0f64, f64::INFINITY);
            for i in lo..=hi {
                let r = rho[i];
                if !r.is_finite() {
                    return Err(Error::BlowUp {
                        field: "rho",
                        time: t_new,
                    });
                }
                p[i] = self.pressure.pressure_of_density(r);
                max_p = max_p.max(p[i]);
                max_rho = max_rho.max(r);
                min_rho = min_rho.min(r);
            }
            self.max_p = max_p;
            self.max_rho = max_rho;
            let b = &mut self.bounds;
            b.max_p = b.max_p.max(max_p);
            b.max_rho = b.max_rho.max(max_rho);
            b.min_rho = b.min_rho.min(min_rho);
            if rho[lo] != 0.0 {
                self.lo = self.lo.min(lo);
            }
            if rho[hi] != 0.0 {
                self.hi = self.hi.max(hi);
            }
        }
        if let Some(c) = &mut self.state.c {
            let values = c.values_mut();
            values.copy_from_slice(&self.work_c);
            let (mut lo_c, mut hi_c) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in values.iter() {
                if !v.is_finite() {
                    return Err(Error::BlowUp {
                        field: "c",
                        time: t_new,
                    });
                }
                lo_c = lo_c.min(v);
                hi_c = hi_c.max(v);
            }
            self.bounds.min_c = self.bounds.min_c.min(lo_c);
            self.bounds.max_c = self.bounds.max_c.max(hi_c);
        }
        self.state.t = t_new;
        Ok(())
    }

    /// Pins the clock to `t` (used to land exactly on snapshot times).
    fn set_time(&mut self, t: f64) {
        self.state.t = t;
    }

    fn explicit_density(&mut self, dt: f64, lo: usize, hi: usize) {
        let rho = self.state.rho.values();
        let p = self.state.p.values();
        let c = self.state.c.as_ref().map(|c| c.values());
        let law = &self.pressure;
        let reaction = &self.config.reaction;
        let s = &self.stencil;
        let n = rho.len();
        let u = |i: usize| law.density_power(rho[i], p[i]);
        let mut u_prev = if lo > 0 { u(lo - 1) } else { 0.0 };
        let mut u_here = u(lo);
        for i in lo..=hi {
            let u_next = if i + 1 < n { u(i + 1) } else { 0.0 };
            let diffusion = s.lower[i] * (u_prev - u_here) + s.upper[i] * (u_next - u_here);
            let ci = c.map_or(0.0, |c| c[i]);
            self.work[i] = rho[i] + dt * (diffusion + rho[i] * reaction.rate(p[i], ci));
            u_prev = u_here;
            u_here = u_next;
        }
    }

    fn implicit_density(&mut self, dt: f64, lo: usize, hi: usize) {
        let rho = self.state.rho.values();
        let p = self.state.p.values();
        let c = self.state.c.as_ref().map(|c| c.values());
        let law = &self.pressure;
        let reaction = &self.config.reaction;
        let s = &self.stencil;
        let m = hi - lo + 1;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let face = |i: usize| 0.5 * (law.diffusivity(p[i]) + law.diffusivity(p[i + 1]));
        for (k, i) in (lo..=hi).enumerate() {
            let dl = if i > 0 {
                dt * s.lower[i] * face(i - 1)
            } else {
                0.0
            };
            let du = if i + 1 < rho.len() {
                dt * s.upper[i] * face(i)
            } else {
                0.0
            };
            sub[k] = -dl;
            sup[k] = -du;
            diag[k] = 1.0 + dl + du;
            let ci = c.map_or(0.0, |c| c[i]);
            rhs[k] = rho[i] + dt * rho[i] * reaction.rate(p[i], ci);
        }
        // Densities just outside the band are zero, so no boundary terms.
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs);
        self.work[lo..=hi].copy_from_slice(&rhs);
    }

    fn nutrient_update(&mut self, dt: f64) {
        let Some(law) = self.config.reaction.nutrient() else {
            return;
        };
        let c = self.state.c.as_ref().unwrap().values();
        let rho = self.state.rho.values();
        let p = self.state.p.values();
        self.stencil.apply(
            c,
            BoundaryCondition::Dirichlet(law.far_field()),
            &mut self.work_c,
        );
        for i in 0..c.len() {
            let uptake = rho[i] * law.consumption(p[i], c[i]);
            self.work_c[i] = c[i] + dt * (self.work_c[i] - uptake);
        }
    }
}

fn occupied_range(values: &[f64]) -> (usize, usize) {
    match (
        values.iter().position(|&v| v != 0.0),
        values.iter().rposition(|&v| v != 0.0),
    ) {
        (Some(a), Some(b)) => (a, b),
        _ => (1, 0),
    }
}

/// Thomas algorithm for a diagonally dominant tridiagonal system; the
/// solution overwrites `rhs`.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    if n == 0 {
        return;
    }
    let mut c_prime = vec![0.0; n];
    let mut denom = diag[0];
    c_prime[0] = sup[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c_prime[i - 1];
        c_prime[i] = sup[i] / denom;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c_prime[i] * rhs[i + 1];
    }
}

/// One step of size `dt` from `state`.
pub fn advance(state: &SimState, dt: f64, config: &SimConfig) -> Result<SimState> {
    let mut integrator = Integrator::new(config, state.clone())?;
    integrator.step(dt)?;
    Ok(integrator.into_state())
}

/// Samples the initial density (and nutrient) on `mesh`, rejecting data
/// above the saturation density `max_density(m, p_M)`.
pub fn make_initial_data(
    spec: &InitialData,
    mesh: &Mesh,
    pressure: &PressureLaw,
    homeostatic: Option<f64>,
) -> Result<Field> {
    let m = pressure.exponent();
    let saturation = homeostatic.map(|pm| max_density(m, pm));
    let values: Vec<f64> = match spec {
        InitialData::Indicator { radius, level } => {
            let level = level.resolve(saturation)?;
            (0..mesh.n_cells())
                .map(|i| if mesh.radius(i) < *radius { level } else { 0.0 })
                .collect()
        }
        InitialData::TwoRing {
            inner,
            outer,
            mushy,
        } => {
            if !(0.0 < *inner && inner < outer) {
                return Err(Error::InvalidConfig(
                    "two_ring needs 0 < inner < outer".into(),
                ));
            }
            if !(0.0..1.0).contains(mushy) {
                return Err(Error::InvalidConfig(
                    "two_ring mushy level must lie in [0, 1)".into(),
                ));
            }
            let core = saturation.ok_or_else(|| {
                Error::InvalidConfig("two_ring data need a growth law with p_M".into())
            })?;
            (0..mesh.n_cells())
                .map(|i| {
                    let r = mesh.radius(i);
                    if r < *inner {
                        core
                    } else if r < *outer {
                        *mushy
                    } else {
                        0.0
                    }
                })
                .collect()
        }
        InitialData::BallConstant { radius, level } => (0..mesh.n_cells())
            .map(|i| {
                if mesh.radius(i) < *radius {
                    *level
                } else {
                    0.0
                }
            })
            .collect(),
        InitialData::Table { points } => {
            if points.len() < 2 || points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidConfig(
                    "table needs at least two points with increasing x".into(),
                ));
            }
            (0..mesh.n_cells())
                .map(|i| interpolate_table(points, mesh.center(i)))
                .collect()
        }
        InitialData::Barenblatt { t0, scale } => {
            if !(*t0 > 0.0 && *scale > 0.0) {
                return Err(Error::InvalidConfig(
                    "barenblatt needs t0 > 0 and scale > 0".into(),
                ));
            }
            let n = mesh.dimension();
            (0..mesh.n_cells())
                .map(|i| barenblatt(mesh.radius(i), *t0, m, n, *scale))
                .collect()
        }
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InadmissibleData(format!(
            "initial density {} at cell {i} is negative or not finite",
            values[i]
        )));
    }
    if let (Some(sat), Some(pm)) = (saturation, homeostatic) {
        if let Some(v) = values.iter().find(|&&v| v > sat * (1.0 + 1e-12)) {
            return Err(Error::InadmissibleData(format!(
                "initial density {v} exceeds max_density(m = {m}, p_M = {pm}) = {sat}; \
                 admissible data satisfy P_m(ρ⁰) ≤ p_M"
            )));
        }
    }
    Field::new(*mesh, values)
}

fn interpolate_table(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    if x < first || x > last {
        return 0.0;
    }
    let k = points
        .partition_point(|pt| pt.0 <= x)
        .clamp(1, points.len() - 1);
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Barenblatt profile `t^{-α} (C - k r² t^{-2α/N})₊^{1/(m-1)}` of the pure
/// porous medium equation `∂ρ/∂t = Δρ^m` in `R^N`.
pub fn barenblatt(r: f64, t: f64, m: f64, dim: u32, scale: f64) -> f64 {
    let n = dim as f64;
    let alpha = n / (n * (m - 1.0) + 2.0);
    let beta = alpha / n;
    let k = alpha * (m - 1.0) / (2.0 * m * n);
    let inner = scale - k * r * r * t.powf(-2.0 * beta);
    if inner <= 0.0 {
        0.0
    } else {
        t.powf(-alpha) * inner.powf(1.0 / (m - 1.0))
    }
}

pub fn initial_state(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let pressure = config.pressure_law()?;
    let rho = make_initial_data(
        &config.initial,
        &config.mesh,
        &pressure,
        config.homeostatic_pressure(),
    )?;
    let c = config.reaction.nutrient().map(|law| {
        Field::constant(
            config.mesh,
            config.initial_nutrient.unwrap_or(law.far_field()),
        )
    });
    Ok(SimState::new(0.0, rho, c, &pressure))
}

/// Integrates `config` to its final time, keeping a copy of the state at
/// each requested snapshot time. Steps are shortened to land exactly on
/// snapshot times.
pub fn run(config: &SimConfig) -> Result<SnapshotSeries> {
    let state = initial_state(config)?;
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut dt_history = Vec::new();
    let mut next_snapshot = 0;
    if config.snapshot_times.first() == Some(&0.0) {
        snapshots.push(state.clone());
        next_snapshot = 1;
    }
    let mut integrator = Integrator::new(config, state)?;
    let t_end = config.final_time;
    let eps = 1e-12 * t_end.max(1.0);
    while integrator.state().t < t_end {
        let t = integrator.state().t;
        let stop = config.next_stop(t);
        let mut dt = integrator.stable_dt();
        // No sliver steps just before a stop.
        if t + dt >= stop - eps {
            dt = stop - t;
        }
        integrator.step(dt)?;
        dt_history.push(dt);
        if (stop - integrator.state().t).abs() <= eps {
            integrator.set_time(stop);
        }
        let state = integrator.state();
        while next_snapshot < config.snapshot_times.len()
            && config.snapshot_times[next_snapshot] <= state.t
        {
            snapshots.push(state.clone());
            next_snapshot += 1;
        }
    }
    let mut warnings = Vec::new();
    let mesh = &config.mesh;
    let limit = mesh.extent() - 3.0 * mesh.spacing();
    if let Some(s) = snapshots
        .iter()
        .find(|s| support_radius(&s.rho, config.thresholds.density).is_some_and(|r| r > limit))
    {
        let msg = format!(
            "domain too small: density front within 3 cells of the boundary at t = {}",
            s.t
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mut series = SnapshotSeries {
        snapshots,
        dt_history,
        bounds: integrator.bounds(),
        diagnostics: Vec::new(),
        warnings,
    };
    series.diagnostics = diagnostics::snapshot_records(&series, config)?;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::GrowthLaw;
    use crate::mesh::{norm, NormKind};

    fn linear_reaction() -> Reaction {
        Reaction::Pressure {
            law: GrowthLaw::linear(5.0, 1.0).unwrap(),
        }
    }

    fn config(m: f64, mesh: Mesh, initial: InitialData) -> SimConfig {
        SimConfig {
            m,
            reaction: linear_reaction(),
            mesh,
            final_time: 0.1,
            cfl_theta: 0.4,
            scheme: Scheme::Explicit,
            snapshot_times: vec![0.0, 0.05, 0.1],
            initial,
            initial_nutrient: None,
            thresholds: Thresholds::defaults(Some(1.0)),
        }
    }

    #[test]
    fn stable_dt_formula() {
        let mesh = Mesh::cartesian(0.5, 100).unwrap();
        let cfg = SimConfig {
            final_time: 10.0,
            snapshot_times: vec![],
            ..config(
                40.0,
                mesh,
                InitialData::Indicator {
                    radius: 0.2,
                    level: Level::MAX,
                },
            )
        };
        let law = cfg.pressure_law().unwrap();
        let rho = Field::constant(mesh, max_density(40.0, 1.0));
        let state = SimState::new(0.0, rho, None, &law);
        let expected = 0.4 * 1e-4 / (2.0 * 39.0 * 1.0 + 1e-4 * 5.0);
        assert!((stable_dt(&state, &cfg) - expected).abs() / expected < 1e-12);
        assert!((expected - 5.127e-7).abs() / 5.127e-7 < 5e-4);

        let zero = SimState::new(0.0, Field::zeros(mesh), None, &law);
        assert!((stable_dt(&zero, &cfg) - 0.4 / 5.0).abs() < 1e-15);

        let fine = Mesh::cartesian(0.25, 100).unwrap();
        let cfg_fine = SimConfig {
            mesh: fine,
            ..cfg.clone()
        };
        let sat = max_density(40.0, 1.0);
        let state_fine = SimState::new(0.0, Field::constant(fine, sat), None, &law);
        let state_coarse = SimState::new(0.0, Field::constant(mesh, sat), None, &law);
        let ratio = stable_dt(&state_coarse, &cfg) / stable_dt(&state_fine, &cfg_fine);
        assert!((ratio - 4.0).abs() < 1e-3, "quadratic CFL, ratio {ratio}");
    }

    #[test]
    fn stable_dt_respects_snapshot_gap() {
        let mesh = Mesh::cartesian(1.0, 16).unwrap();
        let cfg = config(
            2.0,
            mesh,
            InitialData::Indicator {
                radius: 0.2,
                level: Level::Value(0.1),
            },
        );
        let law = cfg.pressure_law().unwrap();
        let zero = SimState::new(0.04, Field::zeros(mesh), None, &law);
        assert!((stable_dt(&zero, &cfg) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_state_stays_zero() {
        let mesh = Mesh::cartesian(1.0, 32).unwrap();
        let cfg = config(
            3.0,
            mesh,
            InitialData::Indicator {
                radius: 0.2,
                level: Level::Value(0.0),
            },
        );
        let law = cfg.pressure_law().unwrap();
        let zero = SimState::new(0.0, Field::zeros(mesh), None, &law);
        let next = advance(&zero, 1e-3, &cfg).unwrap();
        assert!(next.rho.values().iter().all(|&v| v == 0.0));
        assert!((next.t - 1e-3).abs() < 1e-18);
    }

    /// RK4 on the scalar ODE `ρ' = ρ Φ(P(ρ))`.
    fn mushy_ode(rho0: f64, t: f64, m: f64) -> f64 {
        let law = PressureLaw::new(m).unwrap();
        let f = |r: f64| r * 5.0 * (1.0 - law.pressure_of_density(r));
        let steps = 20_000;
        let dt = t / steps as f64;
        let mut r = rho0;
        for _ in 0..steps {
            let k1 = f(r);
            let k2 = f(r + 0.5 * dt * k1);
            let k3 = f(r + 0.5 * dt * k2);
            let k4 = f(r + dt * k3);
            r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        r
    }

    #[test]
    fn uniform_low_density_grows_exponentially() {
        let mesh = Mesh::cartesian(1.0, 32).unwrap();
        let mut cfg = config(
            40.0,
            mesh,
            InitialData::Indicator {
                radius: 10.0,
                level: Level::Value(0.3),
            },
        );
        // t₁ with ρ̄ = max_density(40, 1)
        let t1 = (max_density(40.0, 1.0) / 0.3).ln() / 5.0;
        cfg.cfl_theta = 1e-3;
        cfg.final_time = t1;
        cfg.snapshot_times = (0..=10).map(|k| t1 * k as f64 / 10.0).collect();
        let series = run(&cfg).unwrap();
        for s in &series.snapshots {
            let exact = mushy_ode(0.3, s.t, 40.0);
            for v in s.rho.values() {
                assert!(
                    (v - exact).abs() / exact < 1e-3,
                    "t = {}: {v} vs {exact}",
                    s.t
                );
            }
            if s.t <= 0.1 {
                let pure = 0.3 * (5.0 * s.t).exp();
                assert!((v_mean(&s.rho) - pure).abs() / pure < 1e-3);
            }
        }
    }

    fn v_mean(f: &Field) -> f64 {
        f.values().iter().sum::<f64>() / f.len() as f64
    }

    #[test]
    fn explicit_step_is_monotone() {
        use rand::{Rng, SeedableRng};
        let mesh = Mesh::cartesian(1.0, 40).unwrap();
        let cfg = config(
            5.0,
            mesh,
            InitialData::Indicator {
                radius: 0.2,
                level: Level::MAX,
            },
        );
        let law = cfg.pressure_law().unwrap();
        let sat = max_density(5.0, 1.0);
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let low: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..sat * 0.8)).collect();
            let high: Vec<f64> = low
                .iter()
                .map(|v| (v + rng.gen_range(0.0..0.2)).min(sat))
                .collect();
            let a = SimState::new(0.0, Field::new(mesh, high).unwrap(), None, &law);
            let b = SimState::new(0.0, Field::new(mesh, low).unwrap(), None, &law);
            let dt = stable_dt(&a, &cfg).min(stable_dt(&b, &cfg));
            let (na, nb) = (
                advance(&a, dt, &cfg).unwrap(),
                advance(&b, dt, &cfg).unwrap(),
            );
            for (x, y) in na.rho.values().iter().zip(nb.rho.values()) {
                assert!(x >= y);
            }
        }
    }

    #[test]
    fn initial_data_admissibility() {
        let mesh = Mesh::cartesian(4.0, 400).unwrap();
        let law = PressureLaw::new(40.0).unwrap();
        let err = make_initial_data(
            &InitialData::Indicator {
                radius: 1.0,
                level: Level::Value(1.0),
            },
            &mesh,
            &law,
            Some(1.0),
        );
        assert!(matches!(err, Err(Error::InadmissibleData(_))));

        let rho = make_initial_data(
            &InitialData::Indicator {
                radius: 1.0,
                level: Level::MAX,
            },
            &mesh,
            &law,
            Some(1.0),
        )
        .unwrap();
        let level = max_density(40.0, 1.0);
        assert!((norm(&rho, NormKind::L1).unwrap() - 2.0 * level).abs() <= mesh.spacing());

        let ring = make_initial_data(
            &InitialData::TwoRing {
                inner: 1.0,
                outer: 2.0,
                mushy: 0.5,
            },
            &mesh,
            &law,
            Some(1.0),
        )
        .unwrap();
        for i in 0..mesh.n_cells() {
            let r = mesh.radius(i);
            let v = ring.values()[i];
            if r < 1.0 {
                assert_eq!(v, level);
            } else if r < 2.0 {
                assert_eq!(v, 0.5);
            } else {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn table_initial_data_interpolates() {
        let mesh = Mesh::cartesian(2.0, 8).unwrap();
        let law = PressureLaw::new(2.0).unwrap();
        let rho = make_initial_data(
            &InitialData::Table {
                points: vec![(-1.0, 0.0), (0.0, 0.4), (1.0, 0.0)],
            },
            &mesh,
            &law,
            Some(1.0),
        )
        .unwrap();
        // centers -1.75, -1.25, -0.75, -0.25, 0.25, ...
        assert_eq!(rho.values()[0], 0.0);
        assert!((rho.values()[2] - 0.1).abs() < 1e-15);
        assert!((rho.values()[3] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tridiagonal_solver() {
        let sub = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let sup = [-1.0, -1.0, -1.0, 0.0];
        let x = [1.0, 2.0, 3.0, 4.0];
        let mut rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += sub[i] * x[i - 1];
                }
                if i < 3 {
                    v += sup[i] * x[i + 1];
                }
                v
            })
            .collect();
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs);
        for (a, b) in rhs.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let mesh = Mesh::cartesian(1.0, 16).unwrap();
        let cfg = config(
            2.0,
            mesh,
            InitialData::Indicator {
                radius: 0.5,
                level: Level::Value(0.3),
            },
        );
        let law = cfg.pressure_law().unwrap();
        let state = SimState::new(0.0, Field::constant(mesh, 0.3), None, &law);
        let err = advance(&state, f64::INFINITY, &cfg).unwrap_err();
        assert!(matches!(err, Error::BlowUp { field: "rho", .. }));
    }
}
