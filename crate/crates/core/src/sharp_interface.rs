//! Solvers for the incompressible (m = ∞) limit in radial symmetry: the
//! elliptic pressure problem on a ball, spheroid and two-phase front
//! dynamics, the one-dimensional traveling wave and geometric reference
//! fields used to measure finite-m runs.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::Serialize;

use crate::diagnostics::ReferenceFrame;
use crate::error::{Error, Result};
use crate::laws::GrowthLaw;
use crate::mesh::{Field, Mesh};

pub const SHOOTING_SUBSTEPS: usize = 10_000;
pub const SHOOTING_TOL: f64 = 1e-10;
/// `q` counts as having reached one within this distance.
pub const SATURATION_GAP: f64 = 1e-9;

const MAX_SHOTS: usize = 200;
/// Shots overshooting `p_M` by this factor are cut short.
const OVERSHOOT: f64 = 1e10;
const MEMO_SCALE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontState {
    pub t: f64,
    pub r1: f64,
    pub q: f64,
    pub r2: f64,
    pub dim: u32,
}

impl FrontState {
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r1 <= self.r2) {
            return Err(Error::InvalidConfig(format!(
                "front radii must satisfy 0 < R1 <= R2, got R1 = {}, R2 = {}",
                self.r1, self.r2
            )));
        }
        if !(0.0..1.0).contains(&self.q) {
            return Err(Error::InvalidConfig(format!(
                "mushy level q must lie in [0, 1), got {}",
                self.q
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        Ok(())
    }
}

/// Radial solution of `-Δp = Φ(p)` on `B_R` with `p = 0` on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPressureSolution {
    pub radius: f64,
    pub dim: u32,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub dp: Vec<f64>,
    pub center: f64,
    /// `|p'(R)|`.
    pub gradient: f64,
}

impl RadialPressureSolution {
    /// Cubic Hermite interpolation of the profile; zero outside the ball.
    pub fn pressure_at(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= self.radius {
            return 0.0;
        }
        let n = self.r.len() - 1;
        let step = self.radius / n as f64;
        let k = ((r / step) as usize).min(n - 1);
        let s = (r - self.r[k]) / step;
        let (h00, h10, h01, h11) = hermite_basis(s);
        (h00 * self.p[k]
            + h10 * step * self.dp[k]
            + h01 * self.p[k + 1]
            + h11 * step * self.dp[k + 1])
            .max(0.0)
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

struct Shot {
    /// `u(R)` with `u = p_M - p`; infinite if the shot was cut short.
    end: f64,
    trace: Option<(Vec<f64>, Vec<f64>)>,
    slope: f64,
}

/// Integrates `u'' + (N-1)/r u' = Φ(p_M - u)` from `u(0) = u0`, `u'(0) = 0`.
fn shoot(u0: f64, radius: f64, law: &GrowthLaw, dim: u32, keep: bool) -> Shot {
    let pm = law.homeostatic_pressure();
    let n = SHOOTING_SUBSTEPS;
    let h = radius / n as f64;
    let bend = (dim - 1) as f64;
    let rhs = |r: f64, u: f64, v: f64| {
        let phi = law.rate_below_homeostatic(u);
        if r == 0.0 {
            phi / dim as f64
        } else {
            phi - bend / r * v
        }
    };
    let (mut u, mut v) = (u0, 0.0);
    let mut trace = keep.then(|| {
        let mut us = Vec::with_capacity(n + 1);
        let mut vs = Vec::with_capacity(n + 1);
        us.push(u);
        vs.push(v);
        (us, vs)
    });
    for k in 0..n {
        let r = k as f64 * h;
        let (k1u, k1v) = (v, rhs(r, u, v));
        let (k2u, k2v) = (
            v + 0.5 * h * k1v,
            rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v),
        );
        let (k3u, k3v) = (
            v + 0.5 * h * k2v,
            rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v),
        );
        let (k4u, k4v) = (v + h * k3v, rhs(r + h, u + h * k3u, v + h * k3v));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if let Some((us, vs)) = trace.as_mut() {
            us.push(u);
            vs.push(v);
        }
        if !keep && !(u <= OVERSHOOT * pm) {
            return Shot {
                end: f64::INFINITY,
                trace: None,
                slope: f64::NAN,
            };
        }
    }
    Shot {
        end: u,
        trace,
        slope: v,
    }
}

/// Solves `-p'' - (N-1)/r p' = Φ(p)`, `p'(0) = 0`, `p(R) = 0` by shooting
/// on the center value. The shot is parametrized by `ln(p_M - p(0))`, in
/// which the end value is close to linear; a bracketing Illinois iteration
/// then converges in a handful of shots while keeping the bisection
/// guarantee.
pub fn radial_pressure_solve(
    radius: f64,
    law: &GrowthLaw,
    dim: u32,
    tol: f64,
) -> Result<RadialPressureSolution> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let pm = law.homeostatic_pressure();
    // residual in log form: ln(u(R) / p_M)
    let eval = |x: f64| -> f64 {
        let shot = shoot(x.exp(), radius, law, dim, false);
        (shot.end / pm).ln()
    };
    let (mut lo, mut hi) = ((pm * 1e-300).ln(), pm.ln());
    let (mut f_lo, mut f_hi) = (eval(lo), eval(hi));
    if !(f_lo < 0.0 && f_hi >= 0.0) {
        return Err(Error::Solver(format!(
            "shooting failed to bracket p(R) = 0 for R = {radius} (end values {f_lo}, {f_hi})"
        )));
    }
    let target = tol.ln_1p();
    // unweighted end values, for the monotonicity check
    let (mut true_lo, mut true_hi) = (f_lo, f_hi);
    let mut side = 0i8;
    for _ in 0..MAX_SHOTS {
        let x = if f_hi.is_finite() {
            let x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if x > lo && x < hi {
                x
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let f = eval(x);
        if !(f >= true_lo && f <= true_hi) {
            return Err(Error::Solver(format!(
                "shooting map is not monotone at R = {radius}"
            )));
        }
        if f.abs() <= target || hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(finish(x.exp(), radius, law, dim));
        }
        if f < 0.0 {
            lo = x;
            f_lo = f;
            true_lo = f;
            if side == -1 && f_hi.is_finite() {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = f;
            true_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Solver(format!(
        "shooting did not converge for R = {radius}"
    )))
}

fn finish(u0: f64, radius: f64, law: &GrowthLaw, dim: u32) -> RadialPressureSolution {
    let pm = law.homeostatic_pressure();
    let shot = shoot(u0, radius, law, dim, true);
    let (us, vs) = shot.trace.expect("trace requested");
    let n = us.len() - 1;
    let r = (0..=n).map(|k| radius * k as f64 / n as f64).collect();
    let mut p: Vec<f64> = us.iter().map(|u| pm - u).collect();
    p[n] = 0.0;
    let dp = vs.iter().map(|v| -v).collect();
    RadialPressureSolution {
        radius,
        dim,
        r,
        p,
        dp,
        center: pm - u0,
        gradient: shot.slope,
    }
}

/// Memoized boundary gradient `R ↦ |∇p_R|(R)`, keyed by `R` rounded to
/// `1e-8`.
pub struct GradientCache<'a> {
    law: &'a GrowthLaw,
    dim: u32,
    tol: f64,
    memo: HashMap<i64, f64>,
}

impl<'a> GradientCache<'a> {
    pub fn new(law: &'a GrowthLaw, dim: u32) -> Self {
        Self {
            law,
            dim,
            tol: SHOOTING_TOL,
            memo: HashMap::new(),
        }
    }

    pub fn gradient(&mut self, radius: f64) -> Result<f64> {
        let key = (radius * MEMO_SCALE).round() as i64;
        if let Some(&g) = self.memo.get(&key) {
            return Ok(g);
        }
        let g =
            radial_pressure_solve(key as f64 / MEMO_SCALE, self.law, self.dim, self.tol)?.gradient;
        self.memo.insert(key, g);
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontSample {
    pub t: f64,
    pub r: f64,
    pub q: f64,
    /// `R'(t)`.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontEventKind {
    /// The mushy level reached one and the annulus became tumor at once.
    Saturation,
    /// The tumor front reached the outer edge of the mushy annulus.
    Absorption,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrontEvent {
    pub t: f64,
    pub kind: FrontEventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrajectory {
    pub dim: u32,
    /// Outer mushy radius, for two-phase runs.
    pub outer: Option<f64>,
    /// Samples on the time grid; an event adds a sample just before and
    /// one just after it at the event time.
    pub samples: Vec<FrontSample>,
    pub events: Vec<FrontEvent>,
}

impl FrontTrajectory {
    /// `R(t)` and `q(t)` by cubic Hermite interpolation within smooth
    /// stretches. At an event time the post-event state is returned.
    pub fn state_at(&self, t: f64) -> Option<(f64, f64)> {
        let s = &self.samples;
        let first = s.first()?;
        let last = s.last()?;
        let slack = 1e-12 * (1.0 + last.t.abs());
        if t < first.t - slack || t > last.t + slack {
            return None;
        }
        let k = s.partition_point(|x| x.t <= t);
        if k == 0 {
            return Some((first.r, first.q));
        }
        let a = &s[k - 1];
        if k == s.len() || (t - a.t).abs() <= slack {
            return Some((a.r, a.q));
        }
        let b = &s[k];
        let width = b.t - a.t;
        let x = (t - a.t) / width;
        let (h00, h10, h01, h11) = hermite_basis(x);
        let r = h00 * a.r + h10 * width * a.speed + h01 * b.r + h11 * width * b.speed;
        let q = if a.q > 0.0 && b.q > 0.0 {
            a.q * (b.q / a.q).powf(x)
        } else {
            a.q
        };
        Some((r, q))
    }
}

/// `R' = |∇p_R|(R)` from `R(0) = R⁰` by classical RK4.
pub fn spheroid_evolve(
    r0: f64,
    law: &GrowthLaw,
    dim: u32,
    t_final: f64,
    dt: f64,
) -> Result<FrontTrajectory> {
    if !(r0 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "initial radius must be positive, got {r0}"
        )));
    }
    evolve(
        FrontState {
            t: 0.0,
            r1: r0,
            q: 0.0,
            r2: f64::INFINITY,
            dim,
        },
        law,
        t_final,
        dt,
    )
}

/// Tumor ball `B_{R₁}` inside a mushy annulus of level `q` up to `R₂`:
/// `R₁' = |∇p|/(1 - q)`, `q' = qΦ(0)`. Integrated in the reparametrized
/// time `s = ∫ dt/(1-q)`, in which the front obeys the spheroid law and
/// the `1/(1-q)` singularity disappears; `q` is known in closed form.
pub fn two_phase_evolve(
    init: FrontState,
    law: &GrowthLaw,
    t_final: f64,
    dt: f64,
) -> Result<FrontTrajectory> {
    init.validate()?;
    evolve(init, law, t_final, dt)
}

/// Closed-form mushy level and the map between physical and front time.
struct MushyClock {
    q0: f64,
    growth: f64,
}

impl MushyClock {
    fn exponential(&self) -> bool {
        self.q0 > 0.0 && self.growth > 0.0
    }

    fn q(&self, tau: f64) -> f64 {
        self.q0 * (self.growth * tau).exp()
    }

    /// `s(τ) = ∫₀^τ dt / (1 - q(t))`.
    fn front_time(&self, tau: f64) -> f64 {
        if self.exponential() {
            tau - ((-self.q(tau)).ln_1p() - (-self.q0).ln_1p()) / self.growth
        } else {
            tau / (1.0 - self.q0)
        }
    }

    fn physical_time(&self, s: f64) -> f64 {
        if self.exponential() {
            let odds = self.q0 / (1.0 - self.q0) * (self.growth * s).exp();
            let q = odds / (1.0 + odds);
            (q / self.q0).ln() / self.growth
        } else {
            s * (1.0 - self.q0)
        }
    }

    fn saturation_time(&self) -> f64 {
        if self.exponential() {
            ((1.0 - SATURATION_GAP) / self.q0).ln() / self.growth
        } else {
            f64::INFINITY
        }
    }
}

fn rk4_step(cache: &mut GradientCache, r: f64, h: f64) -> Result<f64> {
    let k1 = cache.gradient(r)?;
    let k2 = cache.gradient(r + 0.5 * h * k1)?;
    let k3 = cache.gradient(r + 0.5 * h * k2)?;
    let k4 = cache.gradient(r + h * k3)?;
    Ok(r + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

fn evolve(init: FrontState, law: &GrowthLaw, t_final: f64, dt: f64) -> Result<FrontTrajectory> {
    if !(t_final > init.t && dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need T > t0 and dt > 0, got T = {t_final}, dt = {dt}"
        )));
    }
    let mut cache = GradientCache::new(law, init.dim);
    let mut clock = MushyClock {
        q0: init.q,
        growth: law.rate(0.0),
    };
    let mut mushy = init.q > 0.0 && init.r1 < init.r2;
    // origin of the closed-form clock
    let mut t_origin = init.t;
    let mut r = init.r1;
    let mut t = init.t;
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let sample = |cache: &mut GradientCache, t: f64, r: f64, q: f64| -> Result<FrontSample> {
        Ok(FrontSample {
            t,
            r,
            q,
            speed: cache.gradient(r)? / (1.0 - q),
        })
    };
    samples.push(sample(&mut cache, t, r, if mushy { init.q } else { 0.0 })?);
    let steps = ((t_final - init.t) / dt - 1e-9).ceil().max(1.0) as usize;
    for k in 1..=steps {
        let t_next = if k == steps {
            t_final
        } else {
            init.t + k as f64 * dt
        };
        while t < t_next {
            if !mushy {
                r = rk4_step(&mut cache, r, t_next - t)?;
                t = t_next;
                continue;
            }
            let saturation = t_origin + clock.saturation_time();
            let t_end = t_next.min(saturation);
            let (s_a, s_b) = (
                clock.front_time(t - t_origin),
                clock.front_time(t_end - t_origin),
            );
            let subs = ((s_b - s_a) / dt - 1e-9).ceil().max(1.0) as usize;
            let ds = (s_b - s_a) / subs as f64;
            let mut absorbed = None;
            for j in 0..subs {
                let s0 = s_a + j as f64 * ds;
                let next = rk4_step(&mut cache, r, ds)?;
                if next >= init.r2 {
                    let s_hit = locate_absorption(&mut cache, r, init.r2, s0, ds, dt, &clock)?;
                    absorbed = Some(t_origin + clock.physical_time(s_hit));
                    break;
                }
                r = next;
            }
            let (t_event, kind) = match absorbed {
                Some(te) => (te, FrontEventKind::Absorption),
                None if saturation <= t_next => (t_end, FrontEventKind::Saturation),
                None => {
                    t = t_next;
                    continue;
                }
            };
            if kind == FrontEventKind::Absorption {
                r = init.r2;
            }
            let q_event = clock.q(t_event - t_origin).min(1.0 - SATURATION_GAP);
            samples.push(sample(&mut cache, t_event, r, q_event)?);
            events.push(FrontEvent { t: t_event, kind });
            r = init.r2;
            mushy = false;
            clock = MushyClock {
                q0: 0.0,
                growth: 0.0,
            };
            t_origin = t_event;
            t = t_event;
            samples.push(sample(&mut cache, t, r, 0.0)?);
        }
        if samples.last().is_some_and(|s| s.t == t) {
            continue;
        }
        let q = if mushy { clock.q(t - t_origin) } else { 0.0 };
        samples.push(sample(&mut cache, t, r, q)?);
    }
    Ok(FrontTrajectory {
        dim: init.dim,
        outer: init.r2.is_finite().then_some(init.r2),
        samples,
        events,
    })
}

/// Bisection on the length of one RK4 substep in front time for the
/// crossing `R₁ = R₂`, until the bracket in physical time is below
/// `dt·1e-3`.
fn locate_absorption(
    cache: &mut GradientCache,
    r_start: f64,
    r2: f64,
    s_start: f64,
    ds: f64,
    dt: f64,
    clock: &MushyClock,
) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, ds);
    let width =
        |lo: f64, hi: f64| clock.physical_time(s_start + hi) - clock.physical_time(s_start + lo);
    while width(lo, hi) > dt * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if rk4_step(cache, r_start, mid)? >= r2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * ds {
            break;
        }
    }
    Ok(s_start + hi)
}

/// `p̂'' + Φ(p̂) = 0` for `s < 0`, `p̂(0) = 0`, `p̂'(0) = -√(2Q(p_M))`,
/// integrated backward by RK4 on `n` uniform steps.
pub fn traveling_wave_profile(law: &GrowthLaw, s_min: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if !(s_min < 0.0 && s_min.is_finite()) {
        return Err(Error::Domain(format!(
            "s_min must be negative, got {s_min}"
        )));
    }
    if n == 0 {
        return Err(Error::Domain("need at least one step".into()));
    }
    let h = s_min / n as f64;
    let pm = law.homeostatic_pressure();
    // u = p_M - p: u'' = Φ(p_M - u)
    let rhs = |u: f64| law.rate_below_homeostatic(u);
    let (mut u, mut v) = (pm, law.asymptotic_speed());
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, 0.0));
    for k in 1..=n {
        let (k1u, k1v) = (v, rhs(u));
        let (k2u, k2v) = (v + 0.5 * h * k1v, rhs(u + 0.5 * h * k1u));
        let (k3u, k3v) = (v + 0.5 * h * k2v, rhs(u + 0.5 * h * k2u));
        let (k4u, k4v) = (v + h * k3v, rhs(u + h * k3u));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let s = if k == n { s_min } else { k as f64 * h };
        out.push((s, pm - u));
    }
    Ok(out)
}

/// Time for a mushy density `c₀` to reach one: `-ln(c₀)/Φ(0)`.
pub fn jump_time(c0: f64, law: &GrowthLaw) -> Result<f64> {
    if !(c0 > 0.0 && c0 <= 1.0) {
        return Err(Error::Domain(format!(
            "density must lie in (0, 1], got {c0}"
        )));
    }
    let growth = law.rate(0.0);
    if !(growth > 0.0) {
        return Err(Error::Domain("Φ(0) must be positive".into()));
    }
    Ok(-c0.ln() / growth)
}

/// Limit density and pressure sampled at cell centers at each of `times`.
pub fn geometric_reference(
    traj: &FrontTrajectory,
    law: &GrowthLaw,
    mesh: &Mesh,
    times: &[f64],
) -> Result<Vec<ReferenceFrame>> {
    let dim = mesh.dimension();
    if dim != traj.dim {
        return Err(Error::MeshMismatch(format!(
            "trajectory in dimension {} sampled on a mesh of dimension {dim}",
            traj.dim
        )));
    }
    let mut cache: HashMap<u64, RadialPressureSolution> = HashMap::new();
    let mut frames = Vec::with_capacity(times.len());
    for &t in times {
        let (r1, q) = traj
            .state_at(t)
            .ok_or_else(|| Error::Domain(format!("trajectory does not cover t = {t}")))?;
        let outer = if q > 0.0 {
            traj.outer.unwrap_or(r1)
        } else {
            r1
        };
        if outer.max(r1) > mesh.extent() {
            return Err(Error::Domain(format!(
                "front radius {} exceeds the mesh extent {} at t = {t}",
                outer.max(r1),
                mesh.extent()
            )));
        }
        let rho = Field::from_fn(*mesh, |x| {
            let r = x.abs();
            let tumor = if r < r1 { 1.0 - q } else { 0.0 };
            let annulus = if r < outer { q } else { 0.0 };
            tumor + annulus
        })?;
        let sol = match cache.entry(r1.to_bits()) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(radial_pressure_solve(r1, law, dim, SHOOTING_TOL)?),
        };
        let p = Field::from_fn(*mesh, |x| sol.pressure_at(x))?;
        frames.push(ReferenceFrame { t, rho, p });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> GrowthLaw {
        GrowthLaw::linear(5.0, 1.0).unwrap()
    }

    fn g_1d(r: f64) -> f64 {
        5f64.sqrt() * (5f64.sqrt() * r).tanh()
    }

    fn g_3d(r: f64) -> f64 {
        let a = 5f64.sqrt();
        a / (a * r).tanh() - 1.0 / r
    }

    #[test]
    fn closed_form_gradients() {
        let law = linear();
        for r in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let one = radial_pressure_solve(r, &law, 1, SHOOTING_TOL).unwrap();
            assert!(
                (one.gradient - g_1d(r)).abs() < 1e-6,
                "1D R = {r}: {}",
                one.gradient
            );
            let three = radial_pressure_solve(r, &law, 3, SHOOTING_TOL).unwrap();
            assert!(
                (three.gradient - g_3d(r)).abs() < 1e-6,
                "3D R = {r}: {}",
                three.gradient
            );
        }
        assert!((g_1d(1.0) - 2.186).abs() < 1e-3);
        assert!((g_3d(1.0) - 1.288).abs() < 1e-3);
    }

    #[test]
    fn profile_matches_cosh() {
        let law = linear();
        let sol = radial_pressure_solve(1.0, &law, 1, SHOOTING_TOL).unwrap();
        let a = 5f64.sqrt();
        for x in [0.0, 0.13, 0.5, 0.77, 0.999] {
            let exact = 1.0 - (a * x).cosh() / a.cosh();
            assert!((sol.pressure_at(x) - exact).abs() < 1e-9);
        }
        assert_eq!(sol.pressure_at(1.5), 0.0);
        assert!(sol.center > 0.0 && sol.center < 1.0);
        assert!(sol.p.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn center_value_grows_with_radius() {
        let law = GrowthLaw::tabulated(&[(0.0, 3.0), (0.4, 2.0), (1.0, 0.0)]).unwrap();
        let mut last = 0.0;
        for r in [0.3, 0.6, 1.0, 2.0, 4.0] {
            let sol = radial_pressure_solve(r, &law, 2, SHOOTING_TOL).unwrap();
            assert!(sol.center > last && sol.center < 1.0);
            last = sol.center;
        }
    }

    #[test]
    fn gradient_tends_to_wave_speed() {
        let law = linear();
        let g = radial_pressure_solve(20.0, &law, 1, SHOOTING_TOL)
            .unwrap()
            .gradient;
        assert!((g / 5f64.sqrt() - 1.0).abs() < 1e-3);
        // in 3D the curvature correction 1/R decays slowly
        let g = radial_pressure_solve(100.0, &law, 3, SHOOTING_TOL)
            .unwrap()
            .gradient;
        assert!((g / 5f64.sqrt() - 1.0).abs() < 5e-3);
    }

    #[test]
    fn invalid_inputs() {
        assert!(radial_pressure_solve(0.0, &linear(), 1, 1e-10).is_err());
        assert!(radial_pressure_solve(1.0, &linear(), 1, 0.0).is_err());
        assert!(spheroid_evolve(-1.0, &linear(), 1, 1.0, 0.1).is_err());
        let bad = FrontState {
            t: 0.0,
            r1: 2.0,
            q: 0.5,
            r2: 1.0,
            dim: 1,
        };
        assert!(two_phase_evolve(bad, &linear(), 1.0, 0.1).is_err());
    }

    #[test]
    fn spheroid_speed_matches_closed_form() {
        let traj = spheroid_evolve(1.0, &linear(), 1, 2.0, 0.02).unwrap();
        for s in &traj.samples {
            assert!((s.speed - g_1d(s.r)).abs() < 1e-5);
        }
        assert!(traj.samples.windows(2).all(|w| w[1].speed >= w[0].speed));
    }

    #[test]
    fn spheroid_first_step_is_consistent() {
        let law = linear();
        let g0 = g_1d(1.0);
        for dt in [1e-2, 1e-3] {
            let traj = spheroid_evolve(1.0, &law, 1, dt, dt).unwrap();
            let moved = traj.samples.last().unwrap().r - 1.0;
            assert!((moved - dt * g0).abs() < 10.0 * dt * dt);
        }
    }

    #[test]
    fn jump_time_examples() {
        let law = linear();
        assert_eq!(jump_time(1.0, &law).unwrap(), 0.0);
        assert!((jump_time(0.5, &law).unwrap() - 0.138_629_436_1).abs() < 1e-9);
        assert!((jump_time((-5f64).exp(), &law).unwrap() - 1.0).abs() < 1e-14);
        assert!(jump_time(0.0, &law).is_err());
    }

    #[test]
    fn traveling_wave_matches_exponential() {
        let law = linear();
        let a = 5f64.sqrt();
        let profile = traveling_wave_profile(&law, -5.0, 20_000).unwrap();
        assert_eq!(profile[0], (0.0, 0.0));
        for &(s, p) in &profile {
            assert!((p - (1.0 - (a * s).exp())).abs() < 1e-8, "s = {s}");
        }
        let deep = traveling_wave_profile(&law, -10.0 / a, 20_000).unwrap();
        assert!(deep.last().unwrap().1 >= 0.9999);
        assert!(deep.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn two_phase_saturation_event() {
        let law = linear();
        let init = FrontState {
            t: 0.0,
            r1: 1.0,
            q: 0.5,
            r2: 30.0,
            dim: 1,
        };
        let traj = two_phase_evolve(init, &law, 0.3, 0.01).unwrap();
        let event = traj.events[0];
        assert_eq!(event.kind, FrontEventKind::Saturation);
        assert!((event.t - 2f64.ln() / 5.0).abs() < 1e-8);
        let after = traj.samples.iter().find(|s| s.t > event.t).unwrap();
        assert!(after.r >= 30.0 && after.q == 0.0);
        for s in traj.samples.iter().filter(|s| s.t < event.t) {
            let exact = 0.5 * (5.0 * s.t).exp();
            assert!((s.q - exact).abs() / exact < 1e-8);
        }
    }

    #[test]
    fn two_phase_absorption_event() {
        let law = linear();
        let init = FrontState {
            t: 0.0,
            r1: 1.0,
            q: 0.2,
            r2: 1.5,
            dim: 3,
        };
        let traj = two_phase_evolve(init, &law, 0.5, 0.01).unwrap();
        let event = traj.events[0];
        assert_eq!(event.kind, FrontEventKind::Absorption);
        assert!(event.t < jump_time(0.2, &law).unwrap());
        assert!(traj.samples.windows(2).all(|w| w[1].r >= w[0].r));
    }

    #[test]
    fn two_phase_without_mushy_region_is_spheroid() {
        let law = linear();
        let init = FrontState {
            t: 0.0,
            r1: 1.0,
            q: 0.0,
            r2: 5.0,
            dim: 1,
        };
        let two = two_phase_evolve(init, &law, 1.0, 0.05).unwrap();
        let one = spheroid_evolve(1.0, &law, 1, 1.0, 0.05).unwrap();
        assert_eq!(two.samples.len(), one.samples.len());
        for (a, b) in two.samples.iter().zip(&one.samples) {
            assert!((a.r - b.r).abs() < 1e-10);
        }
    }

    #[test]
    fn geometric_reference_samples_front() {
        let law = linear();
        let traj = spheroid_evolve(1.0, &law, 1, 0.5, 0.05).unwrap();
        let mesh = Mesh::cartesian(4.0, 400).unwrap();
        let h = mesh.spacing();
        let frames = geometric_reference(&traj, &law, &mesh, &[0.0, 0.25, 0.5]).unwrap();
        let rho0 = Field::from_fn(mesh, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!(crate::mesh::l1_distance(&frames[0].rho, &rho0).unwrap() <= 2.0 * h);
        for f in &frames {
            let (r, _) = traj.state_at(f.t).unwrap();
            let edge = crate::mesh::support_radius(&f.p, 1e-12).unwrap();
            assert!((edge - r).abs() <= 2.0 * h);
        }
        let small = Mesh::cartesian(1.2, 100).unwrap();
        assert!(geometric_reference(&traj, &law, &small, &[0.5]).is_err());
    }
}
