//! A-priori estimates and limit identities evaluated on snapshots:
//! complementarity `∫ p(Δp + Φ(p)) = ∫ (-|∇p|² + pΦ(p))`, the graph
//! relation `(1 - ρ) p = 0`, the semiconvexity bound on `Δp + Φ(p)`, the
//! exponential mass bound, the parabolic barrier controlling the support,
//! front speeds, pressure jumps in time, and the convergence study in `m`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::{GrowthLaw, Reaction};
use crate::mesh::{self, gradient_sq, support_radius, BoundaryCondition, Field, NormKind};
use crate::solver::{SimConfig, SimState, SnapshotSeries};

/// Cells excluded on each side of a free boundary (and next to the outer
/// boundary) by the pointwise checks.
pub const COLLAR_CELLS: usize = 3;

/// Relative slack per step when checking monotonicity in `m`.
pub const MONOTONE_SLACK: f64 = 0.05;

/// Pressures below this fraction of `p_M` count as outside the tumor.
pub const FRONT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub sup_p: f64,
    pub complementarity_residual: f64,
    pub graph_residual: f64,
    pub semiconvexity_slack: Option<f64>,
    pub mass_bound_margin: f64,
    pub support_radius_rho: Option<f64>,
    pub support_radius_p: Option<f64>,
    pub barrier_radius: f64,
    pub front_speed_estimate: Option<f64>,
    pub pressure_jump: bool,
    /// Margin in the weighted L¹ estimate of the nutrient system.
    pub nutrient_l1_margin: Option<f64>,
}

/// `∫ (-|∇p|² + p Φ(p))` over the whole mesh.
pub fn complementarity_residual(p: &Field, law: &GrowthLaw) -> f64 {
    let rates: Vec<f64> = p.values().iter().map(|&v| law.rate(v)).collect();
    complementarity_with_rates(p, &rates)
}

/// Complementarity residual with precomputed growth rates per cell.
pub fn complementarity_with_rates(p: &Field, rates: &[f64]) -> f64 {
    let grad = gradient_sq(p);
    let mesh = p.mesh();
    p.values()
        .iter()
        .zip(grad.values())
        .zip(rates)
        .enumerate()
        .map(|(i, ((&pv, &g), &r))| (-g + pv * r) * mesh.cell_volume(i))
        .sum()
}

/// `max (1 - ρ)₊ p`.
pub fn graph_residual(rho: &Field, p: &Field) -> Result<f64> {
    if rho.mesh() != p.mesh() {
        return Err(Error::MeshMismatch(
            "graph residual needs ρ and p on one mesh".into(),
        ));
    }
    Ok(rho
        .values()
        .iter()
        .zip(p.values())
        .map(|(&r, &pv)| (1.0 - r).max(0.0) * pv)
        .fold(0.0, f64::max))
}

/// Lower bound `W(t) = -r e^{-(m-1) r t} / (1 - e^{-(m-1) r t})` on
/// `Δp + Φ(p)`.
pub fn semiconvexity_bound(t: f64, m: f64, stiffness: f64) -> f64 {
    -stiffness / ((m - 1.0) * stiffness * t).exp_m1()
}

/// `min [Δp + Φ(p)] - W(t)` over cells at least [`COLLAR_CELLS`] away from
/// the free boundary and the outer boundary.
pub fn semiconvexity_slack(p: &Field, t: f64, m: f64, law: &GrowthLaw) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Diagnostic(
            "semiconvexity bound is undefined at t = 0".into(),
        ));
    }
    let bound = semiconvexity_bound(t, m, law.stiffness_constant()?);
    let lap = mesh::laplacian(p, BoundaryCondition::ZeroFlux);
    let threshold = FRONT_FRACTION * law.homeostatic_pressure();
    let excluded = collar_mask(p, threshold);
    lap.values()
        .iter()
        .zip(p.values())
        .zip(&excluded)
        .filter(|(_, &skip)| !skip)
        .map(|((&l, &pv), _)| l + law.rate(pv))
        .reduce(f64::min)
        .map(|w| w - bound)
        .ok_or_else(|| Error::Diagnostic("no cells outside the front collar".into()))
}

/// Cells within the collar of a threshold crossing or the outer boundary.
fn collar_mask(p: &Field, threshold: f64) -> Vec<bool> {
    let n = p.len();
    let mut mask = vec![false; n];
    let mut mark = |centre: usize| {
        let lo = centre.saturating_sub(COLLAR_CELLS);
        let hi = (centre + COLLAR_CELLS).min(n - 1);
        mask[lo..=hi].iter_mut().for_each(|m| *m = true);
    };
    let v = p.values();
    for i in 0..n - 1 {
        if (v[i] > threshold) != (v[i + 1] > threshold) {
            mark(i);
            mark(i + 1);
        }
    }
    mark(n - 1);
    if p.mesh().geometry() == mesh::Geometry::Cartesian1d {
        mark(0);
    }
    mask
}

/// `max_t ‖ρ(t)‖₁ / (e^{Φ(0) t} ‖ρ⁰‖₁) - 1` over the snapshots.
pub fn mass_bound_margin(series: &SnapshotSeries, reaction: &Reaction) -> Result<f64> {
    let first = series
        .snapshots
        .first()
        .ok_or_else(|| Error::Diagnostic("empty snapshot series".into()))?;
    let initial = mesh::norm(&first.rho, NormKind::L1)?;
    let rate = reaction.max_growth();
    let mut worst = f64::NEG_INFINITY;
    for s in &series.snapshots {
        let mass = mesh::norm(&s.rho, NormKind::L1)?;
        worst = worst.max(mass_margin(mass, initial, rate, s.t - first.t));
    }
    Ok(worst)
}

fn mass_margin(mass: f64, initial: f64, rate: f64, t: f64) -> f64 {
    if initial == 0.0 {
        return if mass == 0.0 { 0.0 } else { f64::INFINITY };
    }
    mass / ((rate * t).exp() * initial) - 1.0
}

/// Radius of the parabolic supersolution `(C - |x|²/(4(τ + t)))₊` with
/// `τ = N/(4Φ(0))`, restarted every `τ` with `C` doubled so that the new
/// barrier dominates the previous one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    tau: f64,
    initial_height: f64,
    restarts: bool,
}

impl Barrier {
    /// Fits `C` so that the barrier dominates the initial pressure on every
    /// cell of its support.
    pub fn fit(p0: &Field, growth_at_zero: f64) -> Self {
        let mesh = p0.mesh();
        let dim = mesh.dimension() as f64;
        let (tau, restarts) = if growth_at_zero > 0.0 {
            (dim / (4.0 * growth_at_zero), true)
        } else {
            (1.0, false)
        };
        let h = mesh.spacing();
        let initial_height = p0
            .values()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| {
                let r = mesh.radius(i) + 0.5 * h;
                v + r * r / (4.0 * tau)
            })
            .fold(0.0, f64::max);
        Self {
            tau,
            initial_height,
            restarts,
        }
    }

    pub fn radius(&self, t: f64) -> f64 {
        if self.initial_height == 0.0 {
            return 0.0;
        }
        let (stage, local) = if self.restarts {
            let k = (t / self.tau).floor();
            (k, t - k * self.tau)
        } else {
            (0.0, t)
        };
        let height = self.initial_height * 2f64.powf(stage);
        (4.0 * height * (self.tau + local)).sqrt()
    }
}

/// Least-squares slope of the pressure front position over the snapshots
/// with `t ≥ window · t_last`.
pub fn front_speed_estimate(series: &SnapshotSeries, window: f64, threshold: f64) -> Result<f64> {
    let t_last = series
        .snapshots
        .last()
        .ok_or_else(|| Error::Diagnostic("empty snapshot series".into()))?
        .t;
    let picked: Vec<&SimState> = series
        .snapshots
        .iter()
        .filter(|s| s.t >= window * t_last)
        .collect();
    if picked.len() < 5 {
        return Err(Error::Diagnostic(format!(
            "front speed needs at least 5 snapshots in the window, got {}",
            picked.len()
        )));
    }
    front_slope(&picked, threshold)
}

fn front_slope(snapshots: &[&SimState], threshold: f64) -> Result<f64> {
    let points: Vec<(f64, f64)> = snapshots
        .iter()
        .filter_map(|s| support_radius(&s.p, threshold).map(|r| (s.t, r)))
        .collect();
    let missing = snapshots.len() - points.len();
    if missing >= 2 || points.len() < 2 {
        return Err(Error::Diagnostic(format!(
            "front not detected in {missing} snapshots"
        )));
    }
    Ok(least_squares_slope(&points))
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_r = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, r) in points {
        num += (t - mean_t) * (r - mean_r);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// First pair of consecutive snapshots whose pressures differ by more than
/// `delta` in sup norm; returns the midpoint time and the jump size.
pub fn detect_pressure_jump(series: &SnapshotSeries, delta: f64) -> Option<(f64, f64)> {
    series.snapshots.windows(2).find_map(|w| {
        let jump = sup_difference(&w[0].p, &w[1].p);
        (jump > delta).then(|| (0.5 * (w[0].t + w[1].t), jump))
    })
}

fn sup_difference(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Default jump threshold, a quarter of the homeostatic pressure.
pub fn default_jump_threshold(config: &SimConfig) -> f64 {
    0.25 * config.homeostatic_pressure().unwrap_or(1.0)
}

/// Per-snapshot diagnostics of a finished run.
pub fn snapshot_records(
    series: &SnapshotSeries,
    config: &SimConfig,
) -> Result<Vec<DiagnosticsRecord>> {
    let Some(first) = series.snapshots.first() else {
        return Ok(Vec::new());
    };
    let reaction = &config.reaction;
    let initial_mass = mesh::norm(&first.rho, NormKind::L1)?;
    let barrier = Barrier::fit(&first.p, reaction.max_growth());
    let delta = default_jump_threshold(config);
    let nutrient_reference = reaction.nutrient().map(|law| {
        let (mu, rate) = law.l1_growth_constants();
        let c0 = first
            .c
            .as_ref()
            .map_or(0.0, |c| far_field_gap(c, law.far_field()));
        (mu, rate, initial_mass + mu * c0)
    });
    let mut records = Vec::with_capacity(series.snapshots.len());
    for (k, s) in series.snapshots.iter().enumerate() {
        let rates: Vec<f64> = match &s.c {
            Some(c) => {
                s.p.values()
                    .iter()
                    .zip(c.values())
                    .map(|(&p, &c)| reaction.rate(p, c))
                    .collect()
            }
            None => {
                s.p.values()
                    .iter()
                    .map(|&p| reaction.rate(p, 0.0))
                    .collect()
            }
        };
        let mass = mesh::norm(&s.rho, NormKind::L1)?;
        let semiconvexity_slack = match (reaction, s.t > 0.0) {
            (Reaction::Pressure { law }, true) => {
                semiconvexity_slack(&s.p, s.t, config.m, law).ok()
            }
            _ => None,
        };
        let front_speed_estimate = if k >= 4 {
            let window: Vec<&SimState> = series.snapshots[k - 4..=k].iter().collect();
            front_slope(&window, config.thresholds.pressure).ok()
        } else {
            None
        };
        let pressure_jump = k > 0 && sup_difference(&series.snapshots[k - 1].p, &s.p) > delta;
        let nutrient_l1_margin = match (&nutrient_reference, &s.c, reaction.nutrient()) {
            (Some((mu, rate, reference)), Some(c), Some(law)) => {
                let weighted = mass + mu * far_field_gap(c, law.far_field());
                Some(mass_margin(weighted, *reference, *rate, s.t - first.t))
            }
            _ => None,
        };
        records.push(DiagnosticsRecord {
            t: s.t,
            mass,
            sup_p: s.p.max(),
            complementarity_residual: complementarity_with_rates(&s.p, &rates),
            graph_residual: graph_residual(&s.rho, &s.p)?,
            semiconvexity_slack,
            mass_bound_margin: mass_margin(
                mass,
                initial_mass,
                reaction.max_growth(),
                s.t - first.t,
            ),
            support_radius_rho: support_radius(&s.rho, config.thresholds.density),
            support_radius_p: support_radius(&s.p, config.thresholds.pressure),
            barrier_radius: barrier.radius(s.t - first.t),
            front_speed_estimate,
            pressure_jump,
            nutrient_l1_margin,
        });
    }
    Ok(records)
}

fn far_field_gap(c: &Field, far_field: f64) -> f64 {
    c.values()
        .iter()
        .enumerate()
        .map(|(i, v)| (far_field - v).abs() * c.mesh().cell_volume(i))
        .sum()
}

/// Geometric (limit) density and pressure at one snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFrame {
    pub t: f64,
    pub rho: Field,
    pub p: Field,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsweepRow {
    pub m: f64,
    pub l1_rho_vs_ref: f64,
    pub l1_p_vs_ref: f64,
    pub graph_residual: f64,
    pub compl_residual: f64,
    /// `‖ρ_m - ρ_{m'}‖_{L¹(Q_T)}` with `m'` the next exponent of the sweep.
    pub l1_rho_vs_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsweepReport {
    pub rows: Vec<MsweepRow>,
    /// Names of the columns that fail to decrease (within slack) in `m`.
    pub non_monotone: Vec<String>,
}

/// Discrete `L¹(Q_T)` distances of each run to the reference, residuals at
/// the final time and monotonicity flags. Runs are sorted by `m`.
pub fn msweep_convergence(
    runs: &[(f64, SnapshotSeries)],
    reference: &[ReferenceFrame],
    law: &GrowthLaw,
) -> Result<MsweepReport> {
    let times: Vec<f64> = reference.iter().map(|r| r.t).collect();
    let dt = uniform_spacing(&times)?;
    let mut sorted: Vec<&(f64, SnapshotSeries)> = runs.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (m, series) in &sorted {
        let run_times = series.times();
        if run_times.len() != times.len()
            || run_times
                .iter()
                .zip(&times)
                .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + b.abs()))
        {
            return Err(Error::MeshMismatch(format!(
                "run m = {m} does not share the reference snapshot times"
            )));
        }
    }
    let space_time = |a: &[&Field], b: &[&Field]| -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in a.iter().zip(b) {
            total += mesh::l1_distance(x, y)?;
        }
        Ok(total * dt)
    };
    let ref_rho: Vec<&Field> = reference.iter().map(|r| &r.rho).collect();
    let ref_p: Vec<&Field> = reference.iter().map(|r| &r.p).collect();
    let mut rows = Vec::with_capacity(sorted.len());
    for (k, (m, series)) in sorted.iter().enumerate() {
        let rho: Vec<&Field> = series.snapshots.iter().map(|s| &s.rho).collect();
        let p: Vec<&Field> = series.snapshots.iter().map(|s| &s.p).collect();
        let last = series.snapshots.last().unwrap();
        let l1_rho_vs_next = match sorted.get(k + 1) {
            Some((_, next)) => {
                let next_rho: Vec<&Field> = next.snapshots.iter().map(|s| &s.rho).collect();
                Some(space_time(&rho, &next_rho)?)
            }
            None => None,
        };
        rows.push(MsweepRow {
            m: *m,
            l1_rho_vs_ref: space_time(&rho, &ref_rho)?,
            l1_p_vs_ref: space_time(&p, &ref_p)?,
            graph_residual: graph_residual(&last.rho, &last.p)?,
            compl_residual: complementarity_residual(&last.p, law),
            l1_rho_vs_next,
        });
    }
    let mut non_monotone = Vec::new();
    type Column = (&'static str, fn(&MsweepRow) -> f64);
    let columns: [Column; 4] = [
        ("l1_rho_vs_ref", |r| r.l1_rho_vs_ref),
        ("l1_p_vs_ref", |r| r.l1_p_vs_ref),
        ("graph_residual", |r| r.graph_residual),
        ("compl_residual", |r| r.compl_residual.abs()),
    ];
    for (name, get) in columns {
        if !non_increasing(&rows.iter().map(get).collect::<Vec<_>>(), MONOTONE_SLACK) {
            non_monotone.push(name.to_string());
        }
    }
    Ok(MsweepReport { rows, non_monotone })
}

/// `v[k+1] ≤ (1 + slack) v[k]` for all `k`.
pub fn non_increasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Diagnostic("need at least two snapshot times".into()));
    }
    let dt = times[1] - times[0];
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300))
    {
        return Err(Error::Diagnostic(
            "space-time L¹ norms need uniformly spaced snapshots".into(),
        ));
    }
    Ok(dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{max_density, PressureLaw};
    use crate::mesh::{norm, Mesh};
    use crate::solver::BoundsLog;

    fn law() -> GrowthLaw {
        GrowthLaw::linear(5.0, 1.0).unwrap()
    }

    fn series_of(states: Vec<SimState>) -> SnapshotSeries {
        SnapshotSeries {
            snapshots: states,
            dt_history: vec![],
            bounds: BoundsLog::default(),
            diagnostics: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn zero_pressure_residuals() {
        let mesh = Mesh::cartesian(2.0, 64).unwrap();
        let p = Field::zeros(mesh);
        assert_eq!(complementarity_residual(&p, &law()), 0.0);
        assert_eq!(graph_residual(&Field::zeros(mesh), &p).unwrap(), 0.0);
        let slack = semiconvexity_slack(&p, 0.1, 40.0, &law()).unwrap();
        assert!(slack > 0.0);
        assert!(semiconvexity_slack(&p, 0.0, 40.0, &law()).is_err());
    }

    #[test]
    fn complementarity_vanishes_on_traveling_wave() {
        // p(s) = 1 - e^{√5 s} on s ∈ [-10, 0], the mesh shifted by 5
        let a: f64 = 5.0;
        let half = 5.0;
        let mut previous = None;
        for n in [400, 800, 1600] {
            let mesh = Mesh::cartesian(half, n).unwrap();
            let p = Field::from_fn(mesh, |x| 1.0 - (a.sqrt() * (x - half)).exp()).unwrap();
            let res = complementarity_residual(&p, &law()).abs();
            let h = mesh.spacing();
            let scale = norm(&p, NormKind::L1).unwrap();
            assert!(res <= h * h * scale, "n = {n}: residual {res}");
            if let Some(prev) = previous {
                let ratio: f64 = prev / res;
                assert!(ratio > 3.5, "ratio {ratio}");
            }
            previous = Some(res);
        }
    }

    #[test]
    fn graph_residual_at_saturation() {
        let mesh = Mesh::cartesian(1.0, 16).unwrap();
        let mut last = f64::INFINITY;
        for m in [5.0, 10.0, 40.0, 80.0] {
            let sat = max_density(m, 1.0);
            let r =
                graph_residual(&Field::constant(mesh, sat), &Field::constant(mesh, 1.0)).unwrap();
            assert!((r - (1.0 - sat)).abs() < 1e-15);
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn semiconvexity_bound_asymptote() {
        let (m, r) = (40.0, 5.0);
        let t = 1e-3 / ((m - 1.0) * r);
        let w = semiconvexity_bound(t, m, r);
        let asymptote = -1.0 / ((m - 1.0) * t);
        assert!(((w - asymptote) / asymptote).abs() < 0.01);
    }

    #[test]
    fn pressure_jump_detection() {
        let mesh = Mesh::cartesian(1.0, 16).unwrap();
        let law = PressureLaw::new(2.0).unwrap();
        let state = |t: f64, level: f64| SimState::new(t, Field::constant(mesh, level), None, &law);
        // p = 2ρ for m = 2
        let series = series_of(vec![
            state(0.0, 0.0),
            state(0.1, 0.05),
            state(0.2, 0.4),
            state(0.3, 0.45),
        ]);
        let (t, jump) = detect_pressure_jump(&series, 0.25).unwrap();
        assert!((t - 0.15).abs() < 1e-15);
        assert!((jump - 0.7).abs() < 1e-12);
        assert!(detect_pressure_jump(&series, 1.5).is_none());
    }

    #[test]
    fn front_speed_of_linear_motion() {
        let mesh = Mesh::cartesian(10.0, 1000).unwrap();
        let h = mesh.spacing();
        let law = PressureLaw::new(2.0).unwrap();
        let speed = 1.7;
        let states: Vec<SimState> = (0..=10)
            .map(|k| {
                let t = 0.2 * k as f64;
                let r = 1.0 + speed * t;
                let rho = Field::from_fn(mesh, |x| if x.abs() < r { 0.5 } else { 0.0 }).unwrap();
                SimState::new(t, rho, None, &law)
            })
            .collect();
        let series = series_of(states.clone());
        let est = front_speed_estimate(&series, 0.5, 1e-3).unwrap();
        assert!((est - speed).abs() <= 2.0 * h / 2.0);

        let still: Vec<SimState> = states
            .iter()
            .map(|s| SimState {
                t: s.t,
                ..states[0].clone()
            })
            .collect();
        let est = front_speed_estimate(&series_of(still), 0.5, 1e-3).unwrap();
        assert!(est.abs() <= 2.0 * h / 2.0);

        let short = series_of(states[..3].to_vec());
        assert!(front_speed_estimate(&short, 0.0, 1e-3).is_err());
    }

    #[test]
    fn barrier_dominates_initial_support() {
        let mesh = Mesh::cartesian(5.0, 100).unwrap();
        let p0 = Field::from_fn(mesh, |x| if x.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let barrier = Barrier::fit(&p0, 5.0);
        assert!(barrier.radius(0.0) >= 1.0);
        // continuous across restarts and increasing
        let tau = 1.0 / 20.0;
        let before = barrier.radius(tau * (1.0 - 1e-12));
        let after = barrier.radius(tau);
        assert!((before - after).abs() < 1e-6);
        let mut last = 0.0;
        for k in 0..50 {
            let r = barrier.radius(0.01 * k as f64);
            assert!(r >= last);
            last = r;
        }
    }

    #[test]
    fn msweep_of_identical_runs_is_zero() {
        let mesh = Mesh::cartesian(2.0, 32).unwrap();
        let law_p = PressureLaw::new(40.0).unwrap();
        let states: Vec<SimState> = (0..4)
            .map(|k| {
                let rho = Field::from_fn(mesh, |x| if x.abs() < 1.0 { 0.99 } else { 0.0 }).unwrap();
                SimState::new(0.1 * k as f64, rho, None, &law_p)
            })
            .collect();
        let reference: Vec<ReferenceFrame> = states
            .iter()
            .map(|s| ReferenceFrame {
                t: s.t,
                rho: s.rho.clone(),
                p: s.p.clone(),
            })
            .collect();
        let runs = vec![(5.0, series_of(states.clone())), (10.0, series_of(states))];
        let report = msweep_convergence(&runs, &reference, &law()).unwrap();
        for row in &report.rows {
            assert_eq!(row.l1_rho_vs_ref, 0.0);
            assert_eq!(row.l1_p_vs_ref, 0.0);
        }
        assert_eq!(report.rows[0].l1_rho_vs_next, Some(0.0));
    }

    #[test]
    fn monotone_with_slack() {
        assert!(non_increasing(&[1.0, 1.04, 0.5], 0.05));
        assert!(!non_increasing(&[1.0, 1.06], 0.05));
    }
}
