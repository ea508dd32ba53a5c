//! Constitutive laws: the power-law pressure `p = m/(m-1) ρ^(m-1)`, the
//! pressure-limited growth rate `Φ(p)`, the nutrient-coupled rates
//! `Φ(p, c)` and `Ψ(p, c)`, and the constants derived from them.
//!
//! Densities are measured in units of the packing density, so the
//! saturated (incompressible) level is `ρ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform samples used when a property of a tabulated law can
/// only be checked pointwise.
pub const LAW_SAMPLES: usize = 10_000;

const HOMEOSTATIC_TOL: f64 = 1e-12;

/// The power law `P_m(ρ) = m/(m-1) ρ^(m-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    m: f64,
}

impl PressureLaw {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 1.0) {
            return Err(Error::InvalidLaw(format!(
                "m must exceed 1 for the power-law pressure P_m (got {m})"
            )));
        }
        Ok(Self { m })
    }

    pub fn exponent(&self) -> f64 {
        self.m
    }

    pub fn pressure_of_density(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.m / (self.m - 1.0) * rho.powf(self.m - 1.0)
    }

    pub fn density_of_pressure(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        ((self.m - 1.0) * p / self.m).powf(1.0 / (self.m - 1.0))
    }

    /// `ρ^m` expressed through the pressure, `ρ · (m-1)/m · p`; avoids a
    /// second `powf` in the diffusion flux.
    #[inline]
    pub fn density_power(&self, rho: f64, p: f64) -> f64 {
        rho * p * (self.m - 1.0) / self.m
    }

    /// The diffusivity `m ρ^(m-1) = (m-1) p`.
    #[inline]
    pub fn diffusivity(&self, p: f64) -> f64 {
        (self.m - 1.0) * p
    }

    pub fn max_density(&self, homeostatic: f64) -> f64 {
        max_density(self.m, homeostatic)
    }
}

/// Largest density compatible with `P_m(ρ) ≤ p_M`.
pub fn max_density(m: f64, homeostatic: f64) -> f64 {
    ((m - 1.0) / m * homeostatic).powf(1.0 / (m - 1.0))
}

/// Pressure-limited growth rate `Φ(p)`: strictly decreasing, positive at
/// zero, vanishing at the homeostatic pressure `p_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthLaw {
    /// `Φ(p) = a (p_M - p)`.
    Linear { rate: f64, homeostatic: f64 },
    /// Monotone cubic interpolation of `(p, Φ)` knots.
    Tabulated(MonotoneCubic),
}

impl GrowthLaw {
    pub fn linear(rate: f64, homeostatic: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidLaw(format!(
                "linear growth law needs a > 0 (got {rate})"
            )));
        }
        if !(homeostatic.is_finite() && homeostatic > 0.0) {
            return Err(Error::InvalidLaw(format!(
                "homeostatic pressure p_M must be positive (got {homeostatic})"
            )));
        }
        Ok(GrowthLaw::Linear { rate, homeostatic })
    }

    /// Builds a tabulated law from `(p, Φ(p))` knots. The first knot must
    /// sit at `p = 0` and the last one at the homeostatic pressure, where
    /// the rate vanishes.
    pub fn tabulated(knots: &[(f64, f64)]) -> Result<Self> {
        let table = MonotoneCubic::new(knots)?;
        let law = GrowthLaw::Tabulated(table);
        law.validate()?;
        Ok(law)
    }

    fn validate(&self) -> Result<()> {
        let pm = self.homeostatic_pressure();
        if self.rate(pm).abs() > HOMEOSTATIC_TOL {
            return Err(Error::InvalidLaw(format!(
                "Φ(p_M) = {} is not zero",
                self.rate(pm)
            )));
        }
        if self.rate(0.0) <= 0.0 {
            return Err(Error::InvalidLaw("Φ(0) must be positive".into()));
        }
        let mut prev = self.rate(0.0);
        for k in 1..=LAW_SAMPLES {
            let p = pm * k as f64 / LAW_SAMPLES as f64;
            let v = self.rate(p);
            if v >= prev {
                return Err(Error::InvalidLaw(format!(
                    "Φ is not strictly decreasing near p = {p}"
                )));
            }
            prev = v;
        }
        self.stiffness_constant()?;
        Ok(())
    }

    pub fn homeostatic_pressure(&self) -> f64 {
        match self {
            GrowthLaw::Linear { homeostatic, .. } => *homeostatic,
            GrowthLaw::Tabulated(t) => t.upper(),
        }
    }

    /// Checked evaluation of `Φ(p)`.
    pub fn eval(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 0.0 {
            return Err(Error::Domain(format!(
                "Φ evaluated at negative pressure {p}"
            )));
        }
        if let GrowthLaw::Tabulated(t) = self {
            if p > t.upper() {
                return Err(Error::Domain(format!(
                    "tabulated Φ evaluated at p = {p} beyond the last knot {}",
                    t.upper()
                )));
            }
        }
        Ok(self.rate(p))
    }

    /// Unchecked `Φ(p)`. Tabulated laws extrapolate linearly outside the
    /// knots, which only matters for round-off overshoots of `p_M`.
    #[inline]
    pub fn rate(&self, p: f64) -> f64 {
        match self {
            GrowthLaw::Linear { rate, homeostatic } => rate * (homeostatic - p),
            GrowthLaw::Tabulated(t) => t.value(p),
        }
    }

    #[inline]
    pub fn derivative(&self, p: f64) -> f64 {
        match self {
            GrowthLaw::Linear { rate, .. } => -rate,
            GrowthLaw::Tabulated(t) => t.slope(p),
        }
    }

    /// `Φ(p_M - u)`, evaluated without cancellation when `u ≪ p_M`.
    pub fn rate_below_homeostatic(&self, u: f64) -> f64 {
        match self {
            GrowthLaw::Linear { rate, .. } => rate * u,
            GrowthLaw::Tabulated(t) => t.value_below_upper(u),
        }
    }

    /// `Q(p) = ∫₀^p Φ`.
    pub fn growth_potential(&self, p: f64) -> f64 {
        match self {
            GrowthLaw::Linear { rate, homeostatic } => rate * p * homeostatic - 0.5 * rate * p * p,
            GrowthLaw::Tabulated(t) => t.integral(p),
        }
    }

    /// `r_Φ = min_{[0, p_M]} (Φ(p) - p Φ'(p))`.
    pub fn stiffness_constant(&self) -> Result<f64> {
        let r = match self {
            GrowthLaw::Linear { rate, homeostatic } => rate * homeostatic,
            GrowthLaw::Tabulated(_) => {
                let pm = self.homeostatic_pressure();
                (0..=LAW_SAMPLES)
                    .map(|k| {
                        let p = pm * k as f64 / LAW_SAMPLES as f64;
                        self.rate(p) - p * self.derivative(p)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        };
        if r > 0.0 {
            Ok(r)
        } else {
            Err(Error::InvalidLaw(format!(
                "min (Φ - pΦ') = {r} must be positive"
            )))
        }
    }

    /// Limiting front speed of the incompressible spheroid, `√(2 Q(p_M))`.
    pub fn asymptotic_speed(&self) -> f64 {
        (2.0 * self.growth_potential(self.homeostatic_pressure())).sqrt()
    }
}

/// Monotone (Fritsch–Carlson) piecewise cubic Hermite interpolant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidLaw(
                "a tabulated law needs at least two knots".into(),
            ));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidLaw("non-finite knot".into()));
        }
        if knots[0].0 != 0.0 {
            return Err(Error::InvalidLaw("the first knot must be at p = 0".into()));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidLaw(
                    "knot pressures must be strictly increasing".into(),
                ));
            }
            if w[1].1 >= w[0].1 {
                return Err(Error::InvalidLaw(format!(
                    "knot rates must be strictly decreasing (at p = {})",
                    w[1].0
                )));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let n = xs.len();
        let secants: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for k in 1..n - 1 {
            // Same-sign secants (all negative here); average them.
            slopes[k] = 0.5 * (secants[k - 1] + secants[k]);
        }
        for k in 0..n - 1 {
            let alpha = slopes[k] / secants[k];
            let beta = slopes[k + 1] / secants[k];
            let s = alpha * alpha + beta * beta;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[k] = tau * alpha * secants[k];
                slopes[k + 1] = tau * beta * secants[k];
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn upper(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            return self.ys[0] + self.slopes[0] * (x - self.xs[0]);
        }
        if x > self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (x - self.xs[n - 1]);
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        self.ys[k] * (2.0 * s3 - 3.0 * s2 + 1.0)
            + h * self.slopes[k] * (s3 - 2.0 * s2 + s)
            + self.ys[k + 1] * (-2.0 * s3 + 3.0 * s2)
            + h * self.slopes[k + 1] * (s3 - s2)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.slopes[0];
        }
        if x >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        let k = self.segment(x);
        let h = self.xs[k + 1] - self.xs[k];
        let s = (x - self.xs[k]) / h;
        let s2 = s * s;
        (self.ys[k] * (6.0 * s2 - 6.0 * s) + self.ys[k + 1] * (-6.0 * s2 + 6.0 * s)) / h
            + self.slopes[k] * (3.0 * s2 - 4.0 * s + 1.0)
            + self.slopes[k + 1] * (3.0 * s2 - 2.0 * s)
    }

    /// Value at `upper - u`, written in the distance to the last knot so
    /// that tiny `u` keeps full relative precision.
    pub fn value_below_upper(&self, u: f64) -> f64 {
        let n = self.xs.len();
        let h = self.xs[n - 1] - self.xs[n - 2];
        if u <= 0.0 || u > h {
            return self.value(self.upper() - u);
        }
        let w = u / h;
        let (y0, y1) = (self.ys[n - 2], self.ys[n - 1]);
        let (d0, d1) = (self.slopes[n - 2], self.slopes[n - 1]);
        y1 * (1.0 - 3.0 * w * w + 2.0 * w * w * w)
            + y0 * (3.0 * w * w - 2.0 * w * w * w)
            + h * d0 * (1.0 - w) * w * w
            - h * d1 * (1.0 - w) * (1.0 - w) * w
    }

    /// `∫_{x_0}^{x}` of the interpolant by adaptive Simpson quadrature.
    pub fn integral(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.xs.len() - 1 {
            let a = self.xs[k];
            if x <= a {
                break;
            }
            let b = self.xs[k + 1].min(x);
            total += adaptive_simpson(&|p| self.value(p), a, b, 1e-10);
        }
        total
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Nutrient-coupled rates in the standard form
/// `Φ(p, c) = Φ̃(p) (c + c̃₁) - c̃₂` and `Ψ(p, c) = c`.
///
/// The homeostatic pressure is the root of `Φ(·, c_B)`; it sits below the
/// root of `Φ̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NutrientLaw {
    base: GrowthLaw,
    far_field: f64,
    c1: f64,
    c2: f64,
    homeostatic: f64,
}

impl NutrientLaw {
    pub fn new(base: GrowthLaw, far_field: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(far_field.is_finite() && far_field > 0.0) {
            return Err(Error::InvalidLaw(format!(
                "c_B must be positive (got {far_field})"
            )));
        }
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidLaw(
                "nutrient constants c1, c2 must be positive".into(),
            ));
        }
        // Φ̃(p_M) = c2 / (c_B + c1); Φ̃ is strictly decreasing so bisect.
        let target = c2 / (far_field + c1);
        let upper = base.homeostatic_pressure();
        if base.rate(0.0) <= target {
            return Err(Error::InvalidLaw(
                "Φ(0, c_B) ≤ 0: nutrients cannot sustain growth at zero pressure".into(),
            ));
        }
        let (mut lo, mut hi) = (0.0, upper);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if base.rate(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * upper {
                break;
            }
        }
        let law = Self {
            base,
            far_field,
            c1,
            c2,
            homeostatic: 0.5 * (lo + hi),
        };
        law.validate()?;
        Ok(law)
    }

    fn validate(&self) -> Result<()> {
        let n = 100;
        for i in 0..=n {
            let p = self.homeostatic * i as f64 / n as f64;
            for j in 0..=n {
                let c = self.far_field * j as f64 / n as f64;
                if self.rate_dp(p, c) >= 0.0 {
                    return Err(Error::InvalidLaw(format!("∂pΦ ≥ 0 at (p, c) = ({p}, {c})")));
                }
                if self.rate_dc(p, c) < 0.0 {
                    return Err(Error::InvalidLaw(format!("∂cΦ < 0 at (p, c) = ({p}, {c})")));
                }
            }
        }
        if self.rate(self.homeostatic, self.far_field).abs() > 1e-10 {
            return Err(Error::InvalidLaw("Φ(p_M, c_B) is not zero".into()));
        }
        Ok(())
    }

    pub fn base(&self) -> &GrowthLaw {
        &self.base
    }

    pub fn far_field(&self) -> f64 {
        self.far_field
    }

    pub fn constants(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn homeostatic_pressure(&self) -> f64 {
        self.homeostatic
    }

    #[inline]
    pub fn rate(&self, p: f64, c: f64) -> f64 {
        self.base.rate(p) * (c + self.c1) - self.c2
    }

    pub fn rate_dp(&self, p: f64, c: f64) -> f64 {
        self.base.derivative(p) * (c + self.c1)
    }

    pub fn rate_dc(&self, p: f64, _c: f64) -> f64 {
        self.base.rate(p)
    }

    /// Consumption `Ψ(p, c) = c`.
    #[inline]
    pub fn consumption(&self, _p: f64, c: f64) -> f64 {
        c
    }

    pub fn consumption_dp(&self, _p: f64, _c: f64) -> f64 {
        0.0
    }

    pub fn consumption_dc(&self, _p: f64, _c: f64) -> f64 {
        1.0
    }

    /// Constants `(μ, C)` of the weighted L¹ estimate
    /// `‖ρ‖₁ + μ‖c - c_B‖₁ ≤ e^{Ct} (‖ρ⁰‖₁ + μ‖c⁰ - c_B‖₁)`.
    pub fn l1_growth_constants(&self) -> (f64, f64) {
        let n = 100;
        let mut alpha = f64::INFINITY;
        let mut beta: f64 = 0.0;
        let mut growth = f64::NEG_INFINITY;
        let samples = (0..=n).flat_map(|i| (0..=n).map(move |j| (i, j)));
        for (i, j) in samples {
            let p = self.homeostatic * i as f64 / n as f64;
            let c = self.far_field * j as f64 / n as f64;
            alpha = alpha.min(self.rate_dp(p, c).abs());
            beta = beta.max(self.consumption_dp(p, c).abs());
            growth = growth.max(self.rate(p, c));
        }
        let mu = if beta > 0.0 { alpha / beta } else { 1.0 };
        for i in 0..=n {
            for j in 0..=n {
                let p = self.homeostatic * i as f64 / n as f64;
                let c = self.far_field * j as f64 / n as f64;
                growth = growth.max(self.rate(p, c) + mu * self.consumption(p, c));
            }
        }
        (mu, growth.max(0.0))
    }
}

/// The reaction term of the density equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reaction {
    /// `Φ ≡ 0`: the pure porous medium equation.
    None,
    Pressure {
        law: GrowthLaw,
    },
    Nutrient {
        law: NutrientLaw,
    },
}

impl Reaction {
    pub fn homeostatic_pressure(&self) -> Option<f64> {
        match self {
            Reaction::None => None,
            Reaction::Pressure { law } => Some(law.homeostatic_pressure()),
            Reaction::Nutrient { law } => Some(law.homeostatic_pressure()),
        }
    }

    /// `sup Φ` over admissible states, i.e. `Φ(0)` (or `Φ(0, c_B)`); the
    /// exponential rate of the mass estimate.
    pub fn max_growth(&self) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Pressure { law } => law.rate(0.0),
            Reaction::Nutrient { law } => law.rate(0.0, law.far_field()),
        }
    }

    /// `sup |Φ|` over admissible states.
    pub fn max_abs_rate(&self) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Pressure { law } => law.rate(0.0),
            Reaction::Nutrient { law } => law
                .rate(0.0, law.far_field())
                .max(law.rate(law.homeostatic_pressure(), 0.0).abs()),
        }
    }

    #[inline]
    pub fn rate(&self, p: f64, c: f64) -> f64 {
        match self {
            Reaction::None => 0.0,
            Reaction::Pressure { law } => law.rate(p),
            Reaction::Nutrient { law } => law.rate(p, c),
        }
    }

    pub fn growth_law(&self) -> Option<&GrowthLaw> {
        match self {
            Reaction::None => None,
            Reaction::Pressure { law } => Some(law),
            Reaction::Nutrient { law } => Some(law.base()),
        }
    }

    pub fn nutrient(&self) -> Option<&NutrientLaw> {
        match self {
            Reaction::Nutrient { law } => Some(law),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_law() -> GrowthLaw {
        GrowthLaw::linear(5.0, 1.0).unwrap()
    }

    #[test]
    fn pressure_of_density_examples() {
        let law = PressureLaw::new(10.0).unwrap();
        assert_eq!(law.pressure_of_density(0.0), 0.0);
        let law = PressureLaw::new(2.0).unwrap();
        assert_relative_eq!(law.pressure_of_density(0.5), 1.0, max_relative = 1e-15);
        let law = PressureLaw::new(40.0).unwrap();
        assert_relative_eq!(
            law.pressure_of_density(max_density(40.0, 1.0)),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_m_at_most_one() {
        assert!(matches!(PressureLaw::new(1.0), Err(Error::InvalidLaw(_))));
        assert!(PressureLaw::new(0.5).is_err());
        assert!(PressureLaw::new(f64::NAN).is_err());
    }

    #[test]
    fn density_of_pressure_examples() {
        assert_eq!(PressureLaw::new(5.0).unwrap().density_of_pressure(0.0), 0.0);
        assert_relative_eq!(
            PressureLaw::new(2.0).unwrap().density_of_pressure(1.0),
            0.5,
            max_relative = 1e-15
        );
    }

    proptest! {
        #[test]
        fn pressure_round_trip(rho in 1e-6f64..2.0, idx in 0usize..4) {
            let m = [2.0, 5.0, 40.0, 80.0][idx];
            let law = PressureLaw::new(m).unwrap();
            let back = law.density_of_pressure(law.pressure_of_density(rho));
            prop_assert!(((back - rho) / rho).abs() <= 1e-12);
        }

        #[test]
        fn pressure_strictly_increasing(a in 1e-3f64..2.0, b in 1e-3f64..2.0, m in 1.5f64..80.0) {
            prop_assume!(a < b);
            let law = PressureLaw::new(m).unwrap();
            prop_assert!(law.pressure_of_density(a) < law.pressure_of_density(b));
        }
    }

    #[test]
    fn linear_growth_values() {
        let law = reference_law();
        assert_eq!(law.eval(0.0).unwrap(), 5.0);
        assert_eq!(law.eval(1.0).unwrap(), 0.0);
        assert_eq!(law.eval(0.5).unwrap(), 2.5);
        assert!(law.eval(-0.1).is_err());
    }

    #[test]
    fn tabulated_outside_range_is_domain_error() {
        let law = GrowthLaw::tabulated(&[(0.0, 2.0), (0.5, 1.2), (1.0, 0.0)]).unwrap();
        assert!(matches!(law.eval(1.5), Err(Error::Domain(_))));
        assert!(law.eval(1.0).is_ok());
    }

    #[test]
    fn tabulated_rejects_bad_knots() {
        // increasing rate
        assert!(GrowthLaw::tabulated(&[(0.0, 1.0), (0.5, 1.5), (1.0, 0.0)]).is_err());
        // rate not vanishing at the last knot
        assert!(GrowthLaw::tabulated(&[(0.0, 1.0), (1.0, 0.1)]).is_err());
        // first knot away from zero
        assert!(GrowthLaw::tabulated(&[(0.1, 1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn growth_potential_values() {
        let law = reference_law();
        assert_eq!(law.growth_potential(0.0), 0.0);
        assert_relative_eq!(law.growth_potential(1.0), 2.5, max_relative = 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        use rand::{Rng, SeedableRng};
        let law = reference_law();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let p: f64 = rng.gen_range(0.0..1.0);
            let quad = adaptive_simpson(&|q| law.rate(q), 0.0, p, 1e-10);
            assert!((quad - law.growth_potential(p)).abs() <= 1e-9);
        }
        let tab =
            GrowthLaw::tabulated(&[(0.0, 5.0), (0.25, 3.75), (0.6, 2.0), (1.0, 0.0)]).unwrap();
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            assert!((tab.growth_potential(p) - law.growth_potential(p)).abs() <= 1e-9);
        }
    }

    #[test]
    fn stiffness_constant_values() {
        assert_eq!(reference_law().stiffness_constant().unwrap(), 5.0);
        let law = GrowthLaw::linear(1.0, 0.85).unwrap();
        assert_relative_eq!(
            law.stiffness_constant().unwrap(),
            0.85,
            max_relative = 1e-15
        );
        let tab = GrowthLaw::tabulated(&[(0.0, 5.0), (0.3, 3.5), (0.7, 1.5), (1.0, 0.0)]).unwrap();
        assert!((tab.stiffness_constant().unwrap() - 5.0).abs() <= 1e-6);
    }

    #[test]
    fn asymptotic_speed_values() {
        assert_relative_eq!(
            reference_law().asymptotic_speed(),
            5f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            GrowthLaw::linear(2.0, 1.0).unwrap().asymptotic_speed(),
            2f64.sqrt(),
            max_relative = 1e-15
        );
        let law = reference_law();
        let q = law.growth_potential(law.homeostatic_pressure());
        assert_eq!(law.asymptotic_speed().powi(2), (2.0 * q).sqrt().powi(2));
    }

    #[test]
    fn max_density_values() {
        assert_relative_eq!(max_density(2.0, 1.0), 0.5, max_relative = 1e-15);
        assert!((max_density(1e6, 1.0) - 1.0).abs() <= 1e-4);
        for m in [2.0, 5.0, 40.0] {
            let law = PressureLaw::new(m).unwrap();
            assert_relative_eq!(
                law.pressure_of_density(max_density(m, 1.0)),
                1.0,
                max_relative = 1e-12
            );
            assert!(max_density(m, 1.0) < 1.0);
        }
    }

    #[test]
    fn tabulated_law_invariants() {
        let law = GrowthLaw::tabulated(&[(0.0, 3.0), (0.2, 2.5), (0.5, 1.0), (0.85, 0.0)]).unwrap();
        let pm = law.homeostatic_pressure();
        assert_eq!(pm, 0.85);
        assert!(law.rate(pm).abs() <= 1e-12);
        assert!(law.rate(0.0) > 0.0);
        assert!(law.stiffness_constant().unwrap() > 0.0);
        // rate_below_homeostatic agrees with direct evaluation away from p_M
        for u in [0.01, 0.1, 0.3] {
            assert_relative_eq!(
                law.rate_below_homeostatic(u),
                law.rate(pm - u),
                max_relative = 1e-12
            );
        }
        assert!(law.rate_below_homeostatic(1e-20) > 0.0);
    }

    #[test]
    fn nutrient_law_hypotheses() {
        let law = NutrientLaw::new(reference_law(), 1.0, 0.5, 1.0).unwrap();
        let pm = law.homeostatic_pressure();
        // Φ̃(p_M) = c2 / (c_B + c1) = 2/3  ⇒  p_M = 1 - 2/15
        assert_relative_eq!(pm, 1.0 - 2.0 / 15.0, max_relative = 1e-12);
        assert!(law.rate(pm, 1.0).abs() < 1e-10);
        assert_eq!(law.consumption(0.3, 0.0), 0.0);
        assert!(law.rate_dp(0.2, 0.4) < 0.0);
        assert!(law.rate_dc(0.2, 0.4) >= 0.0);
        // too much death
        assert!(NutrientLaw::new(reference_law(), 1.0, 0.5, 10.0).is_err());
    }
}
