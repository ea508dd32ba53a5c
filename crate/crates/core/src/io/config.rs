//! TOML experiment configuration.
//!
//! ```toml
//! [model]
//! m = 40
//! law = "linear"        # linear | tabulated | none
//! a = 5.0
//! p_M = 1.0
//!
//! [mesh]
//! geometry = "cartesian" # cartesian | radial (with N)
//! L = 4.0
//! n_cells = 400
//!
//! [time]
//! T = 1.0
//! snapshot_count = 11
//!
//! [initial]
//! kind = "indicator"
//! radius = 1.0
//! level = "max"
//! ```
//!
//! Optional sections: `[model.nutrients]`, `[thresholds]`, `[front]`,
//! `[wave]`, `[msweep]`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{GrowthLaw, NutrientLaw, PressureLaw, Reaction};
use crate::mesh::{Geometry, Mesh, MIN_CELLS};
use crate::solver::{make_initial_data, InitialData, Scheme, SimConfig, Thresholds};

pub const DEFAULT_CFL: f64 = 0.4;
pub const DEFAULT_FRONT_DT: f64 = 0.01;
pub const DEFAULT_WAVE_STEPS: usize = 20_000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    mesh: Option<RawMesh>,
    time: Option<RawTime>,
    initial: Option<InitialData>,
    thresholds: Option<RawThresholds>,
    front: Option<RawFront>,
    wave: Option<RawWave>,
    msweep: Option<RawMsweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    m: Option<f64>,
    law: LawKind,
    a: Option<f64>,
    #[serde(rename = "p_M")]
    p_m: Option<f64>,
    knots: Option<Vec<(f64, f64)>>,
    nutrients: Option<RawNutrients>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LawKind {
    Linear,
    Tabulated,
    None,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNutrients {
    #[serde(rename = "c_B")]
    c_b: f64,
    c1: f64,
    c2: f64,
    c0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum GeometryKind {
    Cartesian,
    Radial,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    geometry: GeometryKind,
    #[serde(rename = "N")]
    dim: Option<u32>,
    #[serde(rename = "L")]
    extent: f64,
    n_cells: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    #[serde(rename = "T")]
    final_time: f64,
    cfl_theta: Option<f64>,
    scheme: Option<Scheme>,
    snapshots: Option<Vec<f64>>,
    snapshot_count: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    pressure: Option<f64>,
    density: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFront {
    #[serde(rename = "R0")]
    r0: f64,
    #[serde(rename = "R2")]
    r2: Option<f64>,
    q0: Option<f64>,
    #[serde(rename = "N")]
    dim: Option<u32>,
    #[serde(rename = "T")]
    final_time: Option<f64>,
    dt: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWave {
    s_min: f64,
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMsweep {
    m_list: Vec<f64>,
    reference_dt: Option<f64>,
}

/// Sharp-interface trajectory parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontSpec {
    pub r0: f64,
    pub r2: Option<f64>,
    pub q0: f64,
    pub dim: u32,
    pub final_time: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSpec {
    pub s_min: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsweepSpec {
    pub m_list: Vec<f64>,
    /// Step of the spheroid trajectory used as geometric reference.
    pub reference_dt: f64,
}

/// A parsed and validated configuration file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub m: Option<f64>,
    pub reaction: Reaction,
    /// Present when `[mesh]`, `[time]` and `[initial]` are all given.
    pub sim: Option<SimConfig>,
    pub front: Option<FrontSpec>,
    pub wave: Option<WaveSpec>,
    pub msweep: Option<MsweepSpec>,
}

impl ExperimentConfig {
    pub fn growth_law(&self) -> Result<&GrowthLaw> {
        self.reaction.growth_law().ok_or_else(|| {
            Error::InvalidConfig("this command needs a growth law (model.law)".into())
        })
    }

    pub fn require_sim(&self) -> Result<&SimConfig> {
        self.sim.as_ref().ok_or_else(|| {
            Error::InvalidConfig("this command needs [mesh], [time] and [initial] sections".into())
        })
    }
}

/// Maps errors to a dotted key path and the line it appears on.
struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    fn error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            key: key.to_string(),
            line: self.line_of(key),
            message: message.into(),
        }
    }

    fn wrap(&self, key: &str) -> impl Fn(Error) -> Error + '_ {
        let key = key.to_string();
        move |e| self.error(&key, e.to_string())
    }

    /// Line of `key = ...` inside its section, or of the section header.
    fn line_of(&self, path: &str) -> Option<usize> {
        let (section, key) = match path.rsplit_once('.') {
            Some((s, k)) => (s, k),
            None => (path, ""),
        };
        let mut current = String::new();
        let mut header_line = None;
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(h) = line.strip_prefix('[') {
                current = h.trim_end_matches(']').trim().to_string();
                if current == path {
                    return Some(i + 1);
                }
                if current == section {
                    header_line = Some(i + 1);
                }
                continue;
            }
            if current == section && !key.is_empty() {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim().trim_matches('"') == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        header_line
    }

    /// Dotted key of the entry covering `span`, from the text itself.
    fn key_at(&self, span: &Range<usize>) -> (String, usize) {
        let start = span.start.min(self.text.len());
        let line_no = self.text[..start].matches('\n').count() + 1;
        let mut section = String::new();
        let mut key = String::new();
        for (i, raw) in self.text.lines().enumerate() {
            if i + 1 > line_no {
                break;
            }
            let line = raw.trim();
            if let Some(h) = line.strip_prefix('[') {
                section = h.trim_end_matches(']').trim().to_string();
                key.clear();
            } else if i + 1 == line_no {
                if let Some((k, _)) = line.split_once('=') {
                    key = k.trim().trim_matches('"').to_string();
                }
            }
        }
        let path = match (section.is_empty(), key.is_empty()) {
            (true, _) => key,
            (false, true) => section,
            (false, false) => format!("{section}.{key}"),
        };
        (path, line_no)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let loc = Locator { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (key, line) = match e.span() {
            Some(span) => {
                let (k, l) = loc.key_at(&span);
                (k, Some(l))
            }
            None => (String::new(), None),
        };
        Error::Parse {
            key: if key.is_empty() { "<root>".into() } else { key },
            line,
            message: e.message().trim().to_string(),
        }
    })?;
    build(raw, &loc)
}

pub fn read_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn positive(loc: &Locator, key: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(loc.error(key, format!("must be positive, got {value}")))
    }
}

fn build(raw: RawConfig, loc: &Locator) -> Result<ExperimentConfig> {
    let model = raw.model;
    if let Some(m) = model.m {
        PressureLaw::new(m).map_err(loc.wrap("model.m"))?;
    }
    let base = match model.law {
        LawKind::None => None,
        LawKind::Linear => {
            let a = model
                .a
                .ok_or_else(|| loc.error("model.a", "linear law needs a"))?;
            let pm = model
                .p_m
                .ok_or_else(|| loc.error("model.p_M", "linear law needs p_M"))?;
            let key = if a > 0.0 { "model.p_M" } else { "model.a" };
            Some(GrowthLaw::linear(a, pm).map_err(loc.wrap(key))?)
        }
        LawKind::Tabulated => {
            let knots = model
                .knots
                .as_ref()
                .ok_or_else(|| loc.error("model.knots", "tabulated law needs knots"))?;
            Some(GrowthLaw::tabulated(knots).map_err(loc.wrap("model.knots"))?)
        }
    };
    let mut initial_nutrient = None;
    let reaction = match (base, model.nutrients) {
        (None, None) => Reaction::None,
        (None, Some(_)) => {
            return Err(loc.error("model.nutrients", "nutrients need a growth law"));
        }
        (Some(law), None) => Reaction::Pressure { law },
        (Some(law), Some(n)) => {
            initial_nutrient = n.c0;
            let law =
                NutrientLaw::new(law, n.c_b, n.c1, n.c2).map_err(loc.wrap("model.nutrients"))?;
            Reaction::Nutrient { law }
        }
    };
    let homeostatic = reaction.homeostatic_pressure();

    let mesh = match raw.mesh {
        Some(rm) => {
            if rm.n_cells < MIN_CELLS as i64 {
                return Err(loc.error(
                    "mesh.n_cells",
                    format!("n_cells = {}, need at least {MIN_CELLS}", rm.n_cells),
                ));
            }
            positive(loc, "mesh.L", rm.extent)?;
            let geometry = match (rm.geometry, rm.dim) {
                (GeometryKind::Cartesian, None | Some(1)) => Geometry::Cartesian1d,
                (GeometryKind::Cartesian, Some(_)) => {
                    return Err(loc.error("mesh.N", "cartesian meshes are one-dimensional"));
                }
                (GeometryKind::Radial, Some(dim)) if dim >= 1 => Geometry::Radial { dim },
                (GeometryKind::Radial, _) => {
                    return Err(loc.error("mesh.N", "radial meshes need a dimension N >= 1"));
                }
            };
            Some(Mesh::new(geometry, rm.extent, rm.n_cells as usize).map_err(loc.wrap("mesh"))?)
        }
        None => None,
    };

    let thresholds = {
        let mut t = Thresholds::defaults(homeostatic);
        if let Some(rt) = &raw.thresholds {
            if let Some(p) = rt.pressure {
                t.pressure = positive(loc, "thresholds.pressure", p)?;
            }
            if let Some(d) = rt.density {
                t.density = positive(loc, "thresholds.density", d)?;
            }
        }
        t
    };

    let time_final = raw.time.as_ref().map(|t| t.final_time);
    let sim = match (mesh, raw.time, raw.initial) {
        (Some(mesh), Some(time), Some(initial)) => {
            let m = model
                .m
                .ok_or_else(|| loc.error("model.m", "simulations need the exponent m"))?;
            let final_time = positive(loc, "time.T", time.final_time)?;
            let cfl_theta = time.cfl_theta.unwrap_or(DEFAULT_CFL);
            if !(cfl_theta > 0.0 && cfl_theta < 1.0) {
                return Err(loc.error(
                    "time.cfl_theta",
                    format!("must lie in (0, 1), got {cfl_theta}"),
                ));
            }
            let snapshot_times = match (time.snapshots, time.snapshot_count) {
                (Some(_), Some(_)) => {
                    return Err(
                        loc.error("time.snapshots", "give either snapshots or snapshot_count")
                    );
                }
                (Some(list), None) => list,
                (None, count) => {
                    let count = count.unwrap_or(11);
                    if count < 2 {
                        return Err(loc.error("time.snapshot_count", "need at least 2 snapshots"));
                    }
                    uniform_times(final_time, count)
                }
            };
            let cfg = SimConfig {
                m,
                reaction: reaction.clone(),
                mesh,
                final_time,
                cfl_theta,
                scheme: time.scheme.unwrap_or(Scheme::Explicit),
                snapshot_times,
                initial,
                initial_nutrient,
                thresholds,
            };
            cfg.validate().map_err(loc.wrap("time"))?;
            make_initial_data(&cfg.initial, &cfg.mesh, &cfg.pressure_law()?, homeostatic)
                .map_err(loc.wrap(initial_key(&cfg.initial)))?;
            Some(cfg)
        }
        (None, None, None) => None,
        (mesh, time, initial) => {
            let missing = [
                ("mesh", mesh.is_none()),
                ("time", time.is_none()),
                ("initial", initial.is_none()),
            ]
            .iter()
            .filter(|(_, gone)| *gone)
            .map(|(k, _)| *k)
            .collect::<Vec<_>>()
            .join(", ");
            return Err(loc.error(
                "<root>",
                format!("[mesh], [time] and [initial] go together; missing {missing}"),
            ));
        }
    };

    let front = match raw.front {
        Some(rf) => {
            let r0 = positive(loc, "front.R0", rf.r0)?;
            let q0 = rf.q0.unwrap_or(0.0);
            if !(0.0..1.0).contains(&q0) {
                return Err(loc.error("front.q0", format!("must lie in [0, 1), got {q0}")));
            }
            if let Some(r2) = rf.r2 {
                if !(r2 >= r0) {
                    return Err(
                        loc.error("front.R2", format!("must be at least R0 = {r0}, got {r2}"))
                    );
                }
            }
            let final_time = rf
                .final_time
                .or(time_final)
                .ok_or_else(|| loc.error("front.T", "front trajectories need a final time"))?;
            let dim = rf
                .dim
                .or(sim.as_ref().map(|s| s.mesh.dimension()))
                .unwrap_or(1);
            if dim == 0 {
                return Err(loc.error("front.N", "dimension must be at least 1"));
            }
            Some(FrontSpec {
                r0,
                r2: rf.r2,
                q0,
                dim,
                final_time: positive(loc, "front.T", final_time)?,
                dt: positive(loc, "front.dt", rf.dt.unwrap_or(DEFAULT_FRONT_DT))?,
            })
        }
        None => None,
    };

    let wave = match raw.wave {
        Some(rw) => {
            if !(rw.s_min < 0.0 && rw.s_min.is_finite()) {
                return Err(loc.error("wave.s_min", format!("must be negative, got {}", rw.s_min)));
            }
            let n = rw.n.unwrap_or(DEFAULT_WAVE_STEPS);
            if n == 0 {
                return Err(loc.error("wave.n", "need at least one step"));
            }
            Some(WaveSpec { s_min: rw.s_min, n })
        }
        None => None,
    };

    let msweep = match raw.msweep {
        Some(rm) => {
            if rm.m_list.is_empty() {
                return Err(loc.error("msweep.m_list", "empty exponent list"));
            }
            for &m in &rm.m_list {
                PressureLaw::new(m).map_err(loc.wrap("msweep.m_list"))?;
            }
            let mut sorted = rm.m_list.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(loc.error("msweep.m_list", "exponents must be distinct"));
            }
            let reference_dt = positive(
                loc,
                "msweep.reference_dt",
                rm.reference_dt.unwrap_or(DEFAULT_FRONT_DT),
            )?;
            Some(MsweepSpec {
                m_list: sorted,
                reference_dt,
            })
        }
        None => None,
    };

    Ok(ExperimentConfig {
        m: model.m,
        reaction,
        sim,
        front,
        wave,
        msweep,
    })
}

fn initial_key(initial: &InitialData) -> &'static str {
    match initial {
        InitialData::Indicator { .. } | InitialData::BallConstant { .. } => "initial.level",
        InitialData::TwoRing { .. } => "initial.mushy",
        InitialData::Table { .. } => "initial.points",
        InitialData::Barenblatt { .. } => "initial.scale",
    }
}

/// `count` equally spaced times on `[0, T]`.
pub fn uniform_times(final_time: f64, count: usize) -> Vec<f64> {
    let last = count - 1;
    (0..count)
        .map(|k| {
            if k == last {
                final_time
            } else {
                final_time * k as f64 / last as f64
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
m = 40
law = "linear"
a = 5.0
p_M = 1.0

[mesh]
geometry = "cartesian"
L = 4.0
n_cells = 400

[time]
T = 1.0

[initial]
kind = "indicator"
radius = 1.0
level = "max"
"#;

    fn parse_err(text: &str) -> (String, Option<usize>, String) {
        match parse_config(text).unwrap_err() {
            Error::Parse { key, line, message } => (key, line, message),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn minimal_config_is_accepted() {
        let cfg = parse_config(MINIMAL).unwrap();
        let sim = cfg.sim.unwrap();
        assert_eq!(sim.m, 40.0);
        assert_eq!(sim.mesh.n_cells(), 400);
        assert_eq!(sim.snapshot_times.len(), 11);
        assert_eq!(sim.cfl_theta, DEFAULT_CFL);
    }

    #[test]
    fn exponent_one_is_rejected_with_line() {
        let (key, line, message) = parse_err(&MINIMAL.replace("m = 40", "m = 1"));
        assert_eq!(key, "model.m");
        assert_eq!(line, Some(3));
        assert!(message.contains("m must exceed 1"), "{message}");
    }

    #[test]
    fn saturated_level_is_rejected() {
        let (key, line, message) = parse_err(&MINIMAL.replace("level = \"max\"", "level = 1.0"));
        assert_eq!(key, "initial.level");
        assert_eq!(line, Some(19));
        assert!(message.contains("P_m(ρ⁰) ≤ p_M"), "{message}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let (key, line, message) =
            parse_err(&MINIMAL.replace("n_cells = 400", "n_cells = 400\ncells = 3"));
        assert_eq!(key, "mesh.cells");
        assert!(line.is_some());
        assert!(message.contains("cells"), "{message}");
    }

    #[test]
    fn bad_value_reports_key() {
        let (key, line, _) = parse_err(&MINIMAL.replace("L = 4.0", "L = \"wide\""));
        assert_eq!(key, "mesh.L");
        assert_eq!(line, Some(10));
        let (key, _, _) = parse_err(&MINIMAL.replace("n_cells = 400", "n_cells = 4"));
        assert_eq!(key, "mesh.n_cells");
    }

    #[test]
    fn partial_simulation_sections_are_rejected() {
        let text = MINIMAL.split("[initial]").next().unwrap();
        let (_, _, message) = parse_err(text);
        assert!(message.contains("initial"));
    }

    #[test]
    fn front_only_config() {
        let text = "[model]\nlaw = \"linear\"\na = 5.0\np_M = 1.0\n[front]\nR0 = 1.0\nT = 2.0\n";
        let cfg = parse_config(text).unwrap();
        assert!(cfg.sim.is_none());
        let front = cfg.front.unwrap();
        assert_eq!((front.dim, front.q0, front.dt), (1, 0.0, DEFAULT_FRONT_DT));
    }

    #[test]
    fn uniform_times_hit_the_end() {
        let t = uniform_times(0.3, 4);
        assert_eq!(t.len(), 4);
        assert_eq!(t[3], 0.3);
        assert!((t[1] - 0.1).abs() < 1e-15);
    }
}
