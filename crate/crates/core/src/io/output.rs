//! CSV serialization with 17 significant digits, so every value read back
//! is bit-identical to the one written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{DiagnosticsRecord, MsweepReport, MsweepRow};
use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::sharp_interface::{FrontSample, FrontTrajectory};
use crate::solver::{SimState, SnapshotSeries};

pub const SNAPSHOTS: &str = "snapshots.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const SERIES: &str = "series.csv";
pub const PROFILE: &str = "profile.csv";
pub const RUN_JSON: &str = "run.json";
pub const MSWEEP_REPORT: &str = "msweep_report.csv";

/// Shortest form that still round-trips: 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    let err = csv_err(path);
    w.write_record(header).map_err(&err)?;
    for row in rows {
        w.write_record(row).map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `t,x,rho,p[,c]`, t-major.
pub fn write_snapshots(series: &SnapshotSeries, dir: &Path) -> Result<()> {
    let nutrients = series.snapshots.iter().any(|s| s.c.is_some());
    let mut header = vec!["t", "x", "rho", "p"];
    if nutrients {
        header.push("c");
    }
    let rows = series.snapshots.iter().flat_map(|s| {
        let mesh = s.mesh();
        (0..mesh.n_cells()).map(move |i| {
            let mut row = vec![
                fmt(s.t),
                fmt(mesh.center(i)),
                fmt(s.rho.values()[i]),
                fmt(s.p.values()[i]),
            ];
            if let Some(c) = &s.c {
                row.push(fmt(c.values()[i]));
            }
            row
        })
    });
    write_rows(&dir.join(SNAPSHOTS), &header, rows)
}

pub const DIAGNOSTICS_HEADER: [&str; 13] = [
    "t",
    "mass",
    "sup_p",
    "complementarity_residual",
    "graph_residual",
    "semiconvexity_slack",
    "mass_bound_margin",
    "support_radius_rho",
    "support_radius_p",
    "barrier_radius",
    "front_speed_estimate",
    "pressure_jump",
    "nutrient_l1_margin",
];

pub fn write_diagnostics(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            fmt(r.t),
            fmt(r.mass),
            fmt(r.sup_p),
            fmt(r.complementarity_residual),
            fmt(r.graph_residual),
            fmt_opt(r.semiconvexity_slack),
            fmt(r.mass_bound_margin),
            fmt_opt(r.support_radius_rho),
            fmt_opt(r.support_radius_p),
            fmt(r.barrier_radius),
            fmt_opt(r.front_speed_estimate),
            u8::from(r.pressure_jump).to_string(),
            fmt_opt(r.nutrient_l1_margin),
        ]
    });
    write_rows(path, &DIAGNOSTICS_HEADER, rows)
}

/// `t,R[,q],speed`.
pub fn write_series(traj: &FrontTrajectory, with_q: bool, path: &Path) -> Result<()> {
    let header: &[&str] = if with_q {
        &["t", "R", "q", "speed"]
    } else {
        &["t", "R", "speed"]
    };
    let rows = traj.samples.iter().map(|s| {
        let mut row = vec![fmt(s.t), fmt(s.r)];
        if with_q {
            row.push(fmt(s.q));
        }
        row.push(fmt(s.speed));
        row
    });
    write_rows(path, header, rows)
}

/// `s,p`.
pub fn write_profile(profile: &[(f64, f64)], path: &Path) -> Result<()> {
    write_rows(
        path,
        &["s", "p"],
        profile.iter().map(|(s, p)| vec![fmt(*s), fmt(*p)]),
    )
}

pub const MSWEEP_HEADER: [&str; 6] = [
    "m",
    "l1_rho_vs_ref",
    "l1_p_vs_ref",
    "graph_residual",
    "compl_residual",
    "l1_rho_vs_next",
];

pub fn write_msweep_report(report: &MsweepReport, path: &Path) -> Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            fmt(r.m),
            fmt(r.l1_rho_vs_ref),
            fmt(r.l1_p_vs_ref),
            fmt(r.graph_residual),
            fmt(r.compl_residual),
            fmt_opt(r.l1_rho_vs_next),
        ]
    });
    write_rows(path, &MSWEEP_HEADER, rows)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))
}

/// Header and rows of a numeric CSV; empty cells become `None`.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(std::io::BufReader::new(file));
    let err = csv_err(path);
    let header = reader
        .headers()
        .map_err(&err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(&err)?;
        let row = record
            .iter()
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::Format {
                        path: path.to_path_buf(),
                        message: format!("row {}: '{cell}' is not a number", line + 2),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn require(table: &Table, path: &Path, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            table.column(n).ok_or_else(|| Error::Format {
                path: path.to_path_buf(),
                message: format!("missing column '{n}' (header: {})", table.header.join(",")),
            })
        })
        .collect()
}

fn cell(row: &[Option<f64>], k: usize, path: &Path) -> Result<f64> {
    row.get(k).copied().flatten().ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        message: "missing value".into(),
    })
}

/// Reads a snapshots file back onto `mesh`.
pub fn read_snapshots(path: &Path, mesh: &Mesh) -> Result<Vec<SimState>> {
    let table = read_table(path)?;
    let cols = require(&table, path, &["t", "x", "rho", "p"])?;
    let c_col = table.column("c");
    let n = mesh.n_cells();
    if table.rows.len() % n != 0 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "{} rows do not split into snapshots of {n} cells",
                table.rows.len()
            ),
        });
    }
    let mut out = Vec::new();
    for chunk in table.rows.chunks(n) {
        let t = cell(&chunk[0], cols[0], path)?;
        let mut rho = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for (i, row) in chunk.iter().enumerate() {
            if cell(row, cols[0], path)? != t
                || (cell(row, cols[1], path)? - mesh.center(i)).abs() > 1e-9 * mesh.extent()
            {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    message: format!("snapshot at t = {t} does not match the mesh"),
                });
            }
            rho.push(cell(row, cols[2], path)?);
            p.push(cell(row, cols[3], path)?);
            if let Some(k) = c_col {
                c.push(cell(row, k, path)?);
            }
        }
        out.push(SimState {
            t,
            rho: Field::new(*mesh, rho)?,
            p: Field::new(*mesh, p)?,
            c: if c_col.is_some() {
                Some(Field::new(*mesh, c)?)
            } else {
                None
            },
        });
    }
    Ok(out)
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let table = read_table(path)?;
    let cols = require(&table, path, &DIAGNOSTICS_HEADER)?;
    table
        .rows
        .iter()
        .map(|row| {
            let get = |k: usize| row.get(cols[k]).copied().flatten();
            let req = |k: usize| cell(row, cols[k], path);
            Ok(DiagnosticsRecord {
                t: req(0)?,
                mass: req(1)?,
                sup_p: req(2)?,
                complementarity_residual: req(3)?,
                graph_residual: req(4)?,
                semiconvexity_slack: get(5),
                mass_bound_margin: req(6)?,
                support_radius_rho: get(7),
                support_radius_p: get(8),
                barrier_radius: req(9)?,
                front_speed_estimate: get(10),
                pressure_jump: req(11)? != 0.0,
                nutrient_l1_margin: get(12),
            })
        })
        .collect()
}

pub fn read_series(path: &Path) -> Result<Vec<FrontSample>> {
    let table = read_table(path)?;
    let cols = require(&table, path, &["t", "R", "speed"])?;
    let q = table.column("q");
    table
        .rows
        .iter()
        .map(|row| {
            Ok(FrontSample {
                t: cell(row, cols[0], path)?,
                r: cell(row, cols[1], path)?,
                q: match q {
                    Some(k) => cell(row, k, path)?,
                    None => 0.0,
                },
                speed: cell(row, cols[2], path)?,
            })
        })
        .collect()
}

pub fn read_profile(path: &Path) -> Result<Vec<(f64, f64)>> {
    let table = read_table(path)?;
    let cols = require(&table, path, &["s", "p"])?;
    table
        .rows
        .iter()
        .map(|row| Ok((cell(row, cols[0], path)?, cell(row, cols[1], path)?)))
        .collect()
}

pub fn read_msweep_report(path: &Path) -> Result<Vec<MsweepRow>> {
    let table = read_table(path)?;
    let cols = require(&table, path, &MSWEEP_HEADER)?;
    table
        .rows
        .iter()
        .map(|row| {
            Ok(MsweepRow {
                m: cell(row, cols[0], path)?,
                l1_rho_vs_ref: cell(row, cols[1], path)?,
                l1_p_vs_ref: cell(row, cols[2], path)?,
                graph_residual: cell(row, cols[3], path)?,
                compl_residual: cell(row, cols[4], path)?,
                l1_rho_vs_next: row.get(cols[5]).copied().flatten(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
        ] {
            assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(PROFILE);
        let profile = vec![(0.0, 0.0), (-0.1, 0.2), (-0.2, 1.0 / 3.0)];
        write_profile(&profile, &path).unwrap();
        assert_eq!(read_profile(&path).unwrap(), profile);
    }

    #[test]
    fn missing_column_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "s,q\n1,2\n").unwrap();
        let err = read_profile(&path).unwrap_err().to_string();
        assert!(err.contains("missing column 'p'"), "{err}");
    }
}
