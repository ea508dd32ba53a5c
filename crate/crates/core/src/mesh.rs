//! Uniform cell-centered grids on `[-L, L]` (Cartesian) or `[0, L]`
//! (radially symmetric in `N` dimensions), scalar fields on them, and the
//! discrete operators used by the solver and the diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Cartesian1d,
    Radial { dim: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    geometry: Geometry,
    n_cells: usize,
    extent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    ZeroFlux,
    /// Value imposed one cell beyond each outer boundary.
    Dirichlet(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    TotalVariation,
}

/// Surface area of the unit sphere in `R^N` (2 for `N = 1`).
pub fn sphere_area(dim: u32) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        n => 2.0 * std::f64::consts::PI * sphere_area(n - 2) / (n - 2) as f64,
    }
}

impl Mesh {
    pub fn cartesian(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::new(Geometry::Cartesian1d, half_width, n_cells)
    }

    pub fn radial(dim: u32, radius: f64, n_cells: usize) -> Result<Self> {
        Self::new(Geometry::Radial { dim }, radius, n_cells)
    }

    pub fn new(geometry: Geometry, extent: f64, n_cells: usize) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidMesh(format!(
                "n_cells = {n_cells}, need at least {MIN_CELLS}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "extent L = {extent} must be positive"
            )));
        }
        if let Geometry::Radial { dim } = geometry {
            if dim == 0 {
                return Err(Error::InvalidMesh(
                    "radial dimension must be at least 1".into(),
                ));
            }
        }
        Ok(Self {
            geometry,
            n_cells,
            extent,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Spatial dimension `N` of the underlying problem.
    pub fn dimension(&self) -> u32 {
        match self.geometry {
            Geometry::Cartesian1d => 1,
            Geometry::Radial { dim } => dim,
        }
    }

    pub fn spacing(&self) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => 2.0 * self.extent / self.n_cells as f64,
            Geometry::Radial { .. } => self.extent / self.n_cells as f64,
        }
    }

    fn origin(&self) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => -self.extent,
            Geometry::Radial { .. } => 0.0,
        }
    }

    /// Cell-center coordinate (`x` or `r`).
    pub fn center(&self, i: usize) -> f64 {
        self.origin() + (i as f64 + 0.5) * self.spacing()
    }

    /// Coordinate of face `k`, `k = 0..=n_cells`.
    pub fn face(&self, k: usize) -> f64 {
        self.origin() + k as f64 * self.spacing()
    }

    /// Distance of the cell center to the origin.
    pub fn radius(&self, i: usize) -> f64 {
        self.center(i).abs()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Face measure `r^(N-1)` (1 in Cartesian geometry), without the
    /// sphere-area constant.
    fn face_weight(&self, k: usize) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => 1.0,
            Geometry::Radial { dim } => {
                if k == 0 {
                    0.0
                } else {
                    self.face(k).powi(dim as i32 - 1)
                }
            }
        }
    }

    /// Cell measure matching `face_weight` (`h` or `(r₊^N - r₋^N)/N`).
    fn cell_weight(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => self.spacing(),
            Geometry::Radial { dim } => {
                let n = dim as i32;
                (self.face(i + 1).powi(n) - self.face(i).powi(n)) / dim as f64
            }
        }
    }

    fn measure_constant(&self) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => 1.0,
            Geometry::Radial { dim } => sphere_area(dim),
        }
    }

    /// Physical cell volume in `R^N`.
    pub fn cell_volume(&self, i: usize) -> f64 {
        self.measure_constant() * self.cell_weight(i)
    }

    pub fn cell_volumes(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.cell_volume(i)).collect()
    }

    /// `|{x : |x| < r}|` in the mesh's geometry.
    fn ball_measure(&self, r: f64) -> f64 {
        match self.geometry {
            Geometry::Cartesian1d => r,
            Geometry::Radial { dim } => r.powi(dim as i32) / dim as f64,
        }
    }

    pub fn stencil(&self) -> Stencil {
        Stencil::new(self)
    }

    pub fn same_as(&self, other: &Mesh) -> bool {
        self == other
    }
}

/// Coefficients of the conservative Laplacian
/// `(L f)_i = lower_i (f_{i-1} - f_i) + upper_i (f_{i+1} - f_i)`.
///
/// Outer boundary faces are excluded (zero flux); `lower_bc` and
/// `upper_bc` hold the coefficients of those faces for Dirichlet data.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_bc: f64,
    pub upper_bc: f64,
}

impl Stencil {
    fn new(mesh: &Mesh) -> Self {
        let n = mesh.n_cells;
        let h = mesh.spacing();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let vol = mesh.cell_weight(i) * h;
            if i > 0 {
                lower[i] = mesh.face_weight(i) / vol;
            }
            if i + 1 < n {
                upper[i] = mesh.face_weight(i + 1) / vol;
            }
        }
        let lower_bc = match mesh.geometry {
            Geometry::Cartesian1d => mesh.face_weight(0) / (mesh.cell_weight(0) * h),
            Geometry::Radial { .. } => 0.0,
        };
        let upper_bc = mesh.face_weight(n) / (mesh.cell_weight(n - 1) * h);
        Self {
            lower,
            upper,
            lower_bc,
            upper_bc,
        }
    }

    /// Largest diagonal entry, `max_i (lower_i + upper_i)`.
    pub fn max_diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + u)
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, f: &[f64], bc: BoundaryCondition, out: &mut [f64]) {
        let n = f.len();
        for i in 0..n {
            let mut acc = 0.0;
            if i > 0 {
                acc += self.lower[i] * (f[i - 1] - f[i]);
            }
            if i + 1 < n {
                acc += self.upper[i] * (f[i + 1] - f[i]);
            }
            out[i] = acc;
        }
        if let BoundaryCondition::Dirichlet(v) = bc {
            out[0] += self.lower_bc * (v - f[0]);
            out[n - 1] += self.upper_bc * (v - f[n - 1]);
        }
    }
}

/// One scalar per cell of a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    mesh: Mesh,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells {
            return Err(Error::MeshMismatch(format!(
                "field has {} values for a mesh of {} cells",
                values.len(),
                mesh.n_cells
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite value at cell {i}")));
        }
        Ok(Self { mesh, values })
    }

    /// Constructor for solver internals that have already checked finiteness.
    pub(crate) fn from_parts(mesh: Mesh, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.n_cells);
        Self { mesh, values }
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            values: vec![0.0; mesh.n_cells],
        }
    }

    pub fn constant(mesh: Mesh, value: f64) -> Self {
        Self {
            mesh,
            values: vec![value; mesh.n_cells],
        }
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(mesh, (0..mesh.n_cells).map(|i| f(mesh.center(i))).collect())
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_parts(self.mesh, self.values.iter().map(|&v| f(v)).collect())
    }

    fn check_same_mesh(&self, other: &Field) -> Result<()> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch(format!(
                "{:?} vs {:?}",
                self.mesh, other.mesh
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_mesh(other)?;
        Ok(Field::from_parts(
            self.mesh,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }
}

/// Discrete Laplacian in conservative form, `(1/r^(N-1)) (r^(N-1) f')'` for
/// radial meshes. The symmetry face at `r = 0` carries no flux.
pub fn laplacian(f: &Field, bc: BoundaryCondition) -> Field {
    let mut out = vec![0.0; f.len()];
    f.mesh.stencil().apply(&f.values, bc, &mut out);
    Field::from_parts(f.mesh, out)
}

/// `|∇f|²` at cell centers: the face-measure weighted mean of the squared
/// face differences on either side of the cell. Boundary cells use their
/// single interior face.
pub fn gradient_sq(f: &Field) -> Field {
    let mesh = &f.mesh;
    let n = f.len();
    let h = mesh.spacing();
    let face_sq: Vec<f64> = (0..n - 1)
        .map(|i| {
            let d = (f.values[i + 1] - f.values[i]) / h;
            d * d
        })
        .collect();
    let out = (0..n)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            if i > 0 {
                let w = mesh.face_weight(i);
                num += w * face_sq[i - 1];
                den += w;
            }
            if i + 1 < n {
                let w = mesh.face_weight(i + 1);
                num += w * face_sq[i];
                den += w;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();
    Field::from_parts(f.mesh, out)
}

pub fn norm(f: &Field, kind: NormKind) -> Result<f64> {
    let mesh = &f.mesh;
    Ok(match kind {
        NormKind::L1 => f
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs() * mesh.cell_volume(i))
            .sum(),
        NormKind::L2 => f
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * v * mesh.cell_volume(i))
            .sum::<f64>()
            .sqrt(),
        NormKind::Linf => f.values.iter().fold(0.0, |a: f64, v| a.max(v.abs())),
        NormKind::TotalVariation => {
            if mesh.geometry != Geometry::Cartesian1d {
                return Err(Error::Unsupported(
                    "total variation is only defined on Cartesian meshes".into(),
                ));
            }
            f.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
        }
    })
}

/// Signed integral `Σ f_i vol_i`.
pub fn integral(f: &Field) -> f64 {
    f.values
        .iter()
        .enumerate()
        .map(|(i, v)| v * f.mesh.cell_volume(i))
        .sum()
}

/// Outermost coordinate where `f` crosses `threshold`, linearly
/// interpolated between the last cell at or above it and the next cell.
pub fn support_radius(f: &Field, threshold: f64) -> Option<f64> {
    let last = f.values.iter().rposition(|&v| v >= threshold)?;
    let mesh = &f.mesh;
    if last + 1 == f.len() {
        return Some(mesh.center(last));
    }
    let (a, b) = (f.values[last], f.values[last + 1]);
    let frac = if a > b {
        (a - threshold) / (a - b)
    } else {
        0.0
    };
    Some(mesh.center(last) + frac.clamp(0.0, 1.0) * mesh.spacing())
}

pub fn l1_distance(f: &Field, g: &Field) -> Result<f64> {
    norm(&f.sub(g)?, NormKind::L1)
}

/// Conservative piecewise-constant projection onto `target`.
pub fn resample(f: &Field, target: &Mesh) -> Result<Field> {
    let src = &f.mesh;
    if src.geometry != target.geometry || src.extent != target.extent {
        return Err(Error::MeshMismatch(format!(
            "cannot resample {:?} onto {:?}",
            src, target
        )));
    }
    if src == target {
        return Ok(f.clone());
    }
    // Work in the cumulative measure coordinate, where cells are intervals.
    let measure = |mesh: &Mesh, k: usize| -> f64 {
        match mesh.geometry {
            Geometry::Cartesian1d => mesh.face(k),
            Geometry::Radial { .. } => mesh.ball_measure(mesh.face(k)),
        }
    };
    let mut out = vec![0.0; target.n_cells];
    let mut i = 0;
    for (j, slot) in out.iter_mut().enumerate() {
        let (lo, hi) = (measure(target, j), measure(target, j + 1));
        while i < src.n_cells && measure(src, i + 1) <= lo {
            i += 1;
        }
        let mut acc = 0.0;
        let mut k = i;
        while k < src.n_cells && measure(src, k) < hi {
            let overlap = measure(src, k + 1).min(hi) - measure(src, k).max(lo);
            if overlap > 0.0 {
                acc += f.values[k] * overlap;
            }
            k += 1;
        }
        *slot = acc / (hi - lo);
    }
    Ok(Field::from_parts(*target, out))
}
