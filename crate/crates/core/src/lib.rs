//! Numerical laboratory for the porous-medium tumor growth model
//! `∂ρ/∂t = Δρ^m + ρ Φ(p)` and its incompressible (Hele-Shaw) limit.
//!
//! * [`laws`]: pressure law, growth and nutrient rates.
//! * [`mesh`]: grids, fields and discrete operators.
//! * [`solver`]: finite-volume time integration at finite `m`.
//! * [`sharp_interface`]: the `m = ∞` limit objects (radial elliptic
//!   pressure, spheroid and two-phase front dynamics, traveling wave).
//! * [`diagnostics`]: a-priori estimates and limit identities evaluated on
//!   snapshots, and the convergence study in `m`.
//! * [`io`]: configuration, CSV output and experiment orchestration.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod laws;
pub mod mesh;
pub mod sharp_interface;
pub mod solver;

pub use error::{Error, Result};
