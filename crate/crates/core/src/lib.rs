//! Self-similar potential flow toolkit: polytropic gas relations, the
//! chi-equation residual calculus, exact solution families, a Newton solver
//! for Dirichlet problems, and numerical verification of the interior
//! ellipticity principle.

pub mod band;
pub mod error;
pub mod exact;
pub mod field;
pub mod gas;
pub mod grid;
pub mod io;
pub mod ode;
pub mod ellipticity;
pub mod solver;

pub use error::{Error, Result};
