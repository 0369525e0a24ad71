//! Bounded 2D Stokes flow by rational approximation of the Goursat functions.
//!
//! The flow is written as `ψ = Im[z̄ f(z) + g(z)]` and `f`, `g` are expanded in
//! a polynomial part, groups of simple poles (clustered at corners or placed by
//! AAA near curved walls) and per-hole Laurent series with logarithmic terms.
//! Two boundary conditions per boundary sample give a dense real least-squares
//! problem for the coefficients.
//!
//! Pipeline: [`geometry`] builds domains and samples, [`aaa`] finds poles near
//! curved boundaries, [`rational_basis`] orthogonalizes the columns,
//! [`stokes_system`] assembles and solves, [`solution`] evaluates fields and
//! diagnostics. [`cases`] holds the benchmark problems and [`solver`] glues the
//! steps together.

pub mod aaa;
pub mod cases;
pub mod cli;
pub mod config;
pub mod contour;
pub mod geometry;
pub mod linalg;
pub mod rational_basis;
pub mod solution;
pub mod solver;
pub mod stokes_system;
pub mod validation;

pub use num_complex::Complex64 as C64;

pub use aaa::{aaa_fit, BarycentricRational, PoleReport};
pub use geometry::{Corner, Curve, Domain, Hole, Segment};
pub use solution::{FieldSample, StokesSolution};
pub use solver::{solve_problem, Problem, SolveReport};
pub use stokes_system::{BoundaryConditionSpec, Functional, GoursatCoefficients, Target};

/// Crate-level error.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Aaa(#[from] aaa::AaaError),
    #[error(transparent)]
    Basis(#[from] rational_basis::BasisError),
    #[error(transparent)]
    System(#[from] stokes_system::SystemError),
    #[error(transparent)]
    Eval(#[from] solution::EvalError),
    #[error(transparent)]
    Case(#[from] cases::CaseError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
