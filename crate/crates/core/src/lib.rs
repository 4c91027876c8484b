//! Curvature operators, curvature forms and focal points of dynamical
//! Lagrangian distributions, and of their reductions by involutive first
//! integrals.
//!
//! The crate is organised bottom-up:
//!
//! * [`symplectic`] — Darboux space, Lagrangian frames, isotropic quotients,
//!   adapted bases;
//! * [`jacobi`] — coordinate jets of Grassmannian curves, the matrix
//!   Schwarzian, derivative curves and the curve-level reduction formulas;
//! * [`flow`] — Hamiltonian models, flows, linearised flows, Jacobi curves;
//! * [`reduction`] — first integrals, reduced distributions, the dynamical
//!   curvature increment and Ricci traces;
//! * [`focal`] — focal-time detection and the reduction count/alternation;
//! * [`models`] — built-in mechanical systems with closed-form oracles.

pub mod error;
pub mod flow;
pub mod focal;
pub mod jacobi;
pub mod linalg;
pub mod models;
pub mod numdiff;
pub mod parallel;
pub mod reduction;
pub mod suites;
pub mod symplectic;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
