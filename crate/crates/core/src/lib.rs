//! Generalized geometry over a point: quadratic Lie algebras, generalized
//! metrics, generalized Ricci curvature and flow, spinors with Dirac
//! generating operators, and algebraic supergravity equations on
//! symmetric-space building blocks.

pub mod curvature;
pub mod dirac;
pub mod error;
pub mod genmetric;
pub mod liealg;
pub mod linalg;
pub mod report;
pub mod spinor;
pub mod sugra;

pub use error::{Error, Result};
pub use report::ResidualReport;
