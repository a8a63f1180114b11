//! Exact affine normalization and classification of graphed holomorphic
//! surfaces u = F(x,y) in C^3, with differential invariants, homogeneity
//! tests, and the symmetry algebras of the homogeneous models.

pub mod apf;
pub mod cli;
pub mod coeff;
pub mod error;
pub mod expr;
pub mod homogeneity;
pub mod jets;
pub mod normalform;
pub mod recurrence;
pub mod poly;
pub mod regraph;
pub mod relinv;
pub mod series;
pub mod symmetry;
pub mod verify;
pub mod scalar;

pub use cli::run_cli;
