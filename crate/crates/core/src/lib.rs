//! Landscape functions for finite-dimensional operators.
//!
//! The crate builds discretized and graph operators, computes torsion,
//! resolvent, parabolic and related landscape functions, certifies pointwise
//! eigenvector bounds against computed eigenpairs, and evaluates eigenvalue
//! lower bounds and heat-kernel upper bounds. A discrete `p`-Laplacian module
//! covers the nonlinear case.
//!
//! Parallel loops go through [`par`], which falls back to plain iterators when
//! the `parallel` feature is disabled.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod heat;
pub mod landscape;
pub mod lattice;
pub mod numerics;
pub mod operator;
pub mod par;
pub mod plap;
pub mod verify;

/// Crate version, recorded in output provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use landscape::{LandscapeFunction, LandscapeKind, LandscapeParams};
pub use lattice::WeightVector;
pub use numerics::EigenDecomposition;
pub use operator::{BiharmonicBc, Graph, Grid1D, MagneticSignature, MatrixOperator, PotentialVector};
pub use verify::{BoundReport, Eigenpair};
