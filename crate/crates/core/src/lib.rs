//! Lowest-order finite element exterior calculus on simplicial meshes in two
//! and three dimensions.
//!
//! The crate assembles the Whitney de Rham complex, solves the mixed Hodge
//! Laplacian for every form degree with natural or essential boundary
//! conditions, and evaluates residual-type a posteriori error indicators
//! (including the harmonic-form gap terms that appear on domains with
//! nontrivial topology).
//!
//! Module map:
//!
//! * [`mesh`]: simplicial complexes, domain generators, refinement, mesh I/O
//! * [`polyform`]: element-local polynomial differential forms
//! * [`derham`]: global cochain spaces, exterior derivative and mass matrices
//! * [`hodge`]: harmonic forms, Hodge decomposition, subspace gaps, mixed solver
//! * [`estimator`]: element indicators, gap bound, reliability totals
//! * [`harness`]: problem registry, convergence and adaptive drivers, CLI

#![allow(clippy::needless_range_loop)]

pub mod derham;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod hodge;
pub mod mesh;
pub mod numfmt;
pub mod polyform;

pub use error::{FeecError, Result};
