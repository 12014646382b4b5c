//! Harmonic forms, the discrete Hodge decomposition, subspace gaps and the
//! mixed Hodge Laplacian.

mod decompose;
mod gap;
mod harmonic;
pub(crate) mod linsolve;
mod mixed;
pub(crate) mod sparse;

pub use decompose::{hodge_decompose, HodgeParts};
pub use gap::{subspace_gap, SubspaceGap};
pub use harmonic::{
    harmonic_basis, harmonic_basis_with, HarmonicBasis, HarmonicRoute, DEFAULT_SEED, RANK_TOL,
};
pub use mixed::{
    load_vector, solve_hodge_laplacian, solve_with_load, FormFn, MixedSolution, SOLVE_TOL,
};
