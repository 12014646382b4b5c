//! Residual a posteriori indicators for the mixed Hodge Laplacian.

mod errors;
mod indicators;
mod local;
mod osc;
mod problem;
mod proxy;
mod report;

pub use errors::{
    compose_parents, effectivity, element_errors, local_efficiency, ElementErrors, ErrorSource,
    ReferenceSolution, EFFECTIVITY_FLOOR,
};
pub use indicators::{eta_h, eta_minus1, eta_zero, gap_bound, GapBound};
pub use local::ANALYTIC_DEGREE;
pub use osc::{l2_projection, oscillations, Oscillations, DEFAULT_OSC_DEGREE};
pub use problem::{ExactSolution, ProblemData, SharedForm};
pub use proxy::{vector_proxy_indicators, ProxyIndicators};
pub use report::{
    harmonic_term, total_estimate, ElementIndicators, EstimatorOptions, EstimatorReport,
    HarmonicTerm, Mode, CSV_HEADER,
};
