//! Element-local polynomial differential forms on affine simplices.
//!
//! Forms are stored in Cartesian monomial coefficients of total degree at
//! most two, with exact floating-point expansions as scalars. The exterior
//! derivative, Hodge star and wedge product are therefore exact; only
//! evaluation and quadrature round.

pub mod alt;
mod exact;
mod face;
mod form;
mod poly;
pub mod quadrature;
mod whitney;

pub use exact::{exact_sum, Xf};
pub use face::{trace_to_face, FaceForm, FaceFrame};
pub use form::PolyForm;
pub use poly::{Poly, EXPONENTS, MAX_DEGREE};
pub use quadrature::{simplex_rule, QuadRule};
pub use whitney::{
    form_integral, integrate_over_simplex, whitney_basis, whitney_form, Barycentric,
};
