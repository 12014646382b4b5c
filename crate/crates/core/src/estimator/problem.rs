use std::fmt;
use std::sync::Arc;

use crate::derham::Bc;
use crate::error::{FeecError, Result};
use crate::mesh::Point;

/// Shareable analytic form: coefficients in the lexicographic `dx_I` basis.
pub type SharedForm = Arc<dyn Fn(&Point) -> Vec<f64> + Send + Sync>;

/// Exact solution callbacks used for error measurement. `du` and `dsigma`
/// are needed for the `H Λ` norms; an absent `p` means `p = 0`.
#[derive(Clone, Default)]
pub struct ExactSolution {
    pub u: Option<SharedForm>,
    pub du: Option<SharedForm>,
    pub sigma: Option<SharedForm>,
    pub dsigma: Option<SharedForm>,
    pub p: Option<SharedForm>,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("u", &self.u.is_some())
            .field("du", &self.du.is_some())
            .field("sigma", &self.sigma.is_some())
            .field("dsigma", &self.dsigma.is_some())
            .field("p", &self.p.is_some())
            .finish()
    }
}

/// Data of a Hodge Laplace problem: load `f`, its codifferential and
/// optional exact solution.
#[derive(Clone)]
pub struct ProblemData {
    pub k: usize,
    pub bc: Bc,
    pub f: SharedForm,
    pub delta_f: Option<SharedForm>,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("k", &self.k)
            .field("bc", &self.bc)
            .field("delta_f", &self.delta_f.is_some())
            .field("exact", &self.exact)
            .finish()
    }
}

impl ProblemData {
    pub fn new(k: usize, bc: Bc, f: SharedForm) -> Self {
        ProblemData {
            k,
            bc,
            f,
            delta_f: None,
            exact: None,
        }
    }

    pub fn with_delta_f(mut self, delta_f: SharedForm) -> Self {
        self.delta_f = Some(delta_f);
        self
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    /// `δf`, which the element residual needs for `1 ≤ k ≤ n-1`.
    pub(crate) fn require_delta_f(&self, n: usize) -> Result<&SharedForm> {
        self.delta_f.as_ref().ok_or_else(|| {
            FeecError::RegularityDataRequired(format!(
                "the {}-form problem in {n}D needs an analytic codifferential of f (f must be H^1 on each element)",
                self.k
            ))
        })
    }
}
