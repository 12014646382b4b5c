use super::harmonic::harmonic_basis;
use super::mixed::solve_with_load;
use crate::derham::{CochainVec, DiscreteComplex};
use crate::error::{FeecError, Result};

/// Discrete Hodge decomposition `v = b + h + z` with `b ∈ 𝔅_h`, `h ∈ 𝔥_h`
/// and `z ∈ Z_h^⊥`.
#[derive(Clone, Debug)]
pub struct HodgeParts {
    pub b_part: CochainVec,
    pub h_part: CochainVec,
    pub zperp_part: CochainVec,
}

pub fn hodge_decompose(cx: &DiscreteComplex, v: &CochainVec) -> Result<HodgeParts> {
    let space = v.space().clone();
    let k = space.degree();
    let own = cx.space(k)?;
    if !std::sync::Arc::ptr_eq(&own, &space) {
        return Err(FeecError::DimensionMismatch(
            "cochain does not belong to this complex".into(),
        ));
    }
    let mv = cx.mass(k)?.apply(v.values());
    let b = if k > 0 {
        let d = cx.d(k - 1)?;
        let load = d.apply_transpose(&mv);
        let phi = solve_with_load(cx, k - 1, &load)?;
        d.apply(phi.u.values())
    } else {
        vec![0.0; space.dim()]
    };
    let h = harmonic_basis(cx, k)?;
    let hv = h.combine(&h.dual_coefficients(&mv));
    let z: Vec<f64> = v
        .values()
        .iter()
        .zip(&b)
        .zip(&hv)
        .map(|((x, b), h)| x - b - h)
        .collect();
    Ok(HodgeParts {
        b_part: CochainVec::new(space.clone(), b)?,
        h_part: CochainVec::new(space.clone(), hv)?,
        zperp_part: CochainVec::new(space, z)?,
    })
}
