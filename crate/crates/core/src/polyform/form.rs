use super::alt::{
    complement, elements, merge_sign, num_components, star_sign, subset_index, subsets,
};
use super::poly::Poly;
use super::quadrature::simplex_rule;
use crate::error::{FeecError, Result};
use crate::mesh::Point;

/// Polynomial differential `k`-form on `R^n` in Cartesian coordinates.
///
/// Component `i` is the coefficient of `dx_I` where `I` is the `i`-th entry
/// of the lexicographically ordered `k`-subsets of the axes.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
    n: usize,
    k: usize,
    comps: Vec<Poly>,
}

fn check_degree(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > 3 {
        return Err(FeecError::UnsupportedDimension(n));
    }
    if k > n {
        return Err(FeecError::InvalidDegree {
            degree: k,
            dim: n,
            reason: "form degree exceeds the dimension",
        });
    }
    Ok(())
}

impl PolyForm {
    pub fn zero(n: usize, k: usize) -> Self {
        check_degree(n, k).expect("valid form degree");
        PolyForm {
            n,
            k,
            comps: vec![Poly::zero(); num_components(n, k)],
        }
    }

    pub fn from_components(n: usize, k: usize, comps: Vec<Poly>) -> Result<Self> {
        check_degree(n, k)?;
        if comps.len() != num_components(n, k) {
            return Err(FeecError::DimensionMismatch(format!(
                "a {k}-form in {n} dimensions has {} components, got {}",
                num_components(n, k),
                comps.len()
            )));
        }
        Ok(PolyForm { n, k, comps })
    }

    /// Constant-coefficient form.
    pub fn constant(n: usize, k: usize, coeffs: &[f64]) -> Result<Self> {
        Self::from_components(n, k, coeffs.iter().map(|&c| Poly::constant(c)).collect())
    }

    pub fn scalar(n: usize, p: Poly) -> Self {
        Self::from_components(n, 0, vec![p]).expect("0-form")
    }

    /// `dx_{axes}` for strictly increasing `axes`.
    pub fn basis(n: usize, axes: &[usize]) -> Result<Self> {
        let k = axes.len();
        check_degree(n, k)?;
        if axes.windows(2).any(|w| w[0] >= w[1]) || axes.iter().any(|&a| a >= n) {
            return Err(FeecError::InvalidArgument(format!(
                "invalid axis set {axes:?}"
            )));
        }
        let mask = axes.iter().fold(0u8, |m, &a| m | (1 << a));
        let mut f = Self::zero(n, k);
        f.comps[subset_index(n, mask)] = Poly::constant(1.0);
        Ok(f)
    }

    /// The volume form `dx_0 ∧ … ∧ dx_{n-1}`.
    pub fn vol(n: usize) -> Self {
        Self::basis(n, &(0..n).collect::<Vec<_>>()).expect("volume form")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    /// Largest polynomial degree among the components.
    pub fn poly_degree(&self) -> Option<usize> {
        self.comps.iter().filter_map(Poly::degree).max()
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn component(&self, axes_mask: u8) -> &Poly {
        &self.comps[subset_index(self.n, axes_mask)]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    fn same_space(&self, o: &PolyForm) {
        assert!(
            self.n == o.n && self.k == o.k,
            "form spaces differ: ({}, {}) vs ({}, {})",
            self.n,
            self.k,
            o.n,
            o.k
        );
    }

    pub fn add(&self, o: &PolyForm) -> PolyForm {
        self.same_space(o);
        PolyForm {
            n: self.n,
            k: self.k,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &PolyForm) -> PolyForm {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> PolyForm {
        self.map(Poly::neg)
    }

    pub fn scale(&self, s: f64) -> PolyForm {
        self.map(|p| p.scale(s))
    }

    /// `self += s * o`
    pub fn axpy(&mut self, s: f64, o: &PolyForm) {
        self.same_space(o);
        for (a, b) in self.comps.iter_mut().zip(&o.comps) {
            a.add_assign(&b.scale(s));
        }
    }

    /// Multiply every coefficient by a polynomial.
    pub fn mul_poly(&self, p: &Poly) -> Result<PolyForm> {
        Ok(PolyForm {
            n: self.n,
            k: self.k,
            comps: self.comps.iter().map(|c| c.mul(p)).collect::<Result<_>>()?,
        })
    }

    fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyForm {
        PolyForm {
            n: self.n,
            k: self.k,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<PolyForm> {
        if self.k >= self.n {
            return Err(FeecError::InvalidDegree {
                degree: self.k,
                dim: self.n,
                reason: "the exterior derivative of a top-degree form is not defined here",
            });
        }
        let mut out = PolyForm::zero(self.n, self.k + 1);
        for (idx, &mask) in subsets(self.n, self.k).iter().enumerate() {
            let p = &self.comps[idx];
            if p.is_zero() {
                continue;
            }
            for axis in 0..self.n {
                if mask & (1 << axis) != 0 {
                    continue;
                }
                let sign = merge_sign(1 << axis, mask);
                let target = subset_index(self.n, mask | (1 << axis));
                let dp = p.deriv(axis);
                out.comps[target].add_assign(&if sign > 0.0 { dp } else { dp.neg() });
            }
        }
        Ok(out)
    }

    /// Euclidean Hodge star: `⋆dx_I = sign(I, I^c) dx_{I^c}`.
    pub fn star(&self) -> PolyForm {
        let n = self.n;
        let mut out = PolyForm::zero(n, n - self.k);
        for (idx, &mask) in subsets(n, self.k).iter().enumerate() {
            let target = subset_index(n, complement(n, mask));
            out.comps[target] = if star_sign(n, mask) > 0.0 {
                self.comps[idx].clone()
            } else {
                self.comps[idx].neg()
            };
        }
        out
    }

    /// Inverse Hodge star: `⋆^{-1} = (-1)^{k(n-k)} ⋆` on `k`-forms.
    pub fn star_inv(&self) -> PolyForm {
        let s = self.star();
        if (self.k * (self.n - self.k)).is_multiple_of(2) {
            s
        } else {
            s.neg()
        }
    }

    /// Codifferential `δω = (-1)^k ⋆^{-1} d ⋆ω`.
    pub fn codifferential(&self) -> Result<PolyForm> {
        if self.k == 0 {
            return Err(FeecError::InvalidDegree {
                degree: 0,
                dim: self.n,
                reason: "the codifferential of a 0-form is not defined",
            });
        }
        let r = self.star().d()?.star_inv();
        Ok(if self.k.is_multiple_of(2) { r } else { r.neg() })
    }

    pub fn wedge(&self, o: &PolyForm) -> Result<PolyForm> {
        if self.n != o.n {
            return Err(FeecError::DimensionMismatch(format!(
                "wedge of forms in {} and {} dimensions",
                self.n, o.n
            )));
        }
        if self.k + o.k > self.n {
            return Err(FeecError::InvalidDegree {
                degree: self.k + o.k,
                dim: self.n,
                reason: "wedge product degree exceeds the dimension",
            });
        }
        let mut out = PolyForm::zero(self.n, self.k + o.k);
        for (i, &a) in subsets(self.n, self.k).iter().enumerate() {
            if self.comps[i].is_zero() {
                continue;
            }
            for (j, &b) in subsets(self.n, o.k).iter().enumerate() {
                let sign = merge_sign(a, b);
                if sign == 0.0 || o.comps[j].is_zero() {
                    continue;
                }
                let prod = self.comps[i].mul(&o.comps[j])?;
                let target = subset_index(self.n, a | b);
                out.comps[target].add_assign(&if sign > 0.0 { prod } else { prod.neg() });
            }
        }
        Ok(out)
    }

    /// Coefficients at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.comps) {
            *o = p.eval(x);
        }
    }

    /// `L2(K)` inner product on the simplex with vertices `cell`, using a
    /// quadrature rule exact for polynomials of degree `quad_degree`.
    pub fn inner_product(&self, o: &PolyForm, cell: &[Point], quad_degree: usize) -> f64 {
        self.same_space(o);
        let vol = crate::mesh::signed_volume(self.n, cell).abs();
        let rule = simplex_rule(self.n, quad_degree);
        let mut a = vec![0.0; self.comps.len()];
        let mut b = vec![0.0; self.comps.len()];
        let mut s = 0.0;
        for q in 0..rule.len() {
            let x = rule.point(q, cell);
            self.eval_into(&x, &mut a);
            o.eval_into(&x, &mut b);
            s += rule.weight(q) * a.iter().zip(&b).map(|(u, v)| u * v).sum::<f64>();
        }
        s * vol
    }

    pub fn norm_on_element(&self, cell: &[Point]) -> f64 {
        self.inner_product(self, cell, 4).max(0.0).sqrt()
    }

    /// Pretty form like `1*x*dx0^dx1 + ...`, mostly for diagnostics.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (idx, &mask) in subsets(self.n, self.k).iter().enumerate() {
            for (e, c) in self.comps[idx].terms() {
                let mut s = format!("{c}");
                for (axis, &p) in e.iter().enumerate() {
                    for _ in 0..p {
                        s.push_str(["*x", "*y", "*z"][axis]);
                    }
                }
                let dx: Vec<String> = elements(mask).map(|a| format!("dx{a}")).collect();
                if !dx.is_empty() {
                    s.push('*');
                    s.push_str(&dx.join("^"));
                }
                parts.push(s);
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(n: usize, a: usize) -> PolyForm {
        PolyForm::basis(n, &[a]).unwrap()
    }

    #[test]
    fn star_examples() {
        assert_eq!(dx(2, 0).star(), dx(2, 1));
        assert_eq!(dx(2, 1).star(), dx(2, 0).neg());
        assert_eq!(dx(3, 0).star(), PolyForm::basis(3, &[1, 2]).unwrap());
        assert_eq!(
            PolyForm::constant(3, 0, &[1.0]).unwrap().star(),
            PolyForm::vol(3)
        );
    }

    #[test]
    fn wedge_examples() {
        assert!(dx(2, 0).wedge(&dx(2, 0)).unwrap().is_zero());
        assert_eq!(
            dx(2, 0).wedge(&dx(2, 1)).unwrap(),
            dx(2, 1).wedge(&dx(2, 0)).unwrap().neg()
        );
        assert!(dx(2, 0).wedge(&PolyForm::vol(2)).is_err());
    }

    #[test]
    fn codifferential_is_minus_divergence() {
        // u = (x^2, xy, yz): div u = 2x + x + y
        let u = PolyForm::from_components(
            3,
            1,
            vec![
                Poly::from_terms(&[([2, 0, 0], 1.0)]).unwrap(),
                Poly::from_terms(&[([1, 1, 0], 1.0)]).unwrap(),
                Poly::from_terms(&[([0, 1, 1], 1.0)]).unwrap(),
            ],
        )
        .unwrap();
        let du = u.codifferential().unwrap();
        let expect = Poly::from_terms(&[([1, 0, 0], -3.0), ([0, 1, 0], -1.0)]).unwrap();
        assert_eq!(du.components()[0], expect);
    }

    #[test]
    fn d_of_top_form_is_an_error() {
        assert!(PolyForm::vol(2).d().is_err());
        assert!(PolyForm::constant(2, 0, &[1.0])
            .unwrap()
            .codifferential()
            .is_err());
    }

    #[test]
    fn norm_of_constant_forms() {
        let tri = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((dx(2, 0).norm_on_element(&tri).powi(2) - 1.0).abs() < 1e-15);
        assert!((PolyForm::vol(2).norm_on_element(&tri).powi(2) - 1.0).abs() < 1e-15);
    }
}
