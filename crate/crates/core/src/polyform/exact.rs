//! Exact floating-point expansions.
//!
//! An [`Xf`] represents a real number as an unevaluated sum of
//! non-overlapping doubles ordered by increasing magnitude. Sums, negation
//! and products of expansions are exact, so cancellations that hold in real
//! arithmetic (such as `d(dω) = 0`) hold bit-for-bit.

use smallvec::SmallVec;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bv = s - a;
    let av = s - bv;
    (s, (a - av) + (b - bv))
}

#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Xf(SmallVec<[f64; 2]>);

impl Xf {
    pub const ZERO: Xf = Xf(SmallVec::new_const());

    pub fn new(x: f64) -> Self {
        debug_assert!(x.is_finite(), "expansions hold finite values only");
        let mut v = SmallVec::new();
        if x != 0.0 {
            v.push(x);
        }
        Xf(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Add one double exactly (Shewchuk's grow-expansion with zero elimination).
    pub fn add_f64(&mut self, b: f64) {
        if b == 0.0 {
            return;
        }
        let mut q = b;
        let mut out: SmallVec<[f64; 2]> = SmallVec::with_capacity(self.0.len() + 1);
        for &e in &self.0 {
            let (s, h) = two_sum(q, e);
            q = s;
            if h != 0.0 {
                out.push(h);
            }
        }
        if q != 0.0 {
            out.push(q);
        }
        self.0 = out;
    }

    pub fn add(&self, other: &Xf) -> Xf {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn add_assign(&mut self, other: &Xf) {
        for &b in &other.0 {
            self.add_f64(b);
        }
    }

    pub fn neg(&self) -> Xf {
        Xf(self.0.iter().map(|x| -x).collect())
    }

    pub fn sub(&self, other: &Xf) -> Xf {
        self.add(&other.neg())
    }

    /// Exact product with a double.
    pub fn scale(&self, b: f64) -> Xf {
        let mut r = Xf::ZERO;
        if b == 0.0 {
            return r;
        }
        for &e in &self.0 {
            let (p, err) = two_product(e, b);
            r.add_f64(err);
            r.add_f64(p);
        }
        r
    }

    pub fn mul(&self, other: &Xf) -> Xf {
        let mut r = Xf::ZERO;
        for &b in &other.0 {
            r.add_assign(&self.scale(b));
        }
        r
    }

    /// The double nearest to the represented value (up to one ulp).
    pub fn value(&self) -> f64 {
        match self.0.len() {
            0 => 0.0,
            1 => self.0[0],
            _ => {
                // Summing from smallest to largest is accurate for
                // non-overlapping expansions.
                self.0.iter().fold(0.0, |acc, &x| acc + x)
            }
        }
    }
}

impl From<f64> for Xf {
    fn from(x: f64) -> Self {
        Xf::new(x)
    }
}

/// Exactly rounded sum of `terms`.
pub fn exact_sum(terms: &[f64]) -> f64 {
    let mut acc = Xf::ZERO;
    for &t in terms {
        acc.add_f64(t);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_is_exact() {
        let a = Xf::new(1.0);
        let b = Xf::new(2f64.powi(-60));
        let ab = a.sub(&b);
        assert_eq!(ab.components().len(), 2);
        let back = ab.add(&b).sub(&a);
        assert!(back.is_zero());
    }

    #[test]
    fn products_are_exact() {
        let x = Xf::new(0.1);
        let y = Xf::new(3.0);
        let p = x.mul(&y);
        // 0.1 * 3 is not representable; the expansion holds it exactly.
        assert_eq!(p.components().len(), 2);
        assert!(p.sub(&x).sub(&x).sub(&x).is_zero());
    }

    #[test]
    fn exact_sum_beats_naive_order() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(exact_sum(&terms), 2.0);
    }
}
