use super::exact::Xf;
use crate::error::{FeecError, Result};

/// Largest supported total polynomial degree.
pub const MAX_DEGREE: usize = 2;

/// Number of monomials of degree at most [`MAX_DEGREE`] in three variables.
pub const NUM_MONOMIALS: usize = 10;

/// Exponents of the monomial basis, graded then lexicographic.
pub const EXPONENTS: [[u8; 3]; NUM_MONOMIALS] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
    [0, 2, 0],
    [0, 1, 1],
    [0, 0, 2],
];

fn monomial_index(e: [u8; 3]) -> Option<usize> {
    EXPONENTS.iter().position(|&x| x == e)
}

fn monomial_degree(i: usize) -> usize {
    EXPONENTS[i].iter().map(|&e| e as usize).sum()
}

/// Polynomial of total degree at most 2 in Cartesian coordinates, with exact
/// expansion coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coef: [Xf; NUM_MONOMIALS],
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.coef[0] = Xf::new(c);
        p
    }

    /// The affine function `a + g·x`.
    pub fn affine(a: f64, g: &[f64]) -> Self {
        let mut p = Self::constant(a);
        for (i, &gi) in g.iter().enumerate() {
            p.coef[1 + i] = Xf::new(gi);
        }
        p
    }

    /// Build from `(exponents, coefficient)` pairs.
    pub fn from_terms(terms: &[([u8; 3], f64)]) -> Result<Self> {
        let mut p = Self::zero();
        for &(e, c) in terms {
            let i = monomial_index(e).ok_or_else(|| {
                FeecError::PolyDegreeOverflow(e.iter().map(|&x| x as usize).sum())
            })?;
            p.coef[i].add_f64(c);
        }
        Ok(p)
    }

    pub fn coefficient(&self, e: [u8; 3]) -> f64 {
        monomial_index(e).map_or(0.0, |i| self.coef[i].value())
    }

    /// Nonzero terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = ([u8; 3], f64)> + '_ {
        self.coef
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (EXPONENTS[i], c.value()))
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(Xf::is_zero)
    }

    /// Total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        (0..NUM_MONOMIALS)
            .filter(|&i| !self.coef[i].is_zero())
            .map(monomial_degree)
            .max()
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn add_assign(&mut self, o: &Poly) {
        for (a, b) in self.coef.iter_mut().zip(&o.coef) {
            a.add_assign(b);
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coef: std::array::from_fn(|i| self.coef[i].neg()),
        }
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly {
            coef: std::array::from_fn(|i| self.coef[i].scale(s)),
        }
    }

    pub fn mul(&self, o: &Poly) -> Result<Poly> {
        let mut r = Poly::zero();
        for i in 0..NUM_MONOMIALS {
            if self.coef[i].is_zero() {
                continue;
            }
            for j in 0..NUM_MONOMIALS {
                if o.coef[j].is_zero() {
                    continue;
                }
                let e = [
                    EXPONENTS[i][0] + EXPONENTS[j][0],
                    EXPONENTS[i][1] + EXPONENTS[j][1],
                    EXPONENTS[i][2] + EXPONENTS[j][2],
                ];
                let idx = monomial_index(e).ok_or_else(|| {
                    FeecError::PolyDegreeOverflow(monomial_degree(i) + monomial_degree(j))
                })?;
                r.coef[idx].add_assign(&self.coef[i].mul(&o.coef[j]));
            }
        }
        Ok(r)
    }

    /// Partial derivative with respect to coordinate `axis` (exact).
    pub fn deriv(&self, axis: usize) -> Poly {
        let mut r = Poly::zero();
        for i in 0..NUM_MONOMIALS {
            let e = EXPONENTS[i];
            if e[axis] == 0 || self.coef[i].is_zero() {
                continue;
            }
            let mut f = e;
            f[axis] -= 1;
            let idx = monomial_index(f).unwrap();
            r.coef[idx].add_assign(&self.coef[i].scale(f64::from(e[axis])));
        }
        r
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let get = |a: usize| x.get(a).copied().unwrap_or(0.0);
        let (px, py, pz) = (get(0), get(1), get(2));
        let mono = [
            1.0,
            px,
            py,
            pz,
            px * px,
            px * py,
            px * pz,
            py * py,
            py * pz,
            pz * pz,
        ];
        let mut s = 0.0;
        for i in 0..NUM_MONOMIALS {
            if !self.coef[i].is_zero() {
                s += self.coef[i].value() * mono[i];
            }
        }
        s
    }

    /// Substitute `x_i = origin_i + Σ_a map[i][a] s_a` and return the result
    /// as a polynomial in `s`.
    pub fn compose_affine(&self, origin: &[f64; 3], map: &[[f64; 3]; 3]) -> Poly {
        let xs: [Poly; 3] = std::array::from_fn(|i| Poly::affine(origin[i], &map[i]));
        let mut r = Poly::zero();
        for i in 0..NUM_MONOMIALS {
            if self.coef[i].is_zero() {
                continue;
            }
            let mut term = Poly::zero();
            term.coef[0] = self.coef[i].clone();
            for (axis, &pow) in EXPONENTS[i].iter().enumerate() {
                for _ in 0..pow {
                    term = term
                        .mul(&xs[axis])
                        .expect("degree preserved by affine substitution");
                }
            }
            r.add_assign(&term);
        }
        r
    }
}
