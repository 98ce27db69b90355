//! Polynomials over `ℚ(i)` in one and two variables, enough to decide
//! whether a small system of quadrics has a common complex zero.

use num_traits::Zero;

use crate::scalar::GaussianRational;

/// Coefficients in increasing degree; no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(Vec<GaussianRational>);

impl Poly {
    pub fn new(mut c: Vec<GaussianRational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn zero() -> Self {
        Poly(vec![])
    }

    pub fn constant(c: GaussianRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.0
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let len = self.0.len().max(o.0.len());
        let z = GaussianRational::zero();
        Poly::new((0..len).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Poly::new(out)
    }

    /// Remainder of division by a nonzero polynomial.
    pub fn rem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.0[dd].inv().expect("nonzero leading coefficient");
        let mut r = self.0.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = &r[k] * &lead;
            for (i, c) in d.0.iter().enumerate() {
                let t = &f * c;
                r[k - dd + i] -= &t;
            }
            r.pop();
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Poly::new(r)
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }
}

pub enum Roots {
    None,
    Rational(Vec<GaussianRational>),
    /// Common roots exist but were not found in `ℚ(i)`.
    Other,
}

/// Common complex roots of a family of univariate polynomials.
pub fn common_roots_univariate(polys: &[Poly]) -> Roots {
    let mut g = Poly::zero();
    for p in polys {
        g = g.gcd(p);
    }
    match g.degree() {
        None => Roots::Rational(vec![GaussianRational::zero()]),
        Some(0) => Roots::None,
        Some(1) => {
            let root = -(&g.0[0] / &g.0[1]);
            Roots::Rational(vec![root])
        }
        _ => Roots::Other,
    }
}

/// Polynomial in `t` with coefficients in `ℚ(i)[s]`, increasing powers of `t`.
#[derive(Clone, Debug)]
pub struct BiPoly(Vec<Poly>);

impl BiPoly {
    pub fn new(mut c: Vec<Poly>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        BiPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn t_degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }
}

fn det(m: &[Vec<Poly>]) -> Poly {
    let k = m.len();
    if k == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly::zero();
    for c in 0..k {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect()).collect();
        let term = m[0][c].mul(&det(&minor));
        acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Resultant in `t` via the Sylvester matrix.
pub fn resultant(f: &BiPoly, g: &BiPoly) -> Poly {
    let (a, b) = (f.t_degree().unwrap_or(0), g.t_degree().unwrap_or(0));
    let size = a + b;
    if size == 0 {
        return Poly::constant(GaussianRational::from_ints(1, 0));
    }
    let mut m = vec![vec![Poly::zero(); size]; size];
    for r in 0..b {
        for (i, c) in f.0.iter().rev().enumerate() {
            m[r][r + i] = c.clone();
        }
    }
    for r in 0..a {
        for (i, c) in g.0.iter().rev().enumerate() {
            m[b + r][r + i] = c.clone();
        }
    }
    det(&m)
}

/// True when the family provably has no common zero in `ℂ²`.
pub fn no_common_root_bivariate(polys: &[BiPoly]) -> bool {
    let nonzero: Vec<&BiPoly> = polys.iter().filter(|p| !p.is_zero()).collect();
    let mut eliminated: Vec<Poly> = Vec::new();
    for p in &nonzero {
        if p.t_degree() == Some(0) {
            eliminated.push(p.0[0].clone());
        }
    }
    for i in 0..nonzero.len() {
        for j in i + 1..nonzero.len() {
            let r = resultant(nonzero[i], nonzero[j]);
            if !r.is_zero() {
                eliminated.push(r);
            }
        }
    }
    if eliminated.is_empty() {
        return false;
    }
    let g = eliminated.iter().fold(Poly::zero(), |acc, p| acc.gcd(p));
    g.degree() == Some(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[i64]) -> Poly {
        Poly::new(v.iter().map(|&x| GaussianRational::from_ints(x, 0)).collect())
    }

    #[test]
    fn gcd_of_products() {
        let a = p(&[-1, 1]).mul(&p(&[2, 1]));
        let b = p(&[-1, 1]).mul(&p(&[3, 1]));
        let g = a.gcd(&b);
        assert_eq!(g.degree(), Some(1));
        match common_roots_univariate(&[a, b]) {
            Roots::Rational(r) => assert_eq!(r, vec![GaussianRational::from_ints(1, 0)]),
            _ => panic!(),
        }
        assert!(matches!(common_roots_univariate(&[p(&[1, 1]), p(&[2, 1])]), Roots::None));
    }

    #[test]
    fn resultant_detects_common_zeros() {
        // f = t - s, g = t - 1: common zero at s = t = 1.
        let f = BiPoly::new(vec![p(&[0, -1]), p(&[1])]);
        let g = BiPoly::new(vec![p(&[-1]), p(&[1])]);
        assert!(!no_common_root_bivariate(&[f.clone(), g.clone()]));
        // add h = s - 2: no common zero.
        let h = BiPoly::new(vec![p(&[-2, 1])]);
        assert!(no_common_root_bivariate(&[f, g, h]));
    }
}
