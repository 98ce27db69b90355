//! Exact sparse row reduction over `ℚ` and `ℚ(i)`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::GaussianRational;

pub trait Field: Clone + PartialEq + Debug + Zero + One + Send + Sync {
    fn f_add(&self, o: &Self) -> Self;
    fn f_sub(&self, o: &Self) -> Self;
    fn f_mul(&self, o: &Self) -> Self;
    fn f_inv(&self) -> Self;
    fn f_neg(&self) -> Self;
}

impl Field for BigRational {
    fn f_add(&self, o: &Self) -> Self {
        self + o
    }
    fn f_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn f_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn f_inv(&self) -> Self {
        self.recip()
    }
    fn f_neg(&self) -> Self {
        -self
    }
}

impl Field for GaussianRational {
    fn f_add(&self, o: &Self) -> Self {
        self + o
    }
    fn f_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn f_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn f_inv(&self) -> Self {
        self.inv().expect("pivot is nonzero")
    }
    fn f_neg(&self) -> Self {
        -self
    }
}

/// Sparse vector: column → nonzero entry.
pub type SparseRow<F> = BTreeMap<usize, F>;

pub fn axpy<F: Field>(target: &mut SparseRow<F>, a: &F, x: &SparseRow<F>) {
    for (&c, v) in x {
        let add = a.f_mul(v);
        match target.get_mut(&c) {
            Some(e) => {
                let s = e.f_add(&add);
                if s.is_zero() {
                    target.remove(&c);
                } else {
                    *e = s;
                }
            }
            None => {
                if !add.is_zero() {
                    target.insert(c, add);
                }
            }
        }
    }
}

/// Incrementally built reduced row echelon form. Every stored row has a
/// unit pivot and no other stored row has a nonzero entry in that column.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    ncols: usize,
    rows: Vec<SparseRow<F>>,
    pivots: BTreeMap<usize, usize>,
}

impl<F: Field> Echelon<F> {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: Vec::new(), pivots: BTreeMap::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the stored pivots.
    pub fn reduce(&self, row: &SparseRow<F>) -> SparseRow<F> {
        let mut r = row.clone();
        let hits: Vec<(usize, usize)> =
            r.keys().filter_map(|c| self.pivots.get(c).map(|&ri| (*c, ri))).collect();
        for (c, ri) in hits {
            if let Some(v) = r.get(&c).cloned() {
                axpy(&mut r, &v.f_neg(), &self.rows[ri]);
            }
        }
        r
    }

    pub fn contains(&self, row: &SparseRow<F>) -> bool {
        self.reduce(row).is_empty()
    }

    /// Adds a row; returns `false` when it was already in the span.
    pub fn insert(&mut self, row: &SparseRow<F>) -> bool {
        let mut r = self.reduce(row);
        let Some((&pc, pv)) = r.iter().next() else {
            return false;
        };
        let inv = pv.f_inv();
        for v in r.values_mut() {
            *v = v.f_mul(&inv);
        }
        for existing in self.rows.iter_mut() {
            if let Some(v) = existing.get(&pc).cloned() {
                axpy(existing, &v.f_neg(), &r);
            }
        }
        self.pivots.insert(pc, self.rows.len());
        self.rows.push(r);
        true
    }

    pub fn rows(&self) -> &[SparseRow<F>] {
        &self.rows
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.keys().copied().collect()
    }

    /// Basis of `{x : row·x = 0 for every stored row}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<SparseRow<F>> {
        let mut out = Vec::new();
        for free in (0..self.ncols).filter(|c| !self.pivots.contains_key(c)) {
            let mut v = SparseRow::new();
            v.insert(free, F::one());
            for (&pc, &ri) in &self.pivots {
                if let Some(e) = self.rows[ri].get(&free) {
                    v.insert(pc, e.f_neg());
                }
            }
            out.push(v);
        }
        out
    }
}

/// Solution set of `A x = b`: a particular solution plus a nullspace basis.
#[derive(Clone, Debug)]
pub struct AffineSolution<F> {
    pub particular: SparseRow<F>,
    pub kernel: Vec<SparseRow<F>>,
}

/// Solves the sparse system `Σ_c row[c] x_c = rhs` over all equations.
pub fn solve<F: Field>(ncols: usize, equations: &[(SparseRow<F>, F)]) -> Option<AffineSolution<F>> {
    let aug = ncols;
    let mut ech = Echelon::new(ncols + 1);
    for (row, rhs) in equations {
        let mut r = row.clone();
        if !rhs.is_zero() {
            r.insert(aug, rhs.clone());
        }
        ech.insert(&r);
    }
    if ech.pivots.contains_key(&aug) {
        return None;
    }
    let mut particular = SparseRow::new();
    for (&pc, &ri) in &ech.pivots {
        if let Some(v) = ech.rows[ri].get(&aug) {
            particular.insert(pc, v.clone());
        }
    }
    let kernel = ech.nullspace().into_iter().filter(|v| !v.contains_key(&aug)).collect();
    Some(AffineSolution { particular, kernel })
}

/// Nullspace of the homogeneous system given by `equations`.
pub fn kernel<F: Field>(ncols: usize, equations: &[SparseRow<F>]) -> Vec<SparseRow<F>> {
    let mut ech = Echelon::new(ncols);
    for e in equations {
        ech.insert(e);
    }
    ech.nullspace()
}

pub fn dense<F: Field>(row: &SparseRow<F>, ncols: usize) -> Vec<F> {
    (0..ncols).map(|c| row.get(&c).cloned().unwrap_or_else(F::zero)).collect()
}

pub fn sparse<F: Field>(v: &[F]) -> SparseRow<F> {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn row(v: &[i64]) -> SparseRow<BigRational> {
        sparse(&v.iter().map(|&x| rat(x, 1)).collect::<Vec<_>>())
    }

    #[test]
    fn rank_and_nullspace() {
        let eqs = vec![row(&[1, 2, 3]), row(&[2, 4, 6]), row(&[0, 1, 1])];
        let ker = kernel(3, &eqs);
        assert_eq!(ker.len(), 1);
        for e in &eqs {
            let dot = e.iter().fold(rat(0, 1), |acc, (c, v)| acc + v * ker[0].get(c).cloned().unwrap_or_default());
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn solves_inhomogeneous_systems() {
        let eqs = vec![(row(&[1, 1]), rat(3, 1)), (row(&[1, -1]), rat(1, 1))];
        let sol = solve(2, &eqs).unwrap();
        assert_eq!(dense(&sol.particular, 2), vec![rat(2, 1), rat(1, 1)]);
        assert!(sol.kernel.is_empty());
        let bad = vec![(row(&[1, 1]), rat(1, 1)), (row(&[2, 2]), rat(3, 1))];
        assert!(solve(2, &bad).is_none());
    }

    #[test]
    fn gaussian_field_elimination() {
        let i = GaussianRational::i();
        let one = GaussianRational::one();
        let eqs = vec![sparse(&[one.clone(), i.clone()]), sparse(&[i.clone(), -one.clone()])];
        let ker = kernel(2, &eqs);
        assert_eq!(ker.len(), 1);
        let v = dense(&ker[0], 2);
        assert!((&v[0] + &(&i * &v[1])).is_zero());
    }
}
