//! Minimization of `V ↦ Ω(σ_p^{-1} V∧V̄)` over unit simple `p`-vectors.
//!
//! Planes are represented by `n×p` frames with orthonormal columns. The
//! objective is a Hermitian quadratic form in the Plücker coordinates, and it
//! is quadratic in each single column once the others are fixed; a sweep
//! replaces each column by the exact minimizer in the orthogonal complement
//! of the remaining ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exterior::MultiIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { restarts: 64, max_iter: 500, seed: 42 }
    }
}

impl OptimizerOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        OptimizerOptions { seed, ..self }
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: Vec<Complex64>, k: usize) -> Complex64 {
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if m[r * k + col].norm() > m[piv * k + col].norm() {
                piv = r;
            }
        }
        let pv = m[piv * k + col];
        if pv.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            for c in 0..k {
                m.swap(piv * k + c, col * k + c);
            }
            d = -d;
        }
        d *= pv;
        for r in col + 1..k {
            let f = m[r * k + col] / pv;
            if f.norm() != 0.0 {
                for c in col..k {
                    let t = m[col * k + c];
                    m[r * k + c] -= f * t;
                }
            }
        }
    }
    d
}

fn minor(frame: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> Complex64 {
    let k = rows.len();
    let mut m = Vec::with_capacity(k * k);
    for &r in rows {
        for &c in cols {
            m.push(frame[(r, c)]);
        }
    }
    det(m, k)
}

/// Plücker coordinates of the column span, in the order of `indices`.
pub fn plucker(frame: &DMatrix<Complex64>, indices: &[MultiIndex]) -> Vec<Complex64> {
    let cols: Vec<usize> = (0..frame.ncols()).collect();
    indices.iter().map(|idx| minor(frame, &idx.indices(), &cols)).collect()
}

/// `Σ H_{IK} v_I conj(v_K)`.
pub fn quadratic_value(h: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, va) in v.iter().enumerate() {
        if va.norm() == 0.0 {
            continue;
        }
        for (b, vb) in v.iter().enumerate() {
            acc += h[(a, b)] * va * vb.conj();
        }
    }
    acc.re
}

pub fn orthonormalize(frame: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (n, p) = frame.shape();
    let mut out = DMatrix::zeros(n, p);
    for j in 0..p {
        let mut v = frame.column(j).into_owned();
        for l in 0..j {
            let u = out.column(l).into_owned();
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let norm = v.norm();
        out.set_column(j, &(v / Complex64::new(norm, 0.0)));
    }
    out
}

/// Orthonormal basis (as columns) of the orthogonal complement of `vectors`.
pub fn complement_basis(n: usize, vectors: &[nalgebra::DVector<Complex64>]) -> DMatrix<Complex64> {
    let mut proj = DMatrix::<Complex64>::identity(n, n);
    for v in vectors {
        proj -= v * v.adjoint();
    }
    let eig = nalgebra::SymmetricEigen::new(proj);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &eig.eigenvectors.column(i));
    }
    out
}

/// Smallest eigenpair of a Hermitian matrix.
pub fn smallest_eigenpair(m: DMatrix<Complex64>) -> (f64, nalgebra::DVector<Complex64>) {
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Coefficient matrix `B` with `v_I = Σ_r B[I][r] m_r`, `m` the `j`-th column.
fn column_coefficients(frame: &DMatrix<Complex64>, j: usize, indices: &[MultiIndex]) -> DMatrix<Complex64> {
    let (n, p) = frame.shape();
    let others: Vec<usize> = (0..p).filter(|&c| c != j).collect();
    let mut b = DMatrix::zeros(indices.len(), n);
    for (row, idx) in indices.iter().enumerate() {
        let rows = idx.indices();
        for (t, &r) in rows.iter().enumerate() {
            let sub: Vec<usize> = rows.iter().copied().filter(|&x| x != r).collect();
            let m = if sub.is_empty() { Complex64::new(1.0, 0.0) } else { minor(frame, &sub, &others) };
            b[(row, r)] = if (t + j) % 2 == 0 { m } else { -m };
        }
    }
    b
}

#[derive(Clone, Debug)]
pub struct LocalMin {
    pub value: f64,
    pub frame: DMatrix<Complex64>,
    pub sweeps: usize,
}

/// Block-coordinate descent from `start` until the improvement stalls.
pub fn descend(h: &DMatrix<Complex64>, indices: &[MultiIndex], start: DMatrix<Complex64>, max_iter: usize) -> LocalMin {
    let (n, p) = start.shape();
    let mut frame = orthonormalize(&start);
    let mut value = quadratic_value(h, &plucker(&frame, indices));
    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let before = value;
        for j in 0..p {
            let b = column_coefficients(&frame, j, indices);
            let bconj = b.map(|z| z.conj());
            let q = b.transpose() * h * bconj;
            let others: Vec<_> = (0..p).filter(|&c| c != j).map(|c| frame.column(c).map(|z| z.conj())).collect();
            let basis = complement_basis(n, &others);
            let reduced = basis.adjoint() * &q * &basis;
            let reduced = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
            let (_, z) = smallest_eigenpair(reduced);
            let y = &basis * z;
            frame.set_column(j, &y.map(|c| c.conj()));
        }
        frame = orthonormalize(&frame);
        value = quadratic_value(h, &plucker(&frame, indices));
        if before - value <= 1e-13 * (1.0 + value.abs()) {
            break;
        }
    }
    LocalMin { value, frame, sweeps }
}

pub fn random_frame(n: usize, p: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, p, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    orthonormalize(&m)
}

#[derive(Clone, Debug)]
pub struct MultistartResult {
    pub value: f64,
    pub frame: DMatrix<Complex64>,
    pub restart_values: Vec<f64>,
    /// Local minimizer of each restart.
    pub restart_frames: Vec<DMatrix<Complex64>>,
    pub best_restart: usize,
}

/// Runs `opts.restarts` independent descents; restart `r` is seeded with `seed + r`.
pub fn multistart(h: &DMatrix<Complex64>, n: usize, p: usize, opts: &OptimizerOptions) -> MultistartResult {
    let indices = MultiIndex::all(n, p);
    let runs: Vec<LocalMin> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
            let start = random_frame(n, p, &mut rng);
            descend(h, &indices, start, opts.max_iter)
        })
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.value < runs[best].value {
            best = r;
        }
    }
    MultistartResult {
        value: runs[best].value,
        frame: runs[best].frame.clone(),
        restart_values: runs.iter().map(|r| r.value).collect(),
        restart_frames: runs.iter().map(|r| r.frame.clone()).collect(),
        best_restart: best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_small_matrices() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert_eq!(det(vec![c(2.0)], 1), c(2.0));
        let d = det(vec![c(1.0), c(2.0), c(3.0), c(4.0)], 2);
        assert!((d - c(-2.0)).norm() < 1e-12);
        let d3 = det(vec![c(0.0), c(1.0), c(0.0), c(1.0), c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)], 3);
        assert!((d3 - c(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn column_coefficients_reproduce_plucker_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (n, p) = (5, 3);
        let idx = MultiIndex::all(n, p);
        let frame = random_frame(n, p, &mut rng);
        let v = plucker(&frame, &idx);
        for j in 0..p {
            let b = column_coefficients(&frame, j, &idx);
            let w = &b * frame.column(j);
            for (a, b) in v.iter().zip(w.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_frames_have_unit_plucker_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = random_frame(6, 3, &mut rng);
        let v = plucker(&frame, &MultiIndex::all(6, 3));
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
