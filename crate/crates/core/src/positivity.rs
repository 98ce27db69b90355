//! The cones `SP^p ⊆ P^p ⊆ WP^p` of real `(p,p)`-forms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{
    identity_form, merge_sign, monomial_product, sigma, sigma_inv, square, volume_pairing, ExactForm, FloatForm,
    Form, MultiIndex, PVector,
};
use crate::grassmann::{complement_basis, multistart, plucker, quadratic_value, OptimizerOptions};
use crate::scalar::{GaussianRational, Scalar};

/// Width of the zero band for eigenvalues and plane values, relative to the
/// largest matrix entry.
pub const ZERO_BAND: f64 = 1e-9;

/// Approximation bound for float → exact conversions.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// `Ω = σ_p Σ H_{IJ} φ_I ∧ φ̄_J`, indices in lexicographic order.
#[derive(Clone, Debug)]
pub struct HermitianRep {
    pub n: usize,
    pub p: usize,
    pub indices: Vec<MultiIndex>,
    pub matrix: DMatrix<Complex64>,
}

/// Degree `p` of a nonzero pure `(p,p)`-form.
pub fn pp_degree<S: Scalar>(omega: &Form<S>) -> Result<usize> {
    match omega.pure_bidegree() {
        Some((a, b)) if a == b => Ok(a),
        Some((a, b)) => Err(Error::Degree(format!("expected a (p,p)-form, got ({a},{b})"))),
        None if omega.is_zero() => Err(Error::Degree("zero form has no bidegree".into())),
        None => Err(Error::Degree("form is not of pure bidegree".into())),
    }
}

impl HermitianRep {
    pub fn new<S: Scalar>(omega: &Form<S>, p: usize) -> Result<Self> {
        let n = omega.n();
        if p > n {
            return Err(Error::Degree(format!("p = {p} exceeds n = {n}")));
        }
        if omega.bidegrees().iter().any(|&b| b != (p, p)) {
            return Err(Error::Degree(format!("expected a ({p},{p})-form")));
        }
        let indices = MultiIndex::all(n, p);
        let pos: std::collections::HashMap<MultiIndex, usize> =
            indices.iter().enumerate().map(|(k, i)| (*i, k)).collect();
        let s = sigma_inv(p).to_complex();
        let mut matrix = DMatrix::zeros(indices.len(), indices.len());
        for (&(i, j), c) in omega.terms() {
            matrix[(pos[&i], pos[&j])] = c.to_complex() * s;
        }
        let rep = HermitianRep { n, p, indices, matrix };
        let scale = rep.scale().max(f64::MIN_POSITIVE);
        if (&rep.matrix - rep.matrix.adjoint()).iter().any(|z| z.norm() > 1e-12 * scale.max(1.0)) {
            return Err(Error::NotReal);
        }
        Ok(rep)
    }

    pub fn from_form<S: Scalar>(omega: &Form<S>) -> Result<Self> {
        Self::new(omega, pp_degree(omega)?)
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Largest entry modulus.
    pub fn scale(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_form(&self) -> FloatForm {
        let s = sigma(self.p).to_complex();
        let mut out = FloatForm::zero(self.n);
        for (a, &i) in self.indices.iter().enumerate() {
            for (b, &j) in self.indices.iter().enumerate() {
                out.add_term(i, j, self.matrix[(a, b)] * s);
            }
        }
        out
    }

    /// `Ω(σ_p^{-1} V∧V̄)` for a frame with orthonormal columns.
    pub fn plane_value(&self, frame: &DMatrix<Complex64>) -> f64 {
        quadratic_value(&self.matrix, &plucker(frame, &self.indices))
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

/// Eigen-decomposition `Ω = σ_p Σ λ_j Ψ_j ∧ Ψ̄_j` with orthonormal `Ψ_j`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub rep: HermitianRep,
    /// Ascending.
    pub values: Vec<f64>,
    /// Coefficient vectors of `Ψ_j` in the order of `rep.indices`.
    pub vectors: Vec<DVector<Complex64>>,
}

impl Spectrum {
    pub fn of(rep: HermitianRep) -> Self {
        let eig = nalgebra::SymmetricEigen::new(rep.hermitian_part());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
        Spectrum { rep, values, vectors }
    }

    pub fn eigenform(&self, j: usize) -> FloatForm {
        let mut out = FloatForm::zero(self.rep.n);
        for (a, &i) in self.rep.indices.iter().enumerate() {
            out.add_term(i, MultiIndex::EMPTY, self.vectors[j][a]);
        }
        out
    }

    pub fn reconstruct(&self) -> FloatForm {
        let mut out = FloatForm::zero(self.rep.n);
        for j in 0..self.values.len() {
            let sq = square(&self.eigenform(j));
            out = out.add(&sq.scale(&Complex64::new(self.values[j], 0.0)));
        }
        out
    }

    /// Smallest eigenvalue divided by the largest matrix entry.
    pub fn normalized_min(&self) -> f64 {
        let s = self.rep.scale();
        if s == 0.0 {
            0.0
        } else {
            self.values[0] / s
        }
    }
}

pub fn spectrum<S: Scalar>(omega: &Form<S>) -> Result<Spectrum> {
    Ok(Spectrum::of(HermitianRep::from_form(omega)?))
}

/// Sorted eigenvalues and the matching orthonormal eigenforms.
pub fn eigen_decompose<S: Scalar>(omega: &Form<S>) -> Result<(Vec<f64>, Vec<FloatForm>)> {
    let s = spectrum(omega)?;
    let forms = (0..s.values.len()).map(|j| s.eigenform(j)).collect();
    Ok((s.values, forms))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Cone {
    SP,
    P,
    WP,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Membership {
    StrictlyIn,
    In,
    NotIn,
    Unknown,
}

/// A plane given by an orthonormal frame together with `Ω(σ_p^{-1}V∧V̄)`.
#[derive(Clone, Debug)]
pub struct PlaneWitness {
    pub frame: DMatrix<Complex64>,
    pub value: f64,
}

impl PlaneWitness {
    pub fn simple_vector(&self) -> PVector<Complex64> {
        let n = self.frame.nrows();
        let factors: Vec<Vec<Complex64>> =
            (0..self.frame.ncols()).map(|c| self.frame.column(c).iter().copied().collect()).collect();
        PVector::from_factors(n, &factors)
    }
}

#[derive(Clone, Debug)]
pub enum ConeWitness {
    Eigen { value: f64, form: FloatForm },
    Plane(PlaneWitness),
    Dual(DualWitness),
    Decomposition(Vec<ExactForm>),
}

#[derive(Clone, Debug)]
pub struct ConeVerdict {
    pub cone: Cone,
    pub status: Membership,
    pub witness: Option<ConeWitness>,
    /// Smallest eigenvalue or plane value found, unnormalized.
    pub min_value: Option<f64>,
    /// Whether the status follows from an exact argument (spectrum) rather
    /// than optimizer evidence.
    pub certified: bool,
}

pub fn coordinate_frame(n: usize, idx: MultiIndex) -> DMatrix<Complex64> {
    let cols = idx.indices();
    let mut f = DMatrix::zeros(n, cols.len());
    for (c, &r) in cols.iter().enumerate() {
        f[(r, c)] = Complex64::new(1.0, 0.0);
    }
    f
}

fn classify_spectrum(s: &Spectrum, cone: Cone) -> ConeVerdict {
    let min = s.normalized_min();
    let status = if min > ZERO_BAND {
        Membership::StrictlyIn
    } else if min >= -ZERO_BAND {
        Membership::In
    } else {
        Membership::NotIn
    };
    let witness = (status == Membership::NotIn)
        .then(|| ConeWitness::Eigen { value: s.values[0], form: s.eigenform(0) });
    ConeVerdict { cone, status, witness, min_value: Some(s.values[0]), certified: true }
}

/// Membership in `P^p` from the eigenvalues of the Hermitian representation.
pub fn classify_p<S: Scalar>(omega: &Form<S>) -> Result<ConeVerdict> {
    Ok(classify_spectrum(&spectrum(omega)?, Cone::P))
}

/// Smallest value of `Ω(σ_p^{-1} V∧V̄)` over random unit planes.
pub fn plane_sampling_min<S: Scalar>(omega: &Form<S>, samples: usize, seed: u64) -> Result<f64> {
    let rep = HermitianRep::from_form(omega)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        let frame = crate::grassmann::random_frame(rep.n, rep.p, &mut rng);
        min = min.min(rep.plane_value(&frame));
    }
    Ok(min)
}

/// Same test as [`classify_p`], via `Ω ∧ σ_k η∧η̄ ≥ 0` on random `(k,0)`-forms `η`.
pub fn positivity_by_sampling<S: Scalar>(omega: &Form<S>, samples: usize, seed: u64) -> Result<f64> {
    let p = pp_degree(omega)?;
    let n = omega.n();
    let k = n - p;
    let om = omega.to_float();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let mut eta = FloatForm::zero(n);
        let mut norm = 0.0;
        for idx in MultiIndex::all(n, k) {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            norm += c.norm_sqr();
            eta.add_term(idx, MultiIndex::EMPTY, c);
        }
        let eta = eta.scale(&Complex64::new(1.0 / norm.sqrt(), 0.0));
        let v = volume_pairing(&om, &square(&eta))?.re;
        worst = worst.min(v);
    }
    Ok(worst)
}

/// `Ω(σ_p^{-1} V∧V̄)` for the plane spanned by the orthonormal columns of `frame`.
pub fn evaluate_on_plane<S: Scalar>(omega: &Form<S>, frame: &DMatrix<Complex64>) -> Result<f64> {
    check_frame(frame)?;
    let rep = HermitianRep::new(omega, frame.ncols())?;
    if rep.n != frame.nrows() {
        return Err(Error::DimensionMismatch(rep.n, frame.nrows()));
    }
    Ok(rep.plane_value(frame))
}

fn check_frame(frame: &DMatrix<Complex64>) -> Result<()> {
    let gram = frame.adjoint() * frame;
    let dev = (gram - DMatrix::identity(frame.ncols(), frame.ncols())).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::OutOfRange(format!("frame columns are not orthonormal (deviation {dev:e})")));
    }
    Ok(())
}

/// Result of minimizing over the Grassmannian of `p`-planes.
#[derive(Clone, Debug)]
pub struct GrassmannMin {
    pub value: f64,
    pub witness: PlaneWitness,
    /// True when the value is the exact minimum (`p ∈ {0, 1, n-1, n}`).
    pub exact: bool,
    pub restart_values: Vec<f64>,
    pub restart_frames: Vec<DMatrix<Complex64>>,
}

/// Plane realizing the smallest eigenvalue when every `p`-vector is simple.
fn eigen_plane(s: &Spectrum) -> DMatrix<Complex64> {
    let (n, p) = (s.rep.n, s.rep.p);
    let v: Vec<Complex64> = s.vectors[0].iter().map(|z| z.conj()).collect();
    if p == 0 {
        return DMatrix::zeros(n, 0);
    }
    if p == n {
        return DMatrix::identity(n, n);
    }
    if p == 1 {
        return DMatrix::from_iterator(n, 1, s.rep.indices.iter().zip(&v).fold(vec![Complex64::new(0.0, 0.0); n], |mut acc, (idx, c)| {
            acc[idx.indices()[0]] = *c;
            acc
        }));
    }
    // p = n-1: the plane is the kernel of c with c_a = s_a v_{â}.
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for (idx, val) in s.rep.indices.iter().zip(&v) {
        let a = idx.complement(n).indices()[0];
        c[a] = *val * merge_sign(*idx, idx.complement(n)) as f64;
    }
    let normal = DVector::from_iterator(n, c.iter().map(|z| z.conj()));
    let normal = &normal / Complex64::new(normal.norm(), 0.0);
    complement_basis(n, &[normal])
}

/// Smallest plane value; exact at `p ∈ {0, 1, n-1, n}`, multistart otherwise.
pub fn min_over_grassmannian<S: Scalar>(omega: &Form<S>, p: usize, opts: &OptimizerOptions) -> Result<GrassmannMin> {
    Ok(minimize_rep(HermitianRep::new(omega, p)?, opts))
}

/// Plane minimum of a Hermitian representation; exact at `p ∈ {0, 1, n-1, n}`.
pub fn minimize_rep(rep: HermitianRep, opts: &OptimizerOptions) -> GrassmannMin {
    let (n, p) = (rep.n, rep.p);
    if p <= 1 || p + 1 >= n {
        let s = Spectrum::of(rep);
        let frame = eigen_plane(&s);
        let value = s.values[0];
        return GrassmannMin { value, witness: PlaneWitness { frame, value }, exact: true, restart_values: vec![], restart_frames: vec![] };
    }
    optimize(&rep, opts)
}

/// Multistart descent regardless of `p` (used to cross-check the exact paths).
pub fn optimize(rep: &HermitianRep, opts: &OptimizerOptions) -> GrassmannMin {
    let h = rep.hermitian_part();
    let res = multistart(&h, rep.n, rep.p, opts);
    let mut value = res.value;
    let mut frame = res.frame;
    // Coordinate planes are free extra starts.
    for (a, &idx) in rep.indices.iter().enumerate() {
        let v = rep.matrix[(a, a)].re;
        if v < value {
            value = v;
            frame = coordinate_frame(rep.n, idx);
        }
    }
    GrassmannMin {
        value,
        witness: PlaneWitness { frame, value },
        exact: false,
        restart_values: res.restart_values,
        restart_frames: res.restart_frames,
    }
}

/// Strict weak positivity (transversality).
pub fn check_transverse<S: Scalar>(omega: &Form<S>, opts: &OptimizerOptions) -> Result<ConeVerdict> {
    let rep = HermitianRep::from_form(omega)?;
    check_transverse_rep(rep, opts)
}

pub fn check_transverse_rep(rep: HermitianRep, opts: &OptimizerOptions) -> Result<ConeVerdict> {
    let (n, p) = (rep.n, rep.p);
    let scale = rep.scale();
    let s = Spectrum::of(rep.clone());
    if p <= 1 || p + 1 >= n {
        let mut v = classify_spectrum(&s, Cone::WP);
        if v.status == Membership::NotIn {
            let frame = eigen_plane(&s);
            v.witness = Some(ConeWitness::Plane(PlaneWitness { frame, value: s.values[0] }));
        }
        return Ok(v);
    }
    if s.normalized_min() > ZERO_BAND {
        return Ok(ConeVerdict {
            cone: Cone::WP,
            status: Membership::StrictlyIn,
            witness: None,
            min_value: Some(s.values[0]),
            certified: true,
        });
    }
    let m = optimize(&rep, opts);
    let norm = if scale == 0.0 { 0.0 } else { m.value / scale };
    let (status, witness) = if norm < -ZERO_BAND {
        (Membership::NotIn, Some(ConeWitness::Plane(m.witness)))
    } else if norm > ZERO_BAND {
        (Membership::StrictlyIn, None)
    } else {
        (Membership::Unknown, Some(ConeWitness::Plane(m.witness)))
    };
    Ok(ConeVerdict { cone: Cone::WP, status, witness, min_value: Some(m.value), certified: false })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpFailure {
    NotPure(usize),
    NotSimple(usize),
    Mismatch,
}

impl std::fmt::Display for SpFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpFailure::NotPure(j) => write!(f, "factor {j} is not a (p,0)-form"),
            SpFailure::NotSimple(j) => write!(f, "factor {j} is not simple"),
            SpFailure::Mismatch => write!(f, "sum of squares differs from the form"),
        }
    }
}

/// Checks `Ω = σ_p Σ η_j ∧ η̄_j` with every `η_j` simple.
pub fn verify_sp_decomposition<S: Scalar>(omega: &Form<S>, decomposition: &[Form<S>]) -> std::result::Result<(), SpFailure> {
    let mut sum = Form::zero(omega.n());
    for (j, eta) in decomposition.iter().enumerate() {
        if eta.is_zero() {
            continue;
        }
        match eta.pure_bidegree() {
            Some((_, 0)) => {}
            _ => return Err(SpFailure::NotPure(j)),
        }
        if !eta.is_simple().map_err(|_| SpFailure::NotPure(j))? {
            return Err(SpFailure::NotSimple(j));
        }
        sum = sum.add(&square(eta));
    }
    let diff = sum.sub(omega);
    let scale = 1f64.max(omega.max_abs());
    if diff.terms().all(|(_, c)| c.is_negligible(1e-9 * scale)) {
        Ok(())
    } else {
        Err(SpFailure::Mismatch)
    }
}

/// `Ψ ∈ WP^k` with `f(Ω, Ψ) < 0`: a proof that `Ω ∉ SP^p`.
#[derive(Clone, Debug)]
pub struct DualWitness {
    pub psi: ExactForm,
    pub pairing: f64,
    pub psi_verdict: Box<ConeVerdict>,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub candidates: usize,
    pub optimizer: OptimizerOptions,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { candidates: 16, optimizer: OptimizerOptions::default() }
    }
}

/// Matrix `Q` with `f(Ω, σ_k η∧η̄) = Σ Q_{JJ'} η_J conj(η_J')` over `(k,0)`-forms `η`.
pub fn pairing_matrix<S: Scalar>(omega: &Form<S>, p: usize) -> (Vec<MultiIndex>, DMatrix<Complex64>) {
    let n = omega.n();
    let k = n - p;
    let idx = MultiIndex::all(n, k);
    let factor = (sigma(k) * sigma_inv(n)).to_complex();
    let mut q = DMatrix::zeros(idx.len(), idx.len());
    for (a, &j) in idx.iter().enumerate() {
        for (b, &jp) in idx.iter().enumerate() {
            let (i, ip) = (j.complement(n), jp.complement(n));
            let c = omega.coeff(i, ip).to_complex();
            if c.norm() == 0.0 {
                continue;
            }
            let (sign, _) = monomial_product((i, ip), (j, jp)).expect("complementary monomials");
            q[(a, b)] = c * factor * sign as f64;
        }
    }
    (idx, q)
}

fn rationalize_form(f: &FloatForm) -> ExactForm {
    let scale = f.max_abs();
    let mut out = ExactForm::zero(f.n());
    if scale == 0.0 {
        return out;
    }
    for (&(i, j), c) in f.terms() {
        out.add_term(i, j, GaussianRational::approximate(c / scale, MAX_DENOMINATOR));
    }
    out
}

fn holomorphic_from(idx: &[MultiIndex], v: &DVector<Complex64>, n: usize) -> FloatForm {
    let mut out = FloatForm::zero(n);
    for (a, &i) in idx.iter().enumerate() {
        out.add_term(i, MultiIndex::EMPTY, v[a]);
    }
    out
}

/// Searches for a dual witness `Ψ ∈ WP^k` with `f(Ω, Ψ) < 0`. `None` is inconclusive.
pub fn sp_nonmembership_search<S: Scalar>(omega: &Form<S>, budget: &SearchBudget) -> Result<Option<DualWitness>> {
    let p = pp_degree(omega)?;
    let n = omega.n();
    let k = n - p;
    let om = omega.to_float();
    let tol = ZERO_BAND * 1f64.max(om.max_abs());
    let (idx, q) = pairing_matrix(&om, p);
    let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(q.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    // A negative direction of Q: Ψ = σ_k η∧η̄ is strongly positive.
    if eig.eigenvalues[order[0]] < -tol {
        let u = eig.eigenvectors.column(order[0]).map(|z| z.conj());
        let eta = rationalize_form(&holomorphic_from(&idx, &u, n));
        let psi = square(&eta);
        let pairing = volume_pairing(&om, &psi.to_float())?.re;
        if pairing < -tol {
            let verdict = ConeVerdict {
                cone: Cone::SP,
                status: Membership::In,
                witness: Some(ConeWitness::Decomposition(vec![eta])),
                min_value: None,
                certified: true,
            };
            return Ok(Some(DualWitness { psi, pairing, psi_verdict: Box::new(verdict) }));
        }
    }
    // When all k-vectors are simple the three cones coincide.
    if k <= 1 || k + 1 >= n {
        return Ok(None);
    }
    let id: ExactForm = identity_form(n, k);
    let base = volume_pairing(&om, &id.to_float())?.re;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.optimizer.seed);
    for attempt in 0..budget.candidates {
        // Large directions of Q, perturbed after the first pass.
        let top = order[order.len() - 1 - (attempt % order.len())];
        let mut u = eig.eigenvectors.column(top).map(|z| z.conj());
        if attempt >= order.len() {
            for z in u.iter_mut() {
                *z += Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            }
        }
        let zeta = rationalize_form(&holomorphic_from(&idx, &u, n));
        if zeta.is_zero() || zeta.is_simple()? {
            continue;
        }
        let zsq = square(&zeta);
        let weight = volume_pairing(&om, &zsq.to_float())?.re;
        let top_simple = -min_over_grassmannian(&zsq.neg(), k, &budget.optimizer)?.value;
        if top_simple <= 0.0 || weight <= 0.0 {
            continue;
        }
        let c = GaussianRational::real(crate::scalar::approximate_rational(0.9 / top_simple, MAX_DENOMINATOR));
        if base - c.to_complex().re * weight >= -tol {
            continue;
        }
        let psi = id.sub(&zsq.scale(&c));
        let verdict = check_transverse(&psi, &budget.optimizer)?;
        if verdict.status != Membership::StrictlyIn {
            continue;
        }
        let pairing = volume_pairing(&om, &psi.to_float())?.re;
        if pairing < -tol {
            return Ok(Some(DualWitness { psi, pairing, psi_verdict: Box::new(verdict) }));
        }
    }
    Ok(None)
}

/// A transverse `(2,2)`-form in dimension 4 with a negative eigenvalue:
/// `σ_2 Σ φ_I∧φ̄_I − (3/4) σ_2 (φ12+φ34)∧conj(φ12+φ34)`.
/// Eigenvalues `{-1/2, 1, 1, 1, 1, 1}`; plane values are at least `1/4`.
pub fn wp_interior_fixture() -> ExactForm {
    let n = 4;
    let zeta = ExactForm::holomorphic(n, MultiIndex::from_one_based(&[1, 2]))
        .add(&ExactForm::holomorphic(n, MultiIndex::from_one_based(&[3, 4])));
    identity_form::<GaussianRational>(n, 2).sub(&square(&zeta).scale(&GaussianRational::from_frac(3, 4)))
}

/// Looks for a transverse `(p,p)`-form with a negative eigenvalue by moving
/// from `σ_p Σ φ_I∧φ̄_I` along `−σ_p ζ∧ζ̄` for non-simple `ζ`, stopping
/// between the eigenvalue threshold `1/|ζ|²` and the plane threshold
/// `1/max|ζ(V)|²`.
pub fn search_wp_interior_negative(n: usize, p: usize, opts: &OptimizerOptions) -> Result<Option<ExactForm>> {
    if p < 2 || p + 2 > n {
        return Ok(None);
    }
    let idx = MultiIndex::all(n, p);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let id: ExactForm = identity_form(n, p);
    for _ in 0..32 {
        let mut zeta = ExactForm::zero(n);
        for &i in &idx {
            let c: i64 = rng.gen_range(-2..=2);
            zeta.add_term(i, MultiIndex::EMPTY, GaussianRational::from_ints(c, 0));
        }
        if zeta.is_zero() || zeta.is_simple()? {
            continue;
        }
        let zsq = square(&zeta);
        let norm2: f64 = zeta.terms().map(|(_, c)| c.to_complex().norm_sqr()).sum();
        let top = -min_over_grassmannian(&zsq.neg(), p, opts)?.value;
        let (lo, hi) = (1.0 / norm2, 1.0 / top);
        if hi <= lo * 1.05 {
            continue;
        }
        let s = GaussianRational::real(crate::scalar::approximate_rational((lo + hi) / 2.0, 1000));
        let omega = id.sub(&zsq.scale(&s));
        let spec = spectrum(&omega)?;
        if spec.values[0] >= -1e-6 {
            continue;
        }
        let wp = check_transverse(&omega, &OptimizerOptions { restarts: opts.restarts.max(128), ..*opts })?;
        if wp.status == Membership::StrictlyIn && wp.min_value.unwrap_or(0.0) > 1e-6 {
            return Ok(Some(omega));
        }
    }
    Ok(None)
}

/// `ω` with `ω^{n-1}/(n-1)! = Ω` for a strictly positive `(n-1,n-1)`-form `Ω`.
pub fn invert_balanced<S: Scalar>(omega: &Form<S>) -> Result<FloatForm> {
    let n = omega.n();
    if n < 2 {
        return Err(Error::Degree("inversion needs n >= 2".into()));
    }
    let s = Spectrum::of(HermitianRep::new(omega, n - 1)?);
    if s.normalized_min() <= ZERO_BAND {
        return Err(Error::NotStrictlyPositive(s.values[0]));
    }
    let log_total: f64 = s.values.iter().map(|l| l.ln()).sum::<f64>() / (n as f64 - 1.0);
    let target = omega.to_float().scale(&Complex64::new(factorial(n - 1), 0.0));
    let mut best: Option<(f64, FloatForm)> = None;
    // Two conventions for reading the (1,0)-factor off Ψ_j = ψ̂_j; keep the one that reproduces Ω.
    for conj_first in [true, false] {
        let mut w = FloatForm::zero(n);
        for j in 0..n {
            let mut psi = FloatForm::zero(n);
            for (a_pos, &idx) in s.rep.indices.iter().enumerate() {
                let a = idx.complement(n).indices()[0];
                let c = s.vectors[j][a_pos];
                let c = if conj_first { c.conj() } else { c };
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                psi.add_term(MultiIndex::from_indices(&[a]), MultiIndex::EMPTY, c * sign);
            }
            let lambda = (log_total - s.values[j].ln()).exp();
            w = w.add(&square(&psi).scale(&Complex64::new(lambda, 0.0)));
        }
        let residual = w.power(n - 1).sub(&target).max_abs() / 1f64.max(target.max_abs());
        if best.as_ref().map_or(true, |(r, _)| residual < *r) {
            best = Some((residual, w));
        }
    }
    let (residual, w) = best.expect("two candidates");
    if residual > 1e-8 {
        return Err(Error::InversionResidual(residual));
    }
    Ok(w)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

/// Pullback `L*Ω` for `L` given as `n` rows of length `m`: `L*φ_a = Σ_b L[a][b] φ'_b`.
pub fn pullback<S: Scalar>(l: &[Vec<S>], omega: &Form<S>) -> Result<Form<S>> {
    let n = omega.n();
    if l.len() != n {
        return Err(Error::DimensionMismatch(n, l.len()));
    }
    let m = l.first().map_or(0, |r| r.len());
    if l.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(m, 0));
    }
    let image = |a: usize, bar: bool| -> Form<S> {
        let mut f = Form::zero(m);
        for (b, c) in l[a].iter().enumerate() {
            let i = MultiIndex::from_indices(&[b]);
            if bar {
                f.add_term(MultiIndex::EMPTY, i, c.conj());
            } else {
                f.add_term(i, MultiIndex::EMPTY, c.clone());
            }
        }
        f
    };
    let mut out = Form::zero(m);
    for (&(hol, anti), c) in omega.terms() {
        let mut acc = Form::constant(m, c.clone());
        for a in hol.indices() {
            acc = acc.wedge(&image(a, false));
        }
        for a in anti.indices() {
            acc = acc.wedge(&image(a, true));
        }
        out = out.add(&acc);
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{kahler_form, positive_monomial};

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::from_one_based(v)
    }

    fn non_simple_square() -> ExactForm {
        let z = ExactForm::holomorphic(4, mi(&[1, 2])).add(&ExactForm::holomorphic(4, mi(&[3, 4])));
        square(&z)
    }

    fn diag(n: usize, entries: &[(usize, i64)]) -> ExactForm {
        entries.iter().fold(ExactForm::zero(n), |acc, &(j, c)| {
            acc.add(&positive_monomial::<GaussianRational>(n, mi(&[j])).scale(&GaussianRational::from_ints(c, 0)))
        })
    }

    #[test]
    fn spectra_of_standard_forms() {
        let (vals, _) = eigen_decompose(&kahler_form::<GaussianRational>(4)).unwrap();
        assert!(vals.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let (vals, _) = eigen_decompose(&non_simple_square()).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 0.0, 2.0];
        for (a, b) in vals.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        let (vals, _) = eigen_decompose(&diag(2, &[(1, 1), (2, -1)])).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_from_eigenforms() {
        let f = wp_interior_fixture();
        let s = spectrum(&f).unwrap();
        assert!(s.reconstruct().approx_eq(&f.to_float(), 1e-9));
    }

    #[test]
    fn non_real_forms_are_rejected() {
        let f = ExactForm::monomial(2, mi(&[1]), mi(&[2]), GaussianRational::from_ints(1, 0));
        assert!(matches!(eigen_decompose(&f), Err(Error::NotReal)));
    }

    #[test]
    fn p_cone_verdicts() {
        assert_eq!(classify_p(&kahler_form::<GaussianRational>(3)).unwrap().status, Membership::StrictlyIn);
        assert_eq!(classify_p(&non_simple_square()).unwrap().status, Membership::In);
        let v = classify_p(&wp_interior_fixture()).unwrap();
        assert_eq!(v.status, Membership::NotIn);
        assert!(matches!(v.witness, Some(ConeWitness::Eigen { .. })));
    }

    #[test]
    fn plane_values() {
        let f: ExactForm = identity_form(3, 2);
        assert!((evaluate_on_plane(&f, &coordinate_frame(3, mi(&[1, 2]))).unwrap() - 1.0).abs() < 1e-12);
        let d = diag(2, &[(1, 1), (2, -1)]);
        assert!((evaluate_on_plane(&d, &coordinate_frame(2, mi(&[2]))).unwrap() + 1.0).abs() < 1e-12);
        let bad = DMatrix::from_element(3, 2, Complex64::new(1.0, 0.0));
        assert!(evaluate_on_plane(&f, &bad).is_err());
    }

    #[test]
    fn exact_minimum_paths() {
        let d = diag(2, &[(1, 1), (2, -1)]);
        let m = min_over_grassmannian(&d, 1, &OptimizerOptions::default()).unwrap();
        assert!(m.exact);
        assert!((m.value + 1.0).abs() < 1e-12);
        assert!((m.witness.frame[(1, 0)].norm() - 1.0).abs() < 1e-12);
        // p = n-1: the witness plane realizes the minimum.
        let f = diag(4, &[(1, 3), (2, 1), (3, -2), (4, 5)]).power(3);
        let m = min_over_grassmannian(&f, 3, &OptimizerOptions::default()).unwrap();
        let direct = evaluate_on_plane(&f, &m.witness.frame).unwrap();
        assert!((direct - m.value).abs() < 1e-9);
    }

    #[test]
    fn optimizer_agrees_with_exact_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (n, p) in [(3, 1), (4, 3), (5, 4), (4, 1)] {
            let idx = MultiIndex::all(n, p);
            let mut f = FloatForm::zero(n);
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a..] {
                    let c = Complex64::new(rng.gen_range(-1.0..1.0), if i == j { 0.0 } else { rng.gen_range(-1.0..1.0) });
                    let t = FloatForm::monomial(n, i, j, c * sigma(p).to_complex());
                    f = f.add(&t);
                    if i != j {
                        f = f.add(&t.conjugate());
                    }
                }
            }
            let exact = min_over_grassmannian(&f, p, &OptimizerOptions::default()).unwrap();
            let opt = optimize(&HermitianRep::new(&f, p).unwrap(), &OptimizerOptions { restarts: 16, ..Default::default() });
            assert!((exact.value - opt.value).abs() < 1e-8, "{n} {p}: {} vs {}", exact.value, opt.value);
        }
    }

    #[test]
    fn transversality_of_standard_forms() {
        for n in 2..=5 {
            for p in 1..n {
                let f: ExactForm = identity_form(n, p);
                let v = check_transverse(&f, &OptimizerOptions { restarts: 8, ..Default::default() }).unwrap();
                assert_eq!(v.status, Membership::StrictlyIn, "n={n} p={p}");
            }
        }
        let d = diag(2, &[(1, 1), (2, -1)]);
        let v = check_transverse(&d, &OptimizerOptions::default()).unwrap();
        assert_eq!(v.status, Membership::NotIn);
        let Some(ConeWitness::Plane(w)) = v.witness else { panic!("plane witness expected") };
        assert!((w.frame[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wp_fixture_is_transverse_with_negative_eigenvalue() {
        let f = wp_interior_fixture();
        let s = spectrum(&f).unwrap();
        assert!((s.values[0] + 0.5).abs() < 1e-12);
        let m = min_over_grassmannian(&f, 2, &OptimizerOptions::default()).unwrap();
        assert!((m.value - 0.25).abs() < 1e-8, "{}", m.value);
        assert_eq!(check_transverse(&f, &OptimizerOptions::default()).unwrap().status, Membership::StrictlyIn);
    }

    #[test]
    fn search_finds_wp_interior_forms() {
        let f = search_wp_interior_negative(4, 2, &OptimizerOptions { restarts: 32, ..Default::default() })
            .unwrap()
            .expect("a form is found");
        assert!(spectrum(&f).unwrap().values[0] < -1e-6);
        let m = min_over_grassmannian(&f, 2, &OptimizerOptions::default()).unwrap();
        assert!(m.value > 1e-6);
    }

    #[test]
    fn sp_decompositions() {
        let n = 4;
        let om: ExactForm = identity_form(n, 3);
        let dec: Vec<ExactForm> = MultiIndex::all(n, 3).into_iter().map(|a| ExactForm::holomorphic(n, a)).collect();
        assert_eq!(verify_sp_decomposition(&om, &dec), Ok(()));
        let z = ExactForm::holomorphic(4, mi(&[1, 2])).add(&ExactForm::holomorphic(4, mi(&[3, 4])));
        assert_eq!(verify_sp_decomposition(&non_simple_square(), &[z]), Err(SpFailure::NotSimple(0)));
        assert_eq!(verify_sp_decomposition(&ExactForm::zero(3), &[]), Ok(()));
        assert_eq!(verify_sp_decomposition(&om, &dec[..2]), Err(SpFailure::Mismatch));
    }

    #[test]
    fn dual_witnesses() {
        let w = sp_nonmembership_search(&wp_interior_fixture(), &SearchBudget::default()).unwrap().unwrap();
        assert!(w.pairing < 0.0);
        let exact = volume_pairing(&wp_interior_fixture(), &w.psi).unwrap();
        assert!(exact.re < num_rational::BigRational::from_integer(0.into()));
        let w = sp_nonmembership_search(&non_simple_square(), &SearchBudget::default()).unwrap();
        if let Some(w) = w {
            assert!(w.pairing < 0.0);
            assert_eq!(w.psi_verdict.status, Membership::StrictlyIn);
        }
        let sp: ExactForm = identity_form(4, 2);
        assert!(sp_nonmembership_search(&sp, &SearchBudget::default()).unwrap().is_none());
    }

    #[test]
    fn inversion_examples() {
        let n = 3;
        let w = diag(n, &[(1, 1), (2, 2), (3, 3)]);
        let big = w.power(2).scale(&GaussianRational::from_frac(1, 2));
        let back = invert_balanced(&big).unwrap();
        assert!(back.approx_eq(&w.to_float(), 1e-10));
        let id: ExactForm = identity_form(4, 3);
        assert!(invert_balanced(&id).unwrap().approx_eq(&kahler_form::<GaussianRational>(4).to_float(), 1e-10));
        assert!(matches!(invert_balanced(&diag(2, &[(1, 1), (2, -1)])), Err(Error::NotStrictlyPositive(_))));
    }

    #[test]
    fn pullback_examples() {
        let one = GaussianRational::from_ints(1, 0);
        let zero = GaussianRational::from_ints(0, 0);
        let om = kahler_form::<GaussianRational>(3);
        let id: Vec<Vec<GaussianRational>> =
            (0..3).map(|a| (0..3).map(|b| if a == b { one.clone() } else { zero.clone() }).collect()).collect();
        assert_eq!(pullback(&id, &om).unwrap(), om);
        let incl: Vec<Vec<GaussianRational>> =
            (0..3).map(|a| (0..2).map(|b| if a == b { one.clone() } else { zero.clone() }).collect()).collect();
        assert_eq!(pullback(&incl, &om).unwrap(), kahler_form(2));
        assert!(pullback(&incl[..2], &om).is_err());
    }
}
