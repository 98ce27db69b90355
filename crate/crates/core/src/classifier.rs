//! Deciding the classes pK, pWK, pS and pPL of a structure.
//!
//! The closure conditions are linear and are solved exactly. Transversality
//! is a semi-infinite condition handled by a cutting-plane loop: a linear
//! program maximizes the smallest value over an accumulated set of planes and
//! the Grassmannian optimizer supplies new planes. A negative answer is only
//! reported with a current certificate that passes exact verification.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{identity_form, sigma, square, volume_pairing, ExactForm, Monomial, MultiIndex, PVector};
use crate::grassmann::{plucker, random_frame, OptimizerOptions};
use crate::linalg::{self, Echelon, SparseRow};
use crate::lp;
use crate::nilmanifold::{
    find_simple_exact_holomorphic, pluriclosed_obstruction, verify_simple_exact, ManifoldSpec, SimpleExactSearch,
    SimpleSearchBudget,
};
use crate::positivity::{check_transverse, coordinate_frame, minimize_rep, HermitianRep, Membership, MAX_DENOMINATOR};
use crate::scalar::{approximate_rational, GaussianRational};

/// Slack at or below which the cutting-plane loop stops looking for a form.
const SLACK_TOL: f64 = 1e-7;
/// Weight of the `|c|²` term in the slack program.
const LP_REGULARIZATION: f64 = 1e-3;
/// Distinct violated planes added per round.
const CUTS_PER_ROUND: usize = 8;
/// Dual weights below this are dropped.
const WEIGHT_DROP: f64 = 1e-12;
/// Largest denominator tried when snapping a witness plane to an exact one.
const PLANE_DENOMINATOR: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClosureClass {
    K,
    WK,
    S,
    PL,
}

impl ClosureClass {
    /// Strongest first.
    pub const ALL: [ClosureClass; 4] = [ClosureClass::K, ClosureClass::WK, ClosureClass::S, ClosureClass::PL];

    pub fn name(self) -> &'static str {
        match self {
            ClosureClass::K => "K",
            ClosureClass::WK => "WK",
            ClosureClass::S => "S",
            ClosureClass::PL => "PL",
        }
    }

    pub fn label(self, p: usize) -> String {
        format!("{p}{}", self.name())
    }
}

impl fmt::Display for ClosureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().trim_start_matches(|c: char| c.is_ascii_digit()) {
            "K" => Ok(ClosureClass::K),
            "WK" => Ok(ClosureClass::WK),
            "S" => Ok(ClosureClass::S),
            "PL" => Ok(ClosureClass::PL),
            _ => Err(Error::Parse(format!("unknown class {s:?} (expected K, WK, S or PL)"))),
        }
    }
}

fn one() -> GaussianRational {
    GaussianRational::from_ints(1, 0)
}

fn real_scalar(x: &BigRational) -> GaussianRational {
    GaussianRational::real(x.clone())
}

/// Real `(p,p)`-forms: `σ_p φ_I∧φ̄_I`, and `f + f̄`, `if + conj(if)` for `f = σ_p φ_I∧φ̄_K`, `I < K`.
pub fn real_pp_basis(n: usize, p: usize) -> Vec<ExactForm> {
    let idx = MultiIndex::all(n, p);
    let s = sigma(p);
    let mut out = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        out.push(ExactForm::monomial(n, i, i, s.clone()));
        for &k in &idx[a + 1..] {
            let f = ExactForm::monomial(n, i, k, s.clone());
            let g = f.scale(&GaussianRational::i());
            out.push(f.add(&f.conjugate()));
            out.push(g.add(&g.conjugate()));
        }
    }
    out
}

/// Real forms `Ψ + Ψ̄` with `Ψ` of bidegree `(a,b)`, `a > b`.
pub fn real_pair_basis(n: usize, a: usize, b: usize) -> Vec<ExactForm> {
    let mut out = Vec::new();
    for i in MultiIndex::all(n, a) {
        for j in MultiIndex::all(n, b) {
            let f = ExactForm::monomial(n, i, j, one());
            let g = f.scale(&GaussianRational::i());
            out.push(f.add(&f.conjugate()));
            out.push(g.add(&g.conjugate()));
        }
    }
    out
}

/// A real basis of the complex `(a,b)`-forms: `m` and `i·m` for each monomial.
pub fn complex_basis(n: usize, a: usize, b: usize) -> Vec<ExactForm> {
    let mut out = Vec::new();
    for i in MultiIndex::all(n, a) {
        for j in MultiIndex::all(n, b) {
            out.push(ExactForm::monomial(n, i, j, one()));
            out.push(ExactForm::monomial(n, i, j, GaussianRational::i()));
        }
    }
    out
}

/// Real unknowns, complex equations split into real and imaginary rows.
struct RealSystem {
    ncols: usize,
    rows: BTreeMap<(usize, Monomial, bool), SparseRow<BigRational>>,
}

impl RealSystem {
    fn new(unknowns: &[ExactForm], op: impl Fn(usize, &ExactForm) -> Vec<ExactForm>) -> Self {
        let mut rows: BTreeMap<(usize, Monomial, bool), SparseRow<BigRational>> = BTreeMap::new();
        for (col, u) in unknowns.iter().enumerate() {
            for (slot, img) in op(col, u).into_iter().enumerate() {
                for (&m, c) in img.terms() {
                    if !c.re.is_zero() {
                        rows.entry((slot, m, false)).or_default().insert(col, c.re.clone());
                    }
                    if !c.im.is_zero() {
                        rows.entry((slot, m, true)).or_default().insert(col, c.im.clone());
                    }
                }
            }
        }
        RealSystem { ncols: unknowns.len(), rows }
    }

    fn kernel(&self) -> Vec<SparseRow<BigRational>> {
        let eqs: Vec<_> = self.rows.values().cloned().collect();
        linalg::kernel(self.ncols, &eqs)
    }

    /// A particular solution with the given right-hand sides per slot.
    fn solve(&self, targets: &[ExactForm]) -> Option<SparseRow<BigRational>> {
        let mut rhs: BTreeMap<(usize, Monomial, bool), BigRational> = BTreeMap::new();
        for (slot, t) in targets.iter().enumerate() {
            for (&m, c) in t.terms() {
                if !c.re.is_zero() {
                    rhs.insert((slot, m, false), c.re.clone());
                }
                if !c.im.is_zero() {
                    rhs.insert((slot, m, true), c.im.clone());
                }
            }
        }
        let mut eqs = Vec::new();
        for (key, row) in &self.rows {
            eqs.push((row.clone(), rhs.remove(key).unwrap_or_else(BigRational::zero)));
        }
        // Target entries no unknown can reach.
        for (_, v) in rhs {
            eqs.push((SparseRow::new(), v));
        }
        linalg::solve(self.ncols, &eqs).map(|s| s.particular)
    }
}

fn combine(n: usize, unknowns: &[ExactForm], x: &SparseRow<BigRational>, range: std::ops::Range<usize>) -> ExactForm {
    x.iter()
        .filter(|(c, _)| range.contains(c))
        .fold(ExactForm::zero(n), |acc, (&c, v)| acc.add(&unknowns[c].scale(&real_scalar(v))))
}

/// Auxiliary unknowns of a class at degree `p`.
fn auxiliary_basis(n: usize, p: usize, class: ClosureClass) -> Vec<ExactForm> {
    match class {
        ClosureClass::K | ClosureClass::PL => vec![],
        ClosureClass::WK => complex_basis(n, p, p - 1),
        ClosureClass::S => ((p + 1)..=(2 * p).min(n)).flat_map(|a| real_pair_basis(n, a, 2 * p - a)).collect(),
    }
}

/// All invariant solutions of a class's linear closure equations.
#[derive(Clone, Debug)]
pub struct ClosureSubspace {
    pub p: usize,
    pub class: ClosureClass,
    /// Pairs `(Ω, aux)` spanning the solutions: `aux` is `α` with `∂Ω = ∂∂̄α`
    /// for pWK, the sum of the components `Ψ^{a,b}`, `a ≠ b`, for pS, and zero otherwise.
    pub generators: Vec<(ExactForm, ExactForm)>,
    /// Indices of generators whose `Ω` parts form a basis of the projection.
    pub omega_basis: Vec<usize>,
}

impl ClosureSubspace {
    pub fn parameters(&self) -> usize {
        self.generators.len()
    }

    /// `Σ c_j · generators[j]`.
    pub fn combine(&self, n: usize, c: &[BigRational]) -> (ExactForm, ExactForm) {
        let mut omega = ExactForm::zero(n);
        let mut aux = ExactForm::zero(n);
        for ((o, a), x) in self.generators.iter().zip(c) {
            omega = omega.add(&o.scale(&real_scalar(x)));
            aux = aux.add(&a.scale(&real_scalar(x)));
        }
        (omega, aux)
    }
}

fn check_degree(spec: &ManifoldSpec, p: usize) -> Result<()> {
    if p == 0 || p >= spec.n {
        return Err(Error::OutOfRange(format!("p = {p} outside 1..{}", spec.n.saturating_sub(1))));
    }
    Ok(())
}

pub fn closure_subspace(spec: &ManifoldSpec, p: usize, class: ClosureClass) -> Result<ClosureSubspace> {
    check_degree(spec, p)?;
    let n = spec.n;
    let omega_part = real_pp_basis(n, p);
    let r = omega_part.len();
    let mut unknowns = omega_part;
    unknowns.extend(auxiliary_basis(n, p, class));
    let system = RealSystem::new(&unknowns, |col, u| match class {
        ClosureClass::K | ClosureClass::S => vec![spec.d(u)],
        ClosureClass::PL => vec![spec.del(&spec.delbar(u))],
        ClosureClass::WK if col < r => vec![spec.del(u)],
        ClosureClass::WK => vec![spec.del(&spec.delbar(u)).neg()],
    });
    let kernel = system.kernel();
    let mut generators = Vec::new();
    let mut omega_basis = Vec::new();
    let mut ech: Echelon<BigRational> = Echelon::new(r);
    for v in &kernel {
        let proj: SparseRow<BigRational> = v.iter().filter(|(c, _)| **c < r).map(|(c, x)| (*c, x.clone())).collect();
        if ech.insert(&proj) {
            omega_basis.push(generators.len());
        }
        generators.push((combine(n, &unknowns, v, 0..r), combine(n, &unknowns, v, r..unknowns.len())));
    }
    Ok(ClosureSubspace { p, class, generators, omega_basis })
}

/// The auxiliary part completing a given `Ω` for the class (`α` for pWK,
/// the off-diagonal components for pS, zero otherwise), if one exists.
pub fn auxiliary_for(spec: &ManifoldSpec, p: usize, class: ClosureClass, omega: &ExactForm) -> Option<ExactForm> {
    let n = spec.n;
    let unknowns = auxiliary_basis(n, p, class);
    let aux = match class {
        ClosureClass::K | ClosureClass::PL => ExactForm::zero(n),
        ClosureClass::WK => {
            let sys = RealSystem::new(&unknowns, |_, a| vec![spec.del(&spec.delbar(a))]);
            combine(n, &unknowns, &sys.solve(&[spec.del(omega)])?, 0..unknowns.len())
        }
        ClosureClass::S => {
            let sys = RealSystem::new(&unknowns, |_, a| vec![spec.d(a)]);
            combine(n, &unknowns, &sys.solve(&[spec.d(omega).neg()])?, 0..unknowns.len())
        }
    };
    check_closure(spec, p, class, omega, &aux).ok().map(|_| aux)
}

/// Exact check that `(omega, aux)` satisfies the class's closure equations.
pub fn check_closure(spec: &ManifoldSpec, p: usize, class: ClosureClass, omega: &ExactForm, aux: &ExactForm) -> std::result::Result<(), String> {
    if !omega.is_real() {
        return Err("the form is not real".into());
    }
    if omega.bidegrees().iter().any(|&b| b != (p, p)) {
        return Err(format!("the form is not of bidegree ({p},{p})"));
    }
    match class {
        ClosureClass::K => {
            if !spec.d(omega).is_zero() {
                return Err("dΩ ≠ 0".into());
            }
        }
        ClosureClass::WK => {
            if aux.bidegrees().iter().any(|&b| b != (p, p - 1)) {
                return Err(format!("the potential is not of bidegree ({p},{})", p - 1));
            }
            if spec.del(omega) != spec.del(&spec.delbar(aux)) {
                return Err("∂Ω ≠ ∂∂̄α".into());
            }
        }
        ClosureClass::S => {
            if !aux.is_real() || aux.bidegrees().contains(&(p, p)) {
                return Err("the auxiliary components must be real and off the (p,p) slot".into());
            }
            if !spec.d(&omega.add(aux)).is_zero() {
                return Err("d(Ω + Σ Ψ^{a,b}) ≠ 0".into());
            }
        }
        ClosureClass::PL => {
            if !spec.del(&spec.delbar(omega)).is_zero() {
                return Err("∂∂̄Ω ≠ 0".into());
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateCase {
    /// `T = ∂S̄ + ∂̄S`.
    BoundaryComponent,
    /// `T = ∂S̄ + ∂̄S` with `∂∂̄S = 0`.
    ClosedBoundaryComponent,
    /// `T = dR` with `R` real.
    Boundary,
    /// `T = i∂∂̄A` with `A` real.
    DdbarExact,
    /// `T = σ_k α∧ᾱ` with `α = ∂β` simple, `∂̄β = 0`.
    SimpleExactHolomorphic,
}

impl CertificateCase {
    pub fn for_class(class: ClosureClass) -> Self {
        match class {
            ClosureClass::K => CertificateCase::BoundaryComponent,
            ClosureClass::WK => CertificateCase::ClosedBoundaryComponent,
            ClosureClass::S => CertificateCase::Boundary,
            ClosureClass::PL => CertificateCase::DdbarExact,
        }
    }

    /// The weakest class this certificate excludes.
    pub fn excludes(self) -> ClosureClass {
        match self {
            CertificateCase::BoundaryComponent => ClosureClass::K,
            CertificateCase::ClosedBoundaryComponent => ClosureClass::WK,
            CertificateCase::Boundary => ClosureClass::S,
            CertificateCase::DdbarExact | CertificateCase::SimpleExactHolomorphic => ClosureClass::PL,
        }
    }
}

/// An invariant strongly positive `(k,k)`-form `T = Σ w_i σ_k η_i∧η̄_i`,
/// `k = n − p`, orthogonal to every closed form of the class.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentCertificate {
    pub case: CertificateCase,
    pub k: usize,
    pub t: ExactForm,
    /// Nonnegative weights and simple `(k,0)`-forms.
    pub generators: Vec<(BigRational, ExactForm)>,
    /// `S`, `R`, `A`, or `β` for the simple exact case.
    pub potential: ExactForm,
    pub alpha: Option<ExactForm>,
}

impl CurrentCertificate {
    /// Builds the generators of a form `Σ c_I φ_I∧φ̄_I` with `c_I / σ_k ≥ 0`.
    pub fn from_diagonal(case: CertificateCase, t: ExactForm, potential: ExactForm) -> Result<Self> {
        let mut generators = Vec::new();
        let mut k = 0;
        for (&(i, j), c) in t.terms() {
            if i != j {
                return Err(Error::Certificate(format!("{} is off the diagonal", crate::exterior::monomial_name(i, j))));
            }
            k = i.degree();
            let w = c * &sigma(k).inv().expect("σ_k ≠ 0");
            if !w.is_real() || w.re.is_negative() {
                return Err(Error::Certificate("negative diagonal weight".into()));
            }
            generators.push((w.re, ExactForm::holomorphic(t.n(), i)));
        }
        Ok(CurrentCertificate { case, k, t, generators, potential, alpha: None })
    }
}

/// Exact re-verification; the error names the failing condition.
pub fn verify_certificate(spec: &ManifoldSpec, cert: &CurrentCertificate) -> std::result::Result<(), String> {
    let n = spec.n;
    let k = cert.k;
    if k == 0 || k >= n {
        return Err(format!("degree k = {k} outside 1..{}", n - 1));
    }
    if cert.t.is_zero() {
        return Err("T vanishes".into());
    }
    if !cert.t.is_real() {
        return Err("T is not real".into());
    }
    let mut sum = ExactForm::zero(n);
    for (w, eta) in &cert.generators {
        if w.is_negative() {
            return Err("negative generator weight".into());
        }
        if eta.bidegrees().iter().any(|&b| b != (k, 0)) {
            return Err(format!("generator is not a ({k},0)-form"));
        }
        if !eta.is_simple().map_err(|e| e.to_string())? {
            return Err("generator is not simple".into());
        }
        sum = sum.add(&square(eta).scale(&real_scalar(w)));
    }
    if sum != cert.t {
        return Err("T differs from the weighted sum of simple squares".into());
    }
    let s = &cert.potential;
    let lhs = match cert.case {
        CertificateCase::BoundaryComponent | CertificateCase::ClosedBoundaryComponent => {
            if s.bidegrees().iter().any(|&b| b != (k, k - 1)) {
                return Err(format!("S is not a ({k},{})-form", k - 1));
            }
            if cert.case == CertificateCase::ClosedBoundaryComponent && !spec.del(&spec.delbar(s)).is_zero() {
                return Err("∂∂̄S ≠ 0".into());
            }
            spec.del(&s.conjugate()).add(&spec.delbar(s))
        }
        CertificateCase::Boundary => {
            if !s.is_real() {
                return Err("R is not real".into());
            }
            if s.bidegrees().iter().any(|&(a, b)| a + b != 2 * k - 1) {
                return Err(format!("R is not a {}-form", 2 * k - 1));
            }
            spec.d(s)
        }
        CertificateCase::DdbarExact => {
            if !s.is_real() || s.bidegrees().iter().any(|&b| b != (k - 1, k - 1)) {
                return Err(format!("A is not a real ({},{})-form", k - 1, k - 1));
            }
            spec.del(&spec.delbar(s)).scale(&GaussianRational::i())
        }
        CertificateCase::SimpleExactHolomorphic => {
            let alpha = cert.alpha.as_ref().ok_or("missing α")?;
            verify_simple_exact(spec, alpha, s)?;
            if square(alpha) != cert.t {
                return Err("T ≠ σ_k α∧ᾱ".into());
            }
            let (_, a) = pluriclosed_obstruction(spec, alpha, s).map_err(|e| e.to_string())?;
            spec.del(&spec.delbar(&a)).scale(&GaussianRational::i())
        }
    };
    if lhs != cert.t {
        return Err(format!("the {:?} equation fails", cert.case));
    }
    Ok(())
}

/// A form of the class that passed the exact closure check and the transversality check.
#[derive(Clone, Debug)]
pub struct YesWitness {
    pub omega: ExactForm,
    pub aux: ExactForm,
    /// Smallest plane value found (unnormalized) and its ratio to the largest entry.
    pub min_value: f64,
    pub normalized_min: f64,
    /// The minimum came from the spectrum rather than from multistart evidence.
    pub certified: bool,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Yes(Box<YesWitness>),
    No(Box<CurrentCertificate>),
    Unknown(String),
}

impl Verdict {
    pub fn status(&self) -> Status {
        match self {
            Verdict::Yes(_) => Status::Yes,
            Verdict::No(_) => Status::No,
            Verdict::Unknown(_) => Status::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug)]
pub struct Budget {
    pub rounds: usize,
    pub optimizer: OptimizerOptions,
    /// Random planes added to the coordinate planes before the first round.
    pub initial_planes: usize,
    pub simple_search: SimpleSearchBudget,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            rounds: 50,
            optimizer: OptimizerOptions::default(),
            initial_planes: 16,
            simple_search: SimpleSearchBudget::default(),
        }
    }
}

impl Budget {
    pub fn with_seed(self, seed: u64) -> Self {
        Budget {
            optimizer: self.optimizer.with_seed(seed),
            simple_search: SimpleSearchBudget { seed, ..self.simple_search },
            ..self
        }
    }
}

/// Slack per round and the final witness count.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CuttingPlaneTrace {
    pub slack: Vec<f64>,
    pub witnesses: usize,
    pub plane_minima: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub p: usize,
    pub class: ClosureClass,
    pub verdict: Verdict,
    pub trace: CuttingPlaneTrace,
}

/// The Ω-parts of a closure subspace prepared for the linear program.
struct LpBasis {
    omega: Vec<ExactForm>,
    aux: Vec<ExactForm>,
    reps: Vec<HermitianRep>,
    scales: Vec<f64>,
    traces: Vec<f64>,
}

impl LpBasis {
    fn new(sub: &ClosureSubspace, p: usize) -> Result<Self> {
        let mut out = LpBasis { omega: vec![], aux: vec![], reps: vec![], scales: vec![], traces: vec![] };
        for &j in &sub.omega_basis {
            let (o, a) = &sub.generators[j];
            let mut rep = HermitianRep::new(o, p)?;
            let s = rep.scale();
            rep.matrix /= Complex64::new(s, 0.0);
            out.traces.push(rep.matrix.diagonal().iter().map(|z| z.re).sum());
            out.omega.push(o.clone());
            out.aux.push(a.clone());
            out.reps.push(rep);
            out.scales.push(s);
        }
        Ok(out)
    }

    fn values(&self, frame: &DMatrix<Complex64>) -> Vec<f64> {
        self.reps.iter().map(|r| r.plane_value(frame)).collect()
    }

    fn combined(&self, c: &[f64]) -> HermitianRep {
        let first = &self.reps[0];
        let mut matrix = DMatrix::zeros(first.dim(), first.dim());
        for (r, &x) in self.reps.iter().zip(c) {
            matrix += &r.matrix * Complex64::new(x, 0.0);
        }
        HermitianRep { n: first.n, p: first.p, indices: first.indices.clone(), matrix }
    }

    /// Rationalized form for normalized coordinates `c`.
    fn exact(&self, n: usize, c: &[f64]) -> (ExactForm, ExactForm) {
        let mut omega = ExactForm::zero(n);
        let mut aux = ExactForm::zero(n);
        for (b, &x) in c.iter().enumerate() {
            let q = real_scalar(&approximate_rational(x / self.scales[b], MAX_DENOMINATOR));
            if q.is_zero() {
                continue;
            }
            omega = omega.add(&self.omega[b].scale(&q));
            aux = aux.add(&self.aux[b].scale(&q));
        }
        (omega, aux)
    }
}

/// Exact plane close to the span of `frame` (orthonormal columns), found by
/// normalizing against the largest Plücker minor and rounding.
pub fn exact_plane(frame: &DMatrix<Complex64>) -> Option<PVector<GaussianRational>> {
    let (n, p) = (frame.nrows(), frame.ncols());
    let indices = MultiIndex::all(n, p);
    let v = plucker(frame, &indices);
    let (best, _) = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))?;
    let rows = indices[best].indices();
    let sub = DMatrix::from_fn(p, p, |r, c| frame[(rows[r], c)]);
    let normalized = frame * sub.try_inverse()?;
    for den in [1u64, 2, 4, 12, 100, 1000, PLANE_DENOMINATOR] {
        let cols: Vec<Vec<GaussianRational>> = (0..p)
            .map(|c| (0..n).map(|r| GaussianRational::approximate(normalized[(r, c)], den)).collect())
            .collect();
        let approx = DMatrix::from_fn(n, p, |r, c| cols[c][r].to_complex());
        let q = crate::grassmann::orthonormalize(&approx);
        let overlap = (frame.adjoint() * &q).determinant().norm();
        if (1.0 - overlap).abs() < 1e-10 {
            return Some(PVector::from_factors(n, &cols));
        }
    }
    None
}

/// `σ_k η∧η̄` for the complement form `η` of an exact plane.
fn plane_current(v: &PVector<GaussianRational>) -> ExactForm {
    let eta = v.complement_form();
    square(&eta)
}

fn plane_eta(v: &PVector<GaussianRational>) -> ExactForm {
    v.complement_form()
}

pub fn decide(spec: &ManifoldSpec, p: usize, class: ClosureClass, budget: &Budget) -> Result<Decision> {
    check_degree(spec, p)?;
    let n = spec.n;
    let k = n - p;
    let mut trace = CuttingPlaneTrace::default();
    let done = |verdict: Verdict, trace: CuttingPlaneTrace| Ok(Decision { p, class, verdict, trace });

    if class == ClosureClass::PL {
        if let SimpleExactSearch::Found { alpha, beta } = find_simple_exact_holomorphic(spec, k, &budget.simple_search)? {
            let (t, _) = pluriclosed_obstruction(spec, &alpha, &beta)?;
            let cert = CurrentCertificate {
                case: CertificateCase::SimpleExactHolomorphic,
                k,
                t,
                generators: vec![(BigRational::from_integer(1.into()), alpha.clone())],
                potential: beta,
                alpha: Some(alpha),
            };
            if verify_certificate(spec, &cert).is_ok() {
                return done(Verdict::No(Box::new(cert)), trace);
            }
        }
    }

    let sub = closure_subspace(spec, p, class)?;
    let basis = LpBasis::new(&sub, p)?;
    if basis.omega.is_empty() || basis.traces.iter().all(|t| t.abs() < 1e-12) {
        // Every closed form has zero trace: the identity current annihilates them.
        let verdict = match identity_certificate(spec, k, class) {
            Some(cert) => Verdict::No(Box::new(cert)),
            None => Verdict::Unknown("the identity current has no exact potential".into()),
        };
        return done(verdict, trace);
    }

    let dim = MultiIndex::all(n, p).len() as f64;
    let mut planes: Vec<DMatrix<Complex64>> = MultiIndex::all(n, p).into_iter().map(|i| coordinate_frame(n, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(budget.optimizer.seed);
    planes.extend((0..budget.initial_planes).map(|_| random_frame(n, p, &mut rng)));
    let mut values: Vec<Vec<f64>> = planes.iter().map(|f| basis.values(f)).collect();

    for round in 0..budget.rounds {
        let sol = lp::max_slack(&values, &basis.traces, dim, 100.0 * dim, LP_REGULARIZATION)?;
        trace.slack.push(sol.t);
        trace.witnesses = planes.len();
        if sol.t <= SLACK_TOL {
            let verdict = match assemble_certificate(spec, p, class, &basis, &planes)? {
                Some(cert) => Verdict::No(Box::new(cert)),
                None => Verdict::Unknown(format!("slack {:.3e} but no certificate verified exactly", sol.t)),
            };
            return done(verdict, trace);
        }
        let rep = basis.combined(&sol.c);
        let scale = rep.scale();
        let opts = budget.optimizer.with_seed(budget.optimizer.seed.wrapping_add(round as u64));
        let m = minimize_rep(rep, &opts);
        trace.plane_minima.push(m.value);
        if m.value > SLACK_TOL * scale {
            let (omega, aux) = basis.exact(n, &sol.c);
            if check_closure(spec, p, class, &omega, &aux).is_ok() {
                let fresh = budget.optimizer.with_seed(budget.optimizer.seed.wrapping_add(1_000_003));
                let v = check_transverse(&omega, &fresh)?;
                if v.status == Membership::StrictlyIn {
                    let min_value = v.min_value.unwrap_or(m.value);
                    let s = omega.to_float().max_abs();
                    let witness = YesWitness {
                        omega,
                        aux,
                        min_value,
                        normalized_min: if s > 0.0 { min_value / s } else { 0.0 },
                        certified: v.certified || m.exact,
                    };
                    return done(Verdict::Yes(Box::new(witness)), trace);
                }
                if let Some(crate::positivity::ConeWitness::Plane(w)) = v.witness {
                    values.push(basis.values(&w.frame));
                    planes.push(w.frame);
                }
            }
        }
        let mut cuts = vec![m.witness.frame.clone()];
        let mut order: Vec<usize> = (0..m.restart_values.len()).filter(|&r| m.restart_values[r] < 0.0).collect();
        order.sort_by(|&a, &b| m.restart_values[a].total_cmp(&m.restart_values[b]));
        for r in order {
            if cuts.len() >= CUTS_PER_ROUND {
                break;
            }
            let f = &m.restart_frames[r];
            if cuts.iter().all(|g| (g.adjoint() * f).determinant().norm() < 1.0 - 1e-6) {
                cuts.push(f.clone());
            }
        }
        for f in cuts {
            values.push(basis.values(&f));
            planes.push(f);
        }
    }
    trace.witnesses = planes.len();
    done(Verdict::Unknown(format!("budget of {} rounds exhausted", budget.rounds)), trace)
}

/// `T = Id_k` when it has an exact potential of the class's kind.
fn identity_certificate(spec: &ManifoldSpec, k: usize, class: ClosureClass) -> Option<CurrentCertificate> {
    let n = spec.n;
    let t: ExactForm = identity_form(n, k);
    let potential = solve_potential(spec, k, class, &t)?;
    let generators = MultiIndex::all(n, k)
        .into_iter()
        .map(|i| (BigRational::from_integer(1.into()), ExactForm::holomorphic(n, i)))
        .collect();
    let cert = CurrentCertificate { case: CertificateCase::for_class(class), k, t, generators, potential, alpha: None };
    verify_certificate(spec, &cert).ok().map(|_| cert)
}

/// Exact potential for `T` in the class's certificate equation.
pub fn solve_potential(spec: &ManifoldSpec, k: usize, class: ClosureClass, t: &ExactForm) -> Option<ExactForm> {
    let n = spec.n;
    let zero = ExactForm::zero(n);
    let (unknowns, x) = match class {
        ClosureClass::K => {
            let u = complex_basis(n, k, k - 1);
            let sys = RealSystem::new(&u, |_, s| vec![spec.del(&s.conjugate()).add(&spec.delbar(s))]);
            let x = sys.solve(std::slice::from_ref(t))?;
            (u, x)
        }
        ClosureClass::WK => {
            let u = complex_basis(n, k, k - 1);
            let sys = RealSystem::new(&u, |_, s| vec![spec.del(&s.conjugate()).add(&spec.delbar(s)), spec.del(&spec.delbar(s))]);
            let x = sys.solve(&[t.clone(), zero])?;
            (u, x)
        }
        ClosureClass::S => {
            let u: Vec<ExactForm> = (k..=(2 * k - 1).min(n)).flat_map(|a| real_pair_basis(n, a, 2 * k - 1 - a)).collect();
            let sys = RealSystem::new(&u, |_, r| vec![spec.d(r)]);
            let x = sys.solve(std::slice::from_ref(t))?;
            (u, x)
        }
        ClosureClass::PL => {
            let u = real_pp_basis(n, k - 1);
            let sys = RealSystem::new(&u, |_, a| vec![spec.del(&spec.delbar(a)).scale(&GaussianRational::i())]);
            let x = sys.solve(std::slice::from_ref(t))?;
            (u, x)
        }
    };
    Some(combine(n, &unknowns, &x, 0..unknowns.len()))
}

/// Nonnegative combination of exact plane currents annihilating the closure
/// subspace, with its potential.
fn assemble_certificate(
    spec: &ManifoldSpec,
    p: usize,
    class: ClosureClass,
    basis: &LpBasis,
    planes: &[DMatrix<Complex64>],
) -> Result<Option<CurrentCertificate>> {
    let n = spec.n;
    let k = n - p;
    // Exact generator pool: coordinate planes first, then every witness that snaps.
    let mut pool: Vec<PVector<GaussianRational>> = MultiIndex::all(n, p).into_iter().map(|i| PVector::basis(n, i)).collect();
    for f in planes.iter().skip(pool.len()) {
        if let Some(v) = exact_plane(f) {
            if !pool.contains(&v) {
                pool.push(v);
            }
        }
    }
    let currents: Vec<ExactForm> = pool.iter().map(plane_current).collect();
    // pairing[g][b] = f(B_b, G_g), exact.
    let pairing: Vec<Vec<GaussianRational>> = currents
        .iter()
        .map(|g| basis.omega.iter().map(|b| volume_pairing(b, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let float_cols: Vec<Vec<f64>> =
        pairing.iter().map(|col| col.iter().map(|x| x.re.to_f64().unwrap_or(0.0)).collect()).collect();
    let Some(w) = lp::nonnegative_kernel(&float_cols)? else {
        return Ok(None);
    };
    let mut support: Vec<usize> = (0..pool.len()).filter(|&g| w[g] > WEIGHT_DROP).collect();
    for _ in 0..4 {
        let Some(exact_w) = project_weights(&pairing, &support, &w) else {
            return Ok(None);
        };
        let negative: Vec<usize> = support.iter().copied().filter(|g| exact_w[g].is_negative()).collect();
        if !negative.is_empty() {
            support.retain(|g| !negative.contains(g));
            continue;
        }
        let gens: Vec<(BigRational, ExactForm)> =
            support.iter().filter(|g| !exact_w[g].is_zero()).map(|&g| (exact_w[&g].clone(), plane_eta(&pool[g]))).collect();
        let t = support
            .iter()
            .fold(ExactForm::zero(n), |acc, g| acc.add(&currents[*g].scale(&real_scalar(&exact_w[g]))));
        if t.is_zero() {
            return Ok(None);
        }
        let Some(potential) = solve_potential(spec, k, class, &t) else {
            return Ok(None);
        };
        let cert = CurrentCertificate { case: CertificateCase::for_class(class), k, t, generators: gens, potential, alpha: None };
        return Ok(verify_certificate(spec, &cert).is_ok().then_some(cert));
    }
    Ok(None)
}

/// Exact weights on `support` in the kernel of the pairing, closest to the float weights.
fn project_weights(pairing: &[Vec<GaussianRational>], support: &[usize], w: &[f64]) -> Option<BTreeMap<usize, BigRational>> {
    if support.is_empty() {
        return None;
    }
    let nb = pairing[0].len();
    let mut eqs: Vec<SparseRow<BigRational>> = Vec::new();
    for b in 0..nb {
        for part in [false, true] {
            let row: SparseRow<BigRational> = support
                .iter()
                .enumerate()
                .filter_map(|(c, &g)| {
                    let x = if part { &pairing[g][b].im } else { &pairing[g][b].re };
                    (!x.is_zero()).then(|| (c, x.clone()))
                })
                .collect();
            if !row.is_empty() {
                eqs.push(row);
            }
        }
    }
    let ns = linalg::kernel(support.len(), &eqs);
    if ns.is_empty() {
        return None;
    }
    let z = DMatrix::from_fn(support.len(), ns.len(), |r, c| ns[c].get(&r).and_then(|x| x.to_f64()).unwrap_or(0.0));
    let y = DVector::from_iterator(support.len(), support.iter().map(|&g| w[g]));
    let lambda = z.clone().svd(true, true).solve(&y, 1e-12).ok()?;
    let mut exact = vec![BigRational::zero(); support.len()];
    for (j, v) in ns.iter().enumerate() {
        let l = approximate_rational(lambda[j], MAX_DENOMINATOR);
        if l.is_zero() {
            continue;
        }
        for (&r, x) in v {
            exact[r] = &exact[r] + &(&l * x);
        }
    }
    if exact.iter().all(|x| x.is_zero()) {
        return None;
    }
    Some(support.iter().copied().zip(exact).collect())
}

/// How a table cell obtained its status.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CellSource {
    Decided,
    /// Inferred from the cell with this label.
    Implied(String),
    /// Every compact `n`-dimensional manifold is `(n−1)PL`.
    Automatic,
    /// A certificate of a factor, carried to the product through a slice
    /// (cells below the factor dimension) or through the projection.
    Factor(String),
    /// An explicit form built on a product.
    Construction(String),
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub p: usize,
    pub class: ClosureClass,
    pub status: Status,
    pub source: CellSource,
    pub witness: Option<YesWitness>,
    /// For `No`: a certificate excluding this class or a weaker one.
    pub certificate: Option<CurrentCertificate>,
    pub reason: Option<String>,
    pub trace: CuttingPlaneTrace,
}

impl Cell {
    pub fn label(&self) -> String {
        self.class.label(self.p)
    }

    pub fn from_decision(d: Decision) -> Self {
        let (status, witness, certificate, reason) = match d.verdict {
            Verdict::Yes(w) => (Status::Yes, Some(*w), None, None),
            Verdict::No(c) => (Status::No, None, Some(*c), None),
            Verdict::Unknown(r) => (Status::Unknown, None, None, Some(r)),
        };
        Cell { p: d.p, class: d.class, status, source: CellSource::Decided, witness, certificate, reason, trace: d.trace }
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationTable {
    pub name: String,
    pub n: usize,
    /// By `p`, then strongest class first.
    pub cells: Vec<Cell>,
    /// Positive answers concern invariant forms of a spec that is not
    /// holomorphically parallelizable.
    pub invariant_level_only: bool,
}

impl ClassificationTable {
    pub fn cell(&self, p: usize, class: ClosureClass) -> Option<&Cell> {
        self.cells.iter().find(|c| c.p == p && c.class == class)
    }

    pub fn status(&self, p: usize, class: ClosureClass) -> Option<Status> {
        self.cell(p, class).map(|c| c.status)
    }
}

fn position(class: ClosureClass) -> usize {
    ClosureClass::ALL.iter().position(|&c| c == class).expect("listed")
}

/// Decides every `(p, class)` with `1 ≤ p ≤ n−1`, then propagates along the
/// implication order.
pub fn classification_table(spec: &ManifoldSpec, budget: &Budget) -> Result<ClassificationTable> {
    let n = spec.n;
    let jobs: Vec<(usize, ClosureClass)> =
        (1..n).flat_map(|p| ClosureClass::ALL.into_iter().map(move |c| (p, c))).collect();
    let decided: Vec<Decision> = jobs.par_iter().map(|&(p, c)| decide(spec, p, c, budget)).collect::<Result<_>>()?;
    let mut cells: Vec<Cell> = decided.into_iter().map(Cell::from_decision).collect();
    propagate(&mut cells, n, spec.is_parallelizable())?;
    Ok(ClassificationTable { name: spec.name.clone(), n, cells, invariant_level_only: !spec.is_parallelizable() })
}

fn contradiction(a: &Cell, b: &Cell) -> Error {
    Error::Certificate(format!("inconsistent verdicts: {} is {:?} but {} is {:?}", a.label(), a.status, b.label(), b.status))
}

/// Fills `Unknown` cells from the implication order, the automatic top
/// degree, and the parallelizable equivalence; fails on contradictions.
/// `cells` holds every `(p, class)`, by `p` and then strongest class first.
pub fn propagate(cells: &mut [Cell], n: usize, parallelizable: bool) -> Result<()> {
    if n < 2 {
        return Ok(());
    }
    let idx = |p: usize, c: ClosureClass| (p - 1) * 4 + position(c);
    let pl = idx(n - 1, ClosureClass::PL);
    match cells[pl].status {
        Status::Unknown => {
            cells[pl].status = Status::Yes;
            cells[pl].source = CellSource::Automatic;
        }
        Status::No => return Err(contradiction(&cells[pl], &cells[pl])),
        Status::Yes => {}
    }
    // (from, to, status carried)
    let mut rules: Vec<(usize, usize, Status)> = Vec::new();
    for p in 1..n {
        for a in 0..4 {
            for b in a + 1..4 {
                let (strong, weak) = (idx(p, ClosureClass::ALL[a]), idx(p, ClosureClass::ALL[b]));
                rules.push((strong, weak, Status::Yes));
                rules.push((weak, strong, Status::No));
                if parallelizable {
                    rules.push((weak, strong, Status::Yes));
                    rules.push((strong, weak, Status::No));
                }
            }
        }
        if p > 1 {
            for c in [ClosureClass::K, ClosureClass::S] {
                rules.push((idx(1, c), idx(p, c), Status::Yes));
                rules.push((idx(p, c), idx(1, c), Status::No));
            }
        }
    }
    loop {
        let mut changed = false;
        for &(from, to, s) in &rules {
            if cells[from].status != s {
                continue;
            }
            match cells[to].status {
                Status::Unknown => {
                    cells[to].status = s;
                    cells[to].source = CellSource::Implied(cells[from].label());
                    cells[to].reason = None;
                    if s == Status::No {
                        cells[to].certificate = cells[from].certificate.clone();
                    }
                    changed = true;
                }
                t if t != s => return Err(contradiction(&cells[from], &cells[to])),
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    Ok(())
}
