//! Products of structures: pullback and fiber integration along the factors,
//! the diagonal ladder forms `Θ_j`, and the completion of a product table from
//! the factor tables.

use num_rational::BigRational;
use serde::Serialize;

use crate::classifier::{
    auxiliary_for, check_closure, propagate, verify_certificate, Cell, CellSource, CertificateCase, ClassificationTable,
    ClosureClass, CurrentCertificate, CuttingPlaneTrace, Status, YesWitness,
};
use crate::error::{Error, Result};
use crate::exterior::{kahler_form, merge_sign, sigma_inv, volume_form, ExactForm, MultiIndex};
use crate::grassmann::OptimizerOptions;
use crate::nilmanifold::{
    find_simple_exact_holomorphic, phk_construct, pluriclosed_obstruction, ManifoldSpec, SimpleExactSearch,
    SimpleSearchBudget,
};
use crate::positivity::{check_transverse, classify_p, plane_sampling_min, Membership};
use crate::scalar::GaussianRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Factor {
    Left,
    Right,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Left => "left",
            Factor::Right => "right",
        }
    }
}

/// `X × Y` with frame `φ_1..φ_m, φ'_1..φ'_n` (the right frame shifted by `m`).
#[derive(Clone, Debug)]
pub struct ProductSpec {
    pub left: ManifoldSpec,
    pub right: ManifoldSpec,
    pub combined: ManifoldSpec,
}

pub fn product_spec(x: &ManifoldSpec, y: &ManifoldSpec) -> Result<ProductSpec> {
    x.validate()?;
    y.validate()?;
    let (m, n) = (x.n, y.n);
    let total = m + n;
    let d_phi = x.d_phi.iter().map(|f| f.embed(total, 0)).chain(y.d_phi.iter().map(|f| f.embed(total, m))).collect();
    let combined = ManifoldSpec::new(format!("{} x {}", x.name, y.name), total, d_phi);
    combined.validate()?;
    Ok(ProductSpec { left: x.clone(), right: y.clone(), combined })
}

impl ProductSpec {
    pub fn m(&self) -> usize {
        self.left.n
    }

    pub fn n(&self) -> usize {
        self.right.n
    }

    pub fn total(&self) -> usize {
        self.combined.n
    }

    pub fn factor(&self, f: Factor) -> &ManifoldSpec {
        match f {
            Factor::Left => &self.left,
            Factor::Right => &self.right,
        }
    }

    /// Pullback through the projection onto a factor.
    pub fn pullback(&self, f: &ExactForm, factor: Factor) -> ExactForm {
        match factor {
            Factor::Left => f.embed(self.total(), 0),
            Factor::Right => f.embed(self.total(), self.m()),
        }
    }

    fn offset_and_dim(&self, factor: Factor) -> (usize, usize) {
        match factor {
            Factor::Left => (0, self.m()),
            Factor::Right => (self.m(), self.n()),
        }
    }

    /// Integration along the fibres of the projection onto `factor`: only terms
    /// containing the full fibre volume `φ_F∧φ̄_F` survive, the fibre volume
    /// `σ_a φ_F∧φ̄_F` integrates to one.
    pub fn pushforward(&self, f: &ExactForm, factor: Factor) -> Result<ExactForm> {
        let (keep_off, keep_dim) = self.offset_and_dim(factor);
        let (fib_off, fib_dim) = self.offset_and_dim(match factor {
            Factor::Left => Factor::Right,
            Factor::Right => Factor::Left,
        });
        let fibre = MultiIndex::from_bits(MultiIndex::full(fib_dim).bits() << fib_off);
        let keep_mask = MultiIndex::full(keep_dim).bits() << keep_off;
        let scale = sigma_inv(fib_dim);
        let mut out = ExactForm::zero(keep_dim);
        for (&(i, j), c) in f.terms() {
            if !(fibre.is_subset_of(i) && fibre.is_subset_of(j)) {
                continue;
            }
            let (ik, jk) = (MultiIndex::from_bits(i.bits() & keep_mask), MultiIndex::from_bits(j.bits() & keep_mask));
            // φ_I φ̄_J = s · φ_{I_K} φ̄_{J_K} ∧ φ_F φ̄_F, with φ_F φ̄_F of even degree.
            let s = merge_sign(ik, fibre) * merge_sign(jk, fibre) * if (fib_dim * jk.degree()) % 2 == 1 { -1 } else { 1 };
            let coeff = &(c * &scale) * &GaussianRational::from_ints(s as i64, 0);
            out.add_term(
                MultiIndex::from_bits(ik.bits() >> keep_off),
                MultiIndex::from_bits(jk.bits() >> keep_off),
                coeff,
            );
        }
        if let Some((a, b)) = f.pure_bidegree() {
            if a.min(b) < fib_dim {
                return Err(Error::Degree(format!("bidegree ({a},{b}) is below the fibre dimension {fib_dim}")));
            }
        }
        Ok(out)
    }
}

/// Forms `Ω_s`, `start ≤ s ≤ dim`, of the classes needed on one factor; the
/// last one is the volume form.
#[derive(Clone, Debug)]
pub struct Ladder {
    pub dim: usize,
    pub start: usize,
    pub forms: Vec<ExactForm>,
}

impl Ladder {
    /// Appends the volume form to `forms` (which cover `start..dim`).
    pub fn new(dim: usize, start: usize, mut forms: Vec<ExactForm>) -> Result<Self> {
        if start == 0 || start > dim || forms.len() != dim - start {
            return Err(Error::OutOfRange(format!("a ladder from {start} needs {} forms below the top degree", dim.saturating_sub(start))));
        }
        forms.push(volume_form(dim));
        Ok(Ladder { dim, start, forms })
    }

    /// Closed transverse forms from the holomorphic construction.
    pub fn from_phk(spec: &ManifoldSpec, start: usize) -> Result<Self> {
        let forms = (start..spec.n).map(|s| phk_construct(spec, s).map(|f| f.omega)).collect::<Result<Vec<_>>>()?;
        Ladder::new(spec.n, start, forms)
    }

    /// `ω^s / s!` for a `(1,1)`-form `ω`.
    pub fn from_powers(omega: &ExactForm, start: usize) -> Result<Self> {
        let dim = omega.n();
        let mut forms = Vec::new();
        let mut power = ExactForm::one(dim);
        for s in 1..dim {
            power = power.wedge(omega).scale(&GaussianRational::from_frac(1, s as i64));
            if s >= start {
                forms.push(power.clone());
            }
        }
        Ladder::new(dim, start, forms)
    }

    pub fn form(&self, s: usize) -> Option<&ExactForm> {
        s.checked_sub(self.start).and_then(|i| self.forms.get(i))
    }
}

#[derive(Clone, Debug)]
pub struct LadderInput {
    pub left: Ladder,
    pub right: Ladder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LadderCase {
    /// `m − p ≤ n − q`.
    LeftShorter,
    RightShorter,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub case: LadderCase,
    /// Admissible `j`: `lowest ≤ j < m + n`.
    pub lowest: usize,
    pub violations: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the alternation conditions on `∂`-closedness, the eigenvalue
/// condition, and each ladder form's own class.
pub fn check_ladder_hypotheses(product: &ProductSpec, input: &LadderInput, class: ClosureClass) -> Result<HypothesisReport> {
    let (x, y) = (&product.left, &product.right);
    let (m, n) = (x.n, y.n);
    let (l, r) = (&input.left, &input.right);
    if l.dim != m || r.dim != n {
        return Err(Error::DimensionMismatch(l.dim + r.dim, m + n));
    }
    let (p, q) = (l.start, r.start);
    let mut violations = Vec::new();
    let del_closed_l = |s: usize| x.del(l.form(s).expect("in range")).is_zero();
    let del_closed_r = |s: usize| y.del(r.form(s).expect("in range")).is_zero();
    let case = if m - p <= n - q { LadderCase::LeftShorter } else { LadderCase::RightShorter };
    match case {
        LadderCase::LeftShorter => {
            for a in 1..m - p {
                if !del_closed_l(p + a) {
                    for rr in n - a..n {
                        if !del_closed_r(rr) {
                            violations.push(format!("a = {a}: neither ∂Ω_{} = 0 nor ∂Φ_{rr} = 0", p + a));
                        }
                    }
                }
            }
        }
        LadderCase::RightShorter => {
            for a in 1..n - q {
                if !del_closed_r(q + a) {
                    for rr in m - a..m {
                        if !del_closed_l(rr) {
                            violations.push(format!("a = {a}: neither ∂Φ_{} = 0 nor ∂Ω_{rr} = 0", q + a));
                        }
                    }
                }
            }
        }
    }
    for (side, ladder, spec) in [("Ω", l, x), ("Φ", r, y)] {
        for s in ladder.start..ladder.dim {
            let f = ladder.form(s).expect("in range");
            match classify_p(f)?.status {
                Membership::In | Membership::StrictlyIn => {}
                _ => violations.push(format!("{side}_{s} has a negative eigenvalue")),
            }
            if check_transverse(f, &OptimizerOptions::default())?.status != Membership::StrictlyIn {
                violations.push(format!("{side}_{s} is not transverse"));
            }
            if auxiliary_for(spec, s, class, f).is_none() {
                violations.push(format!("{side}_{s} fails the {} closure condition", class.label(s)));
            }
        }
    }
    let lowest = m + n - (m - p).min(n - q);
    Ok(HypothesisReport { case, lowest, violations })
}

/// A `(j,j)`-form on the product with its class data, already verified.
#[derive(Clone, Debug)]
pub struct ThetaForm {
    pub j: usize,
    pub class: ClosureClass,
    pub theta: ExactForm,
    pub aux: ExactForm,
    pub min_value: f64,
    pub sampled_min: f64,
}

/// The summand pairs `(s, k)`, `s + k = j`, of the diagonal ladder.
fn ladder_terms(l: &Ladder, r: &Ladder, j: usize) -> Vec<(usize, usize)> {
    (l.start..=l.dim).filter_map(|s| j.checked_sub(s).filter(|&k| k >= r.start && k <= r.dim).map(|k| (s, k))).collect()
}

/// `Θ_j = Σ Ω_s ∧ Φ_{j−s}` over the admissible diagonal, with the auxiliary
/// data assembled summand by summand from a `∂`-closed factor.
pub fn theta_form(product: &ProductSpec, input: &LadderInput, j: usize, class: ClosureClass, opts: &OptimizerOptions) -> Result<ThetaForm> {
    let report = check_ladder_hypotheses(product, input, class)?;
    let total = product.total();
    if j < report.lowest || j >= total {
        return Err(Error::OutOfRange(format!("j = {j} outside {}..{}", report.lowest, total - 1)));
    }
    if !report.passed() {
        return Err(Error::Hypothesis(report.violations));
    }
    let terms = ladder_terms(&input.left, &input.right, j);
    let pieces: Vec<(ExactForm, ExactForm, bool, bool, ExactForm, ExactForm)> = terms
        .iter()
        .map(|&(s, k)| {
            let (o, f) = (input.left.form(s).expect("in range"), input.right.form(k).expect("in range"));
            let ao = if s < product.m() { auxiliary_for(&product.left, s, class, o) } else { Some(ExactForm::zero(product.m())) };
            let af = if k < product.n() { auxiliary_for(&product.right, k, class, f) } else { Some(ExactForm::zero(product.n())) };
            let closed_o = product.left.del(o).is_zero();
            let closed_f = product.right.del(f).is_zero();
            (o.clone(), f.clone(), closed_o, closed_f, ao.unwrap_or_else(|| ExactForm::zero(product.m())), af.unwrap_or_else(|| ExactForm::zero(product.n())))
        })
        .collect();
    let mut theta = ExactForm::zero(total);
    let mut aux = ExactForm::zero(total);
    for (o, f, closed_o, closed_f, ao, af) in &pieces {
        let (po, pf) = (product.pullback(o, Factor::Left), product.pullback(f, Factor::Right));
        theta = theta.add(&po.wedge(&pf));
        if matches!(class, ClosureClass::WK | ClosureClass::S) {
            if *closed_o {
                aux = aux.add(&po.wedge(&product.pullback(af, Factor::Right)));
            } else if *closed_f {
                aux = aux.add(&product.pullback(ao, Factor::Left).wedge(&pf));
            } else {
                return Err(Error::Hypothesis(vec!["a summand has no ∂-closed factor".into()]));
            }
        }
    }
    verify_theta(&product.combined, j, class, theta, aux, opts)
}

/// `Θ_j = Σ_{h ≤ k ≤ m} ω^k ∧ Φ_{j−k}`, `h = max(0, j − n)`, for a closed `ω` on the left factor.
pub fn theta_kahler(product: &ProductSpec, omega: &ExactForm, right: &Ladder, j: usize, class: ClosureClass, opts: &OptimizerOptions) -> Result<ThetaForm> {
    let (m, n) = (product.m(), product.n());
    if !product.left.d(omega).is_zero() {
        return Err(Error::NotClosed("ω is not closed".into()));
    }
    let q = right.start;
    if j < m + q || j >= m + n {
        return Err(Error::OutOfRange(format!("j = {j} outside {}..{}", m + q, m + n - 1)));
    }
    let h = j.saturating_sub(n);
    let total = product.total();
    let mut theta = ExactForm::zero(total);
    let mut aux = ExactForm::zero(total);
    let mut power = ExactForm::one(m);
    for _ in 0..h {
        power = power.wedge(omega);
    }
    for k in h..=m {
        let f = right.form(j - k).ok_or_else(|| Error::OutOfRange(format!("Φ_{} missing", j - k)))?;
        let pw = product.pullback(&power, Factor::Left);
        theta = theta.add(&pw.wedge(&product.pullback(f, Factor::Right)));
        if j - k < n && matches!(class, ClosureClass::WK | ClosureClass::S) {
            let af = auxiliary_for(&product.right, j - k, class, f)
                .ok_or_else(|| Error::Hypothesis(vec![format!("Φ_{} fails the {} condition", j - k, class.label(j - k))]))?;
            aux = aux.add(&pw.wedge(&product.pullback(&af, Factor::Right)));
        }
        power = power.wedge(omega);
    }
    verify_theta(&product.combined, j, class, theta, aux, opts)
}

fn verify_theta(spec: &ManifoldSpec, j: usize, class: ClosureClass, theta: ExactForm, aux: ExactForm, opts: &OptimizerOptions) -> Result<ThetaForm> {
    check_closure(spec, j, class, &theta, &aux).map_err(Error::NotClosed)?;
    match classify_p(&theta)?.status {
        Membership::In | Membership::StrictlyIn => {}
        _ => return Err(Error::Hypothesis(vec!["Θ has a negative eigenvalue".into()])),
    }
    let v = check_transverse(&theta, opts)?;
    if v.status != Membership::StrictlyIn {
        return Err(Error::Hypothesis(vec![format!("Θ is not transverse (min {:?})", v.min_value)]));
    }
    let sampled_min = plane_sampling_min(&theta, 1000, opts.seed)?;
    Ok(ThetaForm { j, class, theta, aux, min_value: v.min_value.unwrap_or(f64::NAN), sampled_min })
}

/// Replaces a simple-exact certificate by the equivalent `i∂∂̄A = T` one.
fn as_ddbar(spec: &ManifoldSpec, cert: &CurrentCertificate) -> Result<CurrentCertificate> {
    if cert.case != CertificateCase::SimpleExactHolomorphic {
        return Ok(cert.clone());
    }
    let alpha = cert.alpha.as_ref().ok_or_else(|| Error::Certificate("missing α".into()))?;
    let (t, a) = pluriclosed_obstruction(spec, alpha, &cert.potential)?;
    Ok(CurrentCertificate { case: CertificateCase::DdbarExact, t, potential: a, alpha: None, ..cert.clone() })
}

/// A factor certificate carried to the product. Through the projection the
/// forms are pulled back; through a slice they are wedged with the other
/// factor's volume form (`dv_X ∧ ·` for the right factor).
pub fn lift_certificate(product: &ProductSpec, cert: &CurrentCertificate, factor: Factor, through_slice: bool) -> Result<CurrentCertificate> {
    if !through_slice {
        let pb = |f: &ExactForm| product.pullback(f, factor);
        return Ok(CurrentCertificate {
            case: cert.case,
            k: cert.k,
            t: pb(&cert.t),
            generators: cert.generators.iter().map(|(w, e)| (w.clone(), pb(e))).collect(),
            potential: pb(&cert.potential),
            alpha: cert.alpha.as_ref().map(pb),
        });
    }
    let cert = as_ddbar(product.factor(factor), cert)?;
    let other = match factor {
        Factor::Left => Factor::Right,
        Factor::Right => Factor::Left,
    };
    let other_dim = product.factor(other).n;
    let vol = product.pullback(&volume_form(other_dim), other);
    let top = product.pullback(&ExactForm::holomorphic(other_dim, MultiIndex::full(other_dim)), other);
    let pb = |f: &ExactForm| product.pullback(f, factor);
    let attach = |f: &ExactForm, g: &ExactForm| match factor {
        Factor::Left => pb(f).wedge(g),
        Factor::Right => g.wedge(&pb(f)),
    };
    Ok(CurrentCertificate {
        case: cert.case,
        k: cert.k + other_dim,
        t: attach(&cert.t, &vol),
        generators: cert.generators.iter().map(|(w, e)| (w.clone(), attach(e, &top))).collect(),
        potential: attach(&cert.potential, &vol),
        alpha: None,
    })
}

/// `γ ∧ α` with `γ` a closed holomorphic coordinate form of one factor and
/// `α = ∂β` a simple exact holomorphic form of the other.
pub fn product_simple_exact(product: &ProductSpec, k: usize, budget: &SimpleSearchBudget) -> Result<Option<CurrentCertificate>> {
    for (exact_side, closed_side) in [(Factor::Right, Factor::Left), (Factor::Left, Factor::Right)] {
        let es = product.factor(exact_side);
        let cs = product.factor(closed_side);
        for ke in 1..=es.n.min(k) {
            let kc = k - ke;
            if kc > cs.n {
                continue;
            }
            let SimpleExactSearch::Found { alpha, beta } = find_simple_exact_holomorphic(es, ke, budget)? else {
                continue;
            };
            for gamma_idx in MultiIndex::all(cs.n, kc) {
                let gamma = ExactForm::holomorphic(cs.n, gamma_idx);
                if !cs.d(&gamma).is_zero() {
                    continue;
                }
                let (g, a, b) = (product.pullback(&gamma, closed_side), product.pullback(&alpha, exact_side), product.pullback(&beta, exact_side));
                let (alpha_p, beta_p) = match closed_side {
                    Factor::Left => (g.wedge(&a), g.wedge(&b)),
                    Factor::Right => (a.wedge(&g), b.wedge(&g)),
                };
                // ∂(β∧γ) = ∂β∧γ ± β∧∂γ; use whichever potential reproduces α.
                let spec = &product.combined;
                let beta_p = if spec.del(&beta_p) == alpha_p { beta_p } else { beta_p.neg() };
                if spec.del(&beta_p) != alpha_p {
                    continue;
                }
                let (t, _) = match pluriclosed_obstruction(spec, &alpha_p, &beta_p) {
                    Ok(x) => x,
                    Err(_) => continue,
                };
                let cert = CurrentCertificate {
                    case: CertificateCase::SimpleExactHolomorphic,
                    k,
                    t,
                    generators: vec![(BigRational::from_integer(1.into()), alpha_p.clone())],
                    potential: beta_p,
                    alpha: Some(alpha_p),
                };
                if verify_certificate(spec, &cert).is_ok() {
                    return Ok(Some(cert));
                }
            }
        }
    }
    Ok(None)
}

fn empty_cell(p: usize, class: ClosureClass) -> Cell {
    Cell {
        p,
        class,
        status: Status::Unknown,
        source: CellSource::Decided,
        witness: None,
        certificate: None,
        reason: Some("no argument applies".into()),
        trace: CuttingPlaneTrace::default(),
    }
}

/// A verified `Θ` for a product cell.
#[derive(Clone, Debug)]
pub struct Construction {
    pub p: usize,
    pub class: ClosureClass,
    pub theta: ThetaForm,
    pub label: String,
}

impl Construction {
    pub fn to_cell(&self) -> Cell {
        let s = self.theta.theta.to_float().max_abs();
        Cell {
            p: self.p,
            class: self.class,
            status: Status::Yes,
            source: CellSource::Construction(self.label.clone()),
            witness: Some(YesWitness {
                omega: self.theta.theta.clone(),
                aux: self.theta.aux.clone(),
                min_value: self.theta.min_value,
                normalized_min: if s > 0.0 { self.theta.min_value / s } else { 0.0 },
                certified: false,
            }),
            certificate: None,
            reason: None,
            trace: CuttingPlaneTrace::default(),
        }
    }
}

/// Completes a product table: factor certificates carried through slices
/// (`p` below a factor's dimension) and through projections (`p` above a
/// factor's dimension), simple exact holomorphic forms built from the
/// factors, explicit constructions, then the implication order.
pub fn factor_implications(
    product: &ProductSpec,
    left: &ClassificationTable,
    right: &ClassificationTable,
    constructions: &[Construction],
    budget: &SimpleSearchBudget,
) -> Result<ClassificationTable> {
    let (m, n) = (product.m(), product.n());
    let total = product.total();
    let spec = &product.combined;
    let mut cells: Vec<Cell> =
        (1..total).flat_map(|p| ClosureClass::ALL.into_iter().map(move |c| empty_cell(p, c))).collect();
    let tables = [(Factor::Left, left, m, n), (Factor::Right, right, n, m)];
    for cell in cells.iter_mut() {
        let p = cell.p;
        for &(factor, table, dim, other) in &tables {
            if cell.status != Status::Unknown {
                break;
            }
            // Slice: a p-form on the product restricts to the factor when p < dim.
            // Projection: pushing along the other (compact) factor lands in degree p − other.
            let candidates = [(p < dim, p, true), (p > other && p - other < dim, p.wrapping_sub(other), false)];
            for (applies, fp, slice) in candidates {
                if !applies || cell.status != Status::Unknown {
                    continue;
                }
                let Some(fc) = table.cell(fp, cell.class) else { continue };
                if fc.status != Status::No {
                    continue;
                }
                let Some(cert) = &fc.certificate else { continue };
                let lifted = lift_certificate(product, cert, factor, slice)?;
                verify_certificate(spec, &lifted)
                    .map_err(|e| Error::Certificate(format!("lifted {} certificate for {}: {e}", fc.label(), cell.label())))?;
                cell.status = Status::No;
                cell.certificate = Some(lifted);
                cell.reason = None;
                let how = if slice { "slice" } else { "projection" };
                cell.source = CellSource::Factor(format!("{} factor {} via {how}", factor.name(), fc.label()));
            }
        }
    }
    for c in constructions {
        let idx = (c.p - 1) * 4 + ClosureClass::ALL.iter().position(|&x| x == c.class).expect("listed");
        let cell = &mut cells[idx];
        if cell.status == Status::No {
            return Err(Error::Certificate(format!("{} is built but also excluded", cell.label())));
        }
        *cell = c.to_cell();
    }
    for p in 1..total {
        let idx = (p - 1) * 4 + 3;
        if cells[idx].status != Status::Unknown || p == total - 1 {
            continue;
        }
        if let Some(cert) = product_simple_exact(product, total - p, budget)? {
            let cell = &mut cells[idx];
            cell.status = Status::No;
            cell.certificate = Some(cert);
            cell.reason = None;
            cell.source = CellSource::Construction("simple exact holomorphic form".into());
        }
    }
    propagate(&mut cells, total, spec.is_parallelizable())?;
    Ok(ClassificationTable { name: spec.name.clone(), n: total, cells, invariant_level_only: !spec.is_parallelizable() })
}

/// Ladders tried on a factor: powers of the standard `(1,1)`-form, and the
/// holomorphic construction when the factor is parallelizable.
pub fn ladder_candidates(spec: &ManifoldSpec) -> Vec<Ladder> {
    let mut out = Vec::new();
    for start in 1..=spec.n {
        if let Ok(l) = Ladder::from_powers(&kahler_form(spec.n), start) {
            out.push(l);
        }
        if spec.is_parallelizable() && start < spec.n {
            if let Ok(l) = Ladder::from_phk(spec, start) {
                out.push(l);
            }
        }
    }
    out
}

/// First construction whose `Θ_j` passes every check: powers of a closed
/// left `(1,1)`-form against a right ladder, then pairs of ladders. Fails with
/// `OutOfRange` when `j` lies below the range of every admissible input.
pub fn construct_cell(product: &ProductSpec, j: usize, class: ClosureClass, opts: &OptimizerOptions) -> Result<Option<Construction>> {
    let (m, n) = (product.m(), product.n());
    let (left, right) = (ladder_candidates(&product.left), ladder_candidates(&product.right));
    let mut lowest: Option<usize> = None;
    let mut note = |b: usize| lowest = Some(lowest.map_or(b, |l| l.min(b)));
    let omega = kahler_form(m);
    if product.left.d(&omega).is_zero() {
        for r in &right {
            let q = r.start;
            if (q..n).any(|k| auxiliary_for(&product.right, k, class, r.form(k).expect("in range")).is_none()) {
                continue;
            }
            note(m + q);
            if j < m + q || j >= m + n {
                continue;
            }
            match theta_kahler(product, &omega, r, j, class, opts) {
                Ok(theta) => {
                    let label = format!("powers of the left (1,1)-form with the right ladder from {q}");
                    return Ok(Some(Construction { p: j, class, theta, label }));
                }
                Err(Error::Hypothesis(_) | Error::NotClosed(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    for l in &left {
        for r in &right {
            let input = LadderInput { left: l.clone(), right: r.clone() };
            let report = check_ladder_hypotheses(product, &input, class)?;
            if !report.passed() {
                continue;
            }
            note(report.lowest);
            if j < report.lowest || j >= m + n {
                continue;
            }
            match theta_form(product, &input, j, class, opts) {
                Ok(theta) => {
                    let label = format!("ladders from {} and {}", l.start, r.start);
                    return Ok(Some(Construction { p: j, class, theta, label }));
                }
                Err(Error::Hypothesis(_) | Error::NotClosed(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    match lowest {
        Some(b) if j < b => Err(Error::OutOfRange(format!("j = {j} is below the admissible bound {b} for {}", class.name()))),
        _ => Ok(None),
    }
}

/// Product table from the factor tables: factor implications first, then
/// `Θ_j` constructions for the cells still open.
pub fn product_table(
    product: &ProductSpec,
    left: &ClassificationTable,
    right: &ClassificationTable,
    opts: &OptimizerOptions,
    budget: &SimpleSearchBudget,
) -> Result<ClassificationTable> {
    let first = factor_implications(product, left, right, &[], budget)?;
    let open: Vec<(usize, ClosureClass)> =
        first.cells.iter().filter(|c| c.status == Status::Unknown).map(|c| (c.p, c.class)).collect();
    let mut constructions = Vec::new();
    for (j, class) in open {
        match construct_cell(product, j, class, opts) {
            Ok(Some(c)) => constructions.push(c),
            Ok(None) | Err(Error::OutOfRange(_)) => {}
            Err(e) => return Err(e),
        }
    }
    factor_implications(product, left, right, &constructions, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::classifier::{classification_table, Budget};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_form(n: usize, a: usize, b: usize, rng: &mut ChaCha8Rng) -> ExactForm {
        let mut f = ExactForm::zero(n);
        for i in MultiIndex::all(n, a) {
            for j in MultiIndex::all(n, b) {
                if rng.gen_bool(0.3) {
                    f.add_term(i, j, GaussianRational::from_ints(rng.gen_range(-3..=3), rng.gen_range(-3..=3)));
                }
            }
        }
        f
    }

    #[test]
    fn blockwise_structure() {
        let t = product_spec(&catalog::torus(1), &catalog::torus(2)).unwrap();
        assert_eq!(t.combined.d_phi, catalog::torus(3).d_phi);
        let ii = product_spec(&catalog::iwasawa(), &catalog::iwasawa()).unwrap();
        assert!(ii.combined.is_parallelizable());
        let ex = product_spec(&catalog::i3_1(), &catalog::eta_beta(2)).unwrap();
        assert_eq!(ex.total(), 8);
        assert!(!ex.combined.is_parallelizable());
    }

    #[test]
    fn pullback_commutes_with_d() {
        let pairs = [(catalog::i3_1(), catalog::eta_beta(2)), (catalog::iwasawa(), catalog::efv8())];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (x, y) in pairs {
            let pr = product_spec(&x, &y).unwrap();
            for (factor, spec) in [(Factor::Left, &x), (Factor::Right, &y)] {
                for k in 0..spec.n {
                    let g = ExactForm::phi(spec.n, k);
                    assert_eq!(pr.combined.d(&pr.pullback(&g, factor)), pr.pullback(&spec.d(&g), factor));
                }
                let f = random_form(spec.n, 1, 2, &mut rng);
                assert_eq!(pr.combined.del(&pr.pullback(&f, factor)), pr.pullback(&spec.del(&f), factor));
            }
        }
    }

    #[test]
    fn pushforward_laws() {
        let pr = product_spec(&catalog::iwasawa(), &catalog::i3_1()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let f = random_form(6, 4, 4, &mut rng);
            for factor in [Factor::Left, Factor::Right] {
                let other = match factor {
                    Factor::Left => &pr.left,
                    Factor::Right => &pr.right,
                };
                // d of a (4,4)-form lands in (5,4)+(4,5); push each part separately.
                let df = pr.combined.d(&f);
                let lhs = pr.pushforward(&df.component(5, 4), factor).unwrap().add(&pr.pushforward(&df.component(4, 5), factor).unwrap());
                let rhs = other.d(&pr.pushforward(&f, factor).unwrap());
                assert_eq!(lhs, rhs);
                let g = random_form(3, 2, 2, &mut rng);
                let other_factor = match factor {
                    Factor::Left => Factor::Right,
                    Factor::Right => Factor::Left,
                };
                // A form pulled back from the base has no fibre component.
                let pulled = pr.pullback(&g, factor).wedge(&pr.pullback(&random_form(3, 2, 1, &mut rng), other_factor));
                assert!(pr.pushforward(&pulled, factor).unwrap().is_zero());
            }
        }
        assert!(pr.pushforward(&random_form(6, 2, 2, &mut rng).add(&ExactForm::phi(6, 0).wedge(&ExactForm::phi_bar(6, 0)).wedge(&ExactForm::phi(6, 1).wedge(&ExactForm::phi_bar(6, 1)))), Factor::Left).is_err());
    }

    #[test]
    fn pushforward_of_volume_is_one() {
        let pr = product_spec(&catalog::torus(1), &catalog::torus(1)).unwrap();
        let vol = pr.pullback(&volume_form(1), Factor::Left).wedge(&pr.pullback(&volume_form(1), Factor::Right));
        assert_eq!(pr.pushforward(&vol, Factor::Left).unwrap(), volume_form(1));
        assert_eq!(pr.pushforward(&vol, Factor::Right).unwrap(), volume_form(1));
        let fibre = pr.pullback(&volume_form(1), Factor::Right);
        assert_eq!(pr.pushforward(&fibre, Factor::Left).unwrap(), ExactForm::one(1));
    }

    #[test]
    fn torus_ladders_are_kahler() {
        let pr = product_spec(&catalog::torus(2), &catalog::torus(2)).unwrap();
        let opts = OptimizerOptions::default();
        let input = LadderInput { left: Ladder::from_powers(&kahler_form(2), 1).unwrap(), right: Ladder::from_powers(&kahler_form(2), 1).unwrap() };
        let report = check_ladder_hypotheses(&pr, &input, ClosureClass::K).unwrap();
        assert!(report.passed());
        assert_eq!(report.lowest, 3);
        let th = theta_form(&pr, &input, 3, ClosureClass::K, &opts).unwrap();
        assert!(pr.combined.d(&th.theta).is_zero());
        assert!(th.min_value > 0.0 && th.sampled_min > 0.0);
        assert!(theta_form(&pr, &input, 2, ClosureClass::K, &opts).is_err());
    }

    #[test]
    fn violated_alternation_is_reported() {
        // ω and ω²/2 on I₃,₁ are not ∂-closed on either side.
        let pr = product_spec(&catalog::i3_1(), &catalog::i3_1()).unwrap();
        let l = Ladder::from_powers(&kahler_form(3), 1).unwrap();
        let input = LadderInput { left: l.clone(), right: l };
        let report = check_ladder_hypotheses(&pr, &input, ClosureClass::PL).unwrap();
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.starts_with("a = 1")));
    }

    #[test]
    fn example_product_constructions() {
        let pr = product_spec(&catalog::i3_1(), &catalog::eta_beta(2)).unwrap();
        let opts = OptimizerOptions::default();
        let input = LadderInput { left: Ladder::from_powers(&kahler_form(3), 1).unwrap(), right: Ladder::from_phk(&pr.right, 3).unwrap() };
        let report = check_ladder_hypotheses(&pr, &input, ClosureClass::PL).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        let th = theta_form(&pr, &input, 6, ClosureClass::PL, &opts).unwrap();
        let s = &pr.combined;
        assert!(s.del(&s.delbar(&th.theta)).is_zero());
        assert!(th.min_value > 1e-6);

        let input = LadderInput { left: Ladder::from_powers(&kahler_form(3), 2).unwrap(), right: Ladder::from_phk(&pr.right, 4).unwrap() };
        let th = theta_form(&pr, &input, 7, ClosureClass::S, &opts).unwrap();
        check_closure(s, 7, ClosureClass::S, &th.theta, &th.aux).unwrap();
    }

    #[test]
    fn simple_exact_product_witness() {
        let pr = product_spec(&catalog::i3_1(), &catalog::eta_beta(2)).unwrap();
        let cert = product_simple_exact(&pr, 5, &SimpleSearchBudget::default()).unwrap().unwrap();
        verify_certificate(&pr.combined, &cert).unwrap();
        assert!(cert.alpha.unwrap().is_simple().unwrap());
    }

    #[test]
    fn example_product_table() {
        let budget = Budget::default();
        let pr = product_spec(&catalog::i3_1(), &catalog::eta_beta(2)).unwrap();
        let lt = classification_table(&pr.left, &budget).unwrap();
        let rt = classification_table(&pr.right, &budget).unwrap();
        let table = product_table(&pr, &lt, &rt, &budget.optimizer, &budget.simple_search).unwrap();
        let yes = ["6PL", "7S", "7PL"];
        for cell in &table.cells {
            let want = if yes.contains(&cell.label().as_str()) { Status::Yes } else { Status::No };
            assert_eq!(cell.status, want, "{} from {:?}", cell.label(), cell.source);
        }
        assert!(matches!(table.cell(7, ClosureClass::PL).unwrap().source, CellSource::Automatic | CellSource::Implied(_)));
    }

    #[test]
    fn balanced_product_with_a_curve() {
        let pr = product_spec(&catalog::torus(1), &catalog::iwasawa()).unwrap();
        let opts = OptimizerOptions::default();
        let c = construct_cell(&pr, 3, ClosureClass::K, &opts).unwrap().unwrap();
        assert!(pr.combined.d(&c.theta.theta).is_zero());
        assert!(matches!(construct_cell(&pr, 1, ClosureClass::K, &opts), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn torus_products_have_no_obstructions() {
        let budget = Budget::default();
        let pr = product_spec(&catalog::torus(1), &catalog::torus(2)).unwrap();
        let lt = classification_table(&pr.left, &budget).unwrap();
        let rt = classification_table(&pr.right, &budget).unwrap();
        let table = product_table(&pr, &lt, &rt, &budget.optimizer, &budget.simple_search).unwrap();
        assert!(table.cells.iter().all(|c| c.status != Status::No));
    }
}
