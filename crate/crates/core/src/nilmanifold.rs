//! Invariant calculus on complex nilmanifolds given by structure equations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{monomial_name, monomial_product, sigma, square, ExactForm, Monomial, MultiIndex};
use crate::linalg::{self, Echelon, SparseRow};
use crate::scalar::GaussianRational;

/// Structure equations: `d φ_k` for each frame element, as a `(2,0)+(1,1)` form.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSpec {
    pub name: String,
    pub n: usize,
    pub d_phi: Vec<ExactForm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    D,
    Del,
    DelBar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub n: usize,
    pub holomorphically_parallelizable: bool,
    pub rational_structure: bool,
}

impl ManifoldSpec {
    pub fn new(name: impl Into<String>, n: usize, d_phi: Vec<ExactForm>) -> Self {
        ManifoldSpec { name: name.into(), n, d_phi }
    }

    /// No structure equation has a `(1,1)`-part.
    pub fn is_parallelizable(&self) -> bool {
        self.d_phi.iter().all(|f| f.component(1, 1).is_zero())
    }

    /// Coefficients are Gaussian rationals by construction, so the real
    /// structure constants are rational.
    pub fn is_rational(&self) -> bool {
        true
    }

    /// Every violated relation, with the offending coefficient.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.d_phi.len() != self.n {
            errs.push(format!("expected {} structure equations, found {}", self.n, self.d_phi.len()));
            return errs;
        }
        for (k, f) in self.d_phi.iter().enumerate() {
            if f.n() != self.n {
                errs.push(format!("d phi{} lives on a frame of dimension {}", k + 1, f.n()));
                continue;
            }
            for (&(i, j), c) in f.terms() {
                match (i.degree(), j.degree()) {
                    (2, 0) | (1, 1) => {}
                    (0, 2) => errs.push(format!(
                        "d phi{} has a (0,2)-part: ({}) {}",
                        k + 1,
                        c,
                        monomial_name(i, j)
                    )),
                    (a, b) => errs.push(format!(
                        "d phi{} has a term of bidegree ({a},{b}): ({}) {}",
                        k + 1,
                        c,
                        monomial_name(i, j)
                    )),
                }
            }
        }
        if !errs.is_empty() {
            return errs;
        }
        for k in 0..self.n {
            for (bar, f) in [(false, ExactForm::phi(self.n, k)), (true, ExactForm::phi_bar(self.n, k))] {
                let dd = self.d(&self.d(&f));
                for ((i, j), c) in dd.ordered_terms() {
                    errs.push(format!(
                        "d d {}{} != 0: coefficient ({}) at {}",
                        if bar { "bar" } else { "phi" },
                        k + 1,
                        c,
                        monomial_name(i, j)
                    ));
                }
            }
        }
        errs
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let errs = self.violations();
        if !errs.is_empty() {
            return Err(Error::InvalidSpec(errs));
        }
        Ok(ValidationReport {
            name: self.name.clone(),
            n: self.n,
            holomorphically_parallelizable: self.is_parallelizable(),
            rational_structure: self.is_rational(),
        })
    }

    fn d_factor(&self, idx: usize, bar: bool) -> ExactForm {
        if bar {
            self.d_phi[idx].conjugate()
        } else {
            self.d_phi[idx].clone()
        }
    }

    /// `d` of a single monomial by the Leibniz rule over its ordered factors.
    pub fn d_monomial(&self, m: Monomial) -> ExactForm {
        let (hol, anti) = m;
        let mut factors: Vec<(usize, bool)> = hol.indices().into_iter().map(|i| (i, false)).collect();
        factors.extend(anti.indices().into_iter().map(|i| (i, true)));
        let mut out = ExactForm::zero(self.n);
        for (t, &(idx, bar)) in factors.iter().enumerate() {
            let df = self.d_factor(idx, bar);
            if df.is_zero() {
                continue;
            }
            let (mut ph, mut pa, mut sh, mut sa) = (MultiIndex::EMPTY, MultiIndex::EMPTY, MultiIndex::EMPTY, MultiIndex::EMPTY);
            for (s, &(i, b)) in factors.iter().enumerate() {
                match (s.cmp(&t), b) {
                    (std::cmp::Ordering::Less, false) => ph = ph.with(i),
                    (std::cmp::Ordering::Less, true) => pa = pa.with(i),
                    (std::cmp::Ordering::Greater, false) => sh = sh.with(i),
                    (std::cmp::Ordering::Greater, true) => sa = sa.with(i),
                    _ => {}
                }
            }
            let base_sign = if t % 2 == 0 { 1 } else { -1 };
            for (&term, c) in df.terms() {
                let Some((s1, m1)) = monomial_product((ph, pa), term) else { continue };
                let Some((s2, m2)) = monomial_product(m1, (sh, sa)) else { continue };
                let sign = base_sign * s1 * s2;
                out.add_term(m2.0, m2.1, if sign > 0 { c.clone() } else { -c.clone() });
            }
        }
        out
    }

    pub fn d(&self, f: &ExactForm) -> ExactForm {
        self.apply(f, Operator::D)
    }

    pub fn del(&self, f: &ExactForm) -> ExactForm {
        self.apply(f, Operator::Del)
    }

    pub fn delbar(&self, f: &ExactForm) -> ExactForm {
        self.apply(f, Operator::DelBar)
    }

    /// `d`, `∂` or `∂̄` by bidegree projection of `d` on each monomial.
    pub fn apply(&self, f: &ExactForm, op: Operator) -> ExactForm {
        assert_eq!(f.n(), self.n, "form and structure equations use different frames");
        let mut out = ExactForm::zero(self.n);
        for (&(i, j), c) in f.terms() {
            let dm = self.d_monomial((i, j));
            let (a, b) = (i.degree(), j.degree());
            for (&(ri, rj), rc) in dm.terms() {
                let keep = match op {
                    Operator::D => true,
                    Operator::Del => ri.degree() == a + 1 && rj.degree() == b,
                    Operator::DelBar => ri.degree() == a && rj.degree() == b + 1,
                };
                if keep {
                    out.add_term(ri, rj, rc * c);
                }
            }
        }
        out
    }

    pub fn differential(&self, f: &ExactForm, op: Operator) -> Result<ExactForm> {
        if f.n() != self.n {
            return Err(Error::DimensionMismatch(self.n, f.n()));
        }
        Ok(self.apply(f, op))
    }

    /// Holomorphic volume form `φ_1 ∧ ... ∧ φ_n`.
    pub fn holomorphic_volume(&self) -> ExactForm {
        ExactForm::holomorphic(self.n, MultiIndex::full(self.n))
    }
}

/// Coefficient vector of `f` over a fixed list of monomials.
fn coordinates(f: &ExactForm, pos: &std::collections::HashMap<Monomial, usize>) -> SparseRow<GaussianRational> {
    f.terms().map(|(m, c)| (pos[m], c.clone())).collect()
}

/// Kernel of a `ℂ`-linear map restricted to the span of `basis` (assumed independent).
pub fn complex_kernel(basis: &[ExactForm], op: impl Fn(&ExactForm) -> Vec<ExactForm>) -> Vec<ExactForm> {
    if basis.is_empty() {
        return vec![];
    }
    let n = basis[0].n();
    // Equations indexed by (output slot, monomial).
    let mut rows: std::collections::BTreeMap<(usize, Monomial), SparseRow<GaussianRational>> = Default::default();
    for (col, b) in basis.iter().enumerate() {
        for (slot, img) in op(b).into_iter().enumerate() {
            for (&m, c) in img.terms() {
                rows.entry((slot, m)).or_default().insert(col, c.clone());
            }
        }
    }
    let eqs: Vec<_> = rows.into_values().collect();
    linalg::kernel(basis.len(), &eqs)
        .into_iter()
        .map(|v| {
            v.iter().fold(ExactForm::zero(n), |acc, (&c, x)| acc.add(&basis[c].scale(x)))
        })
        .collect()
}

/// Indices of a maximal independent subfamily (greedy, in order).
pub fn independent_subset(forms: &[ExactForm]) -> Vec<usize> {
    let mut pos = std::collections::HashMap::new();
    for f in forms {
        for (m, _) in f.terms() {
            let next = pos.len();
            pos.entry(*m).or_insert(next);
        }
    }
    let mut ech = Echelon::new(pos.len());
    let mut keep = Vec::new();
    for (k, f) in forms.iter().enumerate() {
        if ech.insert(&coordinates(f, &pos)) {
            keep.push(k);
        }
    }
    keep
}

/// All `(a,b)` monomials with coefficient one.
pub fn monomial_basis(n: usize, a: usize, b: usize) -> Vec<ExactForm> {
    let mut out = Vec::new();
    for i in MultiIndex::all(n, a) {
        for j in MultiIndex::all(n, b) {
            out.push(ExactForm::monomial(n, i, j, GaussianRational::from_ints(1, 0)));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct HolomorphicSpace {
    pub k: usize,
    pub basis: Vec<ExactForm>,
}

/// Invariant `∂̄`-closed `(k,0)`-forms.
pub fn holomorphic_space(spec: &ManifoldSpec, k: usize) -> Result<HolomorphicSpace> {
    if k > spec.n {
        return Err(Error::OutOfRange(format!("k = {k} exceeds n = {}", spec.n)));
    }
    let basis = complex_kernel(&monomial_basis(spec.n, k, 0), |f| vec![spec.delbar(f)]);
    Ok(HolomorphicSpace { k, basis })
}

/// `F_j(β, ρ)` with `β ∧ ρ = F_j(β, ρ) φ_1∧...∧φ_n`.
pub fn f_pairing(spec: &ManifoldSpec, j: usize, beta: &ExactForm, rho: &ExactForm) -> Result<GaussianRational> {
    if !spec.is_parallelizable() {
        return Err(Error::NotParallelizable);
    }
    let n = spec.n;
    let ok = |f: &ExactForm, deg: usize| f.bidegrees().iter().all(|&b| b == (deg, 0));
    if j > n || !ok(beta, j) || !ok(rho, n - j) {
        return Err(Error::Degree(format!("F_{j} pairs ({j},0)- and ({},0)-forms", n.saturating_sub(j))));
    }
    Ok(beta.wedge(rho).coeff(MultiIndex::full(n), MultiIndex::EMPTY))
}

/// Closed `(p,p)`-form `σ_p Σ Ψ_h ∧ Ψ̄_h` over a basis of `(Im d)^⊥`.
#[derive(Clone, Debug)]
pub struct PhkForm {
    pub p: usize,
    pub omega: ExactForm,
    /// The `Ψ_h`; simple whenever `strongly_positive` holds.
    pub factors: Vec<ExactForm>,
    pub strongly_positive: bool,
}

/// Image of `d : Ω^{k-1} → Ω^k` on holomorphic forms (basis).
pub fn exact_holomorphic_image(spec: &ManifoldSpec, k: usize) -> Result<Vec<ExactForm>> {
    if k == 0 {
        return Ok(vec![]);
    }
    let dom = holomorphic_space(spec, k - 1)?;
    let imgs: Vec<ExactForm> = dom.basis.iter().map(|b| spec.d(b)).collect();
    Ok(independent_subset(&imgs).into_iter().map(|i| imgs[i].clone()).collect())
}

pub fn phk_construct(spec: &ManifoldSpec, p: usize) -> Result<PhkForm> {
    if !spec.is_parallelizable() {
        return Err(Error::NotParallelizable);
    }
    let n = spec.n;
    if p == 0 || p >= n {
        return Err(Error::OutOfRange(format!("p = {p} outside 1..{}", n - 1)));
    }
    let k = n - p;
    let image = exact_holomorphic_image(spec, k)?;
    let candidates = monomial_basis(n, p, 0);
    let mut perp = complex_kernel(&candidates, |psi| {
        image
            .iter()
            .map(|a| ExactForm::constant(n, a.wedge(psi).coeff(MultiIndex::full(n), MultiIndex::EMPTY)))
            .collect()
    });
    simplify_basis(&mut perp)?;
    let strongly_positive = perp.iter().all(|f| f.is_simple().unwrap_or(false));
    let omega = perp.iter().fold(ExactForm::zero(n), |acc, f| acc.add(&square(f)));
    Ok(PhkForm { p, omega, factors: perp, strongly_positive })
}

/// Replaces non-simple basis vectors by simple ones of the form
/// `ψ + c_1 Ψ_a + c_2 Ψ_b` while the span is unchanged.
fn simplify_basis(basis: &mut [ExactForm]) -> Result<()> {
    let coeffs: Vec<GaussianRational> = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)]
        .iter()
        .map(|&(a, b)| GaussianRational::from_frac(a, b))
        .collect();
    for h in 0..basis.len() {
        if basis[h].is_simple()? {
            continue;
        }
        let others: Vec<usize> = (0..basis.len()).filter(|&o| o != h).collect();
        'search: for &a in &others {
            for c1 in &coeffs {
                let cand = basis[h].add(&basis[a].scale(c1));
                if cand.is_simple()? {
                    basis[h] = cand;
                    break 'search;
                }
                for &b in others.iter().filter(|&&b| b > a) {
                    for c2 in &coeffs {
                        let cand2 = cand.add(&basis[b].scale(c2));
                        if cand2.is_simple()? {
                            basis[h] = cand2;
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Outcome of the search for a nonzero simple `α = ∂β` (with `∂̄β = 0`, `∂̄∂β = 0`).
#[derive(Clone, Debug)]
pub enum SimpleExactSearch {
    Found { alpha: ExactForm, beta: ExactForm },
    /// The exhaustive Plücker solve proved there is none.
    CertifiedNone,
    Inconclusive,
}

#[derive(Clone, Copy, Debug)]
pub struct SimpleSearchBudget {
    pub draws: usize,
    pub seed: u64,
}

impl Default for SimpleSearchBudget {
    fn default() -> Self {
        SimpleSearchBudget { draws: 10_000, seed: 42 }
    }
}

/// Pairs `(∂β, β)` spanning the exact holomorphic `k`-forms with admissible potentials.
pub fn exact_holomorphic_pairs(spec: &ManifoldSpec, k: usize) -> Result<Vec<(ExactForm, ExactForm)>> {
    if k == 0 || k > spec.n {
        return Ok(vec![]);
    }
    let dom = monomial_basis(spec.n, k - 1, 0);
    let ker = complex_kernel(&dom, |b| vec![spec.delbar(b), spec.delbar(&spec.del(b))]);
    let images: Vec<ExactForm> = ker.iter().map(|b| spec.del(b)).collect();
    Ok(independent_subset(&images).into_iter().map(|i| (images[i].clone(), ker[i].clone())).collect())
}

pub fn verify_simple_exact(spec: &ManifoldSpec, alpha: &ExactForm, beta: &ExactForm) -> std::result::Result<(), String> {
    if alpha.is_zero() {
        return Err("alpha vanishes".into());
    }
    if !alpha.is_simple().map_err(|e| e.to_string())? {
        return Err("alpha is not simple".into());
    }
    if spec.del(beta) != *alpha || spec.d(beta) != *alpha {
        return Err("alpha differs from d beta".into());
    }
    if !spec.delbar(beta).is_zero() {
        return Err("beta is not holomorphic".into());
    }
    Ok(())
}

pub fn find_simple_exact_holomorphic(spec: &ManifoldSpec, k: usize, budget: &SimpleSearchBudget) -> Result<SimpleExactSearch> {
    let pairs = exact_holomorphic_pairs(spec, k)?;
    if pairs.is_empty() {
        return Ok(SimpleExactSearch::CertifiedNone);
    }
    let combine = |x: &[GaussianRational]| -> (ExactForm, ExactForm) {
        let mut a = ExactForm::zero(spec.n);
        let mut b = ExactForm::zero(spec.n);
        for ((alpha, beta), c) in pairs.iter().zip(x) {
            if !c.is_zero_value() {
                a = a.add(&alpha.scale(c));
                b = b.add(&beta.scale(c));
            }
        }
        (a, b)
    };
    let found = |alpha: ExactForm, beta: ExactForm| -> Result<Option<SimpleExactSearch>> {
        if !alpha.is_zero() && alpha.is_simple()? && verify_simple_exact(spec, &alpha, &beta).is_ok() {
            Ok(Some(SimpleExactSearch::Found { alpha, beta }))
        } else {
            Ok(None)
        }
    };
    for (alpha, beta) in &pairs {
        if let Some(r) = found(alpha.clone(), beta.clone())? {
            return Ok(r);
        }
    }
    if pairs.len() <= 3 {
        return exhaustive(spec, &pairs, &combine, &found);
    }
    let palette = [
        GaussianRational::from_ints(0, 0),
        GaussianRational::from_ints(1, 0),
        GaussianRational::from_ints(-1, 0),
        GaussianRational::from_ints(0, 1),
        GaussianRational::from_ints(0, -1),
        GaussianRational::from_ints(2, 0),
        GaussianRational::from_ints(-2, 0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.draws {
        let x: Vec<GaussianRational> = (0..pairs.len()).map(|_| palette[rng.gen_range(0..palette.len())].clone()).collect();
        let (a, b) = combine(&x);
        if let Some(r) = found(a, b)? {
            return Ok(r);
        }
    }
    Ok(SimpleExactSearch::Inconclusive)
}

trait ZeroValue {
    fn is_zero_value(&self) -> bool;
}

impl ZeroValue for GaussianRational {
    fn is_zero_value(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

type Combine<'a> = dyn Fn(&[GaussianRational]) -> (ExactForm, ExactForm) + 'a;
type Found<'a> = dyn Fn(ExactForm, ExactForm) -> Result<Option<SimpleExactSearch>> + 'a;

/// Solves the Plücker quadrics on the projective span of at most three generators.
fn exhaustive(
    spec: &ManifoldSpec,
    pairs: &[(ExactForm, ExactForm)],
    combine: &Combine<'_>,
    found: &Found<'_>,
) -> Result<SimpleExactSearch> {
    use crate::poly::{common_roots_univariate, no_common_root_bivariate, BiPoly, Poly};
    let d = pairs.len();
    let k = pairs[0].0.bidegrees().iter().next().map(|b| b.0).unwrap_or(0);
    let n = spec.n;
    let zero = GaussianRational::from_ints(0, 0);
    let one = GaussianRational::from_ints(1, 0);
    // quad[(xi, mono)][i][j]: coefficient of (ι_ξ α_i) ∧ α_j.
    let mut quads: std::collections::BTreeMap<(MultiIndex, Monomial), Vec<Vec<GaussianRational>>> = Default::default();
    if k >= 2 {
        for xi in MultiIndex::all(n, k - 1) {
            for i in 0..d {
                let c = pairs[i].0.contract_multi(xi);
                if c.is_zero() {
                    continue;
                }
                for j in 0..d {
                    for (&m, v) in c.wedge(&pairs[j].0).terms() {
                        let e = quads.entry((xi, m)).or_insert_with(|| vec![vec![zero.clone(); d]; d]);
                        e[i][j] = &e[i][j] + v;
                    }
                }
            }
        }
    }
    let quads: Vec<Vec<Vec<GaussianRational>>> = quads.into_values().collect();
    // Chart x = (0,..,0,1,t_1,..): leading coordinate at position `lead`.
    for lead in (0..d).rev() {
        let free = d - 1 - lead;
        match free {
            0 => {
                let mut x = vec![zero.clone(); d];
                x[lead] = one.clone();
                let (a, b) = combine(&x);
                if let Some(r) = found(a, b)? {
                    return Ok(r);
                }
            }
            1 => {
                // q(t) = Q[l][l] + (Q[l][t]+Q[t][l]) t + Q[t][t] t².
                let polys: Vec<Poly> = quads
                    .iter()
                    .map(|q| {
                        let (l, t) = (lead, lead + 1);
                        Poly::new(vec![q[l][l].clone(), &q[l][t] + &q[t][l], q[t][t].clone()])
                    })
                    .collect();
                match common_roots_univariate(&polys) {
                    crate::poly::Roots::None => {}
                    crate::poly::Roots::Rational(roots) => {
                        for t in roots {
                            let mut x = vec![zero.clone(); d];
                            x[lead] = one.clone();
                            x[lead + 1] = t;
                            let (a, b) = combine(&x);
                            if let Some(r) = found(a, b)? {
                                return Ok(r);
                            }
                        }
                        return Ok(SimpleExactSearch::Inconclusive);
                    }
                    crate::poly::Roots::Other => return Ok(SimpleExactSearch::Inconclusive),
                }
            }
            2 => {
                // Variables s = x[lead+1], t = x[lead+2].
                let (l, s, t) = (lead, lead + 1, lead + 2);
                let polys: Vec<BiPoly> = quads
                    .iter()
                    .map(|q| {
                        let sym = |a: usize, b: usize| if a == b { q[a][a].clone() } else { &q[a][b] + &q[b][a] };
                        // Coefficients as polynomials in s, by powers of t.
                        BiPoly::new(vec![
                            Poly::new(vec![sym(l, l), sym(l, s), sym(s, s)]),
                            Poly::new(vec![sym(l, t), sym(s, t)]),
                            Poly::new(vec![sym(t, t)]),
                        ])
                    })
                    .collect();
                if !no_common_root_bivariate(&polys) {
                    return Ok(SimpleExactSearch::Inconclusive);
                }
            }
            _ => return Ok(SimpleExactSearch::Inconclusive),
        }
    }
    Ok(SimpleExactSearch::CertifiedNone)
}

/// `T = σ_k α∧ᾱ` together with `A = ½ σ_{k-1} β∧β̄`, so that `i∂∂̄A = T`.
pub fn pluriclosed_obstruction(spec: &ManifoldSpec, alpha: &ExactForm, beta: &ExactForm) -> Result<(ExactForm, ExactForm)> {
    let k = alpha.bidegrees().iter().next().map(|b| b.0).unwrap_or(0);
    let t = square(alpha);
    let a = beta.wedge(&beta.conjugate()).scale(&(&sigma(k.saturating_sub(1)) * &GaussianRational::from_frac(1, 2)));
    let check = spec.del(&spec.delbar(&a)).scale(&GaussianRational::i());
    if check != t {
        return Err(Error::Certificate("i∂∂̄A differs from σ_k α∧ᾱ".into()));
    }
    Ok((t, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exterior::kahler_form;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::from_one_based(v)
    }

    fn phi(n: usize, v: &[usize]) -> ExactForm {
        ExactForm::holomorphic(n, mi(v))
    }

    #[test]
    fn catalog_specs_validate() {
        let r = catalog::iwasawa().validate().unwrap();
        assert!(r.holomorphically_parallelizable);
        let eb = catalog::eta_beta(2);
        assert!(eb.validate().unwrap().holomorphically_parallelizable);
        assert_eq!(eb.d_phi[4], phi(5, &[1, 2]).add(&phi(5, &[3, 4])));
        for spec in [catalog::i3_1(), catalog::efv8(), catalog::i3_t(GaussianRational::from_frac(1, 3)), catalog::torus(3)] {
            spec.validate().unwrap();
        }
        assert!(!catalog::efv8().is_parallelizable());
    }

    #[test]
    fn forbidden_bidegree_is_rejected() {
        let n = 2;
        let bad = ManifoldSpec::new("bad", n, vec![ExactForm::zero(n), ExactForm::monomial(n, MultiIndex::EMPTY, mi(&[1, 2]), GaussianRational::from_ints(1, 0))]);
        match bad.validate() {
            Err(Error::InvalidSpec(errs)) => assert!(errs[0].contains("(0,2)") && errs[0].contains("bar1^bar2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_closed_structure_is_rejected() {
        let n = 3;
        // d phi2 = phi1^phi3 with d phi3 = phi1^phi2 gives d d phi2 != 0 only when inconsistent.
        let spec = ManifoldSpec::new("bad", n, vec![ExactForm::zero(n), phi(n, &[1, 3]), phi(n, &[2, 3])]);
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn differential_examples() {
        let i3 = catalog::iwasawa();
        assert_eq!(i3.del(&phi(3, &[3])), phi(3, &[1, 2]));
        assert!(i3.delbar(&phi(3, &[3])).is_zero());
        let eb = catalog::eta_beta(2);
        assert_eq!(eb.d(&phi(5, &[1, 5])), phi(5, &[1, 3, 4]).neg());
        let i31 = catalog::i3_1();
        let w = kahler_form::<GaussianRational>(3);
        assert!(i31.del(&i31.delbar(&w)).is_zero());
    }

    #[test]
    fn holomorphic_spaces() {
        assert_eq!(holomorphic_space(&catalog::iwasawa(), 1).unwrap().basis.len(), 3);
        let h = holomorphic_space(&catalog::efv8(), 1).unwrap();
        assert_eq!(h.basis.len(), 3);
        assert!(h.basis.iter().all(|f| f.coeff(mi(&[3]), MultiIndex::EMPTY).is_zero_value()));
        assert_eq!(holomorphic_space(&catalog::efv8(), 0).unwrap().basis.len(), 1);
    }

    #[test]
    fn f_pairing_examples() {
        let i3 = catalog::iwasawa();
        let one = GaussianRational::from_ints(1, 0);
        assert_eq!(f_pairing(&i3, 2, &phi(3, &[1, 2]), &phi(3, &[3])).unwrap(), one);
        assert!(f_pairing(&i3, 2, &phi(3, &[1, 2]), &phi(3, &[1])).unwrap().is_zero_value());
        assert_eq!(f_pairing(&i3, 2, &phi(3, &[1, 3]), &phi(3, &[2])).unwrap(), -one);
        assert!(matches!(f_pairing(&catalog::efv8(), 2, &phi(4, &[1, 2]), &phi(4, &[3, 4])), Err(Error::NotParallelizable)));
    }

    #[test]
    fn phk_forms_are_closed_and_strongly_positive() {
        for (spec, p) in [(catalog::iwasawa(), 2), (catalog::torus(3), 1), (catalog::torus(3), 2), (catalog::eta_beta(2), 4), (catalog::eta_beta(2), 3)] {
            let f = phk_construct(&spec, p).unwrap();
            assert!(spec.d(&f.omega).is_zero());
            assert!(f.strongly_positive, "{} p={p}", spec.name);
            assert!(crate::positivity::verify_sp_decomposition(&f.omega, &f.factors).is_ok());
        }
        let t = phk_construct(&catalog::torus(4), 2).unwrap();
        assert_eq!(t.omega, crate::exterior::identity_form(4, 2));
    }

    #[test]
    fn simple_exact_forms() {
        let eb = catalog::eta_beta(2);
        match find_simple_exact_holomorphic(&eb, 3, &SimpleSearchBudget::default()).unwrap() {
            SimpleExactSearch::Found { alpha, beta } => {
                assert!(verify_simple_exact(&eb, &alpha, &beta).is_ok());
                let (t, _) = pluriclosed_obstruction(&eb, &alpha, &beta).unwrap();
                assert!(!t.is_zero());
            }
            other => panic!("{other:?}"),
        }
        let direct = phi(5, &[1, 5]);
        assert!(verify_simple_exact(&eb, &phi(5, &[1, 3, 4]).neg(), &direct).is_ok());
        for k in 1..=2 {
            assert!(matches!(find_simple_exact_holomorphic(&eb, k, &SimpleSearchBudget::default()).unwrap(), SimpleExactSearch::CertifiedNone));
        }
        for k in 1..=3 {
            assert!(matches!(find_simple_exact_holomorphic(&catalog::torus(3), k, &SimpleSearchBudget::default()).unwrap(), SimpleExactSearch::CertifiedNone));
        }
    }
}
