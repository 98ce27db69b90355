//! Exterior algebra over an `n`-dimensional complex frame `φ_1..φ_n`.
//!
//! A [`Form`] is a finite sum of monomials `c · φ_I ∧ φ̄_J` with `I`, `J`
//! increasing multi-indices; the holomorphic factors always come first.
//! Indices are stored 0-based (bit `i` of a [`MultiIndex`] is `φ_{i+1}`);
//! every rendering uses the 1-based names.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{GaussianRational, Scalar};

/// Strictly increasing list of frame indices, stored as a bit set.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct MultiIndex(u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_bits(bits: u32) -> Self {
        MultiIndex(bits)
    }

    /// From 0-based indices; duplicates collapse.
    pub fn from_indices(indices: &[usize]) -> Self {
        MultiIndex(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    /// From the 1-based names used in formulas (`mi(&[1, 2])` is `φ_12`).
    pub fn from_one_based(indices: &[usize]) -> Self {
        MultiIndex(indices.iter().fold(0, |acc, &i| acc | (1 << (i - 1))))
    }

    pub fn full(n: usize) -> Self {
        MultiIndex(((1u64 << n) - 1) as u32)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn is_disjoint(self, other: MultiIndex) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: MultiIndex) -> Self {
        MultiIndex(self.0 | other.0)
    }

    pub fn without(self, i: usize) -> Self {
        MultiIndex(self.0 & !(1 << i))
    }

    pub fn with(self, i: usize) -> Self {
        MultiIndex(self.0 | (1 << i))
    }

    pub fn complement(self, n: usize) -> Self {
        MultiIndex(Self::full(n).0 & !self.0)
    }

    pub fn is_subset_of(self, other: MultiIndex) -> bool {
        self.0 & !other.0 == 0
    }

    /// 0-based indices in increasing order.
    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|&i| self.contains(i)).collect()
    }

    /// Position of `i` inside the index list.
    pub fn position(self, i: usize) -> usize {
        (self.0 & ((1u32 << i) - 1)).count_ones() as usize
    }

    /// All multi-indices of length `p` in `1..n`, lexicographic.
    pub fn all(n: usize, p: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(p);
        fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == p {
                out.push(MultiIndex::from_indices(cur));
                return;
            }
            for i in start..n {
                if n - i < p - cur.len() {
                    break;
                }
                cur.push(i);
                rec(i + 1, n, p, cur, out);
                cur.pop();
            }
        }
        if p <= n {
            rec(0, n, p, &mut current, &mut out);
        }
        out
    }

    /// 1-based compact name, e.g. `123`, or `{1,10}` when an index exceeds 9.
    pub fn name(self) -> String {
        let idx = self.indices();
        if idx.iter().all(|&i| i < 9) {
            idx.iter().map(|i| (i + 1).to_string()).collect()
        } else {
            let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
            format!("{{{}}}", parts.join(","))
        }
    }
}

impl Ord for MultiIndex {
    /// Degree first, then lexicographic on the sorted index lists.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let lowest = diff & diff.wrapping_neg();
        if self.0 & lowest != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Parity of the permutation sorting the concatenation `a ++ b`
/// (`a`, `b` disjoint): `+1` or `-1`.
pub fn merge_sign(a: MultiIndex, b: MultiIndex) -> i32 {
    let mut inversions = 0u32;
    let mut rest = b.0;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { a.0 & !((1u32 << (j + 1)) - 1) };
        inversions += above.count_ones();
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub type Monomial = (MultiIndex, MultiIndex);

/// Product of two monomials `φ_I∧φ̄_J` with its sign, or `None` when it vanishes.
pub fn monomial_product(a: Monomial, b: Monomial) -> Option<(i32, Monomial)> {
    let ((i1, j1), (i2, j2)) = (a, b);
    if !i1.is_disjoint(i2) || !j1.is_disjoint(j2) {
        return None;
    }
    let mut sign = merge_sign(i1, i2) * merge_sign(j1, j2);
    if (j1.degree() * i2.degree()) % 2 == 1 {
        sign = -sign;
    }
    Some((sign, (i1.union(i2), j1.union(j2))))
}

fn signed<S: Scalar>(c: &S, sign: i32) -> S {
    if sign < 0 {
        -c.clone()
    } else {
        c.clone()
    }
}

/// Element of the exterior algebra `Λ^{•,•}` over a fixed frame.
#[derive(Clone, PartialEq, Debug)]
pub struct Form<S> {
    n: usize,
    terms: BTreeMap<Monomial, S>,
}

pub type ExactForm = Form<GaussianRational>;
pub type FloatForm = Form<Complex64>;

impl<S: Scalar> Form<S> {
    pub fn zero(n: usize) -> Self {
        Form { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: S) -> Self {
        Self::monomial(n, MultiIndex::EMPTY, MultiIndex::EMPTY, c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, S::one())
    }

    pub fn monomial(n: usize, hol: MultiIndex, anti: MultiIndex, c: S) -> Self {
        let mut f = Self::zero(n);
        f.add_term(hol, anti, c);
        f
    }

    /// `φ_{i+1}` (0-based `i`).
    pub fn phi(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndex::from_indices(&[i]), MultiIndex::EMPTY, S::one())
    }

    /// `φ̄_{i+1}` (0-based `i`).
    pub fn phi_bar(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndex::EMPTY, MultiIndex::from_indices(&[i]), S::one())
    }

    /// `φ_I` as a `(|I|,0)`-form.
    pub fn holomorphic(n: usize, idx: MultiIndex) -> Self {
        Self::monomial(n, idx, MultiIndex::EMPTY, S::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, hol: MultiIndex, anti: MultiIndex) -> S {
        self.terms.get(&(hol, anti)).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, hol: MultiIndex, anti: MultiIndex, c: S) {
        debug_assert!(hol.bits() >> self.n == 0 && anti.bits() >> self.n == 0);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(hol, anti)) {
            Some(existing) => {
                let sum = existing.add_ref(&c);
                if sum.is_zero() {
                    self.terms.remove(&(hol, anti));
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert((hol, anti), c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_frame(other);
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_frame(other);
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Form { n: self.n, terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero(self.n);
        }
        let mut out = Self::zero(self.n);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, c.mul_ref(s));
        }
        out
    }

    fn check_frame(&self, other: &Self) {
        assert_eq!(self.n, other.n, "forms over different frames");
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        self.check_frame(other);
        let mut out = Self::zero(self.n);
        for (&ma, ca) in &self.terms {
            for (&mb, cb) in &other.terms {
                if let Some((sign, m)) = monomial_product(ma, mb) {
                    out.add_term(m.0, m.1, signed(&ca.mul_ref(cb), sign));
                }
            }
        }
        out
    }

    /// `self^k` (with `self^0 = 1`).
    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.n), |acc, _| acc.wedge(self))
    }

    /// Complex conjugation: `conj(c φ_I∧φ̄_J) = (-1)^{|I||J|} c̄ φ_J∧φ̄_I`.
    pub fn conjugate(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (&(i, j), c) in &self.terms {
            let sign = if (i.degree() * j.degree()) % 2 == 1 { -1 } else { 1 };
            out.add_term(j, i, signed(&c.conj(), sign));
        }
        out
    }

    /// Component of bidegree `(a, b)`.
    pub fn component(&self, a: usize, b: usize) -> Self {
        Form {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|((i, j), _)| i.degree() == a && j.degree() == b)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn bidegrees(&self) -> BTreeSet<(usize, usize)> {
        self.terms.keys().map(|(i, j)| (i.degree(), j.degree())).collect()
    }

    /// The bidegree when the form is nonzero and homogeneous.
    pub fn pure_bidegree(&self) -> Option<(usize, usize)> {
        let b = self.bidegrees();
        if b.len() == 1 {
            b.into_iter().next()
        } else {
            None
        }
    }

    pub fn filter_terms(&self, mut keep: impl FnMut(Monomial) -> bool) -> Self {
        Form {
            n: self.n,
            terms: self.terms.iter().filter(|(k, _)| keep(**k)).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    /// Interior product with the frame vector `e_{i+1}` (acts on holomorphic factors).
    pub fn contract(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (&(hol, anti), c) in &self.terms {
            if hol.contains(i) {
                let sign = if hol.position(i) % 2 == 0 { 1 } else { -1 };
                out.add_term(hol.without(i), anti, signed(c, sign));
            }
        }
        out
    }

    /// Interior product with the vector `Σ v_i e_i`.
    pub fn contract_vector(&self, v: &[S]) -> Self {
        let mut out = Self::zero(self.n);
        for (i, vi) in v.iter().enumerate() {
            if !vi.is_zero() {
                out = out.add(&self.contract(i).scale(vi));
            }
        }
        out
    }

    /// Iterated contraction by the frame vectors of `k` (in increasing order).
    pub fn contract_multi(&self, k: MultiIndex) -> Self {
        k.indices().into_iter().fold(self.clone(), |acc, i| acc.contract(i))
    }

    /// Plücker test for a pure `(p,0)`-form: `ι_ξ η ∧ η = 0` for every
    /// frame `(p-1)`-vector `ξ`. Zero counts as simple.
    pub fn is_simple_with_tol(&self, tol: f64) -> Result<bool> {
        if self.is_zero() {
            return Ok(true);
        }
        let (p, q) = self
            .pure_bidegree()
            .ok_or_else(|| Error::Degree("simplicity test needs a pure (p,0)-form".into()))?;
        if q != 0 {
            return Err(Error::Degree(format!("simplicity test needs a (p,0)-form, got ({p},{q})")));
        }
        if p <= 1 || p + 1 >= self.n {
            return Ok(true);
        }
        let scale = self.max_abs().powi(2).max(f64::MIN_POSITIVE);
        for xi in MultiIndex::all(self.n, p - 1) {
            let contracted = self.contract_multi(xi);
            if contracted.is_zero() {
                continue;
            }
            let relation = contracted.wedge(self);
            if relation.terms.values().any(|c| !c.is_negligible(tol * scale)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_simple(&self) -> Result<bool> {
        self.is_simple_with_tol(1e-9)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_complex().norm()).fold(0.0, f64::max)
    }

    pub fn to_float(&self) -> FloatForm {
        let mut out = FloatForm::zero(self.n);
        for (&(i, j), c) in &self.terms {
            out.add_term(i, j, c.to_complex());
        }
        out
    }

    /// Re-embeds into a frame of dimension `n` with indices shifted by `offset`
    /// (pullback through a product projection).
    pub fn embed(&self, n: usize, offset: usize) -> Self {
        assert!(self.n + offset <= n);
        let mut out = Self::zero(n);
        for (&(i, j), c) in &self.terms {
            out.add_term(
                MultiIndex::from_bits(i.bits() << offset),
                MultiIndex::from_bits(j.bits() << offset),
                c.clone(),
            );
        }
        out
    }

    /// Value of a `(p,0)`-form on a `p`-vector: `Σ η_I v_I`.
    pub fn evaluate_on(&self, v: &PVector<S>) -> S {
        let mut acc = S::zero();
        for (&(i, j), c) in &self.terms {
            if j == MultiIndex::EMPTY {
                if let Some(vi) = v.coeffs.get(&i) {
                    acc = acc.add_ref(&c.mul_ref(vi));
                }
            }
        }
        acc
    }
}

impl ExactForm {
    /// `Ω = conj(Ω)`.
    pub fn is_real(&self) -> bool {
        *self == self.conjugate()
    }
}

impl FloatForm {
    pub fn is_real_approx(&self, tol: f64) -> bool {
        self.approx_eq(&self.conjugate(), tol)
    }

    /// `max |a - b| <= tol · max(1, max|a|, max|b|)`.
    pub fn approx_eq(&self, other: &FloatForm, tol: f64) -> bool {
        let scale = 1f64.max(self.max_abs()).max(other.max_abs());
        self.sub(other).max_abs() <= tol * scale
    }
}

/// `σ_p = i^{p²} 2^{-p}`.
pub fn sigma(p: usize) -> GaussianRational {
    let p = p as i64;
    let two_pow = GaussianRational::from_ints(1 << p, 0);
    &GaussianRational::i_pow(p * p) / &two_pow
}

pub fn sigma_inv(p: usize) -> GaussianRational {
    sigma(p).inv().expect("sigma is nonzero")
}

/// `σ_p φ_I ∧ φ̄_I`.
pub fn positive_monomial<S: Scalar>(n: usize, idx: MultiIndex) -> Form<S> {
    Form::monomial(n, idx, idx, S::from_gaussian(&sigma(idx.degree())))
}

/// `σ_p η ∧ η̄` for a `(p,0)`-form `η`.
pub fn square<S: Scalar>(eta: &Form<S>) -> Form<S> {
    let p = eta.bidegrees().iter().map(|b| b.0).max().unwrap_or(0);
    eta.wedge(&eta.conjugate()).scale(&S::from_gaussian(&sigma(p)))
}

/// The volume form `dv = σ_n φ_{1..n} ∧ φ̄_{1..n}`.
pub fn volume_form<S: Scalar>(n: usize) -> Form<S> {
    positive_monomial(n, MultiIndex::full(n))
}

/// The standard Kähler form `σ_1 Σ φ_j ∧ φ̄_j`.
pub fn kahler_form<S: Scalar>(n: usize) -> Form<S> {
    (0..n).fold(Form::zero(n), |acc, j| {
        acc.add(&positive_monomial(n, MultiIndex::from_indices(&[j])))
    })
}

/// `σ_p Σ_{|I|=p} φ_I ∧ φ̄_I`; equals `ω^p / p!` for the standard Kähler form.
pub fn identity_form<S: Scalar>(n: usize, p: usize) -> Form<S> {
    MultiIndex::all(n, p)
        .into_iter()
        .fold(Form::zero(n), |acc, idx| acc.add(&positive_monomial(n, idx)))
}

/// The scalar `f` with `Ω ∧ Ψ = f · dv`, for `Ω` of pure bidegree `(p,p)`
/// and `Ψ` of pure bidegree `(k,k)`, `p + k = n`.
pub fn volume_pairing<S: Scalar>(omega: &Form<S>, psi: &Form<S>) -> Result<S> {
    let n = omega.n();
    if psi.n() != n {
        return Err(Error::DimensionMismatch(n, psi.n()));
    }
    let deg = |f: &Form<S>| -> Result<Option<usize>> {
        if f.is_zero() {
            return Ok(None);
        }
        match f.pure_bidegree() {
            Some((a, b)) if a == b => Ok(Some(a)),
            _ => Err(Error::Degree("pairing needs pure (p,p)-forms".into())),
        }
    };
    match (deg(omega)?, deg(psi)?) {
        (Some(p), Some(k)) if p + k != n => {
            return Err(Error::Degree(format!("pairing degrees {p} + {k} != {n}")))
        }
        (None, _) | (_, None) => return Ok(S::zero()),
        _ => {}
    }
    let top = omega.wedge(psi);
    let full = MultiIndex::full(n);
    let c = top.coeff(full, full);
    Ok(c.mul_ref(&S::from_gaussian(&sigma_inv(n))))
}

/// A `(p,0)`-vector `Σ v_I e_I`, optionally remembering simple factors.
#[derive(Clone, Debug, PartialEq)]
pub struct PVector<S> {
    pub n: usize,
    pub p: usize,
    pub coeffs: BTreeMap<MultiIndex, S>,
    pub factors: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> PVector<S> {
    pub fn basis(n: usize, idx: MultiIndex) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(idx, S::one());
        let factors = idx
            .indices()
            .into_iter()
            .map(|i| (0..n).map(|r| if r == i { S::one() } else { S::zero() }).collect())
            .collect();
        PVector { n, p: idx.degree(), coeffs, factors: Some(factors) }
    }

    /// `v_1 ∧ ... ∧ v_p`, each `v_j` given by its `n` frame coordinates.
    pub fn from_factors(n: usize, factors: &[Vec<S>]) -> Self {
        // Reuse the form wedge on (1,0)-slots: coordinates behave like φ's.
        let mut acc = Form::<S>::one(n);
        for v in factors {
            assert_eq!(v.len(), n);
            let mut lin = Form::zero(n);
            for (i, c) in v.iter().enumerate() {
                lin.add_term(MultiIndex::from_indices(&[i]), MultiIndex::EMPTY, c.clone());
            }
            acc = acc.wedge(&lin);
        }
        let coeffs = acc.terms().map(|((i, _), c)| (*i, c.clone())).collect();
        PVector { n, p: factors.len(), coeffs, factors: Some(factors.to_vec()) }
    }

    pub fn coordinate(&self, idx: MultiIndex) -> S {
        self.coeffs.get(&idx).cloned().unwrap_or_else(S::zero)
    }

    /// Plücker coordinates in lexicographic multi-index order.
    pub fn plucker(&self) -> Vec<S> {
        MultiIndex::all(self.n, self.p).into_iter().map(|i| self.coordinate(i)).collect()
    }

    /// The `(n-p,0)`-form `η = Σ v_I s_I φ_{I^c}` with `φ_I ∧ φ_{I^c} = s_I φ_{1..n}`,
    /// so that `ζ ∧ η = ζ(V) φ_{1..n}` for every `(p,0)`-form `ζ`.
    pub fn complement_form(&self) -> Form<S> {
        let mut out = Form::zero(self.n);
        for (&idx, c) in &self.coeffs {
            let comp = idx.complement(self.n);
            let s = merge_sign(idx, comp);
            out.add_term(comp, MultiIndex::EMPTY, signed(c, s));
        }
        out
    }
}

/// A `(p,p)`-vector `Σ a_{IK} e_I ∧ ē_K`.
#[derive(Clone, Debug, PartialEq)]
pub struct PPVector<S> {
    pub n: usize,
    pub p: usize,
    pub coeffs: BTreeMap<Monomial, S>,
}

impl<S: Scalar> PPVector<S> {
    pub fn basis(n: usize, hol: MultiIndex, anti: MultiIndex) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((hol, anti), S::one());
        PPVector { n, p: hol.degree(), coeffs }
    }

    /// `σ_p^{-1} V ∧ V̄`, a strongly positive `(p,p)`-vector when `V` is simple.
    pub fn simple_square(v: &PVector<S>) -> Self {
        let s = S::from_gaussian(&sigma_inv(v.p));
        let mut coeffs = BTreeMap::new();
        for (&i, vi) in &v.coeffs {
            for (&k, vk) in &v.coeffs {
                let c = vi.mul_ref(&vk.conj()).mul_ref(&s);
                if !c.is_zero() {
                    coeffs.insert((i, k), c);
                }
            }
        }
        PPVector { n: v.n, p: v.p, coeffs }
    }

    pub fn scale(&self, s: &S) -> Self {
        PPVector {
            n: self.n,
            p: self.p,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c.mul_ref(s))).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let sum = coeffs.get(k).map(|e| e.add_ref(c)).unwrap_or_else(|| c.clone());
            coeffs.insert(*k, sum);
        }
        coeffs.retain(|_, c| !c.is_zero());
        PPVector { n: self.n, p: self.p, coeffs }
    }
}

/// Dual evaluation `Ω(A) = Σ ω_{IK} a_{IK}` of a `(p,p)`-form on a `(p,p)`-vector.
pub fn evaluate<S: Scalar>(omega: &Form<S>, a: &PPVector<S>) -> S {
    a.coeffs.iter().fold(S::zero(), |acc, (&(i, k), c)| acc.add_ref(&omega.coeff(i, k).mul_ref(c)))
}

/// The isomorphism `g: Λ_{p,p} → Λ^{k,k}` characterised by
/// `Ω ∧ g(A) = Ω(A) dv` for every `(p,p)`-form `Ω`.
pub fn g_isomorphism<S: Scalar>(a: &PPVector<S>) -> Form<S> {
    let n = a.n;
    let full = MultiIndex::full(n);
    let sn = S::from_gaussian(&sigma(n));
    let mut out = Form::zero(n);
    for (&(i, k), c) in &a.coeffs {
        let (ic, kc) = (i.complement(n), k.complement(n));
        let (sign, m) = monomial_product((i, k), (ic, kc)).expect("complements are disjoint");
        debug_assert_eq!(m, (full, full));
        out.add_term(ic, kc, signed(&c.mul_ref(&sn), sign));
    }
    out
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Renders `φ_I∧φ̄_J` as `phi1^phi2^bar3` (`1` for the empty monomial).
pub fn monomial_name(hol: MultiIndex, anti: MultiIndex) -> String {
    let mut parts: Vec<String> = hol.indices().iter().map(|i| format!("phi{}", i + 1)).collect();
    parts.extend(anti.indices().iter().map(|i| format!("bar{}", i + 1)));
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("^")
    }
}

impl fmt::Display for ExactForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in self.ordered_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) {}", c, monomial_name(i, j))?;
        }
        Ok(())
    }
}

impl<S: Scalar> Form<S> {
    /// Terms ordered by total degree, holomorphic degree (descending), then
    /// lexicographically on `(I, J)`.
    pub fn ordered_terms(&self) -> Vec<(Monomial, S)> {
        let mut v: Vec<(Monomial, S)> = self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
        v.sort_by(|((i1, j1), _), ((i2, j2), _)| {
            (i1.degree() + j1.degree())
                .cmp(&(i2.degree() + j2.degree()))
                .then(i2.degree().cmp(&i1.degree()))
                .then(i1.cmp(i2))
                .then(j1.cmp(j2))
        });
        v
    }
}

/// Convenience: exact real rational scalar.
pub fn exact(num: i64, den: i64) -> GaussianRational {
    GaussianRational::from_frac(num, den)
}

pub fn exact_one() -> GaussianRational {
    GaussianRational::one()
}

pub fn exact_zero() -> GaussianRational {
    GaussianRational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::from_one_based(v)
    }

    fn phi(n: usize, idx: &[usize]) -> ExactForm {
        ExactForm::holomorphic(n, mi(idx))
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1), GaussianRational::new(rat(0, 1), rat(1, 2)));
        assert_eq!(sigma(2), exact(1, 4));
        assert_eq!(sigma(3), GaussianRational::new(rat(0, 1), rat(1, 8)));
        assert_eq!(sigma(0), exact_one());
    }

    #[test]
    fn lexicographic_order() {
        let all = MultiIndex::all(4, 2);
        let names: Vec<String> = all.iter().map(|m| m.name()).collect();
        assert_eq!(names, ["12", "13", "14", "23", "24", "34"]);
        let mut sorted = all.clone();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn wedge_examples() {
        let n = 4;
        assert!(phi(n, &[1]).wedge(&phi(n, &[1])).is_zero());
        assert_eq!(phi(n, &[1, 2]).wedge(&phi(n, &[3, 4])), phi(n, &[1, 2, 3, 4]));
        let s = phi(n, &[1, 2]).add(&phi(n, &[3, 4]));
        assert_eq!(s.wedge(&s), phi(n, &[1, 2, 3, 4]).scale(&exact(2, 1)));
        assert_eq!(phi(n, &[2]).wedge(&phi(n, &[1])), phi(n, &[1, 2]).neg());
    }

    #[test]
    fn conjugation_examples() {
        let n = 2;
        assert_eq!(phi(n, &[1]).conjugate(), ExactForm::phi_bar(n, 0));
        let s1 = sigma(1);
        let a = phi(n, &[1]).wedge(&ExactForm::phi_bar(n, 1)).scale(&s1);
        let b = phi(n, &[2]).wedge(&ExactForm::phi_bar(n, 0)).scale(&s1);
        assert_eq!(a.conjugate(), b);
        let s = phi(4, &[1, 2]).add(&phi(4, &[3, 4]));
        let sq = square(&s);
        assert_eq!(sq.conjugate(), sq);
    }

    #[test]
    fn volume_pairing_examples() {
        let a = positive_monomial::<GaussianRational>(2, mi(&[1]));
        let b = positive_monomial::<GaussianRational>(2, mi(&[2]));
        assert_eq!(volume_pairing(&a, &b).unwrap(), exact_one());
        assert_eq!(volume_pairing(&a, &a).unwrap(), exact_zero());
        for n in 1..=4 {
            for p in 0..=n {
                for idx in MultiIndex::all(n, p) {
                    let om = positive_monomial::<GaussianRational>(n, idx);
                    let ps = positive_monomial::<GaussianRational>(n, idx.complement(n));
                    assert_eq!(volume_pairing(&om, &ps).unwrap(), exact_one());
                }
            }
        }
        let bad = phi(2, &[1]);
        assert!(volume_pairing(&bad, &a).is_err());
    }

    #[test]
    fn g_isomorphism_examples() {
        let a = PPVector::<GaussianRational>::basis(3, mi(&[1, 2]), mi(&[1, 2])).scale(&sigma_inv(2));
        assert_eq!(g_isomorphism(&a), positive_monomial(3, mi(&[3])));
        let b = PPVector::<GaussianRational>::basis(2, mi(&[1]), mi(&[1])).scale(&sigma_inv(1));
        assert_eq!(g_isomorphism(&b), positive_monomial(2, mi(&[2])));
    }

    #[test]
    fn g_image_of_simple_square_is_strongly_positive() {
        let n = 4;
        let one = exact_one();
        let z = exact_zero();
        let v1 = vec![one.clone(), one.clone(), z.clone(), z.clone()];
        let v2 = vec![z.clone(), z.clone(), one.clone(), z.clone()];
        let v = PVector::from_factors(n, &[v1, v2]);
        let image = g_isomorphism(&PPVector::simple_square(&v));
        let eta = v.complement_form();
        assert!(eta.is_simple().unwrap());
        assert_eq!(image, square(&eta));
        assert_eq!(image.bidegrees().into_iter().collect::<Vec<_>>(), vec![(2, 2)]);
    }

    #[test]
    fn contraction_examples() {
        let n = 4;
        assert_eq!(phi(n, &[1, 2]).contract(0), phi(n, &[2]));
        assert!(phi(n, &[1, 2]).contract(2).is_zero());
        assert_eq!(phi(n, &[1, 2]).add(&phi(n, &[3, 4])).contract(0), phi(n, &[2]));
        assert_eq!(phi(n, &[1, 2]).contract(1), phi(n, &[1]).neg());
    }

    #[test]
    fn simplicity_examples() {
        let n = 4;
        assert!(phi(n, &[1, 2]).is_simple().unwrap());
        assert!(!phi(n, &[1, 2]).add(&phi(n, &[3, 4])).is_simple().unwrap());
        let one_form = phi(n, &[1]).add(&phi(n, &[3]).scale(&exact(5, 2)));
        assert!(one_form.is_simple().unwrap());
        let big = phi(n, &[1, 2, 3]).add(&phi(n, &[2, 3, 4])).add(&phi(n, &[1, 3, 4]));
        assert!(big.is_simple().unwrap());
        // degree-3 non-simple form in dimension 6
        let six = phi(6, &[1, 2, 3]).add(&phi(6, &[4, 5, 6]));
        assert!(!six.is_simple().unwrap());
        assert!(ExactForm::zero(4).is_simple().unwrap());
        assert!(square(&phi(n, &[1])).is_simple().is_err());
    }

    #[test]
    fn merge_sign_matches_permutation_parity() {
        assert_eq!(merge_sign(mi(&[1, 3]), mi(&[2])), -1);
        assert_eq!(merge_sign(mi(&[1, 2]), mi(&[3, 4])), 1);
        assert_eq!(merge_sign(mi(&[3, 4]), mi(&[1, 2])), 1);
        assert_eq!(merge_sign(mi(&[2, 3, 4]), mi(&[1])), -1);
    }
}
