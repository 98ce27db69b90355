use num_complex::Complex64;
use pkahler::catalog;
use pkahler::exterior::{evaluate, g_isomorphism, sigma, volume_pairing, PPVector};
use pkahler::nilmanifold::ManifoldSpec;
use pkahler::positivity::{check_transverse, classify_p, evaluate_on_plane, invert_balanced, pullback, spectrum, verify_sp_decomposition, Membership};
use pkahler::product::{product_spec, Factor};
use pkahler::{ExactForm, FloatForm, GaussianRational, MultiIndex, PVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gr(re: i64, im: i64) -> GaussianRational {
    GaussianRational::from_ints(re, im)
}

/// Sparse form of pure bidegree `(a, b)` from a list of small coefficients.
fn form_from(n: usize, a: usize, b: usize, picks: &[(usize, usize, i64, i64)]) -> ExactForm {
    let (hs, bs) = (MultiIndex::all(n, a), MultiIndex::all(n, b));
    let mut f = ExactForm::zero(n);
    for &(i, j, re, im) in picks {
        f.add_term(hs[i % hs.len()], bs[j % bs.len()], gr(re, im));
    }
    f
}

fn picks() -> impl Strategy<Value = Vec<(usize, usize, i64, i64)>> {
    prop::collection::vec((0usize..64, 0usize..64, -3i64..=3, -3i64..=3), 0..6)
}

/// `σ_p Σ H_IK φ_I∧φ̄_K` for a Hermitian integer matrix `H`.
fn real_pp(n: usize, p: usize, entries: &[(i64, i64)]) -> ExactForm {
    let idx = MultiIndex::all(n, p);
    let s = sigma(p);
    let mut f = ExactForm::zero(n);
    let mut it = entries.iter().cycle();
    for a in 0..idx.len() {
        for b in a..idx.len() {
            let &(re, im) = it.next().expect("cycled");
            let h = if a == b { gr(re, 0) } else { gr(re, im) };
            f.add_term(idx[a], idx[b], &s * &h);
            if a != b {
                f.add_term(idx[b], idx[a], &s * &h.conj());
            }
        }
    }
    f
}

fn entries() -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-4i64..=4, -4i64..=4), 1..40)
}

fn random_invariant(spec: &ManifoldSpec, picks: &[(usize, usize, i64, i64)], a: usize, b: usize) -> ExactForm {
    form_from(spec.n, a.min(spec.n), b.min(spec.n), picks)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn graded_anticommutativity(n in 2usize..=6, a1 in 0usize..3, b1 in 0usize..3, a2 in 0usize..3, b2 in 0usize..3, p1 in picks(), p2 in picks()) {
        let (a1, b1, a2, b2) = (a1.min(n), b1.min(n), a2.min(n), b2.min(n));
        let x = form_from(n, a1, b1, &p1);
        let y = form_from(n, a2, b2, &p2);
        let sign = if ((a1 + b1) * (a2 + b2)) % 2 == 1 { gr(-1, 0) } else { gr(1, 0) };
        prop_assert_eq!(x.wedge(&y), y.wedge(&x).scale(&sign));
    }

    #[test]
    fn conjugation_is_multiplicative(n in 2usize..=5, a in 0usize..3, b in 0usize..3, p1 in picks(), p2 in picks()) {
        let x = form_from(n, a.min(n), b.min(n), &p1);
        let y = form_from(n, b.min(n), a.min(n), &p2);
        prop_assert_eq!(x.wedge(&y).conjugate(), x.conjugate().wedge(&y.conjugate()));
    }

    #[test]
    fn pairing_with_g_is_evaluation(n in 2usize..=4, p in 1usize..4, e in entries(), vs in prop::collection::vec((-2i64..=2, -2i64..=2), 16)) {
        let p = p.min(n - 1);
        let omega = real_pp(n, p, &e);
        let factors: Vec<Vec<GaussianRational>> = (0..p).map(|r| (0..n).map(|c| { let (x, y) = vs[(r * n + c) % vs.len()]; gr(x, y) }).collect()).collect();
        let a = PPVector::simple_square(&PVector::from_factors(n, &factors));
        prop_assert_eq!(volume_pairing(&omega, &g_isomorphism(&a)).unwrap(), evaluate(&omega, &a));
    }

    #[test]
    fn eigen_reconstruction(n in 2usize..=5, p in 1usize..5, e in entries()) {
        let p = p.min(n - 1);
        let omega = real_pp(n, p, &e);
        let s = spectrum(&omega).unwrap();
        prop_assert!(s.reconstruct().approx_eq(&omega.to_float(), 1e-9));
    }

    #[test]
    fn cone_collapse_at_the_ends(n in 2usize..=5, top in any::<bool>(), e in entries()) {
        let p = if top { n - 1 } else { 1 };
        let omega = real_pp(n, p, &e);
        let a = classify_p(&omega).unwrap().status;
        let b = check_transverse(&omega, &Default::default()).unwrap().status;
        prop_assert_eq!(a == Membership::StrictlyIn, b == Membership::StrictlyIn);
    }

    #[test]
    fn cone_chain(n in 3usize..=4, p in 1usize..3, vs in prop::collection::vec((-2i64..=2, -2i64..=2), 24), count in 1usize..4) {
        // Simple squares are strongly positive, hence positive, hence weakly positive.
        let mut gens = Vec::new();
        for g in 0..count {
            let factors: Vec<ExactForm> = (0..p).map(|r| {
                let mut f = ExactForm::zero(n);
                for c in 0..n {
                    let (x, y) = vs[(g * 7 + r * n + c) % vs.len()];
                    f.add_term(MultiIndex::from_indices(&[c]), MultiIndex::EMPTY, gr(x, y));
                }
                f
            }).collect();
            gens.push(factors.iter().skip(1).fold(factors[0].clone(), |acc, f| acc.wedge(f)));
        }
        let omega = gens.iter().fold(ExactForm::zero(n), |acc, g| acc.add(&pkahler::exterior::square(g)));
        prop_assert!(verify_sp_decomposition(&omega, &gens).is_ok());
        prop_assert_ne!(classify_p(&omega).unwrap().status, Membership::NotIn);
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64 * 31 + p as u64);
        for _ in 0..50 {
            let frame = pkahler::grassmann::random_frame(n, p, &mut rng);
            prop_assert!(evaluate_on_plane(&omega, &frame).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn balanced_inversion_round_trip(n in 3usize..=6, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Random unitary frame and distinct positive eigenvalues.
        let frame = pkahler::grassmann::random_frame(n, n, &mut rng);
        let mut omega = FloatForm::zero(n);
        for j in 0..n {
            let lambda = 0.5 + j as f64 + rng.gen_range(0.0..0.5);
            let mut psi = FloatForm::zero(n);
            for r in 0..n {
                psi.add_term(MultiIndex::from_indices(&[r]), MultiIndex::EMPTY, frame[(r, j)]);
            }
            omega = omega.add(&pkahler::exterior::square(&psi).scale(&Complex64::new(lambda, 0.0)));
        }
        let fact = pkahler::positivity::factorial(n - 1);
        let big = omega.power(n - 1).scale(&Complex64::new(1.0 / fact, 0.0));
        let back = invert_balanced(&big).unwrap();
        let (want, got) = (omega.power(n - 1), back.power(n - 1));
        prop_assert!(got.sub(&want).max_abs() <= 1e-8 * want.max_abs());
    }

    #[test]
    fn differential_laws(which in 0usize..6, a in 0usize..3, b in 0usize..3, p in picks()) {
        let spec = [catalog::iwasawa(), catalog::eta_beta(2), catalog::i3_1(), catalog::efv8(), catalog::i3_t(gr(1, 3)), catalog::torus(3)][which].clone();
        let f = random_invariant(&spec, &p, a, b);
        prop_assert!(spec.d(&spec.d(&f)).is_zero());
        prop_assert!(spec.del(&spec.del(&f)).is_zero());
        prop_assert!(spec.delbar(&spec.delbar(&f)).is_zero());
        prop_assert_eq!(spec.del(&spec.delbar(&f)), spec.delbar(&spec.del(&f)).neg());
        prop_assert_eq!(spec.del(&f).conjugate(), spec.delbar(&f.conjugate()));
    }

    #[test]
    fn pushforward_laws(a in 3usize..5, p in picks(), q in picks()) {
        let pr = product_spec(&catalog::iwasawa(), &catalog::i3_1()).unwrap();
        let f = form_from(6, a, a, &p).add(&pr.pullback(&catalog::iwasawa().d(&form_from(3, 1, 0, &q)), Factor::Left).wedge(&pr.pullback(&pkahler::exterior::volume_form(3), Factor::Right)));
        for factor in [Factor::Left, Factor::Right] {
            let base = match factor { Factor::Left => &pr.left, Factor::Right => &pr.right };
            let mut push_d = ExactForm::zero(3);
            for (x, y) in pr.combined.d(&f).bidegrees() {
                push_d = push_d.add(&pr.pushforward(&pr.combined.d(&f).component(x, y), factor).unwrap());
            }
            let mut d_push = ExactForm::zero(3);
            for (x, y) in f.bidegrees() {
                d_push = d_push.add(&base.d(&pr.pushforward(&f.component(x, y), factor).unwrap()));
            }
            prop_assert_eq!(push_d, d_push);
            let g = form_from(3, 1, 1, &q);
            prop_assert!(pr.pushforward(&pr.pullback(&g, factor).wedge(&pr.pullback(&form_from(3, 2, 2, &p), factor)), factor).unwrap().is_zero());
        }
    }

    #[test]
    fn pullback_keeps_strong_positivity(vs in prop::collection::vec((-2i64..=2, -2i64..=2), 12), ls in prop::collection::vec((-2i64..=2, -2i64..=2), 12)) {
        let n = 3;
        let eta = (0..2).map(|r| {
            let mut f = ExactForm::zero(n);
            for c in 0..n {
                let (x, y) = vs[r * n + c];
                f.add_term(MultiIndex::from_indices(&[c]), MultiIndex::EMPTY, gr(x, y));
            }
            f
        }).fold(ExactForm::one(n), |acc, f| acc.wedge(&f));
        let omega = pkahler::exterior::square(&eta);
        let l: Vec<Vec<GaussianRational>> = (0..n).map(|r| (0..n).map(|c| { let (x, y) = ls[r * n + c]; gr(x, y) }).collect()).collect();
        let pulled = pullback(&l, &omega).unwrap();
        let pulled_eta = pullback(&l, &eta).unwrap();
        prop_assert!(verify_sp_decomposition(&pulled, &[pulled_eta]).is_ok());
    }
}

/// Two-forms with entries in {−1, 0, 1}: simple exactly when the coefficient
/// matrix has rank at most two.
#[test]
fn simplicity_matches_rank_on_small_two_forms() {
    for n in 2..=4usize {
        let idx = MultiIndex::all(n, 2);
        let total = 3usize.pow(idx.len() as u32);
        for code in 0..total {
            let mut f = ExactForm::zero(n);
            let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
            let mut c = code;
            for i in &idx {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                if v != 0 {
                    f.add_term(*i, MultiIndex::EMPTY, gr(v, 0));
                    let ij = i.indices();
                    m[(ij[0], ij[1])] = v as f64;
                    m[(ij[1], ij[0])] = -v as f64;
                }
            }
            let rank = m.rank(1e-9);
            assert_eq!(f.is_simple().unwrap(), rank <= 2, "{f}");
        }
    }
}
