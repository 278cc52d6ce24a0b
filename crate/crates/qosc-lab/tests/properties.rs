use proptest::prelude::*;
use qosc_lab::fock::{
    check_osc_relations, FockSpace, GeneratorSet, IndexSet, OscAutomorphismParams,
};
use qosc_lab::graded_linalg::{
    c64, graded_kron, real, GradedSpace, ParityProfile, SparseOperator, C64,
};
use qosc_lab::rmatrix::check_graded_ybe;
use qosc_lab::tq::{
    check_qq_relations, check_verma_factorization, drinfeld_polynomial, normalization_z,
    normalization_z_trace, poly_eval, schur_function, LatticeConfig, QqOptions, TwistParams,
};

fn complex_in(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn small_profile() -> impl Strategy<Value = ParityProfile> {
    (0usize..=3, 0usize..=3)
        .prop_filter("1 <= M+N <= 3", |(m, n)| (1..=3).contains(&(m + n)))
        .prop_map(|(m, n)| ParityProfile::new(m, n).unwrap())
}

/// A random operator of parity `p` on `space` (entries only where the
/// row/column parities differ by `p`).
fn homogeneous(space: &GradedSpace, p: u8, seeds: &[(f64, f64)]) -> SparseOperator {
    let d = space.dim();
    let trip = (0..d * d).filter_map(|k| {
        let (r, c) = (k / d, k % d);
        ((space.parity(r) + space.parity(c)) % 2 == p).then(|| (r, c, c64(seeds[k].0, seeds[k].1)))
    });
    SparseOperator::from_triplets(std::slice::from_ref(space), trip.collect::<Vec<_>>())
}

fn seeds(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supertrace_is_graded_cyclic(
        parities in prop::collection::vec(0u8..2, 2..5),
        pa in 0u8..2, pb in 0u8..2,
        sa in seeds(16), sb in seeds(16),
    ) {
        let space = GradedSpace::new(parities);
        let a = homogeneous(&space, pa, &sa);
        let b = homogeneous(&space, pb, &sb);
        let ab = a.mul(&b).unwrap().supertrace();
        let ba = b.mul(&a).unwrap().supertrace();
        let sign = if pa * pb == 1 { -1.0 } else { 1.0 };
        prop_assert!((ab - ba * sign).norm() < 1e-12);
    }

    #[test]
    fn graded_kron_obeys_koszul_rule(
        pv in prop::collection::vec(0u8..2, 2..4),
        pw in prop::collection::vec(0u8..2, 2..4),
        par in prop::collection::vec(0u8..2, 4),
        s in prop::collection::vec(seeds(16), 4),
    ) {
        let (v, w) = (GradedSpace::new(pv), GradedSpace::new(pw));
        let a = homogeneous(&v, par[0], &s[0]);
        let b = homogeneous(&w, par[1], &s[1]);
        let c = homogeneous(&v, par[2], &s[2]);
        let d = homogeneous(&w, par[3], &s[3]);
        let lhs = graded_kron(&a, &b).unwrap().mul(&graded_kron(&c, &d).unwrap()).unwrap();
        let mut rhs = graded_kron(&a.mul(&c).unwrap(), &b.mul(&d).unwrap());
        // products of homogeneous operators may vanish, in which case any parity is fine
        if let Ok(r) = rhs.as_mut() {
            if par[1] * par[2] == 1 {
                *r = r.scale(real(-1.0));
            }
            prop_assert!(lhs.sub(r).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn yang_baxter_holds(p in small_profile(), q in complex_in(0.3, 0.9),
                         x1 in complex_in(0.5, 2.0), x2 in complex_in(0.5, 2.0), x3 in complex_in(0.5, 2.0)) {
        prop_assert!(check_graded_ybe(p, q, x1, x2, x3).unwrap() < 1e-12);
    }

    #[test]
    fn continuous_automorphism_preserves_oscillator_relations(
        q in complex_in(0.4, 0.9),
        xi in prop::collection::vec(complex_in(0.5, 2.0), 2),
        eta in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3),
    ) {
        let p = ParityProfile::new(2, 1).unwrap();
        let space = FockSpace::new(&IndexSet::new(p, &[1]).unwrap(), 5).unwrap();
        let gens = GeneratorSet::new(&space, q).unwrap();
        let e = |k: usize| c64(eta[k].0, eta[k].1);
        let params = OscAutomorphismParams { xi, eta: vec![vec![e(0), e(1)], vec![e(1), e(2)]] };
        let moved = gens.apply_osc_automorphism(&params).unwrap();
        let rep = check_osc_relations(&moved).unwrap();
        prop_assert!(rep.passes(1e-12), "{:?}", rep.failures(1e-12));
    }

    #[test]
    fn drinfeld_string_telescopes(q in complex_in(0.3, 0.9), lam in (-2.0..2.0f64, -0.5..0.5f64),
                                  d in 0usize..6, x in complex_in(0.2, 2.0), m in 0usize..3) {
        let p = [ParityProfile::new(2, 0), ParityProfile::new(1, 1), ParityProfile::new(0, 2)][m].clone().unwrap();
        let l2 = c64(lam.0, lam.1);
        let sp = if p.parity(1) == p.parity(2) { 1.0 } else { -1.0 };
        let lambda = [l2 * sp + d as f64, l2];
        let poly = drinfeld_polynomial(&lambda, 1, p, q).unwrap();
        prop_assert_eq!(poly.len(), d + 1);
        let a = (q.ln() * l2 * (-2.0 * p.sign(2) as f64)).exp();
        let s = q.powi(-2 * p.sign(1));
        let lhs = poly_eval(&poly, x * s) * (1.0 - x * a);
        let rhs = poly_eval(&poly, x) * (1.0 - x * a * s.powi(d as i32));
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
    }

    #[test]
    fn bosonic_trace_within_tail(w in complex_in(0.05, 0.8), cutoff in 4usize..30) {
        let p = ParityProfile::new(2, 0).unwrap();
        let iset = IndexSet::new(p, &[1]).unwrap();
        let tw = TwistParams::new(p, vec![real(1.0), w]).unwrap();
        let exact = normalization_z(&iset, &tw).unwrap();
        let t = normalization_z_trace(&FockSpace::new(&iset, cutoff).unwrap(), &tw).unwrap();
        prop_assert!((t.value - exact).norm() <= t.tail_bound + 1e-13);
    }

    #[test]
    fn verma_factorization_random(p in small_profile(), q in complex_in(0.3, 0.9),
                                  lam in prop::collection::vec((-2.0..2.0f64, -0.5..0.5f64), 3),
                                  x in complex_in(0.5, 2.0), xi in complex_in(0.5, 2.0), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tw = TwistParams::random_separated(p, q, 1, &mut rng);
        let lambda: Vec<C64> = lam[..p.rank()].iter().map(|&(a, b)| c64(a, b)).collect();
        prop_assert!(check_verma_factorization(&lambda, x, xi, &tw, q).unwrap() < 1e-12);
    }

    #[test]
    fn qq_one_site_all_cases(p in small_profile(), q in complex_in(0.3, 0.9), x in complex_in(0.5, 2.0),
                             xi in complex_in(0.5, 2.0), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let tw = TwistParams::random_separated(p, q, 1, &mut rng);
        let cfg = LatticeConfig::new(vec![xi]).unwrap();
        for i in p.indices() {
            for j in p.indices().filter(|&j| j != i) {
                let rest: Vec<usize> = p.indices().filter(|&k| k != i && k != j).collect();
                for base in [vec![], rest] {
                    let out = check_qq_relations(p, &base, i, j, x, &tw, &cfg, q, &QqOptions::default()).unwrap();
                    prop_assert!(out.residual < 1e-12, "I={:?} i={} j={}: {}", base, i, j, out.residual);
                }
            }
        }
    }

    #[test]
    fn schur_is_symmetric(z in prop::collection::vec(complex_in(0.2, 1.5), 3), l1 in 0usize..5, l2 in 0usize..5) {
        let (a, b) = (l1.max(l2), l1.min(l2));
        let s = schur_function(&[a, b], &z).unwrap();
        let t = schur_function(&[a, b], &[z[2], z[0], z[1]]).unwrap();
        prop_assert!((s - t).norm() <= 1e-9 * s.norm().max(1.0));
    }
}
