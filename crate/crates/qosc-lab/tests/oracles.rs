//! Closed-form oracles obtained by substituting small cases into the
//! defining formulas by hand.

use qosc_lab::fock::{FockSpace, IndexSet};
use qosc_lab::graded_linalg::{c64, real, ParityProfile, SparseOperator, C64};
use qosc_lab::tq::*;

fn prof(m: usize, n: usize) -> ParityProfile {
    ParityProfile::new(m, n).unwrap()
}

fn q() -> C64 {
    c64(0.55, 0.25)
}

#[test]
fn one_site_transfer_matrix_by_hand() {
    // T_rr = s_r z_r (q^{s_r} − (x/ξ) q^{−s_r}) + Σ_{s≠r} s_s z_s (1 − x/ξ), off-diagonals 0
    for (m, n) in [(2, 0), (1, 1), (2, 1), (1, 2)] {
        let p = prof(m, n);
        let tw = TwistParams::geometric(p, 0.4, 0.7);
        let (x, xi) = (c64(0.6, 0.3), c64(1.1, -0.2));
        let t = lattice_t_fundamental(x, &LatticeConfig::new(vec![xi]).unwrap(), &tw, q()).unwrap();
        for r in p.indices() {
            for c in p.indices() {
                let mut want = real(0.0);
                if r == c {
                    let s = p.sign(r) as f64;
                    want = tw.get(r) * s * (q().powi(p.sign(r)) - x / xi * q().powi(-p.sign(r)));
                    for k in p.indices().filter(|&k| k != r) {
                        want += tw.get(k) * p.sign(k) as f64 * (1.0 - x / xi);
                    }
                }
                assert!(
                    (t.get(r - 1, c - 1) - want).norm() < 1e-14,
                    "({m},{n}) entry ({r},{c})"
                );
            }
        }
    }
}

#[test]
fn empty_set_q_is_identity_on_two_sites() {
    let p = prof(2, 1);
    let tw = TwistParams::geometric(p, 0.1, 0.3);
    let cfg = LatticeConfig::new(vec![c64(1.0, 0.2), c64(0.8, -0.1)]).unwrap();
    let lq = lattice_q(
        &IndexSet::empty(p),
        c64(0.7, 0.1),
        &cfg,
        &tw,
        q(),
        &CutoffPolicy::default(),
    )
    .unwrap();
    let id = SparseOperator::identity(&[p.fundamental(), p.fundamental()]);
    assert!(lq.matrix.sub(&id).unwrap().max_abs() < 1e-15);
}

#[test]
fn two_site_q_preserves_weight() {
    let p = prof(2, 0);
    let tw = TwistParams::geometric(p, 0.05, 0.4);
    let cfg = LatticeConfig::new(vec![c64(1.0, 0.2), c64(0.8, -0.1)]).unwrap();
    let set = IndexSet::new(p, &[1]).unwrap();
    let lq = lattice_q(
        &set,
        c64(0.7, 0.1),
        &cfg,
        &tw,
        q(),
        &CutoffPolicy::default(),
    )
    .unwrap();
    let mut off_pattern = 0;
    for (r, c, v) in lq.matrix.iter() {
        let (mut a, mut b) = (quantum_state(2, 2, r), quantum_state(2, 2, c));
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            assert!(v.norm() < 1e-13, "entry ({r},{c}) = {v}");
        } else if r != c {
            off_pattern += 1;
        }
    }
    // the (1,2) <-> (2,1) exchange is genuinely present
    assert!(off_pattern > 0);
}

#[test]
fn qq_examples_from_closed_forms() {
    let x = c64(0.8, -0.3);
    for (m, n, base, i, j, kind) in [
        (2, 0, vec![], 1, 2, QqKind::SameParity),
        (1, 1, vec![], 1, 2, QqKind::MixedParity),
        (2, 1, vec![3], 1, 2, QqKind::SameParity),
    ] {
        let p = prof(m, n);
        let tw = TwistParams::geometric(p, 0.3, 1.1);
        let cfg = LatticeConfig::new(vec![c64(1.2, 0.4)]).unwrap();
        let out =
            check_qq_relations(p, &base, i, j, x, &tw, &cfg, q(), &QqOptions::default()).unwrap();
        assert_eq!(out.kind, kind);
        assert!(out.residual < 1e-12, "({m},{n}): {}", out.residual);
        assert!(out.proven == ((m, n) != (1, 1)));
    }
}

#[test]
fn qq_rejects_bad_indices() {
    let p = prof(2, 1);
    let tw = TwistParams::geometric(p, 0.3, 1.1);
    let cfg = LatticeConfig::new(vec![real(1.0)]).unwrap();
    let err = check_qq_relations(
        p,
        &[1],
        1,
        2,
        real(0.5),
        &tw,
        &cfg,
        q(),
        &QqOptions::default(),
    );
    assert!(matches!(err, Err(TqError::BadQqIndices { .. })));
}

#[test]
fn one_site_q_matches_trace() {
    let p = prof(2, 1);
    let tw = TwistParams::random_separated(p, q(), 1, &mut rand::rngs::mock::StepRng::new(7, 11));
    let cfg = LatticeConfig::new(vec![c64(1.1, 0.3)]).unwrap();
    for set in IndexSet::all_supported(p) {
        let lq = lattice_q(
            &set,
            c64(0.4, 0.5),
            &cfg,
            &tw,
            q(),
            &CutoffPolicy::default(),
        )
        .unwrap();
        let d = one_site_q(&set, c64(0.4, 0.5), cfg.xi[0], &tw, q()).unwrap();
        let closed = SparseOperator::diagonal(&[p.fundamental()], &d);
        assert!(lq.matrix.sub(&closed).unwrap().max_abs() < 1e-8f64.max(lq.change));
    }
}

#[test]
fn one_site_t_at_zero_weight() {
    let p = prof(1, 0);
    let tw = TwistParams::new(p, vec![c64(0.7, 0.2)]).unwrap();
    let (x, xi) = (c64(0.3, 0.1), c64(1.5, 0.0));
    let t = one_site_t_verma(&[real(0.0)], x, xi, &tw, q()).unwrap();
    let zplus = verma_supercharacter(&[real(0.0)], &tw).unwrap();
    assert!((t[0] - zplus * (1.0 - x / xi)).norm() < 1e-15);
    // (1|0) factorization: Z⁺ (1 − (x/ξ) q^{−2λ})
    let lam = [c64(0.7, -0.2)];
    let t = one_site_t_verma(&lam, x, xi, &tw, q()).unwrap();
    let want = verma_supercharacter(&lam, &tw).unwrap()
        * (1.0 - x / xi * (q().ln() * lam[0] * -2.0).exp());
    assert!((t[0] - want).norm() < 1e-14);
    assert!(check_verma_factorization(&lam, x, xi, &tw, q()).unwrap() < 1e-14);
}

#[test]
fn one_one_supercharacter_has_one_odd_root() {
    let (z1, z2) = (c64(0.9, 0.1), c64(0.2, -0.3));
    let tw = TwistParams::new(prof(1, 1), vec![z1, z2]).unwrap();
    let lam = [real(2.0), real(1.0)];
    let want = z1.powi(2) * z2 * (1.0 - z2 / z1);
    assert!((verma_supercharacter(&lam, &tw).unwrap() - want).norm() < 1e-14);
    assert!((verma_character_series(&lam, &tw, 8).unwrap() - want).norm() < 1e-14);
}

#[test]
fn two_zero_series_is_geometric() {
    let tw = TwistParams::new(prof(2, 0), vec![real(1.0), c64(0.3, 0.2)]).unwrap();
    let c = verma_series_coefficients(&tw, 8);
    for (k, v) in c.iter().enumerate() {
        assert!((v - c64(0.3, 0.2).powi(k as i32)).norm() < 1e-15);
    }
    assert_eq!(verma_series_coefficients(&tw, 0), vec![real(1.0)]);
    let lam = [real(0.0), real(0.0)];
    let s = verma_character_series(&lam, &tw, 60).unwrap();
    assert!((s - verma_supercharacter(&lam, &tw).unwrap()).norm() < 1e-14);
}

#[test]
fn series_matches_closed_form_coefficients() {
    for (m, n) in [(2, 0), (1, 1), (3, 0), (2, 1), (1, 2), (0, 3), (2, 2)] {
        let tw = TwistParams::geometric(prof(m, n), 0.5, 0.9);
        let s = verma_series_coefficients(&tw, 8);
        let o = closed_form_height_coefficients(&tw, 8, 64).unwrap();
        for (a, b) in s.iter().zip(&o) {
            assert!((a - b).norm() < 1e-10, "({m},{n})");
        }
    }
}

#[test]
fn fermionic_trace_is_exact() {
    let p = prof(1, 1);
    let set = IndexSet::new(p, &[1]).unwrap();
    let w = c64(0.3, 0.2);
    let tw = TwistParams::new(p, vec![real(1.0), w]).unwrap();
    let space = FockSpace::new(&set, 4).unwrap();
    let d = boundary_operator_fock(&space, &tw);
    assert_eq!(d.diagonal_values(), vec![real(1.0), w]);
    let t = normalization_z_trace(&space, &tw).unwrap();
    assert!((t.value - (1.0 - w)).norm() < 1e-16);
    assert_eq!(t.tail_bound, 0.0);
}

#[test]
fn equal_twists_give_identity_boundary() {
    let p = prof(2, 1);
    let tw = TwistParams::new(p, vec![c64(0.5, 0.5); 3]).unwrap();
    let space = FockSpace::new(&IndexSet::new(p, &[3]).unwrap(), 3).unwrap();
    let d = boundary_operator_fock(&space, &tw);
    assert!(
        d.sub(&SparseOperator::identity(&space.factors()))
            .unwrap()
            .max_abs()
            == 0.0
    );
}

#[test]
fn kr_limit_two_zero() {
    let p = prof(2, 0);
    let w = c64(0.25, 0.1);
    let tw = TwistParams::new(p, vec![real(1.0), w]).unwrap();
    let ms: Vec<usize> = (1..=12).collect();
    let table = check_kr_limit(&IndexSet::new(p, &[1]).unwrap(), &tw, &ms).unwrap();
    assert!((table.target - (1.0 - w).inv()).norm() < 1e-15);
    for r in table.observed_ratios() {
        assert!((r / w.norm() - 1.0).abs() < 1e-6);
    }
    let full = check_kr_limit(&IndexSet::full(p), &tw, &ms).unwrap();
    assert!(full.rows.iter().all(|r| r.error < 1e-13));
    let swapped = TwistParams::new(p, vec![w, real(1.0)]).unwrap();
    assert!(matches!(
        check_kr_limit(&IndexSet::new(p, &[1]).unwrap(), &swapped, &ms),
        Err(TqError::OrderingViolated)
    ));
}

#[test]
fn drinfeld_two_zero() {
    let c = drinfeld_polynomial(&[real(1.0), real(0.0)], 1, prof(2, 0), q()).unwrap();
    assert_eq!(c, vec![real(1.0), real(-1.0)]);
    let c = drinfeld_polynomial(&[real(3.0), real(1.0)], 1, prof(2, 0), q()).unwrap();
    assert_eq!(c.len(), 3);
    assert!(matches!(
        drinfeld_polynomial(&[real(0.0), real(1.0)], 1, prof(2, 0), q()),
        Err(TqError::NonIntegerDrinfeld(_))
    ));
}

#[test]
fn commuting_family_two_sites() {
    let p = prof(2, 1);
    let tw = TwistParams::random_separated(p, q(), 2, &mut rand::rngs::mock::StepRng::new(3, 5));
    let cfg = LatticeConfig::new(vec![c64(1.0, 0.2), c64(1.3, 0.1)]).unwrap();
    let (x, y) = (c64(0.6, 0.3), c64(0.3, -0.5));
    let tx = lattice_t_fundamental(x, &cfg, &tw, q()).unwrap();
    let ty = lattice_t_fundamental(y, &cfg, &tw, q()).unwrap();
    assert!(commutator_residual(&tx, &ty).unwrap() < 1e-10);
    let sets = IndexSet::all_supported(p);
    let qs: Vec<_> = sets
        .iter()
        .map(|s| {
            lattice_q(s, y, &cfg, &tw, q(), &CutoffPolicy::default())
                .unwrap()
                .matrix
        })
        .collect();
    for a in &qs {
        assert!(commutator_residual(&tx, a).unwrap() < 1e-8);
        for b in &qs {
            assert!(commutator_residual(a, b).unwrap() < 1e-8);
        }
    }
}
