//! Q-operators as twisted supertraces over Fock spaces, compared with the
//! one-site closed form, and their commutativity with the transfer matrix.

use qosc_lab::fock::IndexSet;
use qosc_lab::graded_linalg::{c64, ParityProfile, SparseOperator};
use qosc_lab::tq::{
    commutator_residual, lattice_q, lattice_t_fundamental, one_site_q, CutoffPolicy, LatticeConfig,
    TwistParams,
};
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ParityProfile::new(2, 1)?;
    let q = c64(0.55, 0.25);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let policy = CutoffPolicy::default();

    let twist = TwistParams::random_separated(p, q, 1, &mut rng);
    let one = LatticeConfig::new(vec![c64(1.1, 0.2)])?;
    for set in IndexSet::all_supported(p) {
        let traced = lattice_q(&set, c64(0.7, 0.1), &one, &twist, q, &policy)?;
        let closed = one_site_q(&set, c64(0.7, 0.1), one.xi[0], &twist, q)?;
        let diff = traced
            .matrix
            .sub(&SparseOperator::diagonal(&[p.fundamental()], &closed))?
            .max_abs();
        println!(
            "L=1 I = {:?}: cutoff {}, |trace − closed form| = {diff:.1e}",
            set.members(),
            traced.cutoff
        );
    }

    let twist = TwistParams::random_separated(p, q, 2, &mut rng);
    let two = LatticeConfig::new(vec![c64(1.0, 0.2), c64(0.8, -0.3)])?;
    let t = lattice_t_fundamental(c64(0.4, 0.6), &two, &twist, q)?;
    for set in IndexSet::all_supported(p) {
        let qo = lattice_q(&set, c64(1.3, -0.2), &two, &twist, q, &policy)?;
        println!(
            "L=2 I = {:?}: [T, Q] residual {:.1e}",
            set.members(),
            commutator_residual(&t, &qo.matrix)?
        );
    }
    Ok(())
}
