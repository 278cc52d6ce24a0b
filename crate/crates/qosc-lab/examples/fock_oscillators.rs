//! Truncated Fock spaces of q-oscillators: the defining relations and their
//! automorphisms.

use qosc_lab::fock::{
    check_osc_relations, FockSpace, GeneratorSet, IndexSet, OscAutomorphismParams,
};
use qosc_lab::graded_linalg::{c64, ParityProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ParityProfile::new(2, 1)?;
    let set = IndexSet::new(p, &[1])?;
    let space = FockSpace::new(&set, 5)?;
    println!(
        "I = {{1}} in gl(2|1): {} modes, dimension {}",
        space.modes().len(),
        space.dim()
    );
    for m in space.modes() {
        println!("  mode ({},{}) {:?}", m.i, m.a, m.statistics);
    }
    let gens = GeneratorSet::new(&space, c64(0.5, 0.3))?;
    let rep = check_osc_relations(&gens)?;
    println!(
        "oscillator relations: {} checked, worst {:.2e}",
        rep.len(),
        rep.max_residual()
    );

    let flipped = gens.apply_discrete_automorphism((1, 2))?;
    println!(
        "after n -> -n-1 on (1,2): worst {:.2e}",
        check_osc_relations(&flipped)?.max_residual()
    );

    let mut params = OscAutomorphismParams::identity(2);
    params.xi = vec![c64(1.7, 0.2), c64(0.4, -0.9)];
    params.eta[0][1] = c64(0.3, 0.1);
    params.eta[1][0] = c64(0.3, 0.1);
    let moved = gens.apply_osc_automorphism(&params)?;
    println!(
        "after the continuous rescaling: worst {:.2e}",
        check_osc_relations(&moved)?.max_residual()
    );
    Ok(())
}
