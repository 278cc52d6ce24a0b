//! Oscillator L-operators for every supported index set: RLL relations and
//! the component relations of the contracted algebra.

use qosc_lab::fock::{FockSpace, IndexSet};
use qosc_lab::graded_linalg::{c64, ParityProfile};
use qosc_lab::loperators::{
    build_l_pair, check_appendix_a, check_rll_affine, check_rll_finite, vacuum_highest_weight,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ParityProfile::new(2, 1)?;
    let q = c64(0.55, 0.25);
    for set in IndexSet::all_supported(p) {
        let space = FockSpace::new(&set, 6)?;
        let pair = build_l_pair(&set, &space, q)?;
        let affine = check_rll_affine(&pair, c64(0.8, 0.3), c64(1.2, -0.5))?;
        let finite = check_rll_finite(&pair)?.max_residual();
        let comps = check_appendix_a(&pair)?;
        let vac = vacuum_highest_weight(&pair, c64(0.8, 0.3))?;
        println!(
            "I = {:?} ({:?}): RLL {affine:.1e}, finite {finite:.1e}, {} component relations (worst {:.1e}), vacuum weights {:?}",
            set.members(),
            pair.case(),
            comps.len(),
            comps.max_residual(),
            vac.nu.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
