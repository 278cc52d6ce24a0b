//! Images of the Chevalley generators under the oscillator realization:
//! contracted [e,f], Serre-type and intertwining relations.

use qosc_lab::fock::{FockSpace, IndexSet};
use qosc_lab::graded_linalg::{c64, ParityProfile};
use qosc_lab::loperators::{build_l_pair, check_contracted_relations, check_intertwining};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = c64(0.6, -0.2);
    for (m, n) in [(3, 0), (2, 1), (1, 2)] {
        let p = ParityProfile::new(m, n)?;
        for set in IndexSet::all_supported(p) {
            let pair = build_l_pair(&set, &FockSpace::new(&set, 7)?, q)?;
            let rel = check_contracted_relations(&pair, c64(0.9, 0.4))?;
            let int = check_intertwining(&pair, c64(0.9, 0.4), c64(1.4, -0.3))?;
            println!(
                "gl({m}|{n}) I = {:?}: {} contracted relations (worst {:.1e}), {} intertwining (worst {:.1e})",
                set.members(),
                rel.len(),
                rel.max_residual(),
                int.len(),
                int.max_residual()
            );
        }
    }
    Ok(())
}
