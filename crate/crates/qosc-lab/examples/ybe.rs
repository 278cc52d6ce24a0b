//! Perk-Schultz R-matrix: graded Yang-Baxter equation and the Chevalley
//! relations of the fundamental evaluation representation.

use qosc_lab::graded_linalg::{c64, ParityProfile};
use qosc_lab::rmatrix::{
    build_ps_rmatrix, check_chevalley_relations, check_graded_ybe, fundamental_rep,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = c64(0.6, 0.2);
    for (m, n) in [(2, 0), (1, 1), (2, 1), (2, 2)] {
        let p = ParityProfile::new(m, n)?;
        let r = build_ps_rmatrix(p, q, c64(1.3, 0.1), c64(0.7, -0.4))?;
        let res = check_graded_ybe(p, q, c64(1.3, 0.1), c64(0.7, -0.4), c64(0.9, 0.5))?;
        println!(
            "gl({m}|{n}): R has {} non-zeros, YBE residual {res:.2e}",
            r.matrix.nnz()
        );
        if (m, n) != (1, 1) {
            let rep = check_chevalley_relations(&fundamental_rep(p, c64(1.1, 0.3))?, q)?;
            println!(
                "  {} Chevalley/Serre relations, worst {:.2e}",
                rep.len(),
                rep.max_residual()
            );
        }
    }
    Ok(())
}
