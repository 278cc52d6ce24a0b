//! Verma supercharacters, the Kirillov-Reshetikhin limit of Schur functions
//! and Drinfeld polynomials.

use qosc_lab::fock::IndexSet;
use qosc_lab::graded_linalg::{c64, real, ParityProfile, C64};
use qosc_lab::tq::{
    check_kr_limit, closed_form_height_coefficients, drinfeld_polynomial,
    verma_series_coefficients, verma_supercharacter, TwistParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ParityProfile::new(2, 1)?;
    let twist = TwistParams::new(
        p,
        vec![
            real(1.0),
            C64::from_polar(0.5, 0.8),
            C64::from_polar(0.2, -0.3),
        ],
    )?;
    let lambda = [c64(1.5, 0.2), real(0.5), real(-1.0)];
    println!(
        "gl(2|1) Verma supercharacter: {:.6}",
        verma_supercharacter(&lambda, &twist)?
    );
    let series = verma_series_coefficients(&twist, 8);
    let oracle = closed_form_height_coefficients(&twist, 8, 64)?;
    for (d, (s, o)) in series.iter().zip(&oracle).enumerate() {
        println!("  height {d}: PBW {s:.6}  closed form {o:.6}");
    }

    let p3 = ParityProfile::new(3, 0)?;
    let z = TwistParams::geometric(p3, 0.3, 0.4);
    let table = check_kr_limit(&IndexSet::new(p3, &[1])?, &z, &(1..=12).collect::<Vec<_>>())?;
    println!("KR limit towards Z = {:.8}:", table.target);
    for (row, ratio) in table.rows.iter().skip(1).zip(table.observed_ratios()) {
        println!(
            "  m = {:2}: error {:.2e}, ratio {ratio:.4} (predicted {:.4})",
            row.m, row.error, table.predicted_ratio
        );
    }

    let poly = drinfeld_polynomial(
        &[real(3.0), real(1.0)],
        1,
        ParityProfile::new(2, 0)?,
        c64(0.6, 0.2),
    )?;
    println!("Drinfeld polynomial for λ = (3,1): {:?}", poly);
    Ok(())
}
