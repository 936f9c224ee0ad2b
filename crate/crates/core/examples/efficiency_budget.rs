//! Total efficiency from each quadrature, the minimum-uncertainty check, and
//! the escape efficiency left after the known losses.

use squeeze_ratio::efficiency::{
    consistency_check, escape_efficiency, extract_efficiency_db, EfficiencyBudget, Uncertain,
};

fn main() -> squeeze_ratio::Result<()> {
    let gap = Uncertain::exact(10.6);
    // detected levels relative to the QNL, MU levels from the ratio
    let minus = extract_efficiency_db(Uncertain::exact(6.9), Uncertain::new(8.23, 0.4), gap)?;
    let plus = extract_efficiency_db(Uncertain::exact(-4.0), Uncertain::new(-8.23, 0.4), gap)?;
    println!("anti-squeezed: eta = {:.3} ± {:.3}", minus.eta, minus.sigma);
    println!("squeezed:      eta = {:.3} ± {:.3}", plus.eta, plus.sigma);

    let verdict = consistency_check(plus.uncertain(), minus.uncertain(), 2.0)?;
    println!(
        "z = {} → {}",
        verdict.z,
        if verdict.consistent {
            "consistent"
        } else {
            "inconsistent"
        }
    );

    let budget = EfficiencyBudget::new(0.95, 0.98, 0.97)?;
    let total = Uncertain::new(
        0.5 * (plus.eta + minus.eta),
        0.5 * plus.sigma.hypot(minus.sigma),
    );
    let esc = escape_efficiency(total, &budget)?;
    println!(
        "known losses {:.4}; escape efficiency {:.3} ± {:.3}",
        budget.known(),
        esc.eta_esc,
        esc.sigma
    );
    Ok(())
}
