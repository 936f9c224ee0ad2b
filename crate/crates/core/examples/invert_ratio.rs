//! A crossing ratio read off a screen, turned into r and the MU state.

use squeeze_ratio::ratio::{crossing_angles, ratio_of_r, squeeze_from_ratio};
use squeeze_ratio::variance::SqueezeState;

fn main() -> squeeze_ratio::Result<()> {
    let est = squeeze_from_ratio(0.307, 0.02)?;
    println!("ratio 0.307 ± 0.02 → r = {:.4} ± {:.4}", est.r, est.sigma_r);
    println!(
        "MU state: {:.2} dB / {:+.2} dB ± {:.2} dB",
        est.mu_sq_db, est.mu_asq_db, est.sigma_db
    );

    println!("\n{:>6} {:>8}   crossings (rad)", "r", "ratio");
    for r in [0.1, 0.3, 0.5, 0.948, 1.5, 2.0, 3.0] {
        let p = crossing_angles(&SqueezeState::new(r, 0.0)?)?;
        println!(
            "{r:6.3} {:8.4}   {:+.4} {:+.4} {:+.4}",
            ratio_of_r(r)?,
            p[0],
            p[1],
            p[2]
        );
    }
    Ok(())
}
