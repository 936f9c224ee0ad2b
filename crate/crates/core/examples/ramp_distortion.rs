//! How far a nonlinear PZT ramp pulls the recovered r.

use squeeze_ratio::analysis::ramp_sensitivity;
use squeeze_ratio::synth::RampDistortion;

fn main() -> squeeze_ratio::Result<()> {
    println!("{:>6} {:>8} {:>12} {:>12}", "r", "c2", "d ratio", "d r");
    for r in [0.5, 0.948, 1.5] {
        for c in [-0.1, -0.05, 0.05, 0.1, 0.2] {
            let sys = ramp_sensitivity(r, &RampDistortion::quadratic(c)?)?;
            println!(
                "{r:6.3} {c:8.3} {:+12.5} {:+12.5}",
                sys.ratio_shift, sys.r_shift
            );
        }
    }
    Ok(())
}
