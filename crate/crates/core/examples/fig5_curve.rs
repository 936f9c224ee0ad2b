//! Detected squeezing and anti-squeezing against the crossing ratio for
//! several efficiencies, as CSV for plotting.

use squeeze_ratio::cli::curve_csv;

fn main() -> squeeze_ratio::Result<()> {
    print!(
        "{}",
        curve_csv(&[1.0, 0.9, 0.77, 0.6, 0.5], 0.05, 0.95, 91)?
    );
    Ok(())
}
