//! Forward model: detected noise power versus LO phase for a squeezed state
//! behind loss and dark noise.

use std::f64::consts::PI;

use squeeze_ratio::variance::{
    db_from_linear, detected_variance, mu_variance, ChannelModel, SqueezeState,
};

fn main() -> squeeze_ratio::Result<()> {
    let state = SqueezeState::new(0.948, 0.0)?;
    println!(
        "r = {}  ({:.2} dB at the source)",
        state.r(),
        state.squeezing_db()
    );

    let channels = [
        ("lossless", ChannelModel::relative(1.0, f64::NEG_INFINITY)?),
        ("eta 0.77", ChannelModel::relative(0.77, f64::NEG_INFINITY)?),
        ("eta 0.77 + dark", ChannelModel::relative(0.77, -10.6)?),
    ];
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>16}",
        "theta", "MU dB", channels[0].0, channels[1].0, channels[2].0
    );
    for k in 0..=12 {
        let theta = PI * k as f64 / 12.0;
        let mu = db_from_linear(mu_variance(&state, theta), 1.0)?;
        let det: Vec<f64> = channels
            .iter()
            .map(|(_, c)| db_from_linear(detected_variance(&state, theta, c), c.qnl()))
            .collect::<squeeze_ratio::Result<_>>()?;
        println!(
            "{theta:8.4} {mu:10.3} {:10.3} {:10.3} {:16.3}",
            det[0], det[1], det[2]
        );
    }
    Ok(())
}
