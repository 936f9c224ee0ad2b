//! Writes a synthetic spectrum-analyzer trace: 18 PZT sweeps of a 0.948
//! squeezed state, 77% efficiency, 10.6 dB dark-noise clearance, 0.2 dB noise.
//!
//! cargo run --example simulate_trace -- trace.csv

use squeeze_ratio::synth::{synthesize_trace, NoiseSpec, ScanSpec};
use squeeze_ratio::variance::{ChannelModel, SqueezeState};

fn main() -> squeeze_ratio::Result<()> {
    let state = SqueezeState::new(0.948, 0.0)?;
    let chan = ChannelModel::from_dbm(0.77, -59.4, -70.0)?;
    let scan = ScanSpec::sweeps(18, 128);
    let trace = synthesize_trace(&state, &chan, &scan, &NoiseSpec::new(0.2, 1)?)?;

    match std::env::args().nth(1) {
        Some(path) => {
            trace.save(&path)?;
            eprintln!("wrote {} samples to {path}", trace.len());
        }
        None => print!("{}", trace.to_csv_string()),
    }
    Ok(())
}
