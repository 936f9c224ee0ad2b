//! The whole method on one trace: find the QNL crossings in each sweep, turn
//! the crossing ratio into r, then read the efficiency off both quadratures.
//!
//! Analyzes the CSV given as the first argument, or a fresh synthetic trace.

use squeeze_ratio::analysis::{analyze, to_json, AnalysisConfig};
use squeeze_ratio::efficiency::EfficiencyBudget;
use squeeze_ratio::synth::{synthesize_trace, NoiseSpec, ScanSpec};
use squeeze_ratio::trace::Trace;
use squeeze_ratio::variance::{ChannelModel, SqueezeState};

fn main() -> squeeze_ratio::Result<()> {
    let trace = match std::env::args().nth(1) {
        Some(path) => Trace::load(path)?,
        None => {
            let state = SqueezeState::new(0.948, 0.0)?;
            let chan = ChannelModel::from_dbm(0.77, -59.4, -70.0)?;
            synthesize_trace(
                &state,
                &chan,
                &ScanSpec::sweeps(18, 128),
                &NoiseSpec::new(0.2, 1)?,
            )?
        }
    };

    let config = AnalysisConfig {
        budget: Some(EfficiencyBudget::new(0.95, 0.98, 0.97)?),
        ..Default::default()
    };
    let report = analyze(&trace, &config)?;

    for seg in &report.segments {
        let found = seg
            .crossings
            .map_or("too few".to_string(), |n| n.to_string());
        println!("sweep {:>5}..{:<5} crossings: {found}", seg.start, seg.end);
    }
    let ratios: Vec<String> = report
        .ratio
        .ratios
        .iter()
        .map(|r| format!("{r:.3}"))
        .collect();
    println!("triple ratios: {}", ratios.join(" "));
    println!();
    print!("{}", report.summary());
    if std::env::var_os("JSON").is_some() {
        print!("{}", to_json(&report)?);
    }
    Ok(())
}
