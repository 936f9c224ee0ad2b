//! Two ways a source can miss minimum uncertainty, and which of them the
//! two-quadrature efficiency check can see.

use squeeze_ratio::analysis::{analyze, AnalysisConfig};
use squeeze_ratio::synth::{synthesize_input_trace, NoiseSpec, ScanSpec};
use squeeze_ratio::variance::{
    ChannelModel, InputState, LobeExcess, QuadratureEllipse, SqueezeState,
};

fn show(label: &str, input: &dyn InputState) -> squeeze_ratio::Result<()> {
    let chan = ChannelModel::from_dbm(0.77, -59.4, -70.0)?;
    let trace =
        synthesize_input_trace(input, &chan, &ScanSpec::sweeps(4, 1024), &NoiseSpec::none())?;
    let rep = analyze(&trace, &AnalysisConfig::default())?;
    let (p, m) = (rep.eta_plus.unwrap(), rep.eta_minus.unwrap());
    println!(
        "{label:<28} r = {:.3}  eta+ = {:.3}  eta- = {:.3}  {}",
        rep.squeeze.r,
        p.eta,
        m.eta,
        if rep.verdict.is_some_and(|v| v.consistent) {
            "consistent"
        } else {
            "INCONSISTENT"
        }
    );
    Ok(())
}

fn main() -> squeeze_ratio::Result<()> {
    let mu = SqueezeState::new(0.948, 0.0)?;
    let ellipse = QuadratureEllipse::from(mu);
    show("minimum uncertainty", &mu)?;
    // same shape as some other MU state: passes the check with the wrong r
    show(
        "wider ellipse (v_max x2)",
        &ellipse.with_excess_antisqueezing(2.0)?,
    )?;
    // excess that leaves the crossings alone: caught
    show("lobe excess (peak x2)", &LobeExcess::new(ellipse, 2.0)?)?;
    Ok(())
}
