//! End-to-end ratio-method analysis of one trace.
//!
//! segmentation → QNL crossings → ratio → r → MU state → η⁺/η⁻ → verdict →
//! escape efficiency.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::efficiency::{
    consistency_check, escape_efficiency, extract_efficiency_db, ConsistencyVerdict,
    EfficiencyBudget, EfficiencyEstimate, EscapeEfficiency, Uncertain, DEFAULT_K_SIGMA,
};
use crate::error::{invalid, Error, Result};
use crate::ratio::{
    estimate_ratio, find_crossings, r_of_ratio, ratio_of_r, squeeze_from_ratio, CrossingSet,
    Direction, RatioEstimate, SqueezeEstimate,
};
use crate::smooth::{default_window, extremum_fit, noise_sigma, savitzky_golay};
use crate::synth::{segment_sweeps, synthesize_trace, NoiseSpec, RampDistortion, ScanSpec};
use crate::trace::{round_sig, Trace};
use crate::variance::{ChannelModel, SqueezeState};

pub const SCHEMA_VERSION: u32 = 1;

/// Validity limits that apply to every result.
pub const CAVEATS: [&str; 3] = [
    "The reconstructed state is only valid at the detection frequency at which the trace was recorded; \
     squeezing generally increases at lower frequencies.",
    "The reconstructed state is only valid for the pump power used in the measurement; a different \
     pump power gives a different gain and a different minimum-uncertainty state.",
    "The results assume the source produced a minimum-uncertainty state; if it did not (for example \
     due to excess noise on the seed or pump), the results are not accurate. The two-quadrature \
     efficiency check tests this assumption.",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Overrides the trace's `qnl_dbm` metadata.
    pub qnl_dbm: Option<f64>,
    /// Overrides the trace's `dark_dbm` metadata.
    pub dark_dbm: Option<f64>,
    /// Number of monotone PZT sweeps; falls back to the `n_sweeps` metadata
    /// key, then to 1.
    pub n_sweeps: Option<usize>,
    pub budget: Option<EfficiencyBudget>,
    pub k_sigma: f64,
    /// Extra uncertainty added in quadrature to the detected levels, dB.
    pub level_sigma_db: f64,
    /// Uncertainty of the QNL-to-dark gap, dB.
    pub gap_sigma_db: f64,
    /// Suspected PZT ramp nonlinearity; when set, the report carries the
    /// systematic shift it would cause.
    pub ramp_distortion: Option<RampDistortion>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            qnl_dbm: None,
            dark_dbm: None,
            n_sweeps: None,
            budget: None,
            k_sigma: DEFAULT_K_SIGMA,
            level_sigma_db: 0.0,
            gap_sigma_db: 0.0,
            ramp_distortion: None,
        }
    }
}

/// Detected extreme levels relative to the QNL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedLevels {
    pub sq_db: Uncertain,
    pub asq_db: Uncertain,
    /// QNL minus dark noise; `None` without dark noise.
    pub qnl_dark_gap_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub start: usize,
    pub end: usize,
    /// Crossings found, or `None` when the sweep had fewer than three.
    pub crossings: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputsEcho {
    pub n_samples: usize,
    pub n_sweeps: usize,
    pub qnl_dbm: f64,
    pub dark_dbm: Option<f64>,
    pub k_sigma: f64,
    pub level_sigma_db: f64,
    pub gap_sigma_db: f64,
    pub budget: Option<EfficiencyBudget>,
    pub ramp_distortion: Option<RampDistortion>,
}

/// Bias of the ratio and of `r` caused by a ramp nonlinearity, found by
/// analyzing a noiseless simulated trace of the same state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSystematic {
    pub coefficients: Vec<f64>,
    pub ratio_shift: f64,
    pub r_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub ratio: RatioEstimate,
    pub squeeze: SqueezeEstimate,
    pub detected: DetectedLevels,
    /// From the squeezed quadrature (X⁺).
    pub eta_plus: Option<EfficiencyEstimate>,
    /// From the anti-squeezed quadrature (X⁻).
    pub eta_minus: Option<EfficiencyEstimate>,
    pub verdict: Option<ConsistencyVerdict>,
    /// Mean of η⁺ and η⁻, used for the escape efficiency.
    pub eta_total: Option<Uncertain>,
    pub eta_esc: Option<EscapeEfficiency>,
    /// Not folded into any sigma.
    pub ramp_systematic: Option<RampSystematic>,
    pub segments: Vec<SegmentSummary>,
    pub inputs_echo: InputsEcho,
    pub caveats: Vec<String>,
}

impl AnalysisReport {
    pub fn unphysical(&self) -> bool {
        self.eta_plus.is_some_and(|e| e.unphysical)
            || self.eta_minus.is_some_and(|e| e.unphysical)
            || self.eta_esc.is_some_and(|e| e.unphysical)
    }

    /// Multi-line human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let r = &self.ratio;
        let q = &self.squeeze;
        s += &format!(
            "ratio P1P2/P2P3 = {:.4} ± {:.4} ({} triples, {} sweeps)\n",
            r.mean,
            r.combined_sigma(),
            r.n,
            self.segments.len()
        );
        s += &format!("r = {:.4} ± {:.4}\n", q.r, q.sigma_r);
        s += &format!(
            "MU state: {:+.2} dB / {:+.2} dB ± {:.2} dB\n",
            q.mu_sq_db, q.mu_asq_db, q.sigma_db
        );
        s += &format!(
            "detected: {:+.2} dB / {:+.2} dB rel. QNL\n",
            self.detected.sq_db.value, self.detected.asq_db.value
        );
        if let (Some(p), Some(m)) = (self.eta_plus, self.eta_minus) {
            s += &format!("eta (squeezed)      = {:.3} ± {:.3}\n", p.eta, p.sigma);
            s += &format!("eta (anti-squeezed) = {:.3} ± {:.3}\n", m.eta, m.sigma);
        }
        if let Some(v) = self.verdict {
            s += &format!(
                "minimum uncertainty: {} (z = {}, k = {})\n",
                if v.consistent {
                    "consistent"
                } else {
                    "INCONSISTENT"
                },
                v.z,
                v.k
            );
        }
        if let Some(e) = self.eta_esc {
            s += &format!("escape efficiency = {:.3} ± {:.3}\n", e.eta_esc, e.sigma);
        }
        if self.unphysical() {
            s += "warning: unphysical efficiency\n";
        }
        if q.clipped {
            s += "warning: ratio interval clipped to (0, 1]\n";
        }
        s
    }
}

/// Runs the full ratio-method analysis.
pub fn analyze(trace: &Trace, config: &AnalysisConfig) -> Result<AnalysisReport> {
    if !(config.k_sigma > 0.0) {
        return Err(invalid("k_sigma", "must be > 0"));
    }
    if !(config.level_sigma_db >= 0.0) || !(config.gap_sigma_db >= 0.0) {
        return Err(invalid("level sigma", "must be >= 0"));
    }
    let qnl_dbm = config.qnl_dbm.unwrap_or(trace.meta().qnl_dbm);
    let dark_dbm = config.dark_dbm.unwrap_or(trace.meta().dark_dbm);
    if !qnl_dbm.is_finite() || dark_dbm.is_nan() || dark_dbm >= qnl_dbm {
        return Err(invalid(
            "QNL/dark levels",
            format!("need dark {dark_dbm} < qnl {qnl_dbm}"),
        ));
    }
    let n_sweeps = match config.n_sweeps {
        Some(n) => n,
        None => match trace.meta().get("n_sweeps") {
            Some(v) => v
                .parse()
                .map_err(|_| invalid("n_sweeps metadata", format!("{v:?} is not a count")))?,
            None => 1,
        },
    };

    let segments = segment_sweeps(trace, n_sweeps)?;
    let mut sets: Vec<CrossingSet> = Vec::new();
    let mut summaries = Vec::new();
    let mut most_found = 0;
    for seg in &segments {
        match find_crossings(trace, seg.clone(), qnl_dbm) {
            Ok(set) => {
                summaries.push(SegmentSummary {
                    start: seg.start,
                    end: seg.end,
                    crossings: Some(set.crossings.len()),
                });
                sets.push(set);
            }
            Err(Error::InsufficientScan { found }) => {
                most_found = most_found.max(found);
                summaries.push(SegmentSummary {
                    start: seg.start,
                    end: seg.end,
                    crossings: None,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if sets.is_empty() {
        return Err(Error::InsufficientScan { found: most_found });
    }

    let ratio = estimate_ratio(&sets)?;
    let squeeze = squeeze_from_ratio(ratio.mean, ratio.combined_sigma())?;
    let detected = detected_levels(trace, &sets, qnl_dbm, dark_dbm, config.level_sigma_db)?;

    let gap = Uncertain::new(
        detected.qnl_dark_gap_db.unwrap_or(f64::INFINITY),
        if detected.qnl_dark_gap_db.is_some() {
            config.gap_sigma_db
        } else {
            0.0
        },
    );
    let mu_sq = Uncertain::new(squeeze.mu_sq_db, squeeze.sigma_db);
    let mu_asq = Uncertain::new(squeeze.mu_asq_db, squeeze.sigma_db);
    let eta_plus = extract_efficiency_db(detected.sq_db, mu_sq, gap).ok();
    let eta_minus = extract_efficiency_db(detected.asq_db, mu_asq, gap).ok();

    let (verdict, eta_total, eta_esc) = match (eta_plus, eta_minus) {
        (Some(p), Some(m)) => {
            let verdict = consistency_check(p.uncertain(), m.uncertain(), config.k_sigma)?;
            let total = Uncertain::new(0.5 * (p.eta + m.eta), 0.5 * p.sigma.hypot(m.sigma));
            let esc = config
                .budget
                .as_ref()
                .map(|b| escape_efficiency(total, b))
                .transpose()?;
            (Some(verdict), Some(total), esc)
        }
        _ => (None, None, None),
    };

    let ramp_systematic = match &config.ramp_distortion {
        Some(d) if squeeze.r > 0.0 => Some(ramp_sensitivity(squeeze.r, d)?),
        _ => None,
    };

    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        ratio,
        squeeze,
        detected,
        eta_plus,
        eta_minus,
        verdict,
        eta_total,
        eta_esc,
        ramp_systematic,
        segments: summaries,
        inputs_echo: InputsEcho {
            n_samples: trace.len(),
            n_sweeps,
            qnl_dbm,
            dark_dbm: dark_dbm.is_finite().then_some(dark_dbm),
            k_sigma: config.k_sigma,
            level_sigma_db: config.level_sigma_db,
            gap_sigma_db: config.gap_sigma_db,
            budget: config.budget,
            ramp_distortion: config.ramp_distortion.clone(),
        },
        caveats: CAVEATS.iter().map(|c| c.to_string()).collect(),
    })
}

/// Systematic error of the ratio method on a state with squeezing parameter
/// `r` scanned through `distortion`.
///
/// Uses four alternating sweeps of 1024 samples over the default angle range
/// with no loss, dark noise or measurement noise.
pub fn ramp_sensitivity(r: f64, distortion: &RampDistortion) -> Result<RampSystematic> {
    let state = SqueezeState::new(r, 0.0)?;
    let chan = ChannelModel::new(1.0, 1.0, 0.0)?;
    let scan = ScanSpec::sweeps(4, 1024).with_distortion(distortion.clone());
    let trace = synthesize_trace(&state, &chan, &scan, &NoiseSpec::none())?;
    let sets = scan
        .segments()
        .into_iter()
        .map(|seg| find_crossings(&trace, seg, trace.meta().qnl_dbm))
        .collect::<Result<Vec<_>>>()?;
    let est = estimate_ratio(&sets)?;
    Ok(RampSystematic {
        coefficients: distortion.coefficients().to_vec(),
        ratio_shift: est.mean - ratio_of_r(r)?,
        r_shift: r_of_ratio(est.mean)? - r,
    })
}

/// JSON encoding of a report with every number rounded to 12 significant
/// digits, so output is stable across platforms. Non-finite numbers become
/// `null`.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| invalid("report", e.to_string()))?;
    round_numbers(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| invalid("report", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn round_numbers(v: &mut serde_json::Value) {
    use serde_json::Value;
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(round_sig(x, 12)).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Squeezed and anti-squeezed levels relative to the QNL.
///
/// Every dip (Down → Up crossing) and hump (Up → Down) lying fully inside a
/// sweep gets a parabola fitted in linear power around its extreme, over a
/// window of `EXTREMUM_WINDOW` times the interval length. Fitting in linear
/// power keeps the fit nearly exact for the cos² shape of the variance, and
/// the fitted vertex is unbiased by the noise where the raw extreme is not.
/// Levels are averaged over all dips (humps); the uncertainty combines their
/// scatter, the fit noise and `extra_sigma_db`.
fn detected_levels(
    trace: &Trace,
    sets: &[CrossingSet],
    qnl_dbm: f64,
    dark_dbm: f64,
    extra_sigma_db: f64,
) -> Result<DetectedLevels> {
    let samples = trace.samples();
    let mut dips = Vec::new();
    let mut humps = Vec::new();
    let mut fit_var = (0.0, 0.0);
    for set in sets {
        let seg = &samples[set.segment.clone()];
        let rel_db: Vec<f64> = seg.iter().map(|s| s.power_dbm - qnl_dbm).collect();
        let noise_db = noise_sigma(&rel_db);
        let db_to_ln = LN_10 / 10.0;
        let lognormal_mean = (0.5 * (noise_db * db_to_ln).powi(2)).exp();
        let lin: Vec<f64> = rel_db
            .iter()
            .map(|&v| (v * db_to_ln).exp() / lognormal_mean)
            .collect();
        let w = default_window(lin.len());
        let smooth = if noise_db > 0.0 {
            savitzky_golay(&lin, w)
        } else {
            lin.clone()
        };
        let index_of = |x: f64| seg.partition_point(|s| s.x < x);
        for pair in set.crossings.windows(2) {
            let (a, b) = (index_of(pair[0].x), index_of(pair[1].x));
            if b <= a + 2 {
                continue;
            }
            let is_dip = pair[0].direction == Direction::Down;
            let inside = &smooth[a..b];
            let centre = a + if is_dip {
                argmin(inside)
            } else {
                argmax(inside)
            };
            let half = (((b - a) as f64 * EXTREMUM_WINDOW) as usize).max(2);
            let lo = centre.saturating_sub(half).max(a);
            let hi = (centre + half + 1).min(b);
            let Some(v) = extremum_fit(&lin[lo..hi]) else {
                continue;
            };
            if !(v > 0.0) {
                continue;
            }
            let db = 10.0 * v.log10();
            // intercept variance of a quadratic fit on n uniform points ≈ 9/(4n)
            let var = noise_db * noise_db * 9.0 / (4.0 * (hi - lo) as f64);
            if is_dip {
                dips.push(db);
                fit_var.0 += var;
            } else {
                humps.push(db);
                fit_var.1 += var;
            }
        }
    }
    if dips.is_empty() || humps.is_empty() {
        return Err(Error::NoValidTriple);
    }
    let level = |v: &[f64], fit_var_sum: f64| {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let se2 = if v.len() > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n
        } else {
            0.0
        };
        let fit2 = fit_var_sum / (n * n);
        Uncertain::new(mean, (se2 + fit2 + extra_sigma_db * extra_sigma_db).sqrt())
    };
    Ok(DetectedLevels {
        sq_db: level(&dips, fit_var.0),
        asq_db: level(&humps, fit_var.1),
        qnl_dark_gap_db: dark_dbm.is_finite().then_some(qnl_dbm - dark_dbm),
    })
}

const EXTREMUM_WINDOW: f64 = 0.15;

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i)
}
