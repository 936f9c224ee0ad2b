//! The ratio method: QNL crossings of a phase-scanned trace, their interval
//! ratio, and its inversion to the squeezing parameter.
//!
//! For a minimum-uncertainty state the variance returns to the QNL at
//! `θ_s ± ½·arccos(l)` (mod π) with `l = (cosh 2r − 1)/sinh 2r = tanh r`.
//! Loss and dark noise scale the trace around the QNL but never move these
//! points, so the ratio of the below-QNL interval to the following above-QNL
//! interval,
//!
//! ```text
//! ratio = arccos(l) / (π − arccos(l)),
//! ```
//!
//! depends on `r` alone.

use std::f64::consts::{LN_10, PI};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::smooth::{default_window, noise_sigma, savitzky_golay, savitzky_golay_noise_gain};
use crate::trace::Trace;
use crate::variance::SqueezeState;

/// `l = (cosh 2r − 1)/sinh 2r`, which equals `tanh r`; 0 at `r = 0`.
pub fn lambda_of_r(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid(
            "squeezing parameter r",
            format!("{r} must be >= 0"),
        ));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    // cosh 2r − 1 = 2 sinh² r, free of cancellation for small r
    let num = 2.0 * r.sinh().powi(2);
    let den = (2.0 * r).sinh();
    if !num.is_finite() || !den.is_finite() {
        return Ok(1.0);
    }
    Ok(num / den)
}

/// The three consecutive crossings `(P1, P2, P3)` in radians: the below-QNL
/// dip `[P1, P2]` centered on `θ_s`, followed by the above-QNL interval
/// `[P2, P3]`.
pub fn crossing_angles(state: &SqueezeState) -> Result<[f64; 3]> {
    if state.r() == 0.0 {
        return Err(Error::NoCrossings);
    }
    let half = 0.5 * lambda_of_r(state.r())?.acos();
    let ts = state.theta_s();
    Ok([ts - half, ts + half, ts - half + PI])
}

/// `arccos(l)/(π − arccos(l))` for `r > 0`; strictly decreasing, in `(0, 1)`.
pub fn ratio_of_r(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("squeezing parameter r", format!("{r} must be > 0")));
    }
    let a = lambda_of_r(r)?.acos();
    Ok(a / (PI - a))
}

/// Inverse of [`ratio_of_r`]: `r = artanh(cos(ratio·π/(1 + ratio)))`.
///
/// `ratio = 1` (equal intervals) is the boundary value `r = 0`, meaning no
/// measurable squeezing.
pub fn r_of_ratio(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(invalid(
            "crossing ratio",
            format!("{ratio} is outside (0, 1]"),
        ));
    }
    if ratio == 1.0 {
        return Ok(0.0);
    }
    let a = ratio * PI / (1.0 + ratio);
    Ok(a.cos().atanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Trace rises through the QNL.
    Up,
    /// Trace falls through the QNL.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub x: f64,
    pub direction: Direction,
    pub sigma_x: f64,
}

/// QNL crossings found inside one monotone sweep, in acquisition order.
///
/// For a reverse sweep the scan coordinate still increases with time, so
/// crossings are sorted by `x` in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingSet {
    pub segment: Range<usize>,
    pub crossings: Vec<Crossing>,
}

/// Tuning of [`find_crossings_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// Smoothing window in samples; `None` uses `max(5, n/64)`.
    pub window: Option<usize>,
}

pub fn find_crossings(trace: &Trace, segment: Range<usize>, qnl_dbm: f64) -> Result<CrossingSet> {
    find_crossings_with(trace, segment, qnl_dbm, &CrossingOptions::default())
}

/// Locates the QNL crossings of one sweep.
///
/// The sweep is converted to linear excess power over the QNL and, when it
/// carries measurable noise, smoothed with a quadratic Savitzky–Golay filter.
/// Every sign change of the excess is placed by linear interpolation between
/// the two bracketing samples. Sign changes closer together than one
/// smoothing window are noise chatter: an even-sized cluster cancels out and
/// an odd-sized one collapses to its mean position.
///
/// `sigma_x` is half the local sample spacing plus the smoothed noise level
/// divided by the local slope.
pub fn find_crossings_with(
    trace: &Trace,
    segment: Range<usize>,
    qnl_dbm: f64,
    opts: &CrossingOptions,
) -> Result<CrossingSet> {
    if segment.end > trace.len() || segment.start >= segment.end {
        return Err(invalid(
            "segment",
            format!(
                "{segment:?} is empty or outside a trace of {} samples",
                trace.len()
            ),
        ));
    }
    if !qnl_dbm.is_finite() {
        return Err(invalid("qnl_dbm", "must be finite"));
    }
    let samples = &trace.samples()[segment.clone()];
    let n = samples.len();
    let window = opts.window.unwrap_or_else(|| default_window(n)) | 1;
    let rel_db: Vec<f64> = samples.iter().map(|s| s.power_dbm - qnl_dbm).collect();
    let noise_db = noise_sigma(&rel_db);
    // Work on the linear excess over the QNL. Loss and dark noise multiply it
    // by a constant, so crossings found here are exactly loss-invariant. The
    // lognormal mean of dB-domain noise is divided out first.
    let db_to_ln = LN_10 / 10.0;
    let lognormal_mean = (0.5 * (noise_db * db_to_ln).powi(2)).exp();
    let excess: Vec<f64> = rel_db
        .iter()
        .map(|&v| (v * db_to_ln).exp() / lognormal_mean - 1.0)
        .collect();
    let smooth = if noise_db > 0.0 {
        savitzky_golay(&excess, window)
    } else {
        excess
    };
    // near the QNL the linear noise is the dB noise times ln10/10
    let noise = noise_db * db_to_ln * savitzky_golay_noise_gain(window).sqrt();

    let mut raw: Vec<(usize, Crossing)> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (smooth[i], smooth[i + 1]);
        let direction = match (a < 0.0, b < 0.0) {
            (true, false) => Direction::Up,
            (false, true) => Direction::Down,
            _ => continue,
        };
        let t = a / (a - b);
        let (x0, x1) = (samples[i].x, samples[i + 1].x);
        let dx = (x1 - x0).abs();
        let slope = (b - a).abs() / dx.max(f64::MIN_POSITIVE);
        raw.push((
            i,
            Crossing {
                x: x0 + t * (x1 - x0),
                direction,
                sigma_x: 0.5 * dx + noise / slope,
            },
        ));
    }

    let crossings = merge_chatter(&raw, window);
    if crossings.len() < 3 {
        return Err(Error::InsufficientScan {
            found: crossings.len(),
        });
    }
    Ok(CrossingSet { segment, crossings })
}

fn merge_chatter(raw: &[(usize, Crossing)], min_gap: usize) -> Vec<Crossing> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < raw.len() {
        let mut end = k + 1;
        while end < raw.len() && raw[end].0 - raw[end - 1].0 < min_gap {
            end += 1;
        }
        let cluster = &raw[k..end];
        if cluster.len() % 2 == 1 {
            let m = cluster.len() as f64;
            let mean_x = cluster.iter().map(|c| c.1.x).sum::<f64>() / m;
            let spread = cluster
                .iter()
                .map(|c| (c.1.x - mean_x).abs())
                .fold(0.0, f64::max);
            let sigma = cluster.iter().map(|c| c.1.sigma_x).fold(0.0, f64::max);
            out.push(Crossing {
                x: mean_x,
                direction: cluster[0].1.direction,
                sigma_x: sigma + spread,
            });
        }
        k = end;
    }
    out
}

/// One dip/hump interval pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleRatio {
    pub ratio: f64,
    /// First-order uncertainty from the crossings' `sigma_x`.
    pub sigma: f64,
}

/// Aggregate of all triple ratios in a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single ratio.
    pub sigma: f64,
    pub n: usize,
    /// Sample standard deviation of the individual ratios.
    pub std_dev: f64,
    /// RMS per-triple uncertainty propagated from crossing localization.
    pub interpolation_sigma: f64,
    /// Triples discarded because their dip was wider than the hump.
    pub rejected: usize,
}

impl RatioEstimate {
    /// Standard error combined in quadrature with the localization
    /// uncertainty. Localization errors come largely from the finite sample
    /// grid and smoothing, so they do not average down across triples.
    pub fn combined_sigma(&self) -> f64 {
        self.sigma.hypot(self.interpolation_sigma)
    }

    /// A ratio summary given directly (e.g. read off a screen), with no
    /// per-triple detail.
    pub fn from_summary(mean: f64, sigma: f64) -> Result<Self> {
        if !(mean > 0.0 && mean <= 1.0) {
            return Err(invalid("ratio mean", format!("{mean} is outside (0, 1]")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(invalid(
                "ratio sigma",
                format!("{sigma} must be finite and >= 0"),
            ));
        }
        Ok(Self {
            ratios: vec![mean],
            mean,
            sigma,
            n: 1,
            std_dev: 0.0,
            interpolation_sigma: 0.0,
            rejected: 0,
        })
    }
}

/// Splits a sweep's crossings into disjoint consecutive triples and forms
/// `dip / hump` for each.
///
/// The dip is the interval of the triple that lies below the QNL, identified
/// by the direction of its first crossing. A triple whose first interval is
/// the hump (a reverse sweep, or a sweep starting above the QNL) is
/// re-anchored so the dip is still the numerator.
pub fn triple_ratios(set: &CrossingSet) -> Vec<TripleRatio> {
    set.crossings
        .chunks_exact(3)
        .map(|t| {
            let first = (t[1].x - t[0].x).abs();
            let second = (t[2].x - t[1].x).abs();
            let dip_first = t[0].direction == Direction::Down;
            let (dip, hump) = if dip_first {
                (first, second)
            } else {
                (second, first)
            };
            let ratio = dip / hump;
            // ratio = |x1 − x0| / |x2 − x1| (or its reciprocal arrangement)
            let (s0, s1, s2) = (t[0].sigma_x, t[1].sigma_x, t[2].sigma_x);
            let (s_dip_outer, s_hump_outer) = if dip_first { (s0, s2) } else { (s2, s0) };
            let d_outer_dip = s_dip_outer / hump;
            let d_outer_hump = s_hump_outer * dip / (hump * hump);
            let d_shared = s1 * (1.0 / hump + dip / (hump * hump));
            TripleRatio {
                ratio,
                sigma: (d_outer_dip.powi(2) + d_outer_hump.powi(2) + d_shared.powi(2)).sqrt(),
            }
        })
        .collect()
}

/// Aggregates the triple ratios of every sweep into an unweighted mean and
/// its standard error.
pub fn estimate_ratio(sets: &[CrossingSet]) -> Result<RatioEstimate> {
    let mut ratios = Vec::new();
    let mut sigmas = Vec::new();
    let mut rejected = 0;
    for t in sets.iter().flat_map(triple_ratios) {
        if t.ratio > 0.0 && t.ratio <= 1.0 && t.ratio.is_finite() {
            ratios.push(t.ratio);
            sigmas.push(t.sigma);
        } else {
            rejected += 1;
        }
    }
    let n = ratios.len();
    if n == 0 {
        return Err(Error::NoValidTriple);
    }
    let nf = n as f64;
    let mean = ratios.iter().sum::<f64>() / nf;
    let std_dev = if n > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
    } else {
        0.0
    };
    let interpolation_sigma = (sigmas.iter().map(|s| s * s).sum::<f64>() / nf).sqrt();
    Ok(RatioEstimate {
        ratios,
        mean,
        sigma: std_dev / nf.sqrt(),
        n,
        std_dev,
        interpolation_sigma,
        rejected,
    })
}

/// Minimum-uncertainty state recovered from a ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeEstimate {
    pub r: f64,
    pub sigma_r: f64,
    /// MU squeezed-quadrature level, dB relative to the QNL.
    pub mu_sq_db: f64,
    /// MU anti-squeezed level; always `−mu_sq_db`.
    pub mu_asq_db: f64,
    pub sigma_db: f64,
    /// The interval `mean ± sigma` left `(0, 1]` and was clipped.
    pub clipped: bool,
}

/// Inverts a ratio estimate to `r` and the MU state.
///
/// `sigma_r` is the half-range of `r_of_ratio` over `[mean − sigma,
/// mean + sigma]`, clipped to `(0, 1]`.
pub fn estimate_squeeze(ratio: &RatioEstimate) -> Result<SqueezeEstimate> {
    squeeze_from_ratio(ratio.mean, ratio.sigma)
}

/// [`estimate_squeeze`] for a bare `mean ± sigma`.
pub fn squeeze_from_ratio(mean: f64, sigma: f64) -> Result<SqueezeEstimate> {
    if !(mean > 0.0 && mean <= 1.0) {
        return Err(invalid("ratio mean", format!("{mean} is outside (0, 1]")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(
            "ratio sigma",
            format!("{sigma} must be finite and >= 0"),
        ));
    }
    let r = r_of_ratio(mean)?;
    // keep the lower edge strictly inside (0, 1]: r_of_ratio diverges at 0
    let floor = mean.min(1e-6);
    let (mut lo, mut hi) = (mean - sigma, mean + sigma);
    let mut clipped = false;
    if lo < floor {
        lo = floor;
        clipped = true;
    }
    if hi > 1.0 {
        hi = 1.0;
        clipped = true;
    }
    let sigma_r = if sigma == 0.0 {
        0.0
    } else {
        0.5 * (r_of_ratio(lo)? - r_of_ratio(hi)?)
    };
    let mu_sq_db = 10.0 * (-2.0 * r).exp().log10();
    Ok(SqueezeEstimate {
        r,
        sigma_r,
        mu_sq_db,
        mu_asq_db: -mu_sq_db,
        sigma_db: 20.0 / LN_10 * sigma_r,
        clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize_trace, NoiseSpec, ScanSpec};
    use crate::trace::{Sample, TraceMeta};
    use crate::variance::{mu_variance, ChannelModel};
    use proptest::prelude::*;

    /// Bisection on MU variance − 1 over [lo, hi]; independent of the closed form.
    fn bisect_qnl(r: f64, mut lo: f64, mut hi: f64) -> f64 {
        let s = SqueezeState::new(r, 0.0).unwrap();
        let f = |t: f64| mu_variance(&s, t) - 1.0;
        let flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == (flo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_of_r(0.0).unwrap(), 0.0);
        let direct = ((2.0f64 * 0.948).cosh() - 1.0) / (2.0f64 * 0.948).sinh();
        assert!((lambda_of_r(0.948).unwrap() - direct).abs() < 1e-14);
        assert!((lambda_of_r(0.948).unwrap() - 0.7389).abs() < 1e-4);
        let direct = (2.0f64.cosh() - 1.0) / 2.0f64.sinh();
        assert!((lambda_of_r(1.0).unwrap() - direct).abs() < 1e-14);
        assert!((lambda_of_r(1.0).unwrap() - 0.76159).abs() < 1e-5);
        assert!(lambda_of_r(-1.0).is_err());
        assert_eq!(lambda_of_r(1000.0).unwrap(), 1.0);
    }

    #[test]
    fn crossing_angle_examples() {
        let s = SqueezeState::new(0.948, 0.0).unwrap();
        let p = crossing_angles(&s).unwrap();
        // frozen from bisection
        let p1 = -bisect_qnl(0.948, 0.0, PI / 4.0);
        let p2 = bisect_qnl(0.948, 0.0, PI / 4.0);
        let p3 = bisect_qnl(0.948, PI / 2.0, PI);
        assert!(
            (p[0] - p1).abs() < 1e-12 && (p[1] - p2).abs() < 1e-12 && (p[2] - p3).abs() < 1e-12
        );
        assert!((p[0] + 0.3697).abs() < 1e-4);
        assert!((p[1] - 0.3697).abs() < 1e-4);
        assert!((p[2] - 2.7719).abs() < 1e-4);
        for th in p {
            assert!((mu_variance(&s, th) - 1.0).abs() < 1e-10);
        }

        let big = crossing_angles(&SqueezeState::new(5.0, 0.0).unwrap()).unwrap();
        assert!((big[1] - big[0]).abs() < 0.05);

        assert!(matches!(
            crossing_angles(&SqueezeState::vacuum()),
            Err(Error::NoCrossings)
        ));

        let shifted = crossing_angles(&SqueezeState::new(0.948, 0.5).unwrap()).unwrap();
        for (a, b) in shifted.iter().zip(p) {
            assert!((a - b - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_examples() {
        let r = ratio_of_r(0.948).unwrap();
        assert!((r - 0.3078).abs() < 1e-4, "{r}");
        assert!((r - 0.307).abs() < 0.02);
        assert!((ratio_of_r(1e-9).unwrap() - 1.0).abs() < 1e-8);
        // arccos(tanh 2)/(π − arccos(tanh 2)), checked against bisection crossings
        let x1 = bisect_qnl(2.0, 0.0, PI / 4.0);
        let x3 = bisect_qnl(2.0, PI / 2.0, PI);
        // dip [−x1, x1], hump [x1, x3]
        let oracle = (2.0 * x1) / (x3 - x1);
        assert!((ratio_of_r(2.0).unwrap() - oracle).abs() < 1e-9);
        assert!((ratio_of_r(2.0).unwrap() - 0.09366).abs() < 1e-5);
        assert!(ratio_of_r(0.0).is_err());
        assert!(ratio_of_r(-0.5).is_err());
    }

    #[test]
    fn inverse_examples() {
        let r = r_of_ratio(0.307).unwrap();
        assert!((r - 0.95018).abs() < 1e-5, "{r}");
        assert_eq!(r_of_ratio(1.0).unwrap(), 0.0);
        assert!(r_of_ratio(0.0).is_err());
        assert!(r_of_ratio(1.2).is_err());
        assert!(r_of_ratio(f64::NAN).is_err());
        for k in 1..20 {
            let x = 0.05 * k as f64;
            let back = ratio_of_r(r_of_ratio(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-10, "{x}: {back}");
        }
    }

    #[test]
    fn squeeze_examples() {
        let e = squeeze_from_ratio(0.307, 0.02).unwrap();
        assert!((e.r - 0.9502).abs() < 1e-4);
        assert!((e.sigma_r - 0.05476).abs() < 1e-4, "{}", e.sigma_r);
        assert!((e.mu_sq_db + 8.2535).abs() < 1e-3);
        assert!((e.mu_sq_db + e.mu_asq_db).abs() < 1e-12);
        assert!((e.sigma_db - 0.4756).abs() < 1e-3, "{}", e.sigma_db);
        assert!(!e.clipped);

        let e = squeeze_from_ratio(0.999_999, 0.0).unwrap();
        assert!(e.r < 1e-2 && e.mu_sq_db.abs() < 0.1);
        assert_eq!(e.sigma_r, 0.0);
        assert_eq!(e.sigma_db, 0.0);

        let e = squeeze_from_ratio(1.0, 0.0).unwrap();
        assert_eq!(e.r, 0.0);
        assert_eq!(e.mu_sq_db, 0.0);

        let e = squeeze_from_ratio(0.98, 0.05).unwrap();
        assert!(e.clipped && e.sigma_r.is_finite());
        let e = squeeze_from_ratio(0.01, 0.05).unwrap();
        assert!(e.clipped && e.sigma_r.is_finite());
    }

    fn paper_trace(eta: f64, dark_db: f64, sweeps: usize) -> (Trace, ScanSpec) {
        let s = SqueezeState::new(0.948, 0.0).unwrap();
        let c = ChannelModel::relative(eta, dark_db).unwrap();
        let scan = ScanSpec::sweeps(sweeps, 1024);
        (
            synthesize_trace(&s, &c, &scan, &NoiseSpec::none()).unwrap(),
            scan,
        )
    }

    #[test]
    fn crossings_land_on_analytic_angles() {
        let (t, scan) = paper_trace(0.77, -10.6, 2);
        let p = crossing_angles(&SqueezeState::new(0.948, 0.0).unwrap()).unwrap();
        let span = scan.theta_end - scan.theta_start;
        let rad_per_sample = span / 1023.0;
        for (k, seg) in scan.segments().into_iter().enumerate() {
            let set = find_crossings(&t, seg, 0.0).unwrap();
            let mut expected: Vec<f64> = [p[0], p[1], p[2], p[1] + PI]
                .iter()
                .filter_map(|&a| scan.position_of_angle(k, a))
                .collect();
            expected.sort_by(f64::total_cmp);
            assert_eq!(set.crossings.len(), expected.len());
            for (c, e) in set.crossings.iter().zip(&expected) {
                assert!((c.x - e).abs() * rad_per_sample < 1e-3, "{} vs {}", c.x, e);
            }
            // directions alternate
            for w in set.crossings.windows(2) {
                assert_ne!(w[0].direction, w[1].direction);
            }
        }
    }

    #[test]
    fn crossings_ignore_loss() {
        let (a, scan) = paper_trace(0.5, -10.6, 1);
        let (b, _) = paper_trace(0.9, -10.6, 1);
        let ca = find_crossings(&a, scan.segments()[0].clone(), 0.0).unwrap();
        let cb = find_crossings(&b, scan.segments()[0].clone(), 0.0).unwrap();
        for (x, y) in ca.crossings.iter().zip(&cb.crossings) {
            assert!((x.x - y.x).abs() < 1e-6);
        }
    }

    #[test]
    fn flat_trace_is_insufficient() {
        let meta = TraceMeta::new(0.0, -10.0).unwrap();
        let samples = (0..200)
            .map(|i| Sample {
                index: i,
                x: i as f64,
                power_dbm: 0.5,
            })
            .collect();
        let t = Trace::new(samples, meta).unwrap();
        assert!(matches!(
            find_crossings(&t, 0..200, 0.0),
            Err(Error::InsufficientScan { found: 0 })
        ));
        assert!(find_crossings(&t, 0..300, 0.0).is_err());
    }

    #[test]
    fn noiseless_ratio_estimate() {
        let (t, scan) = paper_trace(0.77, -10.6, 4);
        let sets: Vec<_> = scan
            .segments()
            .into_iter()
            .map(|s| find_crossings(&t, s, 0.0).unwrap())
            .collect();
        let est = estimate_ratio(&sets).unwrap();
        assert_eq!(est.n, 4);
        assert!((est.mean - ratio_of_r(0.948).unwrap()).abs() < 1e-3);
        assert!(est.sigma < 1e-4);
    }

    #[test]
    fn reanchored_triple() {
        let c = |x: f64, direction| Crossing {
            x,
            direction,
            sigma_x: 0.0,
        };
        // hump first, then the dip
        let set = CrossingSet {
            segment: 0..100,
            crossings: vec![
                c(0.0, Direction::Up),
                c(2.4, Direction::Down),
                c(3.0, Direction::Up),
            ],
        };
        let t = triple_ratios(&set);
        assert_eq!(t.len(), 1);
        assert!((t[0].ratio - 0.6 / 2.4).abs() < 1e-12);
        assert!(t[0].ratio <= 1.0);
    }

    #[test]
    fn no_triple_is_an_error() {
        assert!(matches!(estimate_ratio(&[]), Err(Error::NoValidTriple)));
    }

    #[test]
    fn chatter_is_merged() {
        let c = |i: usize, x: f64, direction| {
            (
                i,
                Crossing {
                    x,
                    direction,
                    sigma_x: 0.1,
                },
            )
        };
        let raw = vec![
            c(10, 10.0, Direction::Down),
            c(50, 50.0, Direction::Up),
            c(52, 52.0, Direction::Down),
            c(53, 53.0, Direction::Up),
            c(90, 90.0, Direction::Down),
            c(91, 91.0, Direction::Up),
        ];
        let merged = merge_chatter(&raw, 5);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[1].direction, Direction::Up);
        assert!((merged[1].x - 155.0 / 3.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn crossing_angles_match_bisection(r in 0.05f64..3.0) {
            let p = crossing_angles(&SqueezeState::new(r, 0.0).unwrap()).unwrap();
            prop_assert!((p[1] - bisect_qnl(r, 0.0, PI / 4.0)).abs() < 1e-9);
            prop_assert!((p[0] + bisect_qnl(r, 0.0, PI / 4.0)).abs() < 1e-9);
            prop_assert!((p[2] - bisect_qnl(r, PI / 2.0, PI)).abs() < 1e-9);
        }

        #[test]
        fn lambda_is_tanh(r in 1e-6f64..=20.0) {
            prop_assert!((lambda_of_r(r).unwrap() - r.tanh()).abs() < 1e-12);
        }

        #[test]
        fn inversion_round_trip(x in 1e-3f64..0.999) {
            let back = ratio_of_r(r_of_ratio(x).unwrap()).unwrap();
            prop_assert!((back - x).abs() < 1e-10);
        }

        #[test]
        fn ratio_strictly_decreasing(r in 0.01f64..5.0, dr in 1e-4f64..1.0) {
            prop_assert!(ratio_of_r(r + dr).unwrap() < ratio_of_r(r).unwrap());
            let x = ratio_of_r(r).unwrap();
            prop_assert!(x > 0.0 && x < 1.0);
        }
    }
}
