//! Synthetic zero-span traces of a phase-scanned homodyne measurement, and
//! segmentation of traces into monotone PZT sweeps.

use std::f64::consts::PI;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::smooth::{default_window, moving_average};
use crate::trace::{Sample, Trace, TraceMeta};
use crate::variance::{ChannelModel, InputState, SqueezeState};

/// Minimum number of samples in one monotone sweep.
pub const MIN_SEGMENT_SAMPLES: usize = 16;

/// Monotone polynomial distortion of the PZT ramp on the scan fraction
/// `u ∈ [0, 1]`:
///
/// `D(u) = u + Σₖ cₖ·(u^k − u)`, with `k = 2, 3, …` for coefficients `c₂, c₃, …`.
///
/// Endpoints are fixed (`D(0) = 0`, `D(1) = 1`). An empty coefficient list is
/// the ideal linear ramp. A single coefficient `0.1` is the quadratic
/// distortion used in the sensitivity study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RampDistortion {
    coefficients: Vec<f64>,
}

impl RampDistortion {
    pub fn linear() -> Self {
        Self::default()
    }

    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("ramp distortion", "coefficients must be finite"));
        }
        let ramp = Self { coefficients };
        // D is a polynomial; a dense grid check of D' > 0 is sufficient
        let n = 2000;
        if (0..=n).any(|k| ramp.derivative(k as f64 / n as f64) <= 0.0) {
            return Err(invalid(
                "ramp distortion",
                "polynomial is not strictly increasing on [0, 1]",
            ));
        }
        Ok(ramp)
    }

    pub fn quadratic(c: f64) -> Result<Self> {
        Self::new(vec![c])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_linear(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn apply(&self, u: f64) -> f64 {
        let mut d = u;
        let mut pow = u;
        for &c in &self.coefficients {
            pow *= u;
            d += c * (pow - u);
        }
        d
    }

    fn derivative(&self, u: f64) -> f64 {
        let mut d = 1.0;
        let mut pow = 1.0;
        for (j, &c) in self.coefficients.iter().enumerate() {
            let k = (j + 2) as f64;
            pow *= u;
            d += c * (k * pow - 1.0);
        }
        d
    }

    /// Inverse of [`apply`](Self::apply) by bisection.
    pub fn invert(&self, d: f64) -> f64 {
        if self.is_linear() {
            return d;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.apply(mid) < d {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Phase-scan layout of a synthetic acquisition.
///
/// The trace holds `n_samples` in `n_sweeps` equal monotone sweeps (the last
/// absorbs any remainder). Sweep 0 runs from `theta_start` to `theta_end`,
/// sweep 1 back again, and so on. A reverse sweep retraces the forward one, so
/// the distorted ramp is applied to the PZT drive fraction in both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n_samples: usize,
    pub theta_start: f64,
    pub theta_end: f64,
    pub n_sweeps: usize,
    pub distortion: RampDistortion,
}

impl Default for ScanSpec {
    /// One 1024-sample sweep over `[−π/4, 5π/4]`, enough to contain three
    /// QNL crossings for any `r` in `[0.05, 3]` when `θ_s = 0`.
    fn default() -> Self {
        Self {
            n_samples: 1024,
            theta_start: -0.25 * PI,
            theta_end: 1.25 * PI,
            n_sweeps: 1,
            distortion: RampDistortion::linear(),
        }
    }
}

impl ScanSpec {
    /// Default sweep range with `n_sweeps` sweeps of `per_sweep` samples each.
    pub fn sweeps(n_sweeps: usize, per_sweep: usize) -> Self {
        Self {
            n_samples: n_sweeps * per_sweep,
            n_sweeps,
            ..Self::default()
        }
    }

    pub fn with_distortion(mut self, distortion: RampDistortion) -> Self {
        self.distortion = distortion;
        self
    }

    pub fn with_range(mut self, theta_start: f64, theta_end: f64) -> Self {
        self.theta_start = theta_start;
        self.theta_end = theta_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sweeps == 0 {
            return Err(invalid("scan", "n_sweeps must be >= 1"));
        }
        if self.n_samples / self.n_sweeps < MIN_SEGMENT_SAMPLES {
            return Err(invalid(
                "scan",
                format!("need at least {MIN_SEGMENT_SAMPLES} samples per sweep"),
            ));
        }
        if !self.theta_start.is_finite()
            || !self.theta_end.is_finite()
            || self.theta_start == self.theta_end
        {
            return Err(invalid("scan", "sweep range must be finite and non-empty"));
        }
        RampDistortion::new(self.distortion.coefficients.clone())?;
        Ok(())
    }

    /// Constructed sweep boundaries as half-open index ranges.
    pub fn segments(&self) -> Vec<Range<usize>> {
        nominal_segments(self.n_samples, self.n_sweeps)
    }

    /// Phase at every sample index.
    pub fn angles(&self) -> Vec<f64> {
        let span = self.theta_end - self.theta_start;
        let mut out = Vec::with_capacity(self.n_samples);
        for (k, seg) in self.segments().into_iter().enumerate() {
            let m = seg.len();
            for j in 0..m {
                let u = j as f64 / (m - 1) as f64;
                let drive = if k.is_multiple_of(2) { u } else { 1.0 - u };
                out.push(self.theta_start + span * self.distortion.apply(drive));
            }
        }
        out
    }

    /// Fractional sample positions (within sweep `k`) at which the scan passes
    /// through `theta`, if it does.
    pub fn position_of_angle(&self, sweep: usize, theta: f64) -> Option<f64> {
        let seg = self.segments().get(sweep)?.clone();
        let span = self.theta_end - self.theta_start;
        let d = (theta - self.theta_start) / span;
        if !(0.0..=1.0).contains(&d) {
            return None;
        }
        let u = self.distortion.invert(d);
        let drive = if sweep.is_multiple_of(2) { u } else { 1.0 - u };
        Some(seg.start as f64 + drive * (seg.len() - 1) as f64)
    }
}

fn nominal_segments(n: usize, sweeps: usize) -> Vec<Range<usize>> {
    let m = n / sweeps;
    (0..sweeps)
        .map(|k| {
            let end = if k + 1 == sweeps { n } else { (k + 1) * m };
            k * m..end
        })
        .collect()
}

/// Additive white Gaussian noise on the dB trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            sigma_db: 0.0,
            seed: 0,
        }
    }

    pub fn new(sigma_db: f64, seed: u64) -> Result<Self> {
        let n = Self { sigma_db, seed };
        n.validate()?;
        Ok(n)
    }

    fn validate(&self) -> Result<()> {
        if !self.sigma_db.is_finite() || self.sigma_db < 0.0 {
            return Err(invalid(
                "noise sigma_db",
                format!("{} must be finite and >= 0", self.sigma_db),
            ));
        }
        Ok(())
    }
}

/// Synthesizes a trace of a minimum-uncertainty state.
///
/// `power_dbm = 10·log10(V_det(θ)/qnl) + qnl_dbm + noise`, where the QNL level
/// is the channel's own (`0 dB` in relative mode).
pub fn synthesize_trace(
    state: &SqueezeState,
    chan: &ChannelModel,
    scan: &ScanSpec,
    noise: &NoiseSpec,
) -> Result<Trace> {
    let mut trace = synthesize_input_trace(state, chan, scan, noise)?;
    trace
        .meta_mut()
        .extra
        .insert("r".into(), state.r().to_string());
    Ok(trace)
}

/// Like [`synthesize_trace`] for any input state, which need not be
/// minimum-uncertainty.
pub fn synthesize_input_trace<S: InputState + ?Sized>(
    state: &S,
    chan: &ChannelModel,
    scan: &ScanSpec,
    noise: &NoiseSpec,
) -> Result<Trace> {
    scan.validate()?;
    noise.validate()?;
    let qnl_dbm = chan.qnl_dbm();
    let mut gauss = if noise.sigma_db > 0.0 {
        let normal =
            Normal::new(0.0, noise.sigma_db).map_err(|e| invalid("noise", e.to_string()))?;
        Some((ChaCha8Rng::seed_from_u64(noise.seed), normal))
    } else {
        None
    };

    let samples = scan
        .angles()
        .into_iter()
        .enumerate()
        .map(|(i, theta)| {
            let rel = 10.0 * (state.detected_at(theta, chan) / chan.qnl()).log10();
            let jitter = gauss
                .as_mut()
                .map_or(0.0, |(rng, normal)| normal.sample(rng));
            Sample {
                index: i as u64,
                x: i as f64,
                power_dbm: qnl_dbm + rel + jitter,
            }
        })
        .collect();

    let meta = TraceMeta::new(qnl_dbm, chan.dark_dbm())?
        .with("n_sweeps", scan.n_sweeps)
        .with("source", "synthetic")
        .with("eta", chan.eta())
        .with("theta_start", scan.theta_start)
        .with("theta_end", scan.theta_end)
        .with("noise_sigma_db", noise.sigma_db)
        .with("seed", noise.seed);
    Trace::new(samples, meta)
}

/// Splits a trace into maximal monotone PZT sweeps.
///
/// The expected sweep count comes from `scan.n_sweeps`. Each nominal
/// boundary is refined to the turning point of the moving-average-smoothed
/// trace: the reversal point is where the trace is locally mirror-symmetric,
/// so the boundary is the candidate that minimizes the squared difference
/// between the samples before and after it. For synthetic traces this
/// recovers the constructed boundaries exactly.
pub fn segment_monotone(trace: &Trace, scan: &ScanSpec) -> Result<Vec<Range<usize>>> {
    segment_sweeps(trace, scan.n_sweeps)
}

/// [`segment_monotone`] with only the sweep count known.
pub fn segment_sweeps(trace: &Trace, n_sweeps: usize) -> Result<Vec<Range<usize>>> {
    let n = trace.len();
    if n_sweeps == 0 {
        return Err(invalid("sweep count", "must be >= 1"));
    }
    let min = MIN_SEGMENT_SAMPLES * n_sweeps;
    if n < min {
        return Err(Error::TraceTooShort { len: n, min });
    }
    let nominal = nominal_segments(n, n_sweeps);
    if n_sweeps == 1 {
        return Ok(nominal);
    }

    let m = n / n_sweeps;
    let smoothed = moving_average(&trace.powers(), default_window(m));
    let reach = (m / 32).max(2);
    let mirror = (m / 4).max(4);

    let mut bounds = vec![0usize];
    for seg in &nominal[1..] {
        let b = seg.start;
        let lo = (b - reach).max(bounds.last().unwrap() + MIN_SEGMENT_SAMPLES / 2);
        let hi = (b + reach).min(n - MIN_SEGMENT_SAMPLES / 2);
        let mut best = (f64::INFINITY, b);
        for c in lo..=hi {
            let w = mirror.min(c).min(n - c);
            let score = (0..w)
                .map(|j| {
                    let d = smoothed[c - 1 - j] - smoothed[c + j];
                    d * d
                })
                .sum::<f64>()
                / w as f64;
            let better = score < best.0 || (score == best.0 && c.abs_diff(b) < best.1.abs_diff(b));
            if better {
                best = (score, c);
            }
        }
        bounds.push(best.1);
    }
    bounds.push(n);
    Ok(bounds.windows(2).map(|w| w[0]..w[1]).collect())
}
