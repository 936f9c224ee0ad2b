//! Smoothing filters shared by segmentation and crossing detection.

/// Default smoothing window for a segment of `n` samples: `n/64`, at least 5,
/// forced odd so the window is centered.
pub fn default_window(n: usize) -> usize {
    let w = (n / 64).max(5);
    w | 1
}

/// Centered moving average; the window shrinks symmetrically at the edges.
pub fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    let n = y.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in y {
        acc += v;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let (lo, hi) = (i - h, i + h + 1);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Quadratic Savitzky–Golay smoothing.
///
/// Each output is the value at sample `i` of the least-squares parabola through
/// a window of `window` samples. Near the edges the window is shifted inward
/// (kept at full width) instead of shrunk, so the filter stays exact for any
/// quadratic input.
pub fn savitzky_golay(y: &[f64], window: usize) -> Vec<f64> {
    let n = y.len();
    if n < 3 {
        return y.to_vec();
    }
    let w = window.max(3).min(n);
    let half = w / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half).min(n - w);
            let fit = Quadratic::fit(&y[lo..lo + w]);
            fit.eval((i - lo) as f64)
        })
        .collect()
}

/// Fraction of white-noise variance that survives centered quadratic
/// Savitzky–Golay smoothing with an odd window `w` (the diagonal of its hat
/// matrix).
pub fn savitzky_golay_noise_gain(w: usize) -> f64 {
    let w = w.max(5) as f64;
    3.0 * (3.0 * w * w - 7.0) / (4.0 * w * (w * w - 4.0))
}

/// Robust white-noise standard deviation from second differences.
///
/// Second differences of a smooth signal sampled densely are nearly zero, so
/// the median absolute second difference tracks the additive noise alone.
pub fn noise_sigma(y: &[f64]) -> f64 {
    if y.len() < 3 {
        return 0.0;
    }
    let mut d2: Vec<f64> = y
        .windows(3)
        .map(|w| (w[0] - 2.0 * w[1] + w[2]).abs())
        .collect();
    let mid = d2.len() / 2;
    let (_, median, _) = d2.select_nth_unstable_by(mid, f64::total_cmp);
    // var(second difference) = 6σ²; MAD → σ for a normal distribution
    *median / (0.674_489_75 * 6f64.sqrt())
}

/// Extreme value of the least-squares parabola through `y`.
///
/// Falls back to the fitted value at the window center when the vertex lies
/// outside the window. `None` for fewer than three points.
pub fn extremum_fit(y: &[f64]) -> Option<f64> {
    if y.len() < 3 {
        return None;
    }
    let q = Quadratic::fit(y);
    let last = (y.len() - 1) as f64;
    let t = if q.c2 != 0.0 {
        -q.c1 / (2.0 * q.c2)
    } else {
        f64::NAN
    };
    Some(if (0.0..=last).contains(&t) {
        q.eval(t)
    } else {
        q.eval(0.5 * last)
    })
}

struct Quadratic {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl Quadratic {
    /// Least-squares parabola in the local coordinate t = 0..len.
    fn fit(y: &[f64]) -> Self {
        let n = y.len() as f64;
        let t0 = (n - 1.0) / 2.0;
        // centered coordinate keeps the normal equations well conditioned
        let (mut s2, mut s4) = (0.0, 0.0);
        let (mut sy, mut sty, mut st2y) = (0.0, 0.0, 0.0);
        for (k, &v) in y.iter().enumerate() {
            let t = k as f64 - t0;
            let t2 = t * t;
            s2 += t2;
            s4 += t2 * t2;
            sy += v;
            sty += t * v;
            st2y += t2 * v;
        }
        // odd moments vanish on a symmetric grid
        let b = sty / s2;
        let det = n * s4 - s2 * s2;
        let a = (sy * s4 - s2 * st2y) / det;
        let c = (n * st2y - s2 * sy) / det;
        // back to t measured from the window start
        Self {
            c0: a - b * t0 + c * t0 * t0,
            c1: b - 2.0 * c * t0,
            c2: c,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * self.c2)
    }
}
