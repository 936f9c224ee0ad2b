//! Closed-form quadrature variance of squeezed light.
//!
//! Everything here works on linear variances. The quantum noise limit (QNL) of
//! the minimum-uncertainty model is 1; a detected variance carries the absolute
//! scale of [`ChannelModel::qnl`]. Decibels only appear through
//! [`db_from_linear`] and [`linear_from_db`].

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters of a minimum-uncertainty squeezed state.
///
/// `theta_s` is stored normalized to `[0, π)`; the quadrature variance is
/// π-periodic in the squeezing angle so no information is lost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeState {
    r: f64,
    theta_s: f64,
}

impl SqueezeState {
    pub fn new(r: f64, theta_s: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(invalid(
                "squeezing parameter r",
                format!("{r} is not a finite value >= 0"),
            ));
        }
        if !theta_s.is_finite() {
            return Err(invalid("squeezing angle", "must be finite"));
        }
        Ok(Self {
            r,
            theta_s: normalize_angle(theta_s),
        })
    }

    /// The vacuum / coherent state.
    pub fn vacuum() -> Self {
        Self {
            r: 0.0,
            theta_s: 0.0,
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }

    /// Squeezed-quadrature level in dB relative to the QNL (negative).
    pub fn squeezing_db(&self) -> f64 {
        r_to_db(self.r)
    }
}

/// Normalizes an angle to `[0, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// MU squeezed-quadrature level for `r`, in dB: `10·log10(e^(−2r))`.
pub fn r_to_db(r: f64) -> f64 {
    -20.0 * r / LN_10
}

/// Inverse of [`r_to_db`]; accepts either sign of the dB level.
pub fn r_from_db(db: f64) -> f64 {
    db.abs() * LN_10 / 20.0
}

/// Loss and dark-noise model of the detection chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    eta: f64,
    qnl: f64,
    dark: f64,
}

impl ChannelModel {
    pub fn new(eta: f64, qnl: f64, dark: f64) -> Result<Self> {
        check_efficiency(eta)?;
        if !qnl.is_finite() || qnl <= 0.0 {
            return Err(invalid(
                "QNL variance",
                format!("{qnl} must be finite and > 0"),
            ));
        }
        if !dark.is_finite() || dark < 0.0 || dark >= qnl {
            return Err(invalid(
                "dark-noise variance",
                format!("{dark} must satisfy 0 <= dark < qnl = {qnl}"),
            ));
        }
        Ok(Self { eta, qnl, dark })
    }

    /// Relative units: QNL = 1, dark noise given in dB relative to the QNL
    /// (e.g. `-10.6`). `f64::NEG_INFINITY` means no dark noise.
    pub fn relative(eta: f64, dark_rel_db: f64) -> Result<Self> {
        let dark = if dark_rel_db == f64::NEG_INFINITY {
            0.0
        } else {
            linear_from_db(dark_rel_db, 1.0)
        };
        Self::new(eta, 1.0, dark)
    }

    /// Absolute units: variances in mW derived from spectrum-analyzer dBm levels.
    pub fn from_dbm(eta: f64, qnl_dbm: f64, dark_dbm: f64) -> Result<Self> {
        if !qnl_dbm.is_finite() {
            return Err(invalid("qnl_dbm", "must be finite"));
        }
        let dark = if dark_dbm == f64::NEG_INFINITY {
            0.0
        } else {
            linear_from_db(dark_dbm, 1.0)
        };
        Self::new(eta, linear_from_db(qnl_dbm, 1.0), dark)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn qnl(&self) -> f64 {
        self.qnl
    }

    pub fn dark(&self) -> f64 {
        self.dark
    }

    /// QNL level in dBm (absolute mode) or 0 dB (relative mode).
    pub fn qnl_dbm(&self) -> f64 {
        10.0 * self.qnl.log10()
    }

    /// Dark-noise level in dBm; `-inf` when there is no dark noise.
    pub fn dark_dbm(&self) -> f64 {
        10.0 * self.dark.log10()
    }
}

pub(crate) fn check_efficiency(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(invalid("efficiency", format!("{eta} is outside [0, 1]")));
    }
    Ok(())
}

/// One point of a variance-versus-angle curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSample {
    pub theta: f64,
    pub value: f64,
}

/// Quadrature variance `cosh(2r) − sinh(2r)·cos(2(θ − θ_s))` of a
/// minimum-uncertainty state.
pub fn mu_variance(state: &SqueezeState, theta: f64) -> f64 {
    let two_r = 2.0 * state.r;
    two_r.cosh() - two_r.sinh() * (2.0 * (theta - state.theta_s)).cos()
}

/// Variance after a loss channel of efficiency `eta`: `1 + η(mu − 1)`.
pub fn apply_loss(mu: f64, eta: f64) -> Result<f64> {
    if !mu.is_finite() || mu <= 0.0 {
        return Err(invalid("variance", format!("{mu} must be finite and > 0")));
    }
    check_efficiency(eta)?;
    Ok(loss(mu, eta))
}

#[inline]
fn loss(mu: f64, eta: f64) -> f64 {
    1.0 + eta * (mu - 1.0)
}

/// Detected variance including loss and dark noise, in the absolute units of
/// `chan.qnl()`. Equals the QNL wherever the MU variance is 1.
pub fn detected_variance(state: &SqueezeState, theta: f64, chan: &ChannelModel) -> f64 {
    detect(mu_variance(state, theta), chan)
}

pub(crate) fn detect(input: f64, chan: &ChannelModel) -> f64 {
    loss(input, chan.eta) * (chan.qnl - chan.dark) + chan.dark
}

/// Samples [`detected_variance`] on a list of angles.
pub fn detected_curve(
    state: &SqueezeState,
    chan: &ChannelModel,
    thetas: &[f64],
) -> Vec<VarianceSample> {
    thetas
        .iter()
        .map(|&theta| VarianceSample {
            theta,
            value: detected_variance(state, theta, chan),
        })
        .collect()
}

pub fn db_from_linear(v: f64, reference: f64) -> Result<f64> {
    if !(v > 0.0) || !(reference > 0.0) {
        return Err(invalid(
            "dB conversion input",
            format!("value {v} and reference {reference} must both be > 0"),
        ));
    }
    Ok(10.0 * (v / reference).log10())
}

pub fn linear_from_db(x: f64, reference: f64) -> f64 {
    reference * 10f64.powf(x / 10.0)
}

/// Quadrature variance entering the loss channel, as a function of the
/// measurement angle.
pub trait InputState {
    fn input_variance(&self, theta: f64) -> f64;

    fn detected_at(&self, theta: f64, chan: &ChannelModel) -> f64 {
        detect(self.input_variance(theta), chan)
    }
}

impl InputState for SqueezeState {
    fn input_variance(&self, theta: f64) -> f64 {
        mu_variance(self, theta)
    }
}

/// A general single-mode Gaussian quadrature ellipse with minimum variance
/// `v_min` at `theta_s` and maximum `v_max` at `theta_s + π/2`.
///
/// A [`SqueezeState`] is the special case `v_min·v_max = 1`. Other products
/// model states with excess noise. The ratio method reads such an ellipse as
/// the MU state with the same QNL crossings, and both quadratures then give
/// the same efficiency, so the excess goes unnoticed (see [`LobeExcess`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEllipse {
    v_min: f64,
    v_max: f64,
    theta_s: f64,
}

impl QuadratureEllipse {
    pub fn new(v_min: f64, v_max: f64, theta_s: f64) -> Result<Self> {
        if !(v_min > 0.0) || !v_min.is_finite() || !v_max.is_finite() || v_max < v_min {
            return Err(invalid(
                "quadrature ellipse",
                format!("need 0 < v_min <= v_max, got {v_min}, {v_max}"),
            ));
        }
        if !theta_s.is_finite() {
            return Err(invalid("squeezing angle", "must be finite"));
        }
        Ok(Self {
            v_min,
            v_max,
            theta_s: normalize_angle(theta_s),
        })
    }

    /// Multiplies the anti-squeezed variance by `factor`, breaking minimum uncertainty.
    pub fn with_excess_antisqueezing(self, factor: f64) -> Result<Self> {
        Self::new(self.v_min, self.v_max * factor, self.theta_s)
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn theta_s(&self) -> f64 {
        self.theta_s
    }

    /// Uncertainty product `v_min·v_max`; 1 for a minimum-uncertainty state.
    pub fn product(&self) -> f64 {
        self.v_min * self.v_max
    }

    pub fn variance(&self, theta: f64) -> f64 {
        let (s, c) = (theta - self.theta_s).sin_cos();
        self.v_min * c * c + self.v_max * s * s
    }

    pub fn detected(&self, theta: f64, chan: &ChannelModel) -> f64 {
        detect(self.variance(theta), chan)
    }
}

impl InputState for QuadratureEllipse {
    fn input_variance(&self, theta: f64) -> f64 {
        self.variance(theta)
    }
}

/// An ellipse with extra noise confined to the anti-squeezed lobe.
///
/// Wherever the ellipse variance `v` exceeds the QNL, `(factor − 1)·v_max·(v −
/// 1)/(v_max − 1)` is added, so the peak becomes `factor·v_max` while the QNL
/// crossings stay put. Any excess that keeps the `A + B·cos 2θ` shape (a
/// wider ellipse, white excess noise, phase jitter) is indistinguishable from
/// a minimum-uncertainty state with a different `r` and passes the
/// two-quadrature efficiency check; this one does not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobeExcess {
    base: QuadratureEllipse,
    factor: f64,
}

impl LobeExcess {
    pub fn new(base: QuadratureEllipse, factor: f64) -> Result<Self> {
        if !(factor >= 1.0) || !factor.is_finite() {
            return Err(invalid(
                "lobe excess factor",
                format!("{factor} must be >= 1"),
            ));
        }
        if !(base.v_max > 1.0) {
            return Err(invalid(
                "lobe excess",
                "base state has no anti-squeezed lobe",
            ));
        }
        Ok(Self { base, factor })
    }

    pub fn base(&self) -> QuadratureEllipse {
        self.base
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }
}

impl InputState for LobeExcess {
    fn input_variance(&self, theta: f64) -> f64 {
        let v = self.base.variance(theta);
        if v <= 1.0 {
            return v;
        }
        let vmax = self.base.v_max;
        v + (self.factor - 1.0) * vmax * (v - 1.0) / (vmax - 1.0)
    }
}

impl From<SqueezeState> for QuadratureEllipse {
    fn from(state: SqueezeState) -> Self {
        Self {
            v_min: (-2.0 * state.r).exp(),
            v_max: (2.0 * state.r).exp(),
            theta_s: state.theta_s,
        }
    }
}
