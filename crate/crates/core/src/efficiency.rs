//! Total efficiency from measured and reconstructed variances, the
//! two-quadrature minimum-uncertainty check, and the loss budget.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ratio::r_of_ratio;
use crate::trace::round_sig;
use crate::variance::{check_efficiency, linear_from_db};

/// A value with a symmetric uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertain {
    pub value: f64,
    pub sigma: f64,
}

impl Uncertain {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Evaluates `f` at the center and at every corner of the box
/// `value ± sigma` and returns the center value with the half-range of the
/// corner values.
///
/// Exact for functions monotone in each argument over the box, which holds for
/// every use in this crate.
pub fn interval_eval<const N: usize>(
    inputs: [Uncertain; N],
    f: impl Fn([f64; N]) -> f64,
) -> Uncertain {
    let center = f(inputs.map(|u| u.value));
    let (mut lo, mut hi) = (center, center);
    for mask in 0u32..(1 << N) {
        let mut p = [0.0; N];
        for (k, u) in inputs.iter().enumerate() {
            p[k] = if mask & (1 << k) == 0 {
                u.value - u.sigma
            } else {
                u.value + u.sigma
            };
        }
        let v = f(p);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Uncertain::new(center, 0.5 * (hi - lo))
}

/// Extracted total efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEstimate {
    pub eta: f64,
    pub sigma: f64,
    /// `η < 0` or `η > 1 + σ`: evidence against the MU assumption or the inputs.
    pub unphysical: bool,
}

impl EfficiencyEstimate {
    pub fn uncertain(&self) -> Uncertain {
        Uncertain::new(self.eta, self.sigma)
    }
}

/// `η = (det − qnl) / ((mu − 1)(qnl − dark))`, from a detected variance and
/// the minimum-uncertainty variance of the same quadrature. All inputs are
/// linear; `det`, `qnl` and `dark` share one unit, `mu` is relative to the QNL.
pub fn extract_efficiency(
    det: Uncertain,
    mu: Uncertain,
    qnl: Uncertain,
    dark: Uncertain,
) -> Result<EfficiencyEstimate> {
    for (name, u) in [
        ("detected variance", det),
        ("MU variance", mu),
        ("QNL", qnl),
        ("dark noise", dark),
    ] {
        if !u.value.is_finite() || !u.sigma.is_finite() || u.sigma < 0.0 {
            return Err(invalid(name, "value and sigma must be finite, sigma >= 0"));
        }
    }
    // the formula has a pole at mu = 1; the interval box must not reach it
    if mu.value == 1.0 || (mu.value - 1.0).abs() <= mu.sigma {
        return Err(Error::UndefinedEfficiency);
    }
    if !(qnl.value - qnl.sigma > dark.value + dark.sigma) {
        return Err(invalid(
            "QNL",
            format!("{} must exceed dark noise {}", qnl.value, dark.value),
        ));
    }
    let est = interval_eval([det, mu, qnl, dark], |[d, m, q, k]| {
        (d - q) / ((m - 1.0) * (q - k))
    });
    Ok(flag(est))
}

/// [`extract_efficiency`] on dB inputs relative to the QNL, the way they are
/// read off a spectrum analyzer. Sigmas are in dB and are propagated in the
/// dB domain.
///
/// * `det_db` — detected level minus the QNL level
/// * `mu_db` — reconstructed MU level
/// * `qnl_dark_gap_db` — QNL level minus dark-noise level (`+inf` for none)
pub fn extract_efficiency_db(
    det_db: Uncertain,
    mu_db: Uncertain,
    qnl_dark_gap_db: Uncertain,
) -> Result<EfficiencyEstimate> {
    for (name, u) in [("detected level", det_db), ("MU level", mu_db)] {
        if !u.value.is_finite() || !u.sigma.is_finite() || u.sigma < 0.0 {
            return Err(invalid(name, "value and sigma must be finite, sigma >= 0"));
        }
    }
    if qnl_dark_gap_db.value.is_nan()
        || qnl_dark_gap_db.value <= 0.0
        || !(qnl_dark_gap_db.sigma >= 0.0)
    {
        return Err(invalid("QNL-to-dark gap", "must be > 0 dB with sigma >= 0"));
    }
    if mu_db.value == 0.0 || mu_db.value.abs() <= mu_db.sigma {
        return Err(Error::UndefinedEfficiency);
    }
    let gap = if qnl_dark_gap_db.value.is_infinite() {
        Uncertain::exact(f64::INFINITY)
    } else {
        qnl_dark_gap_db
    };
    let est = interval_eval([det_db, mu_db, gap], |[d, m, g]| {
        let dark = linear_from_db(-g, 1.0);
        (linear_from_db(d, 1.0) - 1.0) / ((linear_from_db(m, 1.0) - 1.0) * (1.0 - dark))
    });
    Ok(flag(est))
}

fn flag(est: Uncertain) -> EfficiencyEstimate {
    EfficiencyEstimate {
        eta: est.value,
        sigma: est.sigma,
        unphysical: est.value < 0.0 || est.value > 1.0 + est.sigma,
    }
}

/// Outcome of comparing the efficiencies extracted from the squeezed and the
/// anti-squeezed quadrature.
///
/// `eta_plus` comes from the squeezed quadrature (X⁺) and `eta_minus` from the
/// anti-squeezed one (X⁻).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub eta_plus: Uncertain,
    pub eta_minus: Uncertain,
    /// `|η⁺ − η⁻| / sqrt(σ⁺² + σ⁻²)` to 3 significant figures; `+∞` when both
    /// sigmas are zero and the values differ.
    pub z: f64,
    pub k: f64,
    pub consistent: bool,
}

pub const DEFAULT_K_SIGMA: f64 = 2.0;

/// The MU assumption holds when both quadratures give the same efficiency
/// within `k` combined sigmas.
pub fn consistency_check(
    eta_plus: Uncertain,
    eta_minus: Uncertain,
    k: f64,
) -> Result<ConsistencyVerdict> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid(
            "consistency threshold k",
            format!("{k} must be finite and > 0"),
        ));
    }
    for u in [eta_plus, eta_minus] {
        if !u.value.is_finite() || !u.sigma.is_finite() || u.sigma < 0.0 {
            return Err(invalid(
                "efficiency",
                "value and sigma must be finite, sigma >= 0",
            ));
        }
    }
    let mut diff = (eta_plus.value - eta_minus.value).abs();
    // rounding noise from two algebraic routes to the same efficiency
    if diff <= 1e-12 * eta_plus.value.abs().max(eta_minus.value.abs()).max(1.0) {
        diff = 0.0;
    }
    let combined = eta_plus.sigma.hypot(eta_minus.sigma);
    let (z, consistent) = if combined == 0.0 {
        if diff == 0.0 {
            (0.0, true)
        } else {
            (f64::INFINITY, false)
        }
    } else {
        (diff / combined, diff <= k * combined)
    };
    Ok(ConsistencyVerdict {
        eta_plus,
        eta_minus,
        z: round_sig(z, 3),
        k,
        consistent,
    })
}

/// Known efficiencies of the detection chain; the OPA escape efficiency is
/// what remains of the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBudget {
    pub eta_det: f64,
    pub eta_vis: f64,
    pub eta_opt: f64,
}

impl EfficiencyBudget {
    pub fn new(eta_det: f64, eta_vis: f64, eta_opt: f64) -> Result<Self> {
        for (name, e) in [
            ("eta_det", eta_det),
            ("eta_vis", eta_vis),
            ("eta_opt", eta_opt),
        ] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(invalid(name, format!("{e} is outside (0, 1]")));
            }
        }
        Ok(Self {
            eta_det,
            eta_vis,
            eta_opt,
        })
    }

    /// Product of the known components.
    pub fn known(&self) -> f64 {
        self.eta_det * self.eta_vis * self.eta_opt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeEfficiency {
    pub eta_esc: f64,
    pub sigma: f64,
    /// `η_esc > 1`: the budget claims more loss than the total shows.
    pub unphysical: bool,
}

/// `η_esc = η / (η_det·η_vis·η_opt)`.
pub fn escape_efficiency(
    eta_total: Uncertain,
    budget: &EfficiencyBudget,
) -> Result<EscapeEfficiency> {
    if !eta_total.value.is_finite() || !(eta_total.sigma >= 0.0) {
        return Err(invalid(
            "total efficiency",
            "value must be finite, sigma >= 0",
        ));
    }
    let known = budget.known();
    let eta_esc = eta_total.value / known;
    Ok(EscapeEfficiency {
        eta_esc,
        sigma: eta_total.sigma / known,
        unphysical: eta_esc > 1.0 || eta_esc <= 0.0,
    })
}

/// Product of loss-channel efficiencies; the empty product is 1.
pub fn total_efficiency(components: &[f64]) -> Result<f64> {
    for &c in components {
        if !(c > 0.0) {
            return Err(invalid(
                "efficiency component",
                format!("{c} is outside (0, 1]"),
            ));
        }
        check_efficiency(c)?;
    }
    Ok(components.iter().product())
}

/// One point of the detected-variance-versus-ratio family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ratio: f64,
    pub sq_db: f64,
    pub asq_db: f64,
}

/// Detected squeezing and anti-squeezing, relative to the QNL and without dark
/// noise, of the MU state whose crossing ratio is each grid value, after a
/// channel of efficiency `eta`.
pub fn variance_vs_ratio_curve(eta: f64, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("efficiency", format!("{eta} is outside (0, 1]")));
    }
    grid.iter()
        .map(|&ratio| {
            if !(ratio > 0.0 && ratio < 1.0) {
                return Err(invalid("ratio grid", format!("{ratio} is outside (0, 1)")));
            }
            let r = r_of_ratio(ratio)?;
            let level = |mu: f64| 10.0 * (1.0 + eta * (mu - 1.0)).log10();
            Ok(CurvePoint {
                ratio,
                sq_db: level((-2.0 * r).exp()),
                asq_db: level((2.0 * r).exp()),
            })
        })
        .collect()
}

/// `n` evenly spaced ratios from `min` to `max` inclusive.
pub fn ratio_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max < 1.0 && min <= max) || n == 0 {
        return Err(invalid(
            "ratio grid",
            format!("need 0 < {min} <= {max} < 1 and n > 0"),
        ));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            if k + 1 == n {
                max
            } else {
                min + step * k as f64
            }
        })
        .collect())
}
