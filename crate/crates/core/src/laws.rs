//! Limiting null laws used for calibration: standard normal, the Gumbel-type
//! law of the normalized maximum, and chi-squared with 4 degrees of freedom.

use libm::erfc;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Reference law a statistic is calibrated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitLaw {
    /// Phi(x), for the sum-type statistics.
    StdNormal,
    /// F(y) = exp(-pi^{-1/2} e^{-y/2}), for the normalized maximum
    /// M - 2 log p + log log p.
    GumbelMax,
    /// Chi-squared with 4 degrees of freedom, for the Fisher combination of
    /// two independent p-values.
    ChiSq4,
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal survival function, accurate in the upper tail.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// CDF of the Gumbel-type maximum law F(y) = exp(-pi^{-1/2} e^{-y/2}).
pub fn gumbel_max_cdf(y: f64) -> f64 {
    (-(1.0 / PI.sqrt()) * (-y / 2.0).exp()).exp()
}

/// Survival function of the Gumbel-type maximum law, accurate for large y.
pub fn gumbel_max_sf(y: f64) -> f64 {
    -(-(1.0 / PI.sqrt()) * (-y / 2.0).exp()).exp_m1()
}

/// Chi-squared(4) CDF in closed form: 1 - (1 + x/2) e^{-x/2} for x >= 0.
pub fn chi_sq4_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -((1.0 + x / 2.0) * (-x / 2.0).exp() - 1.0)
    }
}

/// Chi-squared(4) survival function (1 + x/2) e^{-x/2}.
pub fn chi_sq4_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (1.0 + x / 2.0) * (-x / 2.0).exp()
    }
}

/// CDF of the given limit law.
pub fn limit_cdf(law: LimitLaw, x: f64) -> f64 {
    match law {
        LimitLaw::StdNormal => std_normal_cdf(x),
        LimitLaw::GumbelMax => gumbel_max_cdf(x),
        LimitLaw::ChiSq4 => chi_sq4_cdf(x),
    }
}

/// Survival function of the given limit law, computed without cancellation.
pub fn limit_sf(law: LimitLaw, x: f64) -> f64 {
    match law {
        LimitLaw::StdNormal => std_normal_sf(x),
        LimitLaw::GumbelMax => gumbel_max_sf(x),
        LimitLaw::ChiSq4 => chi_sq4_sf(x),
    }
}
