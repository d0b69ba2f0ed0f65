//! Combination tests built from a sum-type and a max-type p-value.

use crate::error::{Error, Result};
use crate::laws::{chi_sq4_sf, LimitLaw};
use crate::linalg::SymMatrix;
use crate::models::SampleMatrix;
use crate::stats::{
    max_stat, t_skk, t_sr, w_max_two_sample, Calibration, FcComponents, Method, TestOutcome,
};

/// Floor applied to constituent p-values before taking logs, so the
/// combination stays finite.
const P_FLOOR: f64 = 1e-300;

fn check_p(value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::InvalidPValue { value });
    }
    Ok(value.max(P_FLOOR))
}

/// Fisher combination -2 log p_max - 2 log p_sum, referred to chi-squared(4),
/// reported under the given method tag.
pub fn fisher_combine_as(method: Method, p_sum: f64, p_max: f64) -> Result<TestOutcome> {
    let ps = check_p(p_sum)?;
    let pm = check_p(p_max)?;
    let statistic = -2.0 * (ps.ln() + pm.ln());
    Ok(TestOutcome {
        method,
        statistic,
        normalized: statistic,
        p_value: chi_sq4_sf(statistic),
        calibration: Calibration::Law {
            law: LimitLaw::ChiSq4,
        },
        components: Some(FcComponents { p_sum, p_max }),
    })
}

/// Fisher combination under the default FC tag.
pub fn fisher_combine(p_sum: f64, p_max: f64) -> Result<TestOutcome> {
    fisher_combine_as(Method::Fc, p_sum, p_max)
}

/// Minimum-p combination: statistic min(p_sum, p_max) with the exact
/// independent-uniform calibration P(min <= t) = 1 - (1 - t)^2.
pub fn min_p_combine(p_sum: f64, p_max: f64) -> Result<TestOutcome> {
    let ps = check_p(p_sum)?;
    let pm = check_p(p_max)?;
    let pmin = ps.min(pm);
    Ok(TestOutcome {
        method: Method::MinP,
        statistic: pmin,
        normalized: pmin,
        p_value: pmin * (2.0 - pmin),
        calibration: Calibration::MinP,
        components: Some(FcComponents { p_sum, p_max }),
    })
}

/// One-sample Fisher combination of the sum-type statistic and the max-type
/// statistic under A = Omega-hat^{1/2}.
pub fn fc_one_sample(x: &SampleMatrix, omega_hat_sqrt: &SymMatrix) -> Result<TestOutcome> {
    let sum = t_sr(x)?;
    let max = max_stat(x, omega_hat_sqrt, Method::Max2)?;
    fisher_combine(sum.p_value, max.p_value)
}

/// Two-sample Fisher combination of the sum-type statistic and the
/// transformed max-type statistic.
pub fn fc_two_sample(
    x1: &SampleMatrix,
    x2: &SampleMatrix,
    omega_hat_sqrt: &SymMatrix,
) -> Result<TestOutcome> {
    let sum = t_skk(x1, x2)?;
    let max = w_max_two_sample(x1, x2, omega_hat_sqrt)?;
    fisher_combine(sum.p_value, max.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_p_values_give_zero_statistic() {
        let out = fisher_combine(1.0, 1.0).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn exp_minus_one_pair() {
        let p = (-1.0f64).exp();
        let out = fisher_combine(p, p).unwrap();
        assert!((out.statistic - 4.0).abs() < 1e-12);
        // chi-squared(4) survival at 4 is 3 e^{-2} ~ 0.406
        let want = 3.0 * (-2.0f64).exp();
        assert!((out.p_value - want).abs() < 1e-9 * want);
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = fisher_combine(0.03, 0.7).unwrap();
        let b = fisher_combine(0.7, 0.03).unwrap();
        assert_eq!(a.statistic, b.statistic);
        assert_eq!(a.p_value, b.p_value);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            fisher_combine(-0.1, 0.5).unwrap_err(),
            Error::InvalidPValue { .. }
        ));
        assert!(matches!(
            fisher_combine(0.5, 1.2).unwrap_err(),
            Error::InvalidPValue { .. }
        ));
    }

    #[test]
    fn zero_p_is_clamped_finite() {
        let out = fisher_combine(0.0, 0.5).unwrap();
        assert!(out.statistic.is_finite());
        assert!(out.p_value > 0.0);
    }

    #[test]
    fn components_recorded() {
        let out = fisher_combine(0.2, 0.4).unwrap();
        let c = out.components.unwrap();
        assert_eq!(c.p_sum, 0.2);
        assert_eq!(c.p_max, 0.4);
    }

    #[test]
    fn min_p_calibration_is_exact() {
        let out = min_p_combine(0.04, 0.5).unwrap();
        assert_eq!(out.statistic, 0.04);
        assert!((out.p_value - (1.0 - 0.96f64.powi(2))).abs() < 1e-15);
        // rejection at level alpha corresponds to pmin <= 1 - sqrt(1 - alpha)
        let alpha = 0.05f64;
        let threshold = 1.0 - (1.0 - alpha).sqrt();
        let at = min_p_combine(threshold, 0.9).unwrap();
        assert!((at.p_value - alpha).abs() < 1e-12);
    }
}
