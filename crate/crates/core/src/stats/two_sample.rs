//! Two-sample statistics: the studentized sum-type statistic for possibly
//! unequal covariances and the max-type statistic on precision-transformed
//! mean differences.

use crate::error::{Error, Result};
use crate::estimators::{col_means, sample_cov};
use crate::laws::LimitLaw;
use crate::linalg::SymMatrix;
use crate::models::SampleMatrix;
use crate::stats::{gumbel_normalize, Method, TestOutcome};

/// Studentized two-sample sum-type statistic
/// ((Xbar1 - Xbar2)' D-hat^{-1} (Xbar1 - Xbar2) - p) / sqrt(p sigma^2 c_{p,n})
/// with D-hat = (1/n1) D1 + (1/n2) D2, referred to the standard normal.
pub fn t_skk(x1: &SampleMatrix, x2: &SampleMatrix) -> Result<TestOutcome> {
    let (n1, n2) = (x1.n(), x2.n());
    let p = x1.p();
    if x2.p() != p {
        return Err(Error::DimMismatch {
            left: p,
            right: x2.p(),
        });
    }
    if n1 < 2 || n2 < 2 {
        return Err(Error::TooFewObservations {
            n: n1.min(n2),
            min: 2,
        });
    }
    let s1 = sample_cov(x1)?;
    let s2 = sample_cov(x2)?;
    let m1 = col_means(x1);
    let m2 = col_means(x2);
    let (f1, f2) = (n1 as f64, n2 as f64);
    let pf = p as f64;

    let mut dhat = Vec::with_capacity(p);
    for i in 0..p {
        let v = s1.get(i, i) / f1 + s2.get(i, i) / f2;
        if !(v > 0.0) {
            return Err(Error::ZeroVariance { index: i });
        }
        dhat.push(v);
    }

    let quad: f64 = (0..p)
        .map(|i| {
            let d = m1[i] - m2[i];
            d * d / dhat[i]
        })
        .sum();

    // tr(R-hat^2) with R-hat = D-hat^{-1/2} (S1/n1 + S2/n2) D-hat^{-1/2}
    let mut tr_r2 = 0.0;
    for i in 0..p {
        let r1 = s1.row(i);
        let r2 = s2.row(i);
        let di = dhat[i];
        tr_r2 += r1
            .iter()
            .zip(r2)
            .zip(&dhat)
            .map(|((&a, &b), &dj)| {
                let v = a / f1 + b / f2;
                v * v / (di * dj)
            })
            .sum::<f64>();
    }

    // tr(D-hat^{-1} S_k)
    let tr1: f64 = (0..p).map(|i| s1.get(i, i) / dhat[i]).sum();
    let tr2: f64 = (0..p).map(|i| s2.get(i, i) / dhat[i]).sum();

    let sigma2 = 2.0 * tr_r2 / pf
        - 2.0 * tr1 * tr1 / (pf * (f1 - 1.0) * f1 * f1)
        - 2.0 * tr2 * tr2 / (pf * (f2 - 1.0) * f2 * f2);
    if sigma2 <= 0.0 {
        return Err(Error::DegenerateSigma { value: sigma2 });
    }
    let cpn = 1.0 + tr_r2 / pf.powf(1.5);
    let statistic = (quad - pf) / (pf * sigma2 * cpn).sqrt();
    Ok(TestOutcome::from_law(
        Method::Skk,
        statistic,
        statistic,
        LimitLaw::StdNormal,
    ))
}

/// Two-sample max-type statistic
/// W = (n1 n2 / (n1 + n2)) max_i ((Omega-hat^{1/2} (Xbar1 - Xbar2))_i)^2,
/// with the Gumbel-type calibration of W - 2 log p + log log p.
pub fn w_max_two_sample(
    x1: &SampleMatrix,
    x2: &SampleMatrix,
    omega_hat_sqrt: &SymMatrix,
) -> Result<TestOutcome> {
    let p = x1.p();
    if x2.p() != p {
        return Err(Error::DimMismatch {
            left: p,
            right: x2.p(),
        });
    }
    if omega_hat_sqrt.dim() != p {
        return Err(Error::DimMismatch {
            left: omega_hat_sqrt.dim(),
            right: p,
        });
    }
    if p < 2 {
        return Err(Error::DimensionTooSmall { p, min: 2 });
    }
    let (n1, n2) = (x1.n() as f64, x2.n() as f64);
    let m1 = col_means(x1);
    let m2 = col_means(x2);
    let diff: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a - b).collect();
    let wbar = omega_hat_sqrt.matvec(&diff);
    let max_sq = wbar.iter().fold(0.0f64, |acc, &v| acc.max(v * v));
    let statistic = n1 * n2 / (n1 + n2) * max_sq;
    let normalized = gumbel_normalize(statistic, p);
    Ok(TestOutcome::from_law(
        Method::Max2,
        statistic,
        normalized,
        LimitLaw::GumbelMax,
    ))
}
