//! Sample moments and plug-in matrices: sample covariance, column summaries,
//! and precision-matrix plug-ins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::models::SampleMatrix;

/// How the precision matrix Omega-hat is obtained.
///
/// `Oracle` passes through a known population precision (the mode used for
/// all table-reproduction runs). `InvertRidged` inverts S + ridge * I, for
/// data where p < n or a positive ridge is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PrecisionMode {
    Oracle,
    InvertRidged { ridge: f64 },
}

impl PrecisionMode {
    pub fn label(&self) -> String {
        match self {
            PrecisionMode::Oracle => "oracle".to_string(),
            PrecisionMode::InvertRidged { ridge } => format!("ridged({ridge})"),
        }
    }
}

/// Default ridge for data-analysis use: 1e-3 * tr(S)/p.
pub fn default_ridge(s: &SymMatrix) -> f64 {
    let p = s.dim();
    let trace: f64 = (0..p).map(|i| s.get(i, i)).sum();
    1e-3 * trace / p as f64
}

/// Arithmetic column means.
pub fn col_means(x: &SampleMatrix) -> Vec<f64> {
    let (n, p) = (x.n(), x.p());
    let mut means = vec![0.0; p];
    for i in 0..n {
        for (m, &v) in means.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    let nf = n as f64;
    for m in means.iter_mut() {
        *m /= nf;
    }
    means
}

/// Unbiased column variances ((n-1) denominator).
pub fn col_variances(x: &SampleMatrix) -> Result<Vec<f64>> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::TooFewObservations { n, min: 2 });
    }
    let means = col_means(x);
    let mut vars = vec![0.0; p];
    for i in 0..n {
        for ((v, &xv), &m) in vars.iter_mut().zip(x.row(i)).zip(&means) {
            let d = xv - m;
            *v += d * d;
        }
    }
    let denom = (n - 1) as f64;
    for v in vars.iter_mut() {
        *v /= denom;
    }
    Ok(vars)
}

/// Unbiased sample covariance S = (n-1)^{-1} sum (X_i - Xbar)(X_i - Xbar)'.
pub fn sample_cov(x: &SampleMatrix) -> Result<SymMatrix> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::TooFewObservations { n, min: 2 });
    }
    let means = col_means(x);
    let mut acc = vec![0.0; p * p];
    let mut centered = vec![0.0; p];
    for i in 0..n {
        for (c, (&v, &m)) in centered.iter_mut().zip(x.row(i).iter().zip(&means)) {
            *c = v - m;
        }
        for a in 0..p {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut acc[a * p..(a + 1) * p];
            for (out, &cb) in row[a..].iter_mut().zip(&centered[a..]) {
                *out += ca * cb;
            }
        }
    }
    let denom = (n - 1) as f64;
    Ok(SymMatrix::from_fn(p, |i, j| acc[i * p + j] / denom))
}

/// Returns (Omega-hat, Omega-hat^{1/2}) under the requested mode.
pub fn precision_plugin(
    mode: &PrecisionMode,
    s: &SymMatrix,
    oracle: Option<&SymMatrix>,
) -> Result<(SymMatrix, SymMatrix)> {
    match mode {
        PrecisionMode::Oracle => {
            let omega = oracle.ok_or(Error::MissingOracle)?;
            let sqrt = linalg::sqrt_psd_auto(omega)?;
            Ok((omega.clone(), sqrt))
        }
        PrecisionMode::InvertRidged { ridge } => {
            if !(*ridge >= 0.0) || !ridge.is_finite() {
                return Err(Error::config("ridge", format!("must be >= 0, got {ridge}")));
            }
            let p = s.dim();
            let ridged = SymMatrix::from_fn(p, |i, j| {
                s.get(i, j) + if i == j { *ridge } else { 0.0 }
            });
            let decomp = linalg::eigh(&ridged)?;
            let max = decomp.values()[0];
            let min = *decomp.values().last().expect("nonempty");
            if !(min > 1e-10 * max && min > 0.0) {
                let condition = if min > 0.0 { max / min } else { f64::INFINITY };
                return Err(Error::NearSingular { condition });
            }
            let omega = decomp.assemble(|l| 1.0 / l);
            let sqrt = decomp.assemble(|l| 1.0 / l.sqrt());
            Ok((omega, sqrt))
        }
    }
}

/// Pooled diagonal for the two-sample studentization:
/// D-hat = (1/n1) D1 + (1/n2) D2.
pub fn pooled_diag_two_sample(
    s1: &SymMatrix,
    s2: &SymMatrix,
    n1: usize,
    n2: usize,
) -> Result<SymMatrix> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimMismatch {
            left: s1.dim(),
            right: s2.dim(),
        });
    }
    if n1 < 2 || n2 < 2 {
        return Err(Error::TooFewObservations {
            n: n1.min(n2),
            min: 2,
        });
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let diag: Vec<f64> = (0..s1.dim())
        .map(|i| s1.get(i, i) / f1 + s2.get(i, i) / f2)
        .collect();
    Ok(SymMatrix::from_diag(&diag))
}
