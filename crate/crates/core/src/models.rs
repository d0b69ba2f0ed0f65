//! Covariance model constructions, error distributions, and dataset
//! generation for the simulation studies.
//!
//! Eight covariance families are supported. Some define Sigma directly,
//! others define the precision matrix (or a factor of it) and invert. A
//! realization carries Sigma, Omega = Sigma^{-1}, both square roots, the
//! standardized transform A = Sigma^{1/2} D^{-1} Sigma^{1/2}, and the
//! population correlation matrix, all derived from a single
//! eigendecomposition of the model's primitive so they stay mutually
//! consistent.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, EigenDecomp, SymMatrix};
use crate::rng::{model_stream, StreamRng};

/// Stream ids for seeded model ingredients.
const INGREDIENT_DIAG: u64 = 0;
const INGREDIENT_PERTURBATION: u64 = 1;
const INGREDIENT_SPIKES: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::M1,
        ModelId::M2,
        ModelId::M3,
        ModelId::M4,
        ModelId::M5,
        ModelId::M6,
        ModelId::M7,
        ModelId::M8,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ModelId::M1 => "M1",
            ModelId::M2 => "M2",
            ModelId::M3 => "M3",
            ModelId::M4 => "M4",
            ModelId::M5 => "M5",
            ModelId::M6 => "M6",
            ModelId::M7 => "M7",
            ModelId::M8 => "M8",
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Which covariance family to realize, at what dimension, and the seed for
/// its randomized ingredients (the Unif(1,3) diagonal, M6's perturbation,
/// M8's spike directions).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub model: ModelId,
    pub dim: usize,
    pub seed_material: u64,
}

/// Error distributions for the generated observations. Each is standardized
/// to mean zero and unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorDist {
    /// N(0, 1).
    #[serde(rename = "normal")]
    StdNormal,
    /// t(5) / sqrt(5/3).
    #[serde(rename = "t5")]
    StdT5,
    /// {0.9 N(0,1) + 0.1 N(0,9)} / sqrt(1.8).
    #[serde(rename = "mix_normal")]
    StdMixNormal,
}

impl ErrorDist {
    pub const ALL: [ErrorDist; 3] = [
        ErrorDist::StdNormal,
        ErrorDist::StdT5,
        ErrorDist::StdMixNormal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ErrorDist::StdNormal => "normal",
            ErrorDist::StdT5 => "t5",
            ErrorDist::StdMixNormal => "mix_normal",
        }
    }

    /// E(z^4) of the standardized law: 3 for the normal, 9 for the
    /// standardized t(5), 27/1.8^2 for the standardized mixture.
    pub fn fourth_moment(&self) -> f64 {
        match self {
            ErrorDist::StdNormal => 3.0,
            ErrorDist::StdT5 => 9.0,
            ErrorDist::StdMixNormal => 27.0 / (1.8 * 1.8),
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            ErrorDist::StdNormal => StandardNormal.sample(rng),
            ErrorDist::StdT5 => {
                let t: f64 = StudentT::new(5.0).expect("valid dof").sample(rng);
                t / (5.0f64 / 3.0).sqrt()
            }
            ErrorDist::StdMixNormal => {
                let wide = rng.random_bool(0.1);
                let z: f64 = StandardNormal.sample(rng);
                (if wide { 3.0 * z } else { z }) / 1.8f64.sqrt()
            }
        }
    }

    fn fill(&self, rng: &mut StreamRng, out: &mut [f64]) {
        match self {
            ErrorDist::StdNormal => {
                for v in out.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
            }
            ErrorDist::StdT5 => {
                let t5 = StudentT::new(5.0).expect("valid dof");
                let scale = (5.0f64 / 3.0).sqrt().recip();
                for v in out.iter_mut() {
                    let t: f64 = t5.sample(rng);
                    *v = t * scale;
                }
            }
            ErrorDist::StdMixNormal => {
                let scale = 1.8f64.sqrt().recip();
                for v in out.iter_mut() {
                    let wide = rng.random_bool(0.1);
                    let z: f64 = StandardNormal.sample(rng);
                    *v = (if wide { 3.0 * z } else { z }) * scale;
                }
            }
        }
    }
}

impl std::fmt::Display for ErrorDist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A realized covariance model with every matrix the statistics need.
#[derive(Debug, Clone)]
pub struct ModelRealization {
    pub spec: CovarianceSpec,
    pub sigma: SymMatrix,
    pub omega: SymMatrix,
    pub sigma_sqrt: SymMatrix,
    pub omega_sqrt: SymMatrix,
    /// A = Sigma^{1/2} D^{-1} Sigma^{1/2} with D the diagonal of Sigma.
    pub a_matrix: SymMatrix,
    /// Population correlation matrix.
    pub r_matrix: SymMatrix,
}

/// n x p observation matrix, rows are subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        assert_eq!(data.len(), n * p, "data length must be n*p");
        for (idx, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteData {
                    row: idx / p,
                    col: idx % p,
                });
            }
        }
        Ok(SampleMatrix { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::config(
                    "data",
                    format!("row {i} has {} columns, expected {p}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        SampleMatrix::new(n, p, data)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Mean-signal specification for generated datasets.
///
/// `OneSampleScaled` places kappa/sqrt(sigma_ii) on the first m coordinates
/// with kappa set so that ||mu||^2 equals `norm_sq`. `TwoSampleRademacher`
/// shifts the first sample by Sigma^{1/2} theta with theta carrying m
/// entries of +-1/sqrt(m). `LocalSparseTransformed` shifts by
/// Sigma^{1/2} mu_tilde with mu_tilde carrying m entries of
/// scale/sqrt(n*m); it is used by the independence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SignalSpec {
    #[serde(rename = "null")]
    Null,
    #[serde(rename = "scaled")]
    OneSampleScaled { m: usize, norm_sq: f64 },
    #[serde(rename = "rademacher")]
    TwoSampleRademacher { m: usize },
    #[serde(rename = "local_sparse")]
    LocalSparseTransformed { m: usize, scale: f64 },
}

impl SignalSpec {
    pub fn label(&self) -> String {
        match self {
            SignalSpec::Null => "null".to_string(),
            SignalSpec::OneSampleScaled { m, norm_sq } => {
                format!("scaled(m={m},norm_sq={norm_sq})")
            }
            SignalSpec::TwoSampleRademacher { m } => format!("rademacher(m={m})"),
            SignalSpec::LocalSparseTransformed { m, scale } => {
                format!("local(m={m},scale={scale})")
            }
        }
    }
}

fn unif_diag(spec: &CovarianceSpec) -> Vec<f64> {
    let mut rng = model_stream(spec.seed_material, INGREDIENT_DIAG);
    (0..spec.dim).map(|_| rng.random_range(1.0..3.0)).collect()
}

/// Block matrix with unit diagonal and `off` inside consecutive 2x2 blocks.
/// An odd final coordinate is left as an isolated unit-variance block.
fn two_block(p: usize, off: f64) -> SymMatrix {
    SymMatrix::from_fn(p, |i, j| {
        if i == j {
            1.0
        } else if i / 2 == j / 2 && j < 2 * (p / 2) {
            off
        } else {
            0.0
        }
    })
}

fn build_m6_perturbation(spec: &CovarianceSpec) -> SymMatrix {
    let p = spec.dim;
    let mut rng = model_stream(spec.seed_material, INGREDIENT_PERTURBATION);
    let mut e = vec![0.0; p * p];
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random_bool(0.3) {
                let v = rng.random_range(-0.2..0.2);
                e[i * p + j] = v;
                e[j * p + i] = v;
            }
        }
    }
    SymMatrix::from_fn(p, |i, j| e[i * p + j])
}

fn build_m8_spikes(spec: &CovarianceSpec) -> [Vec<f64>; 3] {
    let p = spec.dim;
    let mut rng = model_stream(spec.seed_material, INGREDIENT_SPIKES);
    let mut us: [Vec<f64>; 3] = [vec![0.0; p], vec![0.0; p], vec![0.0; p]];
    for u in us.iter_mut() {
        for v in u.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
    }
    // modified Gram-Schmidt, run twice for orthogonality well below 1e-10
    for _pass in 0..2 {
        for k in 0..3 {
            for j in 0..k {
                let proj: f64 = us[k].iter().zip(&us[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = us.split_at_mut(k);
                for (v, w) in tail[0].iter_mut().zip(&head[j]) {
                    *v -= proj * w;
                }
            }
            let norm: f64 = us[k].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(norm > 1e-8, "degenerate spike draw");
            for v in us[k].iter_mut() {
                *v /= norm;
            }
        }
    }
    us
}

enum Primitive {
    Sigma(SymMatrix),
    Omega(SymMatrix),
}

fn build_primitive(spec: &CovarianceSpec) -> Result<(Primitive, EigenDecomp)> {
    let p = spec.dim;
    match spec.model {
        ModelId::M1 => {
            let sigma = two_block(p, 0.8);
            let d = eigh(&sigma)?;
            Ok((Primitive::Sigma(sigma), d))
        }
        ModelId::M2 => {
            let sigma = SymMatrix::from_fn(p, |i, j| 0.6f64.powi((j - i) as i32));
            let d = eigh(&sigma)?;
            Ok((Primitive::Sigma(sigma), d))
        }
        ModelId::M3 => {
            let omega = SymMatrix::from_fn(p, |i, j| match j - i {
                0 => 2.0,
                1 => 0.8,
                2 => 0.4,
                3 => 0.4,
                4 => 0.2,
                _ => 0.0,
            });
            let d = eigh(&omega)?;
            Ok((Primitive::Omega(omega), d))
        }
        ModelId::M4 => {
            // Sigma = D^{1/2} T^{-1} D^{1/2} for Toeplitz T, so the exact
            // precision is D^{-1/2} T D^{-1/2}.
            let diag = unif_diag(spec);
            let omega = SymMatrix::from_fn(p, |i, j| {
                0.6f64.powi((j - i) as i32) / (diag[i] * diag[j]).sqrt()
            });
            let d = eigh(&omega)?;
            Ok((Primitive::Omega(omega), d))
        }
        ModelId::M5 => {
            let g = two_block(p, 0.8);
            let diag = unif_diag(spec);
            // Omega = D^{1/2} G G D^{1/2}; G is symmetric so (GG)_ij is a
            // row dot product.
            let omega = SymMatrix::from_fn(p, |i, j| {
                let gg: f64 = g.row(i).iter().zip(g.row(j)).map(|(a, b)| a * b).sum();
                gg * (diag[i] * diag[j]).sqrt()
            });
            let d = eigh(&omega)?;
            Ok((Primitive::Omega(omega), d))
        }
        ModelId::M6 => {
            let star = two_block(p, 0.8);
            let diag = unif_diag(spec);
            let e = build_m6_perturbation(spec);
            let base = SymMatrix::from_fn(p, |i, j| {
                star.get(i, j) * (diag[i] * diag[j]).sqrt() + e.get(i, j)
            });
            let base_decomp = eigh(&base)?;
            let min = *base_decomp.values().last().expect("nonempty");
            // ridge uses |lambda_min| even when the base is already PD
            let delta = min.abs() + 0.05;
            let sigma = SymMatrix::from_fn(p, |i, j| {
                base.get(i, j) + if i == j { delta } else { 0.0 }
            });
            Ok((Primitive::Sigma(sigma), base_decomp.shifted(delta)))
        }
        ModelId::M7 => {
            let diag = unif_diag(spec);
            let sigma = SymMatrix::from_fn(p, |i, j| {
                let star = if i == j {
                    1.0
                } else {
                    ((j - i) as f64).powi(-5) / 2.0
                };
                star * (diag[i] * diag[j]).sqrt()
            });
            let d = eigh(&sigma)?;
            Ok((Primitive::Sigma(sigma), d))
        }
        ModelId::M8 => {
            let diag = unif_diag(spec);
            let us = build_m8_spikes(spec);
            let sigma = SymMatrix::from_fn(p, |i, j| {
                let f = match j - i {
                    0 => 1.0,
                    1 => 0.5,
                    _ => 0.0,
                };
                let spikes: f64 = us.iter().map(|u| u[i] * u[j]).sum();
                (f + spikes) * (diag[i] * diag[j]).sqrt()
            });
            let d = eigh(&sigma)?;
            Ok((Primitive::Sigma(sigma), d))
        }
    }
}

/// Realizes a covariance model. Deterministic in (model, dim, seed_material).
pub fn realize_model(spec: &CovarianceSpec) -> Result<ModelRealization> {
    if spec.dim < 4 {
        return Err(Error::DimensionTooSmall {
            p: spec.dim,
            min: 4,
        });
    }
    let (primitive, decomp) = build_primitive(spec)?;
    let max = decomp.values()[0];
    let min = *decomp.values().last().expect("nonempty");

    // the PSD gate is reported in terms of Sigma's spectrum
    let (sigma_min, sigma_max) = match primitive {
        Primitive::Sigma(_) => (min, max),
        Primitive::Omega(_) => (1.0 / max, 1.0 / min),
    };
    if sigma_min <= -1e-8 * sigma_max.abs() || min <= 1e-10 * max {
        return Err(Error::ModelNotPsd {
            model: spec.model.label().to_string(),
            min_eigenvalue: sigma_min,
        });
    }

    let (sigma, omega, sigma_sqrt, omega_sqrt) = match primitive {
        Primitive::Sigma(sigma) => {
            let omega = decomp.assemble(|l| 1.0 / l);
            let sigma_sqrt = decomp.assemble(f64::sqrt);
            let omega_sqrt = decomp.assemble(|l| 1.0 / l.sqrt());
            (sigma, omega, sigma_sqrt, omega_sqrt)
        }
        Primitive::Omega(omega) => {
            let sigma = decomp.assemble(|l| 1.0 / l);
            let sigma_sqrt = decomp.assemble(|l| 1.0 / l.sqrt());
            let omega_sqrt = decomp.assemble(f64::sqrt);
            (sigma, omega, sigma_sqrt, omega_sqrt)
        }
    };

    let d_sigma = sigma.diag();
    for (i, &v) in d_sigma.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveDiagonal { index: i, value: v });
        }
    }
    let p = spec.dim;
    let a_matrix = SymMatrix::from_fn(p, |i, j| {
        sigma_sqrt
            .row(i)
            .iter()
            .zip(sigma_sqrt.row(j))
            .zip(&d_sigma)
            .map(|((a, b), d)| a * b / d)
            .sum()
    });
    let r_matrix = linalg::correlation_of(&sigma)?;

    Ok(ModelRealization {
        spec: *spec,
        sigma,
        omega,
        sigma_sqrt,
        omega_sqrt,
        a_matrix,
        r_matrix,
    })
}

/// i.i.d. errors from the chosen standardized law.
pub fn sample_errors(dist: ErrorDist, n: usize, p: usize, rng: &mut StreamRng) -> SampleMatrix {
    let mut data = vec![0.0; n * p];
    dist.fill(rng, &mut data);
    SampleMatrix { n, p, data }
}

/// Mean vector for a one-sample signal. `n` enters only the local-alternative
/// scaling.
pub fn one_sample_mean(real: &ModelRealization, signal: &SignalSpec, n: usize) -> Result<Vec<f64>> {
    let p = real.sigma.dim();
    match *signal {
        SignalSpec::Null => Ok(vec![0.0; p]),
        SignalSpec::OneSampleScaled { m, norm_sq } => {
            if m > p {
                return Err(Error::SignalSupportTooLarge { m, p });
            }
            if m == 0 {
                return Ok(vec![0.0; p]);
            }
            if !(norm_sq > 0.0) {
                return Err(Error::config("norm_sq", "must be positive"));
            }
            let inv_var_sum: f64 = (0..m).map(|i| 1.0 / real.sigma.get(i, i)).sum();
            let kappa = (norm_sq / inv_var_sum).sqrt();
            let mut mu = vec![0.0; p];
            for (i, v) in mu.iter_mut().enumerate().take(m) {
                *v = kappa / real.sigma.get(i, i).sqrt();
            }
            Ok(mu)
        }
        SignalSpec::LocalSparseTransformed { m, scale } => {
            sparse_transformed_shift(real, m, scale, n)
        }
        SignalSpec::TwoSampleRademacher { .. } => Err(Error::SignalKindMismatch {
            signal: signal.label(),
            problem: "one-sample".to_string(),
        }),
    }
}

/// mu = Sigma^{1/2} mu_tilde with mu_tilde = scale/sqrt(n m) on the first m
/// coordinates.
fn sparse_transformed_shift(
    real: &ModelRealization,
    m: usize,
    scale: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let p = real.sigma.dim();
    if m > p {
        return Err(Error::SignalSupportTooLarge { m, p });
    }
    let mut mu = vec![0.0; p];
    if m == 0 {
        return Ok(mu);
    }
    let coord = scale / ((n * m) as f64).sqrt();
    for i in 0..m {
        for (v, &s) in mu.iter_mut().zip(real.sigma_sqrt.row(i)) {
            *v += coord * s;
        }
    }
    Ok(mu)
}

/// Rademacher direction with m entries of +-1/sqrt(m), so ||theta||^2 = 1.
pub fn rademacher_theta(m: usize, p: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    if m > p {
        return Err(Error::SignalSupportTooLarge { m, p });
    }
    let mut theta = vec![0.0; p];
    let mag = 1.0 / (m as f64).sqrt();
    for v in theta.iter_mut().take(m) {
        *v = if rng.random_bool(0.5) { mag } else { -mag };
    }
    Ok(theta)
}

/// Mean shift carried by the first sample of a two-sample dataset. Draws the
/// Rademacher signs (when applicable) from `rng` before any error draws.
pub fn two_sample_shift(
    real: &ModelRealization,
    signal: &SignalSpec,
    n_total: usize,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    let p = real.sigma.dim();
    match *signal {
        SignalSpec::Null => Ok(vec![0.0; p]),
        SignalSpec::TwoSampleRademacher { m } => {
            let theta = rademacher_theta(m, p, rng)?;
            let mut shift = vec![0.0; p];
            for (i, &t) in theta.iter().enumerate() {
                if t == 0.0 {
                    continue;
                }
                for (v, &s) in shift.iter_mut().zip(real.sigma_sqrt.row(i)) {
                    *v += t * s;
                }
            }
            Ok(shift)
        }
        SignalSpec::LocalSparseTransformed { m, scale } => {
            sparse_transformed_shift(real, m, scale, n_total)
        }
        SignalSpec::OneSampleScaled { .. } => Err(Error::SignalKindMismatch {
            signal: signal.label(),
            problem: "two-sample".to_string(),
        }),
    }
}

/// One-sample dataset: rows are mu + Sigma^{1/2} eps_i.
pub fn gen_one_sample(
    real: &ModelRealization,
    dist: ErrorDist,
    n: usize,
    signal: &SignalSpec,
    rng: &mut StreamRng,
) -> Result<SampleMatrix> {
    let p = real.sigma.dim();
    let mu = one_sample_mean(real, signal, n)?;
    let eps = sample_errors(dist, n, p, rng);
    let mut data = vec![0.0; n * p];
    linalg::mul_rows_by_sym(eps.data(), n, p, &real.sigma_sqrt, &mut data);
    if mu.iter().any(|&v| v != 0.0) {
        for i in 0..n {
            for (v, &m) in data[i * p..(i + 1) * p].iter_mut().zip(&mu) {
                *v += m;
            }
        }
    }
    SampleMatrix::new(n, p, data)
}

/// Two-sample dataset with a shared covariance; the first sample carries the
/// mean shift.
pub fn gen_two_sample(
    real: &ModelRealization,
    dist: ErrorDist,
    n1: usize,
    n2: usize,
    signal: &SignalSpec,
    rng: &mut StreamRng,
) -> Result<(SampleMatrix, SampleMatrix)> {
    let p = real.sigma.dim();
    let shift = two_sample_shift(real, signal, n1 + n2, rng)?;

    let eps1 = sample_errors(dist, n1, p, rng);
    let mut data1 = vec![0.0; n1 * p];
    linalg::mul_rows_by_sym(eps1.data(), n1, p, &real.sigma_sqrt, &mut data1);
    if shift.iter().any(|&v| v != 0.0) {
        for i in 0..n1 {
            for (v, &m) in data1[i * p..(i + 1) * p].iter_mut().zip(&shift) {
                *v += m;
            }
        }
    }

    let eps2 = sample_errors(dist, n2, p, rng);
    let mut data2 = vec![0.0; n2 * p];
    linalg::mul_rows_by_sym(eps2.data(), n2, p, &real.sigma_sqrt, &mut data2);

    Ok((SampleMatrix::new(n1, p, data1)?, SampleMatrix::new(n2, p, data2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replication_stream;

    fn spec(model: ModelId, dim: usize) -> CovarianceSpec {
        CovarianceSpec {
            model,
            dim,
            seed_material: 7,
        }
    }

    #[test]
    fn m2_small_matrix_is_exact() {
        let real = realize_model(&spec(ModelId::M2, 4)).unwrap();
        let want = [
            [1.0, 0.6, 0.36, 0.216],
            [0.6, 1.0, 0.6, 0.36],
            [0.36, 0.6, 1.0, 0.6],
            [0.216, 0.36, 0.6, 1.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(real.sigma.get(i, j), want[i][j]);
            }
        }
    }

    #[test]
    fn m1_block_structure() {
        let real = realize_model(&spec(ModelId::M1, 4)).unwrap();
        assert_eq!(real.sigma.get(0, 1), 0.8);
        assert_eq!(real.sigma.get(2, 3), 0.8);
        assert_eq!(real.sigma.get(0, 2), 0.0);
        assert_eq!(real.sigma.get(1, 2), 0.0);
        assert_eq!(real.sigma.get(0, 0), 1.0);
    }

    #[test]
    fn m1_odd_dimension_leaves_isolated_coordinate() {
        let real = realize_model(&spec(ModelId::M1, 5)).unwrap();
        assert_eq!(real.sigma.get(4, 4), 1.0);
        for j in 0..4 {
            assert_eq!(real.sigma.get(4, j), 0.0);
        }
    }

    #[test]
    fn m3_band_entries() {
        let real = realize_model(&spec(ModelId::M3, 6)).unwrap();
        // omega is the primitive for this model
        assert_eq!(real.omega.get(0, 0), 2.0);
        assert_eq!(real.omega.get(0, 1), 0.8);
        assert_eq!(real.omega.get(0, 2), 0.4);
        assert_eq!(real.omega.get(0, 3), 0.4);
        assert_eq!(real.omega.get(0, 4), 0.2);
        assert_eq!(real.omega.get(0, 5), 0.0);
    }

    #[test]
    fn realization_is_deterministic() {
        let a = realize_model(&spec(ModelId::M6, 12)).unwrap();
        let b = realize_model(&spec(ModelId::M6, 12)).unwrap();
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.omega_sqrt, b.omega_sqrt);
        let c = realize_model(&CovarianceSpec {
            seed_material: 8,
            ..spec(ModelId::M6, 12)
        })
        .unwrap();
        assert_ne!(a.sigma, c.sigma);
    }

    #[test]
    fn m8_spikes_orthonormal() {
        let us = build_m8_spikes(&spec(ModelId::M8, 40));
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = us[i].iter().zip(&us[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "u{i}'u{j} = {dot}");
            }
        }
    }

    #[test]
    fn all_models_realize_consistently() {
        for model in ModelId::ALL {
            for dim in [20usize, 60, 100] {
                let real = realize_model(&spec(model, dim)).unwrap();
                // omega * sigma close to the identity
                let mut worst = 0.0f64;
                for i in 0..dim {
                    for j in 0..dim {
                        let prod: f64 = (0..dim)
                            .map(|k| real.omega.get(i, k) * real.sigma.get(k, j))
                            .sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((prod - want).abs());
                    }
                }
                assert!(worst < 1e-6, "{model} dim {dim}: omega*sigma off by {worst}");
                // omega_sqrt^2 close to omega
                let mut worst_sq = 0.0f64;
                for i in 0..dim {
                    for j in 0..dim {
                        let prod: f64 = (0..dim)
                            .map(|k| real.omega_sqrt.get(i, k) * real.omega_sqrt.get(k, j))
                            .sum();
                        worst_sq = worst_sq.max((prod - real.omega.get(i, j)).abs());
                    }
                }
                assert!(
                    worst_sq < 1e-6 * real.omega.max_abs().max(1.0),
                    "{model} dim {dim}: omega_sqrt^2 off by {worst_sq}"
                );
                // unit diagonal correlation
                for i in 0..dim {
                    assert_eq!(real.r_matrix.get(i, i), 1.0);
                }
            }
        }
    }

    #[test]
    fn error_moments_match_theory() {
        let n = 1_000_000usize;
        for dist in ErrorDist::ALL {
            let mut rng = replication_stream(991, 0);
            // running sums of z^k for k = 1..4 plus z^6, z^8 for the
            // empirical standard errors of the heavy-tailed moments
            let mut sums = [0.0f64; 4];
            let mut sum6 = 0.0f64;
            let mut sum8 = 0.0f64;
            for _ in 0..n {
                let z = dist.sample(&mut rng);
                let z2 = z * z;
                sums[0] += z;
                sums[1] += z2;
                sums[2] += z2 * z;
                sums[3] += z2 * z2;
                sum6 += z2 * z2 * z2;
                sum8 += z2 * z2 * z2 * z2;
            }
            let nf = n as f64;
            let m1 = sums[0] / nf;
            let m2 = sums[1] / nf;
            let m3 = sums[2] / nf;
            let m4 = sums[3] / nf;
            let se = |second: f64, mean: f64| ((second - mean * mean) / nf).sqrt();
            assert!(m1.abs() < 4.0 * se(m2, m1), "{dist}: mean {m1}");
            assert!((m2 - 1.0).abs() < 4.0 * se(m4, m2), "{dist}: var {m2}");
            assert!(m3.abs() < 4.0 * se(sum6 / nf, m3), "{dist}: skew {m3}");
            assert!(
                (m4 - dist.fourth_moment()).abs() < 4.0 * se(sum8 / nf, m4),
                "{dist}: fourth moment {m4} vs {}",
                dist.fourth_moment()
            );
        }
    }

    #[test]
    fn std_t5_variance_tight() {
        let mut rng = replication_stream(17, 0);
        let n = 1_000_000usize;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let z = ErrorDist::StdT5.sample(&mut rng);
            sum_sq += z * z;
        }
        let var = sum_sq / n as f64;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn null_sample_has_centered_columns() {
        let real = realize_model(&spec(ModelId::M2, 6)).unwrap();
        let n = 100_000usize;
        let mut rng = replication_stream(5, 0);
        let x = gen_one_sample(&real, ErrorDist::StdNormal, n, &SignalSpec::Null, &mut rng)
            .unwrap();
        for j in 0..6 {
            let mean: f64 = (0..n).map(|i| x.row(i)[j]).sum::<f64>() / n as f64;
            let bound = 3.0 * real.sigma.get(j, j).sqrt() / (n as f64).sqrt();
            assert!(mean.abs() < bound, "column {j} mean {mean} vs bound {bound}");
        }
    }

    #[test]
    fn scaled_signal_norm_is_exact() {
        let real = realize_model(&spec(ModelId::M4, 10)).unwrap();
        let mu = one_sample_mean(
            &real,
            &SignalSpec::OneSampleScaled {
                m: 5,
                norm_sq: 0.5,
            },
            120,
        )
        .unwrap();
        let norm_sq: f64 = mu.iter().map(|v| v * v).sum();
        assert!((norm_sq - 0.5).abs() < 1e-12);
        assert!(mu[5..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_support_signal_equals_null() {
        let real = realize_model(&spec(ModelId::M1, 8)).unwrap();
        let mut rng_a = replication_stream(3, 1);
        let mut rng_b = replication_stream(3, 1);
        let a = gen_one_sample(&real, ErrorDist::StdT5, 20, &SignalSpec::Null, &mut rng_a)
            .unwrap();
        let b = gen_one_sample(
            &real,
            ErrorDist::StdT5,
            20,
            &SignalSpec::OneSampleScaled {
                m: 0,
                norm_sq: 0.5,
            },
            &mut rng_b,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signal_support_larger_than_p_fails() {
        let real = realize_model(&spec(ModelId::M1, 8)).unwrap();
        let err = one_sample_mean(
            &real,
            &SignalSpec::OneSampleScaled {
                m: 9,
                norm_sq: 0.5,
            },
            10,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SignalSupportTooLarge { m: 9, p: 8 }));
    }

    #[test]
    fn rademacher_theta_unit_norm() {
        let mut rng = replication_stream(11, 0);
        let theta = rademacher_theta(4, 10, &mut rng).unwrap();
        let norm_sq: f64 = theta.iter().map(|v| v * v).sum();
        assert!((norm_sq - 1.0).abs() < 1e-12);
        assert!(theta[4..].iter().all(|&v| v == 0.0));
        let single = rademacher_theta(1, 10, &mut rng).unwrap();
        assert_eq!(single[0].abs(), 1.0);
    }

    #[test]
    fn two_sample_null_means_close() {
        let real = realize_model(&spec(ModelId::M1, 6)).unwrap();
        let mut rng = replication_stream(23, 0);
        let (x1, x2) = gen_two_sample(
            &real,
            ErrorDist::StdNormal,
            20_000,
            20_000,
            &SignalSpec::Null,
            &mut rng,
        )
        .unwrap();
        for j in 0..6 {
            let m1: f64 = (0..x1.n()).map(|i| x1.row(i)[j]).sum::<f64>() / x1.n() as f64;
            let m2: f64 = (0..x2.n()).map(|i| x2.row(i)[j]).sum::<f64>() / x2.n() as f64;
            let se = (2.0 * real.sigma.get(j, j) / 20_000.0).sqrt();
            assert!((m1 - m2).abs() < 4.0 * se);
        }
    }

    #[test]
    fn wrong_signal_kind_is_rejected() {
        let real = realize_model(&spec(ModelId::M1, 6)).unwrap();
        let mut rng = replication_stream(1, 0);
        let err = gen_two_sample(
            &real,
            ErrorDist::StdNormal,
            8,
            8,
            &SignalSpec::OneSampleScaled {
                m: 1,
                norm_sq: 0.5,
            },
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SignalKindMismatch { .. }));
    }
}
