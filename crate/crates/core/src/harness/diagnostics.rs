//! Monte Carlo diagnostics: joint-versus-product CDF gaps for the
//! (sum, max) pair, the quadratic-form CLT check, and per-model condition
//! reports.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws::{chi_sq4_cdf, gumbel_max_cdf, std_normal_cdf};
use crate::linalg::{eigh, trace_sq, SymMatrix};
use crate::models::{realize_model, ErrorDist, ModelRealization};
use crate::rng::replication_stream;
use crate::stats::{fisher_combine, max_stat, t_skk, t_sr, w_max_two_sample, Method};

use super::config::{Problem, SimConfig};
use super::run::ExperimentContext;

/// Joint-versus-product comparison of the empirical CDFs of the sum-type
/// statistic and the normalized max-type statistic.
#[derive(Debug, Clone)]
pub struct IndepDiagnostic {
    pub grid: Vec<(f64, f64)>,
    pub joint_cdf: Vec<f64>,
    pub product_cdf: Vec<f64>,
    pub sup_abs_gap: f64,
    pub pearson_corr: f64,
    pub reps: usize,
    pub failures: usize,
    /// Set when the run used fewer replications than the recommended 1000.
    pub low_reps: bool,
}

/// Default evaluation grid: sum statistic in {-2,...,2} crossed with the
/// normalized maximum in {-2,...,6}.
pub fn default_indep_grid() -> Vec<(f64, f64)> {
    let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let ys = [-2.0, 0.0, 2.0, 4.0, 6.0];
    let mut grid = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            grid.push((x, y));
        }
    }
    grid
}

/// Which version of the (sum, max) pair a diagnostic draws.
///
/// `Practical` evaluates the studentized statistics as used for testing.
/// `TheoryOracle` evaluates the population-standardized forms the limit
/// theory is stated for: the quadratic form (n Xbar' D^{-1} Xbar - p) /
/// sqrt(2 tr R^2) with the population diagonal and correlation, and the
/// unstudentized maximum n max (Omega^{1/2} Xbar)_i^2. It requires oracle
/// precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticForm {
    Practical,
    TheoryOracle,
}

/// One replication's (sum statistic, normalized max, Fisher statistic).
fn statistic_triple(
    cfg: &SimConfig,
    ctx: &ExperimentContext,
    form: StatisticForm,
    rep: u64,
) -> Result<(f64, f64, f64)> {
    use crate::models::{gen_one_sample, gen_two_sample};
    let mut rng = replication_stream(cfg.seed, rep);
    let (sum, max) = match cfg.problem {
        Problem::OneSample { n } => {
            let x = gen_one_sample(&ctx.real, cfg.error, n, &cfg.signal, &mut rng)?;
            match form {
                StatisticForm::Practical => {
                    let sum = t_sr(&x)?;
                    let omega_sqrt = match &ctx.oracle_precision {
                        Some((_, sq)) => sq.clone(),
                        None => {
                            let s = crate::estimators::sample_cov(&x)?;
                            let (_, sq) =
                                crate::estimators::precision_plugin(&cfg.precision, &s, None)?;
                            sq
                        }
                    };
                    let max = max_stat(&x, &omega_sqrt, Method::Max2)?;
                    (
                        (sum.statistic, sum.p_value),
                        (max.normalized, max.p_value),
                    )
                }
                StatisticForm::TheoryOracle => {
                    let means = crate::estimators::col_means(&x);
                    theory_pair(ctx, &means, n as f64)?
                }
            }
        }
        Problem::TwoSample { n1, n2 } => {
            let (x1, x2) = gen_two_sample(&ctx.real, cfg.error, n1, n2, &cfg.signal, &mut rng)?;
            match form {
                StatisticForm::Practical => {
                    let sum = t_skk(&x1, &x2)?;
                    let omega_sqrt = match &ctx.oracle_precision {
                        Some((_, sq)) => sq.clone(),
                        None => {
                            let s1 = crate::estimators::sample_cov(&x1)?;
                            let (_, sq) =
                                crate::estimators::precision_plugin(&cfg.precision, &s1, None)?;
                            sq
                        }
                    };
                    let max = w_max_two_sample(&x1, &x2, &omega_sqrt)?;
                    (
                        (sum.statistic, sum.p_value),
                        (max.normalized, max.p_value),
                    )
                }
                StatisticForm::TheoryOracle => {
                    let m1 = crate::estimators::col_means(&x1);
                    let m2 = crate::estimators::col_means(&x2);
                    let diff: Vec<f64> = m1.iter().zip(&m2).map(|(a, b)| a - b).collect();
                    let eff_n = (x1.n() * x2.n()) as f64 / (x1.n() + x2.n()) as f64;
                    theory_pair(ctx, &diff, eff_n)?
                }
            }
        }
    };
    let fc = fisher_combine(sum.1, max.1)?;
    Ok((sum.0, max.0, fc.statistic))
}

/// Population-standardized (sum, max) pair evaluated on a mean-type vector
/// with effective sample size `eff_n`.
fn theory_pair(
    ctx: &ExperimentContext,
    mean_vec: &[f64],
    eff_n: f64,
) -> Result<((f64, f64), (f64, f64))> {
    if ctx.oracle_precision.is_none() {
        return Err(Error::config(
            "form",
            "theory_oracle diagnostics require oracle precision",
        ));
    }
    let p = ctx.real.sigma.dim();
    let pf = p as f64;
    let d_sigma = ctx.real.sigma.diag();
    let quad: f64 = mean_vec
        .iter()
        .zip(&d_sigma)
        .map(|(&m, &d)| m * m / d)
        .sum();
    let sum_stat = (eff_n * quad - pf) / (2.0 * ctx.tr_r2_population).sqrt();
    let sum_p = crate::laws::std_normal_sf(sum_stat);

    let transformed = ctx.real.omega_sqrt.matvec(mean_vec);
    let max_sq = transformed.iter().fold(0.0f64, |a, &v| a.max(v * v));
    let max_stat_value = eff_n * max_sq;
    let normalized = crate::stats::gumbel_normalize(max_stat_value, p);
    let max_p = crate::laws::gumbel_max_sf(normalized);
    Ok(((sum_stat, sum_p), (normalized, max_p)))
}

/// Draws (sum, normalized max) pairs over replications and measures how far
/// their joint empirical CDF sits from the product of the marginals.
pub fn run_independence(
    cfg: &SimConfig,
    grid: &[(f64, f64)],
    form: StatisticForm,
) -> Result<IndepDiagnostic> {
    cfg.validate()?;
    if grid.is_empty() {
        return Err(Error::config("grid", "must be nonempty"));
    }
    let ctx = ExperimentContext::prepare(cfg)?;
    let per_rep: Vec<Result<(f64, f64, f64)>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| statistic_triple(cfg, &ctx, form, rep))
        .collect();

    let mut pairs = Vec::with_capacity(cfg.reps);
    let mut failures = 0usize;
    for r in per_rep {
        match r {
            Ok((sum, max, _)) => pairs.push((sum, max)),
            Err(_) => failures += 1,
        }
    }
    let count = pairs.len().max(1) as f64;

    let mut joint_cdf = Vec::with_capacity(grid.len());
    let mut product_cdf = Vec::with_capacity(grid.len());
    let mut sup_abs_gap = 0.0f64;
    for &(x, y) in grid {
        let joint = pairs.iter().filter(|(s, m)| *s <= x && *m <= y).count() as f64 / count;
        let px = pairs.iter().filter(|(s, _)| *s <= x).count() as f64 / count;
        let py = pairs.iter().filter(|(_, m)| *m <= y).count() as f64 / count;
        joint_cdf.push(joint);
        product_cdf.push(px * py);
        sup_abs_gap = sup_abs_gap.max((joint - px * py).abs());
    }

    Ok(IndepDiagnostic {
        grid: grid.to_vec(),
        joint_cdf,
        product_cdf,
        sup_abs_gap,
        pearson_corr: pearson(&pairs),
        reps: cfg.reps,
        failures,
        low_reps: cfg.reps < 1000,
    })
}

/// KS distances of the null statistic draws against their limiting laws.
#[derive(Debug, Clone)]
pub struct NullLawReport {
    /// Sum-type statistic against the standard normal.
    pub ks_sum_normal: f64,
    /// Normalized max-type statistic against the Gumbel-type law.
    pub ks_max_gumbel: f64,
    /// Fisher combination against chi-squared(4).
    pub ks_fc_chisq4: f64,
    /// Fisher-combination p-values against the uniform law.
    pub ks_fc_pvalue_uniform: f64,
    pub reps: usize,
    pub failures: usize,
}

/// Draws the (sum, max, Fisher) statistics under the configured design and
/// measures each against its limiting null law.
pub fn run_null_law(cfg: &SimConfig, form: StatisticForm) -> Result<NullLawReport> {
    cfg.validate()?;
    let ctx = ExperimentContext::prepare(cfg)?;
    let per_rep: Vec<Result<(f64, f64, f64)>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| statistic_triple(cfg, &ctx, form, rep))
        .collect();
    let mut sums = Vec::with_capacity(cfg.reps);
    let mut maxes = Vec::with_capacity(cfg.reps);
    let mut fcs = Vec::with_capacity(cfg.reps);
    let mut failures = 0usize;
    for r in per_rep {
        match r {
            Ok((s, m, f)) => {
                sums.push(s);
                maxes.push(m);
                fcs.push(f);
            }
            Err(_) => failures += 1,
        }
    }
    let fc_pvalues: Vec<f64> = fcs.iter().map(|&f| chi_sq4_cdf(f)).collect();
    Ok(NullLawReport {
        ks_sum_normal: ks_distance(&sums, std_normal_cdf),
        ks_max_gumbel: ks_distance(&maxes, gumbel_max_cdf),
        ks_fc_chisq4: ks_distance(&fcs, chi_sq4_cdf),
        // the lower-tail transform of the p-value is uniform exactly when
        // the statistic follows its law
        ks_fc_pvalue_uniform: ks_distance(&fc_pvalues, |x| x.clamp(0.0, 1.0)),
        reps: cfg.reps,
        failures,
    })
}

fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return 0.0;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (i + 1) as f64 / n;
        let lo = i as f64 / n;
        d = d.max((hi - f).abs()).max((f - lo).abs());
    }
    d
}

/// Outcome of the quadratic-form CLT check: KS distance between the
/// standardized draws (z'Az - tr A) / sigma_A and the standard normal.
#[derive(Debug, Clone)]
pub struct QfCltReport {
    pub sigma_a_sq: f64,
    pub ks_distance: f64,
    pub sample_mean: f64,
    pub sample_var: f64,
    pub reps: usize,
}

/// Monte Carlo check of the quadratic-form CLT. The standardization uses
/// sigma_A^2 = 2 tr(A^2) + sum_i a_ii^2 (E z^4 - 3).
pub fn run_qf_clt(a: &SymMatrix, dist: ErrorDist, reps: usize, seed: u64) -> Result<QfCltReport> {
    if reps < 1 {
        return Err(Error::config("reps", "must be >= 1"));
    }
    let p = a.dim();
    let trace: f64 = (0..p).map(|i| a.get(i, i)).sum();
    let diag_sq: f64 = (0..p).map(|i| a.get(i, i) * a.get(i, i)).sum();
    let sigma_a_sq = 2.0 * trace_sq(a) + diag_sq * (dist.fourth_moment() - 3.0);
    if sigma_a_sq <= 0.0 {
        return Err(Error::NonPositiveQfVariance { value: sigma_a_sq });
    }
    let sigma_a = sigma_a_sq.sqrt();

    let draws: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_stream(seed, rep);
            let z: Vec<f64> = (0..p).map(|_| dist.sample(&mut rng)).collect();
            (a.quad_form(&z) - trace) / sigma_a
        })
        .collect();

    let n = reps as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(QfCltReport {
        sigma_a_sq,
        ks_distance: ks_distance(&draws, std_normal_cdf),
        sample_mean: mean,
        sample_var: var,
        reps,
    })
}

/// Reported figures for the boundedness conditions a realized model should
/// satisfy: the sup row absolute sum of A = Sigma^{1/2} D^{-1} Sigma^{1/2}
/// and the spectral range of Sigma.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub sup_row_abs_sum_a: f64,
    pub lambda_min_sigma: f64,
    pub lambda_max_sigma: f64,
    /// Heuristic flag for realizations whose transform row sums look
    /// unbounded (dense perturbation regimes).
    pub flagged: bool,
}

/// Row-sum threshold above which a realization is flagged.
const C5_FLAG_THRESHOLD: f64 = 25.0;

pub fn model_condition_report(real: &ModelRealization) -> Result<ConditionReport> {
    let p = real.a_matrix.dim();
    let mut sup_row = 0.0f64;
    for i in 0..p {
        let row_sum: f64 = real.a_matrix.row(i).iter().map(|v| v.abs()).sum();
        sup_row = sup_row.max(row_sum);
    }
    let decomp = eigh(&real.sigma)?;
    let lambda_max = decomp.values()[0];
    let lambda_min = *decomp.values().last().expect("nonempty");
    Ok(ConditionReport {
        sup_row_abs_sum_a: sup_row,
        lambda_min_sigma: lambda_min,
        lambda_max_sigma: lambda_max,
        flagged: sup_row > C5_FLAG_THRESHOLD,
    })
}

/// Convenience wrapper realizing the model first.
pub fn condition_report_for(spec: &crate::models::CovarianceSpec) -> Result<ConditionReport> {
    let real = realize_model(spec)?;
    model_condition_report(&real)
}
