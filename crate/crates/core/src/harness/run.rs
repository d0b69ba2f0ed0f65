//! Replicated size and power runs.
//!
//! Each replication draws from its own counter-based stream, so results are
//! identical no matter how the replications are spread over threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{precision_plugin, sample_cov, PrecisionMode};
use crate::linalg::SymMatrix;
use crate::models::{gen_one_sample, gen_two_sample, realize_model, ModelRealization, SampleMatrix, SignalSpec};
use crate::rng::replication_stream;
use crate::stats::{
    fisher_combine_as, hc2_stat, hc_default_grid, max_stat, min_p_combine, pe_default_delta,
    pe_stat, t_skk, t_sr, w_max_two_sample, Method,
};

use super::config::{Problem, SimConfig};

/// Empirical rejection rates under a null configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeReport {
    pub methods: Vec<Method>,
    pub rejections: Vec<usize>,
    pub rates: Vec<f64>,
    /// Binomial Monte Carlo standard errors sqrt(rate (1 - rate) / reps).
    pub mc_se: Vec<f64>,
    pub reps: usize,
    pub failures: usize,
}

impl SizeReport {
    pub fn healthy(&self) -> bool {
        self.failures == 0
    }

    pub fn rate_for(&self, method: Method) -> Option<f64> {
        self.methods
            .iter()
            .position(|&m| m == method)
            .map(|i| self.rates[i])
    }
}

/// Rejection rates over a sweep of signal sparsities.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub m_values: Vec<usize>,
    pub methods: Vec<Method>,
    /// rates[i][j] is the rate for m_values[i] under methods[j].
    pub rates: Vec<Vec<f64>>,
    pub reps: usize,
    pub failures: usize,
}

impl PowerCurve {
    pub fn healthy(&self) -> bool {
        self.failures == 0
    }

    pub fn rate_at(&self, m: usize, method: Method) -> Option<f64> {
        let mi = self.m_values.iter().position(|&v| v == m)?;
        let ji = self.methods.iter().position(|&v| v == method)?;
        Some(self.rates[mi][ji])
    }
}

/// Prepared per-experiment state shared across replications.
pub(crate) struct ExperimentContext {
    pub real: ModelRealization,
    pub oracle_precision: Option<(SymMatrix, SymMatrix)>,
    pub identity: SymMatrix,
    pub hc_grid: Vec<f64>,
    pub pe_delta: f64,
    /// tr(R^2) of the population correlation matrix.
    pub tr_r2_population: f64,
}

impl ExperimentContext {
    pub(crate) fn prepare(cfg: &SimConfig) -> Result<Self> {
        let real = realize_model(&cfg.cov_spec())?;
        let oracle_precision = match cfg.precision {
            PrecisionMode::Oracle => {
                Some((real.omega.clone(), real.omega_sqrt.clone()))
            }
            PrecisionMode::InvertRidged { .. } => None,
        };
        let hc_grid = cfg.hc_grid.clone().unwrap_or_else(hc_default_grid);
        let pe_delta = cfg
            .pe_delta
            .unwrap_or_else(|| pe_default_delta(cfg.problem.total_n(), cfg.p));
        let tr_r2_population = crate::linalg::trace_sq(&real.r_matrix);
        Ok(ExperimentContext {
            real,
            oracle_precision,
            identity: SymMatrix::identity(cfg.p),
            hc_grid,
            pe_delta,
            tr_r2_population,
        })
    }

    /// Precision pair for one replication. Oracle mode shares the population
    /// matrices; ridged mode inverts the replication's own estimate.
    fn precision_for(
        &self,
        cfg: &SimConfig,
        s_source: &dyn Fn() -> Result<SymMatrix>,
    ) -> Result<(SymMatrix, SymMatrix)> {
        match cfg.precision {
            PrecisionMode::Oracle => Ok(self
                .oracle_precision
                .clone()
                .expect("oracle precision prepared")),
            PrecisionMode::InvertRidged { ridge } => {
                let s = s_source()?;
                precision_plugin(&PrecisionMode::InvertRidged { ridge }, &s, None)
            }
        }
    }
}

fn needs(methods: &[Method], of: &[Method]) -> bool {
    methods.iter().any(|m| of.contains(m))
}

/// p-values for one replication, aligned with `cfg.methods`.
pub(crate) fn eval_replication(
    cfg: &SimConfig,
    ctx: &ExperimentContext,
    signal: &SignalSpec,
    rep: u64,
) -> Result<Vec<f64>> {
    match cfg.problem {
        Problem::OneSample { n } => {
            let mut rng = replication_stream(cfg.seed, rep);
            let x = gen_one_sample(&ctx.real, cfg.error, n, signal, &mut rng)?;
            eval_one_sample(cfg, ctx, &x)
        }
        Problem::TwoSample { n1, n2 } => {
            let mut rng = replication_stream(cfg.seed, rep);
            let (x1, x2) = gen_two_sample(&ctx.real, cfg.error, n1, n2, signal, &mut rng)?;
            eval_two_sample(cfg, ctx, &x1, &x2)
        }
    }
}

fn eval_one_sample(cfg: &SimConfig, ctx: &ExperimentContext, x: &SampleMatrix) -> Result<Vec<f64>> {
    let methods = &cfg.methods;
    let needs_precision = needs(
        methods,
        &[Method::Max2, Method::Max3, Method::Fc, Method::Fc3, Method::MinP, Method::Pe],
    );
    let precision = if needs_precision {
        Some(ctx.precision_for(cfg, &|| sample_cov(x))?)
    } else {
        None
    };

    let p_sr = if needs(
        methods,
        &[Method::Sr, Method::Fc, Method::Fc2, Method::Fc3, Method::MinP],
    ) {
        Some(t_sr(x)?.p_value)
    } else {
        None
    };
    let p_max1 = if needs(methods, &[Method::Max1, Method::Fc2]) {
        Some(max_stat(x, &ctx.identity, Method::Max1)?.p_value)
    } else {
        None
    };
    let p_max2 = if needs(methods, &[Method::Max2, Method::Fc, Method::MinP]) {
        let (_, omega_sqrt) = precision.as_ref().expect("precision prepared");
        Some(max_stat(x, omega_sqrt, Method::Max2)?.p_value)
    } else {
        None
    };
    let p_max3 = if needs(methods, &[Method::Max3, Method::Fc3]) {
        let (omega, _) = precision.as_ref().expect("precision prepared");
        Some(max_stat(x, omega, Method::Max3)?.p_value)
    } else {
        None
    };

    methods
        .iter()
        .map(|m| -> Result<f64> {
            Ok(match m {
                Method::Sr => p_sr.expect("computed"),
                Method::Max1 => p_max1.expect("computed"),
                Method::Max2 => p_max2.expect("computed"),
                Method::Max3 => p_max3.expect("computed"),
                Method::Fc => {
                    fisher_combine_as(Method::Fc, p_sr.expect("sum"), p_max2.expect("max"))?
                        .p_value
                }
                Method::Fc2 => {
                    fisher_combine_as(Method::Fc2, p_sr.expect("sum"), p_max1.expect("max"))?
                        .p_value
                }
                Method::Fc3 => {
                    fisher_combine_as(Method::Fc3, p_sr.expect("sum"), p_max3.expect("max"))?
                        .p_value
                }
                Method::MinP => {
                    min_p_combine(p_sr.expect("sum"), p_max2.expect("max"))?.p_value
                }
                Method::Hc => hc2_stat(x, &ctx.hc_grid)?.p_value,
                Method::Pe => {
                    let (omega, _) = precision.as_ref().expect("precision prepared");
                    pe_stat(x, ctx.pe_delta, omega)?.p_value
                }
                Method::Skk => unreachable!("validated against one-sample"),
            })
        })
        .collect()
}

fn eval_two_sample(
    cfg: &SimConfig,
    ctx: &ExperimentContext,
    x1: &SampleMatrix,
    x2: &SampleMatrix,
) -> Result<Vec<f64>> {
    let methods = &cfg.methods;
    let needs_precision = needs(methods, &[Method::Max2, Method::Fc, Method::MinP]);
    let precision = if needs_precision {
        let pooled = || -> Result<SymMatrix> {
            let s1 = sample_cov(x1)?;
            let s2 = sample_cov(x2)?;
            let (f1, f2) = ((x1.n() - 1) as f64, (x2.n() - 1) as f64);
            let denom = f1 + f2;
            Ok(SymMatrix::from_fn(x1.p(), |i, j| {
                (f1 * s1.get(i, j) + f2 * s2.get(i, j)) / denom
            }))
        };
        Some(ctx.precision_for(cfg, &pooled)?)
    } else {
        None
    };

    let p_skk = if needs(methods, &[Method::Skk, Method::Fc, Method::MinP]) {
        Some(t_skk(x1, x2)?.p_value)
    } else {
        None
    };
    let p_w = if needs(methods, &[Method::Max2, Method::Fc, Method::MinP]) {
        let (_, omega_sqrt) = precision.as_ref().expect("precision prepared");
        Some(w_max_two_sample(x1, x2, omega_sqrt)?.p_value)
    } else {
        None
    };

    methods
        .iter()
        .map(|m| -> Result<f64> {
            Ok(match m {
                Method::Skk => p_skk.expect("computed"),
                Method::Max2 => p_w.expect("computed"),
                Method::Fc => {
                    fisher_combine_as(Method::Fc, p_skk.expect("sum"), p_w.expect("max"))?
                        .p_value
                }
                Method::MinP => min_p_combine(p_skk.expect("sum"), p_w.expect("max"))?.p_value,
                other => unreachable!("{other} validated against two-sample"),
            })
        })
        .collect()
}

fn aggregate_rejections(
    cfg: &SimConfig,
    per_rep: Vec<Result<Vec<f64>>>,
) -> (Vec<usize>, usize) {
    let mut rejections = vec![0usize; cfg.methods.len()];
    let mut failures = 0usize;
    for rep in per_rep {
        match rep {
            Ok(pvals) => {
                for (count, p) in rejections.iter_mut().zip(pvals) {
                    if p <= cfg.alpha {
                        *count += 1;
                    }
                }
            }
            Err(_) => failures += 1,
        }
    }
    (rejections, failures)
}

fn run_rejections(
    cfg: &SimConfig,
    ctx: &ExperimentContext,
    signal: &SignalSpec,
) -> (Vec<usize>, usize) {
    let per_rep: Vec<Result<Vec<f64>>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| eval_replication(cfg, ctx, signal, rep))
        .collect();
    aggregate_rejections(cfg, per_rep)
}

/// Empirical size: fraction of replications with p-value <= alpha under the
/// null. Deterministic given the seed; statistic failures are counted, not
/// silently dropped.
pub fn run_size(cfg: &SimConfig) -> Result<SizeReport> {
    cfg.validate()?;
    if cfg.signal != SignalSpec::Null {
        return Err(Error::config("signal", "size runs require the null signal"));
    }
    let ctx = ExperimentContext::prepare(cfg)?;
    let (rejections, failures) = run_rejections(cfg, &ctx, &SignalSpec::Null);
    let reps = cfg.reps;
    let rates: Vec<f64> = rejections.iter().map(|&r| r as f64 / reps as f64).collect();
    let mc_se: Vec<f64> = rates
        .iter()
        .map(|&r| (r * (1.0 - r) / reps as f64).sqrt())
        .collect();
    Ok(SizeReport {
        methods: cfg.methods.clone(),
        rejections,
        rates,
        mc_se,
        reps,
        failures,
    })
}

/// Power over a sweep of sparsity levels m. The same replication streams are
/// reused at every m (common random numbers), so m = 0 reproduces the null
/// run exactly.
pub fn run_power(cfg: &SimConfig, m_values: &[usize]) -> Result<PowerCurve> {
    cfg.validate()?;
    if cfg.signal == SignalSpec::Null {
        return Err(Error::config(
            "signal",
            "power runs need a non-null signal to sweep over m",
        ));
    }
    if m_values.is_empty() {
        return Err(Error::config("m_values", "must be nonempty"));
    }
    for &m in m_values {
        if m > cfg.p {
            return Err(Error::config(
                "m_values",
                format!("m={m} exceeds p={}", cfg.p),
            ));
        }
    }
    let ctx = ExperimentContext::prepare(cfg)?;
    let mut rates = Vec::with_capacity(m_values.len());
    let mut failures = 0usize;
    for &m in m_values {
        let signal = cfg.signal.with_support(m);
        let (rejections, f) = run_rejections(cfg, &ctx, &signal);
        failures += f;
        rates.push(
            rejections
                .iter()
                .map(|&r| r as f64 / cfg.reps as f64)
                .collect(),
        );
    }
    Ok(PowerCurve {
        m_values: m_values.to_vec(),
        methods: cfg.methods.clone(),
        rates,
        reps: cfg.reps,
        failures,
    })
}

impl SignalSpec {
    /// The same signal family with support size `m`.
    pub fn with_support(&self, m: usize) -> SignalSpec {
        match *self {
            SignalSpec::Null => SignalSpec::Null,
            SignalSpec::OneSampleScaled { norm_sq, .. } => {
                SignalSpec::OneSampleScaled { m, norm_sq }
            }
            SignalSpec::TwoSampleRademacher { .. } => SignalSpec::TwoSampleRademacher { m },
            SignalSpec::LocalSparseTransformed { scale, .. } => {
                SignalSpec::LocalSparseTransformed { m, scale }
            }
        }
    }
}
