//! Built-in experiment presets reproducing the reported tables and figures.

use hdtest::estimators::PrecisionMode;
use hdtest::harness::{Problem, SimConfig, StatisticForm};
use hdtest::models::{ErrorDist, ModelId, SignalSpec};
use hdtest::stats::Method;

use crate::config::{DiagnoseFile, DiagnoseRun, PowerFile, PowerRun, SizeFile, SCHEMA_VERSION};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 7070;
const MODEL_SEED: u64 = 7;
const SIZE_REPS: usize = 1000;
const POWER_REPS: usize = 500;
const DIAG_REPS: usize = 2000;

fn one_sample_null(model: ModelId, p: usize, error: ErrorDist, methods: Vec<Method>) -> SimConfig {
    SimConfig {
        problem: Problem::OneSample { n: 120 },
        p,
        model,
        model_seed: MODEL_SEED,
        error,
        signal: SignalSpec::Null,
        reps: SIZE_REPS,
        alpha: 0.05,
        seed: 0,
        methods,
        precision: PrecisionMode::Oracle,
        pe_delta: None,
        hc_grid: None,
    }
}

fn two_sample_null(model: ModelId, p: usize, error: ErrorDist, methods: Vec<Method>) -> SimConfig {
    SimConfig {
        problem: Problem::TwoSample { n1: 60, n2: 60 },
        ..one_sample_null(model, p, error, methods)
    }
}

/// Deterministic per-run seeds derived from the base seed.
fn assign_seeds(runs: &mut [SimConfig], base: u64) {
    for (i, cfg) in runs.iter_mut().enumerate() {
        cfg.seed = base.wrapping_add(i as u64);
    }
}

fn size_grid(models: &[ModelId], methods: &[Method], two_sample: bool, base_seed: u64) -> SizeFile {
    let mut runs = Vec::new();
    for &model in models {
        for error in ErrorDist::ALL {
            for p in [100usize, 200, 300] {
                runs.push(if two_sample {
                    two_sample_null(model, p, error, methods.to_vec())
                } else {
                    one_sample_null(model, p, error, methods.to_vec())
                });
            }
        }
    }
    assign_seeds(&mut runs, base_seed);
    SizeFile {
        schema_version: SCHEMA_VERSION,
        runs,
    }
}

const ONE_SAMPLE_TABLE_METHODS: [Method; 7] = [
    Method::Sr,
    Method::Max1,
    Method::Max2,
    Method::Max3,
    Method::Fc,
    Method::Hc,
    Method::Pe,
];

const TWO_SAMPLE_TABLE_METHODS: [Method; 3] = [Method::Skk, Method::Max2, Method::Fc];

pub fn size_preset(name: &str, base_seed: u64) -> Result<SizeFile, CliError> {
    let first_half = [ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4];
    let second_half = [ModelId::M5, ModelId::M6, ModelId::M7, ModelId::M8];
    match name {
        "table1" => Ok(size_grid(&first_half, &ONE_SAMPLE_TABLE_METHODS, false, base_seed)),
        "table2" => Ok(size_grid(&second_half, &ONE_SAMPLE_TABLE_METHODS, false, base_seed)),
        "table3" => Ok(size_grid(&first_half, &TWO_SAMPLE_TABLE_METHODS, true, base_seed)),
        "table4" => Ok(size_grid(&second_half, &TWO_SAMPLE_TABLE_METHODS, true, base_seed)),
        "t22" => Ok(size_grid(
            &ModelId::ALL,
            &[Method::Fc2, Method::Fc3],
            false,
            base_seed,
        )),
        other => Err(CliError::usage(format!(
            "preset {other} is not a size preset (expected table1|table2|table3|table4|t22)"
        ))),
    }
}

pub fn power_preset(name: &str, base_seed: u64) -> Result<PowerFile, CliError> {
    let m_sweep: Vec<usize> = (1..=20).collect();
    // m = [p^a] at p = 200 for a in {0.2, 0.4, 0.6, 0.8, 1}
    let sparsity_sweep: Vec<usize> = [0.2f64, 0.4, 0.6, 0.8, 1.0]
        .iter()
        .map(|a| (200f64.powf(*a)).floor() as usize)
        .collect();
    let error_for = |idx: usize| ErrorDist::ALL[idx];

    let mut runs = Vec::new();
    match name {
        "fig1" | "fig2" | "fig3" => {
            let error = error_for(name.as_bytes()[3] as usize - b'1' as usize);
            for model in ModelId::ALL {
                let mut cfg = one_sample_null(
                    model,
                    200,
                    error,
                    vec![
                        Method::Sr,
                        Method::Max1,
                        Method::Max2,
                        Method::Max3,
                        Method::Fc,
                        Method::Hc,
                    ],
                );
                cfg.signal = SignalSpec::OneSampleScaled { m: 1, norm_sq: 0.5 };
                cfg.reps = POWER_REPS;
                runs.push(PowerRun {
                    config: cfg,
                    m_values: m_sweep.clone(),
                });
            }
        }
        "fig4" | "fig5" | "fig6" => {
            let error = error_for(name.as_bytes()[3] as usize - b'4' as usize);
            for model in ModelId::ALL {
                let mut cfg =
                    two_sample_null(model, 100, error, TWO_SAMPLE_TABLE_METHODS.to_vec());
                cfg.signal = SignalSpec::TwoSampleRademacher { m: 1 };
                cfg.reps = POWER_REPS;
                runs.push(PowerRun {
                    config: cfg,
                    m_values: m_sweep.clone(),
                });
            }
        }
        "f22" | "f23" => {
            let norm_sq = if name == "f22" { 0.5 } else { 0.8 };
            for model in ModelId::ALL {
                let mut cfg = one_sample_null(
                    model,
                    200,
                    ErrorDist::StdNormal,
                    vec![
                        Method::Sr,
                        Method::Max1,
                        Method::Max2,
                        Method::Max3,
                        Method::Fc,
                        Method::Fc2,
                        Method::Fc3,
                        Method::Hc,
                    ],
                );
                cfg.signal = SignalSpec::OneSampleScaled { m: 1, norm_sq };
                cfg.reps = POWER_REPS;
                runs.push(PowerRun {
                    config: cfg,
                    m_values: sparsity_sweep.clone(),
                });
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "preset {other} is not a power preset (expected fig1..fig6|f22|f23)"
            )))
        }
    }
    for (i, run) in runs.iter_mut().enumerate() {
        run.config.seed = base_seed.wrapping_add(i as u64);
    }
    Ok(PowerFile {
        schema_version: SCHEMA_VERSION,
        runs,
    })
}

pub fn diagnose_preset(name: &str, base_seed: u64) -> Result<DiagnoseFile, CliError> {
    let mut runs = Vec::new();
    match name {
        "indep-null" | "indep-local" => {
            let signal = if name == "indep-null" {
                SignalSpec::Null
            } else {
                // m = floor(200^0.3) = 4
                SignalSpec::LocalSparseTransformed { m: 4, scale: 1.0 }
            };
            for model in [ModelId::M1, ModelId::M2] {
                for two in [false, true] {
                    let mut cfg = if two {
                        two_sample_null(
                            model,
                            200,
                            ErrorDist::StdNormal,
                            vec![Method::Skk, Method::Max2],
                        )
                    } else {
                        one_sample_null(
                            model,
                            200,
                            ErrorDist::StdNormal,
                            vec![Method::Sr, Method::Max2],
                        )
                    };
                    cfg.signal = signal;
                    cfg.reps = DIAG_REPS;
                    runs.push(DiagnoseRun::Independence {
                        config: cfg,
                        form: StatisticForm::TheoryOracle,
                        grid: None,
                    });
                }
            }
            if name == "indep-null" {
                for model in [ModelId::M1, ModelId::M2] {
                    let mut cfg = one_sample_null(
                        model,
                        200,
                        ErrorDist::StdNormal,
                        vec![Method::Sr, Method::Max2],
                    );
                    cfg.reps = DIAG_REPS;
                    runs.push(DiagnoseRun::NullLaw {
                        config: cfg,
                        form: StatisticForm::TheoryOracle,
                    });
                }
            }
        }
        "qf-clt" => {
            for error in ErrorDist::ALL {
                runs.push(DiagnoseRun::QfClt {
                    model: ModelId::M2,
                    p: 200,
                    model_seed: MODEL_SEED,
                    error,
                    reps: DIAG_REPS,
                    seed: 0,
                    identity: false,
                });
            }
            runs.push(DiagnoseRun::QfClt {
                model: ModelId::M2,
                p: 200,
                model_seed: MODEL_SEED,
                error: ErrorDist::StdNormal,
                reps: DIAG_REPS,
                seed: 0,
                identity: true,
            });
        }
        "conditions" => {
            for model in ModelId::ALL {
                runs.push(DiagnoseRun::Conditions {
                    model,
                    p: 100,
                    model_seed: MODEL_SEED,
                });
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "preset {other} is not a diagnose preset (expected indep-null|indep-local|qf-clt|conditions)"
            )))
        }
    }
    let mut idx = 0u64;
    for run in runs.iter_mut() {
        match run {
            DiagnoseRun::Independence { config, .. } | DiagnoseRun::NullLaw { config, .. } => {
                config.seed = base_seed.wrapping_add(idx);
            }
            DiagnoseRun::QfClt { seed, .. } => {
                *seed = base_seed.wrapping_add(idx);
            }
            DiagnoseRun::Conditions { .. } => {}
        }
        idx += 1;
    }
    Ok(DiagnoseFile {
        schema_version: SCHEMA_VERSION,
        runs,
    })
}
