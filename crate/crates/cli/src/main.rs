//! Command-line front end: size tables, power curves, diagnostics, and
//! data-file testing.

mod config;
mod datafile;
mod output;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hdtest::harness::{
    condition_report_for, default_indep_grid, run_independence, run_null_law, run_power,
    run_qf_clt, run_size, Problem, StatisticForm,
};
use hdtest::linalg::SymMatrix;
use hdtest::models::{realize_model, CovarianceSpec};
use hdtest::stats::Method;

use config::{config_hash, DiagnoseRun};
use output::DiagRow;

/// Error carrying the process exit code: 2 for usage/config problems, 3 for
/// unhealthy runs.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }

    pub fn unhealthy(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hdtest",
    version,
    about = "High-dimensional mean tests with a Monte Carlo study harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical sizes under the null, written as CSV
    Size(RunArgs),
    /// Power curves over signal sparsity m, written as CSV
    Power(RunArgs),
    /// Independence, null-law, CLT, and model-condition diagnostics
    Diagnose(RunArgs),
    /// Apply the tests to user-supplied data files
    Test(TestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (JSON)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset (size: table1..table4, t22; power: fig1..fig6, f22,
    /// f23; diagnose: indep-null, indep-local, qf-clt, conditions)
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Base seed override; run i uses seed + i
    #[arg(long)]
    seed: Option<u64>,
    /// Output format (only csv)
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct TestArgs {
    /// Observation matrix, one row per subject
    #[arg(long)]
    data: PathBuf,
    /// Second sample; switches to the two-sample tests
    #[arg(long)]
    data2: Option<PathBuf>,
    /// Comma-separated methods (default sr,max1,fc2 or skk,max2,fc)
    #[arg(long)]
    methods: Option<String>,
    /// Ridge for the precision plug-in (default 1e-3 tr(S)/p)
    #[arg(long)]
    ridge: Option<f64>,
    /// Skip one header row in the data files
    #[arg(long)]
    header: bool,
    /// Print machine-readable JSON instead of a table
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Size(args) => cmd_size(args),
        Command::Power(args) => cmd_power(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Test(args) => cmd_test(args),
    }
}

fn setup_run(args: &RunArgs) -> Result<(), CliError> {
    if args.format != "csv" {
        return Err(CliError::usage(format!(
            "format: only csv is supported, got {}",
            args.format
        )));
    }
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::usage("threads: must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("threads: {e}")))?;
    }
    Ok(())
}

fn reseed<'a, I: Iterator<Item = &'a mut u64>>(seeds: I, base: Option<u64>) {
    if let Some(base) = base {
        for (i, seed) in seeds.enumerate() {
            *seed = base.wrapping_add(i as u64);
        }
    }
}

fn cmd_size(args: RunArgs) -> Result<(), CliError> {
    setup_run(&args)?;
    let mut file = match (&args.config, &args.preset) {
        (Some(path), None) => config::load_size_file(path),
        (None, Some(name)) => presets::size_preset(name, args.seed.unwrap_or(presets::DEFAULT_SEED)),
        _ => Err(CliError::usage("exactly one of --config or --preset is required")),
    }?;
    if args.config.is_some() {
        reseed(file.runs.iter_mut().map(|r| &mut r.seed), args.seed);
    }
    let hash = config_hash(&file);

    let mut results = Vec::with_capacity(file.runs.len());
    let mut failures = 0usize;
    for cfg in &file.runs {
        let report = run_size(cfg).map_err(|e| CliError::usage(format!("size run failed: {e}")))?;
        failures += report.failures;
        results.push((cfg.clone(), report));
    }
    output::write_size_csv(&args.out, &hash, &results)?;
    if failures > 0 {
        return Err(CliError::unhealthy(format!(
            "{failures} replication(s) failed; results written to {}",
            args.out.display()
        )));
    }
    Ok(())
}

fn cmd_power(args: RunArgs) -> Result<(), CliError> {
    setup_run(&args)?;
    let mut file = match (&args.config, &args.preset) {
        (Some(path), None) => config::load_power_file(path),
        (None, Some(name)) => {
            presets::power_preset(name, args.seed.unwrap_or(presets::DEFAULT_SEED))
        }
        _ => Err(CliError::usage("exactly one of --config or --preset is required")),
    }?;
    if args.config.is_some() {
        reseed(file.runs.iter_mut().map(|r| &mut r.config.seed), args.seed);
    }
    let hash = config_hash(&file);

    let mut results = Vec::with_capacity(file.runs.len());
    let mut failures = 0usize;
    for run in &file.runs {
        let curve = run_power(&run.config, &run.m_values)
            .map_err(|e| CliError::usage(format!("power run failed: {e}")))?;
        failures += curve.failures;
        results.push((run.config.clone(), curve));
    }
    output::write_power_csv(&args.out, &hash, &results)?;
    if failures > 0 {
        return Err(CliError::unhealthy(format!(
            "{failures} replication(s) failed; results written to {}",
            args.out.display()
        )));
    }
    Ok(())
}

fn form_label(form: StatisticForm) -> &'static str {
    match form {
        StatisticForm::Practical => "practical",
        StatisticForm::TheoryOracle => "theory_oracle",
    }
}

fn cmd_diagnose(args: RunArgs) -> Result<(), CliError> {
    setup_run(&args)?;
    let mut file = match (&args.config, &args.preset) {
        (Some(path), None) => config::load_diagnose_file(path),
        (None, Some(name)) => {
            presets::diagnose_preset(name, args.seed.unwrap_or(presets::DEFAULT_SEED))
        }
        _ => Err(CliError::usage("exactly one of --config or --preset is required")),
    }?;
    if args.config.is_some() {
        if let Some(base) = args.seed {
            let mut idx = 0u64;
            for run in file.runs.iter_mut() {
                match run {
                    DiagnoseRun::Independence { config, .. }
                    | DiagnoseRun::NullLaw { config, .. } => {
                        config.seed = base.wrapping_add(idx)
                    }
                    DiagnoseRun::QfClt { seed, .. } => *seed = base.wrapping_add(idx),
                    DiagnoseRun::Conditions { .. } => {}
                }
                idx += 1;
            }
        }
    }
    let hash = config_hash(&file);

    let mut rows: Vec<DiagRow> = Vec::new();
    let mut failures = 0usize;
    for run in &file.runs {
        match run {
            DiagnoseRun::Independence { config, form, grid } => {
                let grid = grid.clone().unwrap_or_else(default_indep_grid);
                let diag = run_independence(config, &grid, *form)
                    .map_err(|e| CliError::usage(format!("independence run failed: {e}")))?;
                failures += diag.failures;
                rows.extend(output::indep_rows(
                    "independence",
                    config,
                    form_label(*form),
                    &diag,
                ));
            }
            DiagnoseRun::NullLaw { config, form } => {
                let report = run_null_law(config, *form)
                    .map_err(|e| CliError::usage(format!("null-law run failed: {e}")))?;
                failures += report.failures;
                rows.extend(output::null_law_rows(config, form_label(*form), &report));
            }
            DiagnoseRun::QfClt {
                model,
                p,
                model_seed,
                error,
                reps,
                seed,
                identity,
            } => {
                let a = if *identity {
                    SymMatrix::identity(*p)
                } else {
                    let real = realize_model(&CovarianceSpec {
                        model: *model,
                        dim: *p,
                        seed_material: *model_seed,
                    })
                    .map_err(|e| CliError::usage(format!("model realization failed: {e}")))?;
                    real.a_matrix
                };
                let report = run_qf_clt(&a, *error, *reps, *seed)
                    .map_err(|e| CliError::usage(format!("qf-clt run failed: {e}")))?;
                rows.extend(output::qf_rows(
                    model.label(),
                    error.label(),
                    *p,
                    *identity,
                    &report,
                ));
            }
            DiagnoseRun::Conditions {
                model,
                p,
                model_seed,
            } => {
                let report = condition_report_for(&CovarianceSpec {
                    model: *model,
                    dim: *p,
                    seed_material: *model_seed,
                })
                .map_err(|e| CliError::usage(format!("condition report failed: {e}")))?;
                let base = |record: &str, value: f64| DiagRow {
                    check: "conditions",
                    model: model.label().to_string(),
                    error: String::new(),
                    p: *p,
                    problem: String::new(),
                    form: String::new(),
                    record: record.to_string(),
                    x: String::new(),
                    y: String::new(),
                    value,
                };
                rows.push(base("sup_row_abs_sum_a", report.sup_row_abs_sum_a));
                rows.push(base("lambda_min_sigma", report.lambda_min_sigma));
                rows.push(base("lambda_max_sigma", report.lambda_max_sigma));
                rows.push(base("flagged", if report.flagged { 1.0 } else { 0.0 }));
            }
        }
    }
    output::write_diagnose_csv(&args.out, &hash, &rows)?;
    if failures > 0 {
        return Err(CliError::unhealthy(format!(
            "{failures} replication(s) failed; results written to {}",
            args.out.display()
        )));
    }
    Ok(())
}

fn parse_methods(spec: &Option<String>, default: &[Method]) -> Result<Vec<Method>, CliError> {
    match spec {
        None => Ok(default.to_vec()),
        Some(text) => text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                serde_json::from_value::<Method>(serde_json::Value::String(s.to_string()))
                    .map_err(|_| CliError::usage(format!("methods: unknown method {s:?}")))
            })
            .collect(),
    }
}

fn cmd_test(args: TestArgs) -> Result<(), CliError> {
    let x = datafile::parse_matrix(&args.data, args.header)?;
    let (problem, outcomes) = match &args.data2 {
        None => {
            let methods = parse_methods(&args.methods, &[Method::Sr, Method::Max1, Method::Fc2])?;
            let outcomes = datafile::one_sample_outcomes(&x, &methods, args.ridge)?;
            (Problem::OneSample { n: x.n() }, outcomes)
        }
        Some(path2) => {
            let y = datafile::parse_matrix(path2, args.header)?;
            if y.p() != x.p() {
                return Err(CliError::usage(format!(
                    "data2: has {} columns but data has {}",
                    y.p(),
                    x.p()
                )));
            }
            let methods = parse_methods(&args.methods, &[Method::Skk, Method::Max2, Method::Fc])?;
            let outcomes = datafile::two_sample_outcomes(&x, &y, &methods, args.ridge)?;
            (
                Problem::TwoSample {
                    n1: x.n(),
                    n2: y.n(),
                },
                outcomes,
            )
        }
    };

    if args.json {
        let doc = serde_json::json!({
            "problem": problem.label(),
            "n": match problem { Problem::OneSample { n } => vec![n], Problem::TwoSample { n1, n2 } => vec![n1, n2] },
            "p": x.p(),
            "results": outcomes,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        println!(
            "{:<6} {:>14} {:>14} {:>12}",
            "method", "statistic", "normalized", "p_value"
        );
        for o in &outcomes {
            println!(
                "{:<6} {:>14.6} {:>14.6} {:>12.6}",
                o.method.label(),
                o.statistic,
                o.normalized,
                o.p_value
            );
        }
    }
    Ok(())
}
