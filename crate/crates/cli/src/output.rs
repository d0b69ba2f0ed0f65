//! CSV emission. Outputs are byte-identical across runs of the same config:
//! every value is formatted with Rust's shortest-round-trip float display.

use std::fs;
use std::io::Write;
use std::path::Path;

use hdtest::harness::{IndepDiagnostic, NullLawReport, PowerCurve, Problem, QfCltReport, SimConfig, SizeReport};

use crate::CliError;

fn seed_summary(seeds: &[u64]) -> String {
    let mut sorted: Vec<u64> = seeds.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let contiguous = sorted.windows(2).all(|w| w[1] == w[0] + 1);
    if sorted.len() > 2 && contiguous {
        format!("{}-{}", sorted[0], sorted[sorted.len() - 1])
    } else {
        sorted
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn open_out(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::usage(format!("write failed: {e}"))
}

pub fn write_size_csv(
    path: &Path,
    hash: &str,
    runs: &[(SimConfig, SizeReport)],
) -> Result<(), CliError> {
    let mut f = open_out(path)?;
    let seeds: Vec<u64> = runs.iter().map(|(c, _)| c.seed).collect();
    writeln!(
        f,
        "# hdtest size schema=1 config_hash={hash} seeds={}",
        seed_summary(&seeds)
    )
    .map_err(io_err)?;
    writeln!(f, "model,error,p,method,size,mc_se,reps,seed").map_err(io_err)?;
    for (cfg, report) in runs {
        for ((method, rate), se) in report
            .methods
            .iter()
            .zip(&report.rates)
            .zip(&report.mc_se)
        {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                cfg.model.label(),
                cfg.error.label(),
                cfg.p,
                method.label(),
                rate,
                se,
                report.reps,
                cfg.seed
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn write_power_csv(
    path: &Path,
    hash: &str,
    runs: &[(SimConfig, PowerCurve)],
) -> Result<(), CliError> {
    let mut f = open_out(path)?;
    let seeds: Vec<u64> = runs.iter().map(|(c, _)| c.seed).collect();
    writeln!(
        f,
        "# hdtest power schema=1 config_hash={hash} seeds={}",
        seed_summary(&seeds)
    )
    .map_err(io_err)?;
    writeln!(f, "model,error,p,m,method,power").map_err(io_err)?;
    for (cfg, curve) in runs {
        for (mi, &m) in curve.m_values.iter().enumerate() {
            for (ji, method) in curve.methods.iter().enumerate() {
                writeln!(
                    f,
                    "{},{},{},{},{},{}",
                    cfg.model.label(),
                    cfg.error.label(),
                    cfg.p,
                    m,
                    method.label(),
                    curve.rates[mi][ji]
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(())
}

/// One row of the diagnose CSV.
pub struct DiagRow {
    pub check: &'static str,
    pub model: String,
    pub error: String,
    pub p: usize,
    pub problem: String,
    pub form: String,
    pub record: String,
    pub x: String,
    pub y: String,
    pub value: f64,
}

pub fn problem_label(problem: &Problem) -> String {
    problem.label().to_string()
}

pub fn indep_rows(
    check: &'static str,
    cfg: &SimConfig,
    form: &str,
    diag: &IndepDiagnostic,
) -> Vec<DiagRow> {
    let base = |record: String, x: String, y: String, value: f64| DiagRow {
        check,
        model: cfg.model.label().to_string(),
        error: cfg.error.label().to_string(),
        p: cfg.p,
        problem: problem_label(&cfg.problem),
        form: form.to_string(),
        record,
        x,
        y,
        value,
    };
    let mut rows = Vec::new();
    for (i, &(x, y)) in diag.grid.iter().enumerate() {
        rows.push(base(
            "abs_gap".to_string(),
            x.to_string(),
            y.to_string(),
            (diag.joint_cdf[i] - diag.product_cdf[i]).abs(),
        ));
    }
    rows.push(base("sup_abs_gap".to_string(), String::new(), String::new(), diag.sup_abs_gap));
    rows.push(base(
        "pearson_corr".to_string(),
        String::new(),
        String::new(),
        diag.pearson_corr,
    ));
    rows.push(base(
        "failures".to_string(),
        String::new(),
        String::new(),
        diag.failures as f64,
    ));
    rows
}

pub fn null_law_rows(cfg: &SimConfig, form: &str, report: &NullLawReport) -> Vec<DiagRow> {
    let base = |record: &str, value: f64| DiagRow {
        check: "null_law",
        model: cfg.model.label().to_string(),
        error: cfg.error.label().to_string(),
        p: cfg.p,
        problem: problem_label(&cfg.problem),
        form: form.to_string(),
        record: record.to_string(),
        x: String::new(),
        y: String::new(),
        value,
    };
    vec![
        base("ks_sum_normal", report.ks_sum_normal),
        base("ks_max_gumbel", report.ks_max_gumbel),
        base("ks_fc_chisq4", report.ks_fc_chisq4),
        base("ks_fc_pvalue_uniform", report.ks_fc_pvalue_uniform),
        base("failures", report.failures as f64),
    ]
}

pub fn qf_rows(model: &str, error: &str, p: usize, identity: bool, report: &QfCltReport) -> Vec<DiagRow> {
    let transform = if identity { "identity" } else { "transform" };
    let base = |record: &str, value: f64| DiagRow {
        check: "qf_clt",
        model: model.to_string(),
        error: error.to_string(),
        p,
        problem: String::new(),
        form: transform.to_string(),
        record: record.to_string(),
        x: String::new(),
        y: String::new(),
        value,
    };
    vec![
        base("ks_normal", report.ks_distance),
        base("sigma_a_sq", report.sigma_a_sq),
        base("sample_mean", report.sample_mean),
        base("sample_var", report.sample_var),
    ]
}

pub fn write_diagnose_csv(path: &Path, hash: &str, rows: &[DiagRow]) -> Result<(), CliError> {
    let mut f = open_out(path)?;
    writeln!(f, "# hdtest diagnose schema=1 config_hash={hash}").map_err(io_err)?;
    writeln!(f, "check,model,error,p,problem,form,record,x,y,value").map_err(io_err)?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            r.check, r.model, r.error, r.p, r.problem, r.form, r.record, r.x, r.y, r.value
        )
        .map_err(io_err)?;
    }
    Ok(())
}
