//! Data-file mode: parse numeric matrices and apply the tests directly.

use std::fs;
use std::path::Path;

use hdtest::estimators::{default_ridge, precision_plugin, sample_cov, PrecisionMode};
use hdtest::linalg::SymMatrix;
use hdtest::models::SampleMatrix;
use hdtest::stats::{
    fisher_combine_as, hc2_stat, hc_default_grid, max_stat, min_p_combine, pe_default_delta,
    pe_stat, t_skk, t_sr, w_max_two_sample, Method, TestOutcome,
};

use crate::CliError;

/// Parses a delimiter-autodetected numeric matrix (comma or whitespace),
/// optionally skipping one header row.
pub fn parse_matrix(path: &Path, skip_header: bool) -> Result<SampleMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut skipped = !skip_header;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !skipped {
            skipped = true;
            continue;
        }
        let cells: Vec<&str> = if trimmed.contains(',') {
            trimmed.split(',').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let mut row = Vec::with_capacity(cells.len());
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::usage(format!(
                    "{}: line {}, column {}: not a number: {cell:?}",
                    path.display(),
                    lineno + 1,
                    col + 1
                ))
            })?;
            row.push(value);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(CliError::usage(format!(
                    "{}: line {}: ragged row has {} columns, expected {w}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )));
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no data rows found",
            path.display()
        )));
    }
    SampleMatrix::from_rows(&rows)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn needs(methods: &[Method], of: &[Method]) -> bool {
    methods.iter().any(|m| of.contains(m))
}

fn stat_error(e: hdtest::Error) -> CliError {
    CliError::usage(format!("cannot compute statistic: {e}"))
}

/// Ridged precision plug-in for data mode.
fn data_precision(
    s: &SymMatrix,
    ridge: Option<f64>,
) -> Result<(SymMatrix, SymMatrix), CliError> {
    let ridge = ridge.unwrap_or_else(|| default_ridge(s));
    precision_plugin(&PrecisionMode::InvertRidged { ridge }, s, None).map_err(|e| {
        CliError::usage(format!(
            "precision plug-in failed (try a larger --ridge): {e}"
        ))
    })
}

pub fn one_sample_outcomes(
    x: &SampleMatrix,
    methods: &[Method],
    ridge: Option<f64>,
) -> Result<Vec<TestOutcome>, CliError> {
    for m in methods {
        if !m.applies_to_one_sample() {
            return Err(CliError::usage(format!(
                "method {} does not apply to one-sample data",
                m.label()
            )));
        }
    }
    let precision = if needs(
        methods,
        &[Method::Max2, Method::Max3, Method::Fc, Method::Fc3, Method::MinP, Method::Pe],
    ) {
        let s = sample_cov(x).map_err(stat_error)?;
        Some(data_precision(&s, ridge)?)
    } else {
        None
    };

    let sr = if needs(
        methods,
        &[Method::Sr, Method::Fc, Method::Fc2, Method::Fc3, Method::MinP],
    ) {
        Some(t_sr(x).map_err(stat_error)?)
    } else {
        None
    };
    let identity = SymMatrix::identity(x.p());
    let max1 = if needs(methods, &[Method::Max1, Method::Fc2]) {
        Some(max_stat(x, &identity, Method::Max1).map_err(stat_error)?)
    } else {
        None
    };
    let max2 = if needs(methods, &[Method::Max2, Method::Fc, Method::MinP]) {
        let (_, sq) = precision.as_ref().expect("precision prepared");
        Some(max_stat(x, sq, Method::Max2).map_err(stat_error)?)
    } else {
        None
    };
    let max3 = if needs(methods, &[Method::Max3, Method::Fc3]) {
        let (omega, _) = precision.as_ref().expect("precision prepared");
        Some(max_stat(x, omega, Method::Max3).map_err(stat_error)?)
    } else {
        None
    };

    methods
        .iter()
        .map(|m| -> Result<TestOutcome, CliError> {
            Ok(match m {
                Method::Sr => sr.clone().expect("computed"),
                Method::Max1 => max1.clone().expect("computed"),
                Method::Max2 => max2.clone().expect("computed"),
                Method::Max3 => max3.clone().expect("computed"),
                Method::Fc => fisher_combine_as(
                    Method::Fc,
                    sr.as_ref().expect("sum").p_value,
                    max2.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                Method::Fc2 => fisher_combine_as(
                    Method::Fc2,
                    sr.as_ref().expect("sum").p_value,
                    max1.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                Method::Fc3 => fisher_combine_as(
                    Method::Fc3,
                    sr.as_ref().expect("sum").p_value,
                    max3.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                Method::MinP => min_p_combine(
                    sr.as_ref().expect("sum").p_value,
                    max2.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                Method::Hc => hc2_stat(x, &hc_default_grid()).map_err(stat_error)?,
                Method::Pe => {
                    let (omega, _) = precision.as_ref().expect("precision prepared");
                    pe_stat(x, pe_default_delta(x.n(), x.p()), omega).map_err(stat_error)?
                }
                Method::Skk => unreachable!("filtered above"),
            })
        })
        .collect()
}

pub fn two_sample_outcomes(
    x1: &SampleMatrix,
    x2: &SampleMatrix,
    methods: &[Method],
    ridge: Option<f64>,
) -> Result<Vec<TestOutcome>, CliError> {
    for m in methods {
        if !m.applies_to_two_sample() {
            return Err(CliError::usage(format!(
                "method {} does not apply to two-sample data",
                m.label()
            )));
        }
    }
    let precision = if needs(methods, &[Method::Max2, Method::Fc, Method::MinP]) {
        let s1 = sample_cov(x1).map_err(stat_error)?;
        let s2 = sample_cov(x2).map_err(stat_error)?;
        let (f1, f2) = ((x1.n() - 1) as f64, (x2.n() - 1) as f64);
        let pooled = SymMatrix::from_fn(x1.p(), |i, j| {
            (f1 * s1.get(i, j) + f2 * s2.get(i, j)) / (f1 + f2)
        });
        Some(data_precision(&pooled, ridge)?)
    } else {
        None
    };

    let skk = if needs(methods, &[Method::Skk, Method::Fc, Method::MinP]) {
        Some(t_skk(x1, x2).map_err(stat_error)?)
    } else {
        None
    };
    let w = if needs(methods, &[Method::Max2, Method::Fc, Method::MinP]) {
        let (_, sq) = precision.as_ref().expect("precision prepared");
        Some(w_max_two_sample(x1, x2, sq).map_err(stat_error)?)
    } else {
        None
    };

    methods
        .iter()
        .map(|m| -> Result<TestOutcome, CliError> {
            Ok(match m {
                Method::Skk => skk.clone().expect("computed"),
                Method::Max2 => w.clone().expect("computed"),
                Method::Fc => fisher_combine_as(
                    Method::Fc,
                    skk.as_ref().expect("sum").p_value,
                    w.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                Method::MinP => min_p_combine(
                    skk.as_ref().expect("sum").p_value,
                    w.as_ref().expect("max").p_value,
                )
                .map_err(stat_error)?,
                other => unreachable!("{other} filtered above"),
            })
        })
        .collect()
}
