//! Experiment configuration and validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::PrecisionMode;
use crate::models::{CovarianceSpec, ErrorDist, ModelId, SignalSpec};
use crate::stats::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum Problem {
    OneSample { n: usize },
    TwoSample { n1: usize, n2: usize },
}

impl Problem {
    pub fn label(&self) -> &'static str {
        match self {
            Problem::OneSample { .. } => "one_sample",
            Problem::TwoSample { .. } => "two_sample",
        }
    }

    pub fn total_n(&self) -> usize {
        match self {
            Problem::OneSample { n } => *n,
            Problem::TwoSample { n1, n2 } => n1 + n2,
        }
    }
}

fn default_precision() -> PrecisionMode {
    PrecisionMode::Oracle
}

/// Full description of one replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(flatten)]
    pub problem: Problem,
    pub p: usize,
    pub model: ModelId,
    #[serde(default)]
    pub model_seed: u64,
    pub error: ErrorDist,
    pub signal: SignalSpec,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    #[serde(default = "default_precision")]
    pub precision: PrecisionMode,
    /// Override for the power-enhancement screening threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe_delta: Option<f64>,
    /// Override for the higher-criticism threshold grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hc_grid: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn cov_spec(&self) -> CovarianceSpec {
        CovarianceSpec {
            model: self.model,
            dim: self.p,
            seed_material: self.model_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 4 {
            return Err(Error::config("p", format!("must be >= 4, got {}", self.p)));
        }
        match self.problem {
            Problem::OneSample { n } => {
                if n < 4 {
                    return Err(Error::config("n", format!("must be >= 4, got {n}")));
                }
            }
            Problem::TwoSample { n1, n2 } => {
                if n1 < 2 {
                    return Err(Error::config("n1", format!("must be >= 2, got {n1}")));
                }
                if n2 < 2 {
                    return Err(Error::config("n2", format!("must be >= 2, got {n2}")));
                }
            }
        }
        if self.reps < 1 {
            return Err(Error::config("reps", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) || !self.alpha.is_finite() {
            return Err(Error::config(
                "alpha",
                format!("must lie in (0, 1], got {}", self.alpha),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        for m in &self.methods {
            let ok = match self.problem {
                Problem::OneSample { .. } => m.applies_to_one_sample(),
                Problem::TwoSample { .. } => m.applies_to_two_sample(),
            };
            if !ok {
                return Err(Error::config(
                    "methods",
                    format!("{} does not apply to a {} problem", m.label(), self.problem.label()),
                ));
            }
        }
        match (&self.problem, &self.signal) {
            (_, SignalSpec::Null) => {}
            (Problem::OneSample { .. }, SignalSpec::OneSampleScaled { m, norm_sq }) => {
                if *m > self.p {
                    return Err(Error::config(
                        "signal",
                        format!("support m={m} exceeds p={}", self.p),
                    ));
                }
                if !(*norm_sq > 0.0) {
                    return Err(Error::config("signal", "norm_sq must be positive"));
                }
            }
            (Problem::TwoSample { .. }, SignalSpec::TwoSampleRademacher { m })
            | (_, SignalSpec::LocalSparseTransformed { m, .. }) => {
                if *m > self.p {
                    return Err(Error::config(
                        "signal",
                        format!("support m={m} exceeds p={}", self.p),
                    ));
                }
            }
            (problem, signal) => {
                return Err(Error::config(
                    "signal",
                    format!(
                        "{} does not apply to a {} problem",
                        signal.label(),
                        problem.label()
                    ),
                ));
            }
        }
        if let PrecisionMode::InvertRidged { ridge } = self.precision {
            if !(ridge >= 0.0) || !ridge.is_finite() {
                return Err(Error::config("precision", "ridge must be finite and >= 0"));
            }
        }
        if let Some(d) = self.pe_delta {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::config("pe_delta", "must be finite and positive"));
            }
        }
        if let Some(grid) = &self.hc_grid {
            if grid.is_empty() {
                return Err(Error::config("hc_grid", "must be nonempty"));
            }
            for &s in grid {
                if !(s > 0.0 && s < 1.0) {
                    return Err(Error::config(
                        "hc_grid",
                        format!("value {s} outside (0, 1)"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimConfig {
        SimConfig {
            problem: Problem::OneSample { n: 120 },
            p: 100,
            model: ModelId::M1,
            model_seed: 0,
            error: ErrorDist::StdNormal,
            signal: SignalSpec::Null,
            reps: 10,
            alpha: 0.05,
            seed: 1,
            methods: vec![Method::Sr, Method::Fc],
            precision: PrecisionMode::Oracle,
            pe_delta: None,
            hc_grid: None,
        }
    }

    #[test]
    fn valid_config_passes() {
        base().validate().unwrap();
    }

    #[test]
    fn alpha_out_of_range_names_field() {
        let mut c = base();
        c.alpha = 1.5;
        let err = c.validate().unwrap_err();
        match err {
            Error::InvalidConfig { field, .. } => assert_eq!(field, "alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alpha_of_one_is_allowed() {
        let mut c = base();
        c.alpha = 1.0;
        c.validate().unwrap();
    }

    #[test]
    fn two_sample_method_mismatch() {
        let mut c = base();
        c.methods = vec![Method::Skk];
        assert!(c.validate().is_err());
        c.problem = Problem::TwoSample { n1: 60, n2: 60 };
        c.validate().unwrap();
        c.methods = vec![Method::Hc];
        assert!(c.validate().is_err());
    }

    #[test]
    fn signal_problem_mismatch() {
        let mut c = base();
        c.signal = SignalSpec::TwoSampleRademacher { m: 3 };
        assert!(c.validate().is_err());
        c.signal = SignalSpec::OneSampleScaled { m: 5, norm_sq: 0.5 };
        c.validate().unwrap();
        c.signal = SignalSpec::OneSampleScaled { m: 500, norm_sq: 0.5 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = base();
        let text = serde_json::to_string(&c).unwrap();
        let back: SimConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_shape_is_flat() {
        let text = r#"{
            "problem": "two_sample", "n1": 60, "n2": 60,
            "p": 100, "model": "m3", "error": "t5",
            "signal": {"kind": "rademacher", "m": 4},
            "reps": 5, "alpha": 0.05, "seed": 9,
            "methods": ["skk", "max2", "fc"]
        }"#;
        let parsed: SimConfig = serde_json::from_str(text).unwrap();
        assert_eq!(parsed.problem, Problem::TwoSample { n1: 60, n2: 60 });
        assert_eq!(parsed.precision, PrecisionMode::Oracle);
        parsed.validate().unwrap();
    }
}
