//! Test statistics and their calibration: one-sample sum- and max-type
//! statistics, two-sample counterparts, higher-criticism and
//! power-enhancement competitors, and the Fisher / minimum-p combinations.

mod combine;
mod hc_null;
mod one_sample;
mod two_sample;

pub use combine::{fc_one_sample, fc_two_sample, fisher_combine, fisher_combine_as, min_p_combine};
pub use one_sample::{
    hc2_stat, hc2_stat_empirical_null, hc_default_grid, max_stat, pe_default_delta, pe_stat, t_sr,
};
pub use two_sample::{t_skk, w_max_two_sample};

use serde::{Deserialize, Serialize};

use crate::laws::LimitLaw;

/// Method tags, matching the labels used in the reported tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Studentized sum-type statistic (one-sample).
    Sr,
    /// Max-type statistic with A = I.
    Max1,
    /// Max-type statistic with A = Omega-hat^{1/2} (W in the two-sample case).
    Max2,
    /// Max-type statistic with A = Omega-hat.
    Max3,
    /// Fisher combination of the sum statistic and Max2.
    Fc,
    /// Fisher combination of the sum statistic and Max1.
    Fc2,
    /// Fisher combination of the sum statistic and Max3.
    Fc3,
    /// Minimum of the two constituent p-values.
    MinP,
    /// Higher-criticism statistic.
    Hc,
    /// Power-enhancement statistic.
    Pe,
    /// Studentized sum-type statistic (two-sample).
    Skk,
}

impl Method {
    pub const ONE_SAMPLE: [Method; 10] = [
        Method::Sr,
        Method::Max1,
        Method::Max2,
        Method::Max3,
        Method::Fc,
        Method::Fc2,
        Method::Fc3,
        Method::MinP,
        Method::Hc,
        Method::Pe,
    ];

    pub const TWO_SAMPLE: [Method; 4] = [Method::Skk, Method::Max2, Method::Fc, Method::MinP];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Sr => "SR",
            Method::Max1 => "MAX1",
            Method::Max2 => "MAX2",
            Method::Max3 => "MAX3",
            Method::Fc => "FC",
            Method::Fc2 => "FC2",
            Method::Fc3 => "FC3",
            Method::MinP => "MIN",
            Method::Hc => "HC",
            Method::Pe => "PE",
            Method::Skk => "SKK",
        }
    }

    pub fn applies_to_one_sample(&self) -> bool {
        Self::ONE_SAMPLE.contains(self)
    }

    pub fn applies_to_two_sample(&self) -> bool {
        Self::TWO_SAMPLE.contains(self)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Calibration {
    /// Against one of the limiting laws.
    Law { law: LimitLaw },
    /// Against a simulated null table of the given size.
    EmpiricalNull { sims: usize },
    /// Gumbel law of the grid maximum after the a (M - b) normalization.
    GridGumbel { a: f64, b: f64 },
    /// Exact law of min(p1, p2) for independent uniforms.
    MinP,
}

/// Constituent p-values recorded by the combination statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FcComponents {
    pub p_sum: f64,
    pub p_max: f64,
}

/// A computed statistic with its p-value and normalization metadata.
///
/// `statistic` is on the method's natural scale; `normalized` is the value
/// the p-value is computed from (for max-type statistics that is
/// M - 2 log p + log log p, otherwise it equals `statistic`).
#[derive(Debug, Clone, Serialize)]
pub struct TestOutcome {
    pub method: Method,
    pub statistic: f64,
    pub normalized: f64,
    pub p_value: f64,
    pub calibration: Calibration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<FcComponents>,
}

impl TestOutcome {
    pub(crate) fn from_law(method: Method, statistic: f64, normalized: f64, law: LimitLaw) -> Self {
        let p_value = crate::laws::limit_sf(law, normalized);
        TestOutcome {
            method,
            statistic,
            normalized,
            p_value,
            calibration: Calibration::Law { law },
            components: None,
        }
    }
}

/// Normalization applied to max-type statistics: M - 2 log p + log log p.
pub(crate) fn gumbel_normalize(m_stat: f64, p: usize) -> f64 {
    let pf = p as f64;
    m_stat - 2.0 * pf.ln() + pf.ln().ln()
}
