//! Replicated Monte Carlo experiments: empirical size tables, power curves,
//! independence diagnostics, and the quadratic-form CLT check.

mod config;
mod diagnostics;
mod run;

pub use config::{Problem, SimConfig};
pub use diagnostics::{
    condition_report_for, default_indep_grid, ks_distance, model_condition_report,
    run_independence, run_null_law, run_qf_clt, ConditionReport, IndepDiagnostic, NullLawReport,
    QfCltReport, StatisticForm,
};
pub use run::{run_power, run_size, PowerCurve, SizeReport};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::PrecisionMode;
    use crate::models::{ErrorDist, ModelId, SignalSpec};
    use crate::stats::Method;

    fn tiny_config() -> SimConfig {
        SimConfig {
            problem: Problem::OneSample { n: 20 },
            p: 10,
            model: ModelId::M1,
            model_seed: 3,
            error: ErrorDist::StdNormal,
            signal: SignalSpec::Null,
            reps: 40,
            alpha: 0.05,
            seed: 99,
            methods: vec![Method::Sr, Method::Max1, Method::Fc2],
            precision: PrecisionMode::Oracle,
            pe_delta: None,
            hc_grid: None,
        }
    }

    #[test]
    fn size_run_is_deterministic() {
        let cfg = tiny_config();
        let a = run_size(&cfg).unwrap();
        let b = run_size(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.healthy());
        assert_eq!(a.reps, 40);
        for (&rate, &rej) in a.rates.iter().zip(&a.rejections) {
            assert!((rate * 40.0 - rej as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn size_run_matches_across_thread_counts() {
        let cfg = tiny_config();
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| run_size(&cfg)).unwrap();
        let b = pool4.install(|| run_size(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alpha_one_rejects_everything() {
        let mut cfg = tiny_config();
        cfg.alpha = 1.0;
        let report = run_size(&cfg).unwrap();
        for &rate in &report.rates {
            assert_eq!(rate, 1.0);
        }
    }

    #[test]
    fn single_rep_rate_is_zero_or_one() {
        let mut cfg = tiny_config();
        cfg.reps = 1;
        let report = run_size(&cfg).unwrap();
        for &rate in &report.rates {
            assert!(rate == 0.0 || rate == 1.0);
        }
    }

    #[test]
    fn size_rejects_non_null_signal() {
        let mut cfg = tiny_config();
        cfg.signal = SignalSpec::OneSampleScaled { m: 2, norm_sq: 0.5 };
        assert!(run_size(&cfg).is_err());
    }

    #[test]
    fn power_at_zero_support_equals_size() {
        let mut cfg = tiny_config();
        cfg.signal = SignalSpec::OneSampleScaled { m: 2, norm_sq: 0.5 };
        let power = run_power(&cfg, &[0, 2]).unwrap();
        let mut null_cfg = tiny_config();
        null_cfg.methods = cfg.methods.clone();
        let size = run_size(&null_cfg).unwrap();
        // common random numbers make m = 0 reproduce the null run exactly
        for (j, &rate) in size.rates.iter().enumerate() {
            assert_eq!(power.rates[0][j], rate);
        }
    }

    #[test]
    fn power_is_higher_under_strong_signal() {
        let mut cfg = tiny_config();
        cfg.reps = 60;
        cfg.signal = SignalSpec::OneSampleScaled {
            m: 1,
            norm_sq: 4.0,
        };
        let power = run_power(&cfg, &[1]).unwrap();
        let sr = power.rate_at(1, Method::Sr).unwrap();
        assert!(sr > 0.5, "expected strong rejection, got {sr}");
    }

    #[test]
    fn independence_grid_at_infinity_is_one() {
        let mut cfg = tiny_config();
        cfg.reps = 50;
        cfg.methods = vec![Method::Sr, Method::Max2];
        let grid = [(f64::INFINITY, f64::INFINITY)];
        for form in [StatisticForm::Practical, StatisticForm::TheoryOracle] {
            let diag = run_independence(&cfg, &grid, form).unwrap();
            assert_eq!(diag.joint_cdf[0], 1.0);
            assert_eq!(diag.product_cdf[0], 1.0);
            assert!(diag.low_reps);
        }
    }

    #[test]
    fn theory_form_requires_oracle() {
        let mut cfg = tiny_config();
        cfg.reps = 5;
        cfg.precision = PrecisionMode::InvertRidged { ridge: 0.5 };
        let grid = [(0.0, 0.0)];
        let diag = run_independence(&cfg, &grid, StatisticForm::TheoryOracle).unwrap();
        // every replication fails: the theory form has no oracle to use
        assert_eq!(diag.failures, 5);
    }

    #[test]
    fn qf_clt_identity_normal_sigma_is_2p() {
        let a = crate::linalg::SymMatrix::identity(50);
        let report = run_qf_clt(&a, ErrorDist::StdNormal, 200, 5).unwrap();
        assert!((report.sigma_a_sq - 100.0).abs() < 1e-12);
    }

    #[test]
    fn qf_clt_scalar_case() {
        // p = 1, A = [1]: the draw is (z^2 - 1)/sqrt(2)
        let a = crate::linalg::SymMatrix::identity(1);
        let reps = 4000;
        let report = run_qf_clt(&a, ErrorDist::StdNormal, reps, 11).unwrap();
        assert!(report.sample_mean.abs() < 3.0 / (reps as f64).sqrt() * 2.0f64.sqrt());
    }

    #[test]
    fn condition_report_identity() {
        use crate::models::CovarianceSpec;
        // M1 blocks have eigenvalues 1 +- 0.8
        let report = condition_report_for(&CovarianceSpec {
            model: ModelId::M1,
            dim: 100,
            seed_material: 0,
        })
        .unwrap();
        assert!((report.lambda_min_sigma - 0.2).abs() < 1e-9);
        assert!((report.lambda_max_sigma - 1.8).abs() < 1e-9);
    }

    #[test]
    fn ks_distance_of_exact_cdf_is_small() {
        let samples: Vec<f64> = (1..=1000).map(|i| i as f64 / 1001.0).collect();
        let d = ks_distance(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d < 2.0 / 1000.0);
    }
}
