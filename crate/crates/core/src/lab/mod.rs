//! Configuration-driven runner for the verification suites.

pub mod config;
pub mod plots;
pub mod report;
pub mod suites;

use std::time::Instant;

pub use config::{ExperimentConfig, Suite};
pub use report::{CheckRecord, ConstantRecord, ExperimentReport, Verdict};

/// Runs every check of the configured suite in catalogue order.
pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentReport {
    let ctx = suites::Ctx::new(cfg);
    let mut report = ExperimentReport {
        suite: cfg.experiment,
        seed: cfg.seed,
        checks: Vec::new(),
        constants: Vec::new(),
        series: Vec::new(),
    };
    for spec in suites::checks(cfg.experiment) {
        let t0 = Instant::now();
        let o = spec.run(&ctx);
        let seconds = t0.elapsed().as_secs_f64();
        report.constants.extend(o.constants.into_iter().map(|(name, value)| ConstantRecord {
            check: spec.name,
            name,
            value,
        }));
        report.series.extend(o.series.into_iter().map(|s| (spec.name, s)));
        report.checks.push(CheckRecord {
            check: spec.name,
            anchor: spec.anchor,
            verdict: o.verdict,
            measured: o.measured,
            limit: o.limit,
            tolerance_source: o.tolerance_source,
            detail: o.detail,
            seconds,
        });
    }
    report
}

/// Static listing of suites, checks and anchors.
pub fn list_experiments() -> String {
    let mut out = String::new();
    for suite in Suite::ALL {
        for spec in suites::checks(suite) {
            out += &format!("{suite}: {} ({})\n", spec.name, spec.anchor);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_has_three_checks_with_unique_names() {
        for suite in Suite::ALL {
            let specs = suites::checks(suite);
            assert!(specs.len() >= 3, "{suite}");
            let mut names: Vec<_> = specs.iter().map(|s| s.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), specs.len(), "{suite}");
        }
    }

    #[test]
    fn listing_names_the_gaussian_check() {
        assert!(list_experiments().contains("green-suite: gaussian_verify (Prop. Gaussian estimate)"));
        assert_eq!(list_experiments(), list_experiments());
    }
}
