use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentReport, Stat};
use crate::error::{Error, Result};
use crate::network::Grouping;

pub const PERFORMANCE_FILE: &str = "performance.csv";
pub const FAIRNESS_FILE: &str = "fairness.csv";

#[derive(Debug, Serialize)]
struct PerformanceRow<'a> {
    strategy: &'a str,
    pct_decrease_mean: f64,
    pct_decrease_std: f64,
    risk_weighted_pct_decrease_mean: f64,
    risk_weighted_pct_decrease_std: f64,
}

#[derive(Debug, Serialize)]
struct FairnessRow<'a> {
    strategy: &'a str,
    grouping: &'a str,
    metric: &'a str,
    kl_mean: Option<f64>,
    kl_std: Option<f64>,
}

/// Writes `performance.csv` and `fairness.csv` into `dir`, returning their
/// paths. Undefined divergences (treatment under NONE) are empty cells.
pub fn export_plot_data(report: &ExperimentReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let perf_path = dir.join(PERFORMANCE_FILE);
    let fair_path = dir.join(FAIRNESS_FILE);

    let mut perf = csv::Writer::from_path(&perf_path)?;
    let mut fair = csv::Writer::from_path(&fair_path)?;
    for s in &report.strategies {
        let strategy = s.strategy.as_str();
        perf.serialize(PerformanceRow {
            strategy,
            pct_decrease_mean: s.summary.pct_decrease.mean,
            pct_decrease_std: s.summary.pct_decrease.std,
            risk_weighted_pct_decrease_mean: s.summary.pct_decrease_risk_weighted.mean,
            risk_weighted_pct_decrease_std: s.summary.pct_decrease_risk_weighted.std,
        })?;
        for grouping in Grouping::ALL {
            let (treatment, outcome) = match grouping {
                Grouping::Race => (s.summary.treatment_kl_race, s.summary.outcome_kl_race),
                Grouping::Income => (s.summary.treatment_kl_income, s.summary.outcome_kl_income),
            };
            for (metric, stat) in [("treatment", treatment), ("outcome", outcome)] {
                fair.serialize(FairnessRow {
                    strategy,
                    grouping: grouping.as_str(),
                    metric,
                    kl_mean: stat.map(|s: Stat| s.mean),
                    kl_std: stat.map(|s| s.std),
                })?;
            }
        }
    }
    perf.flush().map_err(|e| Error::io(&perf_path, e))?;
    fair.flush().map_err(|e| Error::io(&fair_path, e))?;
    Ok((perf_path, fair_path))
}
