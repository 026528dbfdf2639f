use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disease::{run, DiseaseParams, Scenario, SimulationResult};
use crate::error::Result;
use crate::metrics::{pct_decrease, risk_weighted_eir, FairnessReport};
use crate::network::MobilityNetwork;

/// Outcome of one full-horizon run of one vaccination set under one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub eir_total: f64,
    pub eir_by_race: Vec<f64>,
    pub eir_by_income: Vec<f64>,
    pub eir_risk_weighted: f64,
    /// Against the unvaccinated run with the same seed.
    pub pct_decrease: f64,
    pub pct_decrease_risk_weighted: f64,
    pub treatment_kl_race: Option<f64>,
    pub treatment_kl_income: Option<f64>,
    pub outcome_kl_race: Option<f64>,
    pub outcome_kl_income: Option<f64>,
}

impl RunRecord {
    /// Field-wise mean of records sharing a seed. KL fields average over the
    /// records where they are defined.
    pub fn average(records: &[RunRecord]) -> RunRecord {
        assert!(!records.is_empty());
        let n = records.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
        let mean_vec = |f: &dyn Fn(&RunRecord) -> &Vec<f64>| {
            let mut out = vec![0.0; f(&records[0]).len()];
            for r in records {
                for (o, v) in out.iter_mut().zip(f(r)) {
                    *o += v / n;
                }
            }
            out
        };
        let mean_opt = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
            let defined: Vec<f64> = records.iter().filter_map(f).collect();
            (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
        };
        RunRecord {
            seed: records[0].seed,
            eir_total: mean(&|r| r.eir_total),
            eir_by_race: mean_vec(&|r| &r.eir_by_race),
            eir_by_income: mean_vec(&|r| &r.eir_by_income),
            eir_risk_weighted: mean(&|r| r.eir_risk_weighted),
            pct_decrease: mean(&|r| r.pct_decrease),
            pct_decrease_risk_weighted: mean(&|r| r.pct_decrease_risk_weighted),
            treatment_kl_race: mean_opt(&|r| r.treatment_kl_race),
            treatment_kl_income: mean_opt(&|r| r.treatment_kl_income),
            outcome_kl_race: mean_opt(&|r| r.outcome_kl_race),
            outcome_kl_income: mean_opt(&|r| r.outcome_kl_income),
        }
    }
}

/// Unvaccinated totals a run is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub eir_total: f64,
    pub eir_risk_weighted: f64,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    /// `None` for an empty sample. The deviation of a single value is 0.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat { mean, std, n })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub eir_total: Stat,
    pub eir_by_race: Vec<Stat>,
    pub eir_by_income: Vec<Stat>,
    pub eir_risk_weighted: Stat,
    pub pct_decrease: Stat,
    pub pct_decrease_risk_weighted: Stat,
    pub treatment_kl_race: Option<Stat>,
    pub treatment_kl_income: Option<Stat>,
    pub outcome_kl_race: Option<Stat>,
    pub outcome_kl_income: Option<Stat>,
}

impl MetricSummary {
    /// `None` for no records.
    pub fn from_records(records: &[RunRecord]) -> Option<MetricSummary> {
        let first = records.first()?;
        let all = |f: &dyn Fn(&RunRecord) -> f64| {
            let v: Vec<f64> = records.iter().map(f).collect();
            Stat::of(&v).expect("records are non-empty")
        };
        let defined = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
            let v: Vec<f64> = records.iter().filter_map(f).collect();
            Stat::of(&v)
        };
        Some(MetricSummary {
            eir_total: all(&|r| r.eir_total),
            eir_by_race: (0..first.eir_by_race.len())
                .map(|j| all(&|r| r.eir_by_race[j]))
                .collect(),
            eir_by_income: (0..first.eir_by_income.len())
                .map(|j| all(&|r| r.eir_by_income[j]))
                .collect(),
            eir_risk_weighted: all(&|r| r.eir_risk_weighted),
            pct_decrease: all(&|r| r.pct_decrease),
            pct_decrease_risk_weighted: all(&|r| r.pct_decrease_risk_weighted),
            treatment_kl_race: defined(&|r| r.treatment_kl_race),
            treatment_kl_income: defined(&|r| r.treatment_kl_income),
            outcome_kl_race: defined(&|r| r.outcome_kl_race),
            outcome_kl_income: defined(&|r| r.outcome_kl_income),
        })
    }
}

/// Every CBG seeded, `selected` vaccinated at `selection_window`.
pub fn evaluation_scenario(
    network: &MobilityNetwork,
    selected: &[usize],
    selection_window: usize,
    horizon: usize,
) -> Scenario {
    Scenario {
        vaccinated: selected.to_vec(),
        vaccination_hour: selection_window,
        ..Scenario::everywhere(network, horizon)
    }
}

pub fn run_baseline(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    horizon: usize,
    seed: u64,
) -> Result<Baseline> {
    let result = run(
        network,
        params,
        &Scenario::everywhere(network, horizon),
        seed,
    )?;
    Ok(Baseline {
        eir_total: result.eir_total,
        eir_risk_weighted: risk_weighted_eir(&result, network),
    })
}

/// One evaluation run. With no `baseline`, the run is its own baseline.
pub fn evaluate_run(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    selected: &[usize],
    selection_window: usize,
    horizon: usize,
    seed: u64,
    baseline: Option<Baseline>,
) -> Result<RunRecord> {
    let scenario = evaluation_scenario(network, selected, selection_window, horizon);
    let result = run(network, params, &scenario, seed)?;
    record_from_result(network, selected, &result, seed, baseline)
}

pub fn record_from_result(
    network: &MobilityNetwork,
    selected: &[usize],
    result: &SimulationResult,
    seed: u64,
    baseline: Option<Baseline>,
) -> Result<RunRecord> {
    let eir_risk_weighted = risk_weighted_eir(result, network);
    let baseline = baseline.unwrap_or(Baseline {
        eir_total: result.eir_total,
        eir_risk_weighted,
    });
    let fairness = FairnessReport::evaluate(network, selected, result)?;
    Ok(RunRecord {
        seed,
        eir_total: result.eir_total,
        eir_by_race: result.eir_by_race.clone(),
        eir_by_income: result.eir_by_income.clone(),
        eir_risk_weighted,
        pct_decrease: pct_decrease(baseline.eir_total, result.eir_total)?,
        pct_decrease_risk_weighted: pct_decrease(baseline.eir_risk_weighted, eir_risk_weighted)?,
        treatment_kl_race: fairness.treatment_kl_race,
        treatment_kl_income: fairness.treatment_kl_income,
        outcome_kl_race: fairness.outcome_kl_race,
        outcome_kl_income: fairness.outcome_kl_income,
    })
}

/// Evaluates `selected` under every seed against an unvaccinated run with the
/// same seed. Records come back in seed order.
pub fn evaluate_selection(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    selected: &[usize],
    selection_window: usize,
    horizon: usize,
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let baseline = run_baseline(network, params, horizon, seed)?;
            evaluate_run(
                network,
                params,
                selected,
                selection_window,
                horizon,
                seed,
                Some(baseline),
            )
        })
        .collect()
}
