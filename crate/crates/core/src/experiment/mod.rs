//! The experiment matrix: every strategy selected once, then evaluated over
//! paired seeds against the unvaccinated baseline.

mod config;
mod evaluate;
mod export;
mod store;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::MobilityNetwork;
use crate::rng::derive_seed;
use crate::select::{select, SelectionFile, SelectionResult, StrategyKind};

pub use config::{ExperimentConfig, NetworkSource};
pub use evaluate::{
    evaluate_run, evaluate_selection, evaluation_scenario, record_from_result, run_baseline,
    Baseline, MetricSummary, RunRecord, Stat,
};
pub use export::{export_plot_data, FAIRNESS_FILE, PERFORMANCE_FILE};
use store::{write_atomic, Store};

/// Worker threads for experiment cells; unset or 0 means one per core.
pub const WORKERS_ENV: &str = "FAIRVAX_WORKERS";
pub const REPORT_FILE: &str = "report.json";

pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => parse_workers(&v),
    }
}

fn parse_workers(v: &str) -> Result<Option<usize>> {
    v.trim()
        .parse::<usize>()
        .map(|n| (n > 0).then_some(n))
        .map_err(|_| Error::InvalidConfig(format!("{WORKERS_ENV}={v:?} is not a worker count")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub cbgs: usize,
    pub pois: usize,
    pub population: u64,
    pub visit_hours: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: StrategyKind,
    pub selection_seeds: Vec<u64>,
    pub selections: Vec<SelectionFile>,
    /// One per evaluation seed, in seed order; RAND records average its selections.
    pub records: Vec<RunRecord>,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub strategy: StrategyKind,
    pub seed_index: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub code_version: String,
    pub config: ExperimentConfig,
    pub network: NetworkSummary,
    pub eval_seeds: Vec<u64>,
    pub strategies: Vec<StrategyReport>,
    pub failures: Vec<Failure>,
}

impl ExperimentReport {
    pub fn strategy(&self, kind: StrategyKind) -> Option<&StrategyReport> {
        self.strategies.iter().find(|s| s.strategy == kind)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

/// Builds the configured network and runs the experiment with the worker
/// count from [`WORKERS_ENV`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_workers(config, workers_from_env()?)
}

pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<ExperimentReport> {
    config.validate()?;
    let network = config.network.build()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    pool.install(|| run_on_network(config, &network))
}

/// Runs the experiment on an already-built network inside the current rayon
/// pool. `config.network` only contributes to the config hash.
pub fn run_on_network(
    config: &ExperimentConfig,
    network: &MobilityNetwork,
) -> Result<ExperimentReport> {
    config.validate()?;
    let hash = config.provenance_hash()?;
    let store = config
        .output_dir
        .as_deref()
        .map(|dir| Store::open(dir, &hash))
        .transpose()?;
    let eval_seeds: Vec<u64> = (0..config.n_seeds as u64)
        .map(|s| derive_seed(config.eval_seed, s))
        .collect();
    let strategies = config.strategies_with_baseline();
    let mut failures = Vec::new();

    let mut selections: Vec<(StrategyKind, Vec<u64>, Vec<SelectionResult>)> = Vec::new();
    for &kind in &strategies {
        let seeds = selection_seeds(config, kind);
        match select_all(config, network, store.as_ref(), kind, &seeds) {
            Ok(chosen) => selections.push((kind, seeds, chosen)),
            Err(e) if kind == StrategyKind::None => return Err(e),
            Err(e) => {
                log::error!("{kind}: selection failed: {e}");
                failures.push(Failure {
                    strategy: kind,
                    seed_index: None,
                    message: e.to_string(),
                });
            }
        }
    }

    let baselines: Vec<RunRecord> = eval_seeds
        .par_iter()
        .enumerate()
        .map(|(s, &seed)| {
            evaluate_cell(
                config,
                network,
                store.as_ref(),
                StrategyKind::None,
                &[],
                s,
                seed,
                None,
            )
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (1..selections.len())
        .flat_map(|k| (0..eval_seeds.len()).map(move |s| (k, s)))
        .collect();
    let outcomes: Vec<Result<RunRecord>> = cells
        .par_iter()
        .map(|&(k, s)| {
            let (kind, _, chosen) = &selections[k];
            let baseline = Baseline {
                eir_total: baselines[s].eir_total,
                eir_risk_weighted: baselines[s].eir_risk_weighted,
            };
            evaluate_cell(
                config,
                network,
                store.as_ref(),
                *kind,
                chosen,
                s,
                eval_seeds[s],
                Some(baseline),
            )
        })
        .collect();

    let mut records: Vec<Vec<RunRecord>> = vec![Vec::new(); selections.len()];
    records[0] = baselines;
    for (&(k, s), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(r) => records[k].push(r),
            Err(e) => {
                let kind = selections[k].0;
                log::error!("{kind}: seed {s} failed: {e}");
                failures.push(Failure {
                    strategy: kind,
                    seed_index: Some(s),
                    message: e.to_string(),
                });
            }
        }
    }

    let strategies = selections
        .into_iter()
        .zip(records)
        .filter_map(|((kind, selection_seeds, chosen), records)| {
            let summary = MetricSummary::from_records(&records)?;
            Some(StrategyReport {
                strategy: kind,
                selection_seeds,
                selections: chosen
                    .iter()
                    .map(|r| SelectionFile::from_result(network, r))
                    .collect(),
                records,
                summary,
            })
        })
        .collect();

    let report = ExperimentReport {
        config_hash: hash,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: ExperimentConfig {
            output_dir: None,
            ..config.clone()
        },
        network: NetworkSummary {
            cbgs: network.num_cbgs(),
            pois: network.num_pois(),
            population: network.total_population(),
            visit_hours: network.visits().horizon(),
        },
        eval_seeds,
        strategies,
        failures,
    };
    if let Some(dir) = &config.output_dir {
        report.write(&dir.join(REPORT_FILE))?;
        export_plot_data(&report, dir)?;
    }
    Ok(report)
}

fn selection_seeds(config: &ExperimentConfig, kind: StrategyKind) -> Vec<u64> {
    match kind {
        StrategyKind::Rand => (0..config.rand_selections as u64)
            .map(|r| derive_seed(config.selection_seed, r))
            .collect(),
        _ => vec![config.selection_seed],
    }
}

fn select_all(
    config: &ExperimentConfig,
    network: &MobilityNetwork,
    store: Option<&Store>,
    kind: StrategyKind,
    seeds: &[u64],
) -> Result<Vec<SelectionResult>> {
    let spec = config.strategy_spec(kind);
    seeds
        .iter()
        .enumerate()
        .map(|(r, &seed)| {
            let path = store.map(|s| s.selection_path(kind, r));
            if let (Some(store), Some(path)) = (store, &path) {
                if let Some(file) = store.load::<SelectionFile>(path) {
                    log::info!("{kind}: reusing selection {r}");
                    return file.to_result(network);
                }
            }
            log::info!("{kind}: selecting ({r})");
            let chosen = select(network, &config.disease, &spec, seed)?;
            if let (Some(store), Some(path)) = (store, &path) {
                store.save(path, &SelectionFile::from_result(network, &chosen))?;
            }
            Ok(chosen)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn evaluate_cell(
    config: &ExperimentConfig,
    network: &MobilityNetwork,
    store: Option<&Store>,
    kind: StrategyKind,
    chosen: &[SelectionResult],
    seed_index: usize,
    seed: u64,
    baseline: Option<Baseline>,
) -> Result<RunRecord> {
    let path = store.map(|s| s.cell_path(kind, seed_index));
    if let (Some(store), Some(path)) = (store, &path) {
        if let Some(record) = store.load::<RunRecord>(path) {
            return Ok(record);
        }
    }
    let run_one = |selected: &[usize]| {
        evaluate_run(
            network,
            &config.disease,
            selected,
            config.selection_window_hours,
            config.horizon_hours,
            seed,
            baseline,
        )
    };
    let record = if chosen.is_empty() {
        run_one(&[])?
    } else {
        let runs = chosen
            .iter()
            .map(|c| run_one(&c.selected))
            .collect::<Result<Vec<_>>>()?;
        RunRecord::average(&runs)
    };
    if let (Some(store), Some(path)) = (store, &path) {
        store.save(path, &record)?;
    }
    Ok(record)
}
