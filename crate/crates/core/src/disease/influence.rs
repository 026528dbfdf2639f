use serde::{Deserialize, Serialize};

use super::{run_mode, DiseaseParams, Scenario, SimMode, SimulationResult};
use crate::error::Result;
use crate::network::MobilityNetwork;
use crate::rng::derive_seed;

/// A set function over CBG indices, as consumed by the greedy selector.
pub trait InfluenceFn: Sync {
    fn evaluate(&self, seeds: &[usize]) -> f64;
}

impl<F: Fn(&[usize]) -> f64 + Sync> InfluenceFn for F {
    fn evaluate(&self, seeds: &[usize]) -> f64 {
        self(seeds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceConfig {
    /// Simulated hours per evaluation.
    pub window: usize,
    /// Stochastic replicates averaged per evaluation; ignored in mean-field mode.
    pub replicates: usize,
    pub mode: SimMode,
    /// Base seed; replicate `r` runs with `derive_seed(rng_seed, r)`.
    pub rng_seed: u64,
}

impl InfluenceConfig {
    pub fn new(window: usize, replicates: usize, mode: SimMode, rng_seed: u64) -> Self {
        InfluenceConfig {
            window,
            replicates,
            mode,
            rng_seed,
        }
    }
}

fn mean_outcome(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    seeds: &[usize],
    config: &InfluenceConfig,
    score: impl Fn(&SimulationResult) -> f64,
) -> Result<f64> {
    if seeds.is_empty() {
        return Ok(0.0);
    }
    let scenario = Scenario {
        seeded: seeds.to_vec(),
        vaccinated: Vec::new(),
        vaccination_hour: config.window,
        horizon: config.window,
        record_trajectory: false,
    };
    let replicates = match config.mode {
        SimMode::MeanField => 1,
        SimMode::Stochastic => config.replicates.max(1),
    };
    let mut total = 0.0;
    for r in 0..replicates {
        let result = run_mode(
            network,
            params,
            &scenario,
            config.mode,
            derive_seed(config.rng_seed, r as u64),
        )?;
        total += score(&result);
    }
    Ok(total / replicates as f64)
}

/// Mean exposed-or-worse count after `config.window` hours when the epidemic
/// starts only from `seeds`.
pub fn sigma(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    seeds: &[usize],
    config: &InfluenceConfig,
) -> Result<f64> {
    mean_outcome(network, params, seeds, config, |r| r.eir_total)
}

/// As [`sigma`], with each CBG's exposed-or-worse count weighted by its risk weight.
pub fn sigma_a(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    seeds: &[usize],
    config: &InfluenceConfig,
) -> Result<f64> {
    mean_outcome(network, params, seeds, config, |r| {
        risk_weighted_eir(network, r)
    })
}

pub(crate) fn risk_weighted_eir(network: &MobilityNetwork, result: &SimulationResult) -> f64 {
    network
        .cbgs()
        .iter()
        .enumerate()
        .map(|(c, cbg)| cbg.risk_weight * result.final_state.eir(c))
        .sum()
}

/// The epidemic influence function `sigma` (or `sigma_A` when `risk_weighted`).
#[derive(Debug, Clone)]
pub struct EpidemicInfluence<'a> {
    network: &'a MobilityNetwork,
    params: &'a DiseaseParams,
    config: InfluenceConfig,
    risk_weighted: bool,
}

impl<'a> EpidemicInfluence<'a> {
    pub fn new(
        network: &'a MobilityNetwork,
        params: &'a DiseaseParams,
        config: InfluenceConfig,
        risk_weighted: bool,
    ) -> Result<Self> {
        params.validate()?;
        Ok(EpidemicInfluence {
            network,
            params,
            config,
            risk_weighted,
        })
    }
}

impl InfluenceFn for EpidemicInfluence<'_> {
    fn evaluate(&self, seeds: &[usize]) -> f64 {
        let value = if self.risk_weighted {
            sigma_a(self.network, self.params, seeds, &self.config)
        } else {
            sigma(self.network, self.params, seeds, &self.config)
        };
        value.expect("parameters validated and seeds drawn from the network")
    }
}
