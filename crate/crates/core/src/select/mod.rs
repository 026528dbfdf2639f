//! Choosing which CBGs to vaccinate under a population budget.

mod baselines;
mod budget;
mod file;
mod greedy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::disease::{DiseaseParams, EpidemicInfluence, InfluenceConfig, SimMode};
use crate::error::{Error, Result};
use crate::network::{Grouping, MobilityNetwork};

pub use baselines::{select_oldest, select_random};
pub use budget::{compute_group_budgets, GroupBudgets, GROUP_SLACK};
pub use file::{GainRecord, PerGroupUsed, SelectionFile};
pub use greedy::{select_greedy, Candidate, GreedyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "rand")]
    Rand,
    #[serde(rename = "cs")]
    Cs,
    #[serde(rename = "im")]
    Im,
    #[serde(rename = "im-r")]
    ImR,
    #[serde(rename = "im-i")]
    ImI,
    #[serde(rename = "im-a")]
    ImA,
    #[serde(rename = "im-ra")]
    ImRa,
    #[serde(rename = "im-ia")]
    ImIa,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 9] = [
        StrategyKind::None,
        StrategyKind::Rand,
        StrategyKind::Cs,
        StrategyKind::Im,
        StrategyKind::ImR,
        StrategyKind::ImI,
        StrategyKind::ImA,
        StrategyKind::ImRa,
        StrategyKind::ImIa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::None => "none",
            StrategyKind::Rand => "rand",
            StrategyKind::Cs => "cs",
            StrategyKind::Im => "im",
            StrategyKind::ImR => "im-r",
            StrategyKind::ImI => "im-i",
            StrategyKind::ImA => "im-a",
            StrategyKind::ImRa => "im-ra",
            StrategyKind::ImIa => "im-ia",
        }
    }

    pub fn is_influence_based(self) -> bool {
        !matches!(
            self,
            StrategyKind::None | StrategyKind::Rand | StrategyKind::Cs
        )
    }

    /// Grouping whose budgets constrain the selection, for equal-treatment variants.
    pub fn fairness_grouping(self) -> Option<Grouping> {
        match self {
            StrategyKind::ImR | StrategyKind::ImRa => Some(Grouping::Race),
            StrategyKind::ImI | StrategyKind::ImIa => Some(Grouping::Income),
            _ => None,
        }
    }

    /// Whether selection optimizes the age-risk-weighted influence.
    pub fn risk_weighted(self) -> bool {
        matches!(
            self,
            StrategyKind::ImA | StrategyKind::ImRa | StrategyKind::ImIa
        )
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == lower)
            .ok_or_else(|| Error::InvalidStrategy(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    /// Budget as a share of the total population.
    pub budget_fraction: f64,
    /// CELF lazy re-evaluation; always off for risk-weighted variants.
    pub lazy_eval: bool,
    pub sigma_replicates: usize,
    /// Hours simulated by each influence evaluation.
    pub selection_window: usize,
    pub sigma_mode: SimMode,
}

impl Default for StrategySpec {
    fn default() -> Self {
        StrategySpec {
            kind: StrategyKind::Im,
            budget_fraction: 0.05,
            lazy_eval: true,
            sigma_replicates: 5,
            selection_window: 336,
            sigma_mode: SimMode::Stochastic,
        }
    }
}

impl StrategySpec {
    pub fn new(kind: StrategyKind) -> Self {
        StrategySpec {
            kind,
            ..StrategySpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_fraction > 0.0 && self.budget_fraction <= 1.0) {
            return Err(Error::InvalidStrategy(format!(
                "budget fraction must lie in (0, 1], got {}",
                self.budget_fraction
            )));
        }
        if self.sigma_replicates == 0 {
            return Err(Error::InvalidStrategy(
                "sigma_replicates must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_lazy(&self) -> bool {
        self.lazy_eval && !self.kind.risk_weighted()
    }

    /// Total budget `B` in persons.
    pub fn budget(&self, network: &MobilityNetwork) -> f64 {
        self.budget_fraction * network.total_population() as f64
    }
}

/// One accepted CBG and its normalized marginal gain at acceptance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainStep {
    pub cbg: usize,
    /// `(f(Z + c) - f(Z)) / n_c`.
    pub gain: f64,
    /// `f(Z + c)` after acceptance.
    pub influence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub strategy: StrategyKind,
    /// Selected CBG indices in order of selection.
    pub selected: Vec<usize>,
    pub budget: f64,
    pub budget_used: f64,
    pub used_by_race: Vec<f64>,
    pub used_by_income: Vec<f64>,
    pub gain_trace: Vec<GainStep>,
    pub evaluation_count: usize,
}

impl SelectionResult {
    pub(crate) fn from_selected(
        network: &MobilityNetwork,
        strategy: StrategyKind,
        budget: f64,
        selected: Vec<usize>,
    ) -> Self {
        let mut used_by_race = vec![0.0; network.num_groups(Grouping::Race)];
        let mut used_by_income = vec![0.0; network.num_groups(Grouping::Income)];
        let mut budget_used = 0.0;
        for &c in &selected {
            let n = network.population(c);
            budget_used += n;
            network.apportion(c, Grouping::Race, n, &mut used_by_race);
            network.apportion(c, Grouping::Income, n, &mut used_by_income);
        }
        SelectionResult {
            strategy,
            selected,
            budget,
            budget_used,
            used_by_race,
            used_by_income,
            gain_trace: Vec::new(),
            evaluation_count: 0,
        }
    }

    pub fn used_by_group(&self, grouping: Grouping) -> &[f64] {
        match grouping {
            Grouping::Race => &self.used_by_race,
            Grouping::Income => &self.used_by_income,
        }
    }
}

/// Runs the strategy described by `spec`. `rng_seed` drives RAND's shuffle
/// and the influence replicates of the IM variants.
pub fn select(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    spec: &StrategySpec,
    rng_seed: u64,
) -> Result<SelectionResult> {
    spec.validate()?;
    let budget = spec.budget(network);
    match spec.kind {
        StrategyKind::None => Ok(SelectionResult::from_selected(
            network,
            StrategyKind::None,
            budget,
            Vec::new(),
        )),
        StrategyKind::Rand => Ok(select_random(network, budget, rng_seed)),
        StrategyKind::Cs => Ok(select_oldest(network, budget)),
        kind => {
            let config = InfluenceConfig::new(
                spec.selection_window,
                spec.sigma_replicates,
                spec.sigma_mode,
                rng_seed,
            );
            let influence = EpidemicInfluence::new(network, params, config, kind.risk_weighted())?;
            let options = GreedyOptions {
                budget,
                grouping: kind.fairness_grouping(),
                lazy: spec.effective_lazy(),
            };
            let mut result = select_greedy(network, &influence, &options)?;
            result.strategy = kind;
            Ok(result)
        }
    }
}
