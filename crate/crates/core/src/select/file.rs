//! Selection JSON: the output of `fairvax select`, keyed by CBG id rather
//! than index so it survives reordering of `cbgs.csv`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GainStep, SelectionResult, StrategyKind};
use crate::error::{Error, Result};
use crate::network::MobilityNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerGroupUsed {
    pub race: Vec<f64>,
    pub income: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRecord {
    pub cbg: u64,
    pub gain: f64,
    pub influence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionFile {
    pub strategy: StrategyKind,
    /// Selected CBG ids in selection order.
    #[serde(rename = "V")]
    pub v: Vec<u64>,
    pub budget: f64,
    pub budget_used: f64,
    pub per_group_used: PerGroupUsed,
    pub gain_trace: Vec<GainRecord>,
    pub evaluation_count: usize,
}

impl SelectionFile {
    pub fn from_result(network: &MobilityNetwork, result: &SelectionResult) -> Self {
        let id = |c: usize| network.cbgs()[c].id;
        SelectionFile {
            strategy: result.strategy,
            v: result.selected.iter().map(|&c| id(c)).collect(),
            budget: result.budget,
            budget_used: result.budget_used,
            per_group_used: PerGroupUsed {
                race: result.used_by_race.clone(),
                income: result.used_by_income.clone(),
            },
            gain_trace: result
                .gain_trace
                .iter()
                .map(|g| GainRecord {
                    cbg: id(g.cbg),
                    gain: g.gain,
                    influence: g.influence,
                })
                .collect(),
            evaluation_count: result.evaluation_count,
        }
    }

    /// Resolves ids against `network`; unknown ids are a config error.
    pub fn to_result(&self, network: &MobilityNetwork) -> Result<SelectionResult> {
        let index = |id: u64| {
            network.index_of(id).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "selection names CBG {id}, which is not in the network"
                ))
            })
        };
        let selected = self
            .v
            .iter()
            .map(|&id| index(id))
            .collect::<Result<Vec<_>>>()?;
        let mut result =
            SelectionResult::from_selected(network, self.strategy, self.budget, selected);
        result.gain_trace = self
            .gain_trace
            .iter()
            .map(|g| {
                Ok(GainStep {
                    cbg: index(g.cbg)?,
                    gain: g.gain,
                    influence: g.influence,
                })
            })
            .collect::<Result<_>>()?;
        result.evaluation_count = self.evaluation_count;
        Ok(result)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}
