//! Greedy influence maximization with population-normalized gains and CELF
//! lazy re-evaluation.
//!
//! Candidates are ranked by `(f(Z + c) - f(Z)) / n_c`. In lazy mode only the
//! top candidate is re-evaluated; if it stays on top with a gain computed
//! against the current `Z` it is accepted, otherwise the list is re-sorted and
//! the new top is checked. In eager mode every remaining candidate is
//! re-evaluated each round. After each acceptance, candidates whose population
//! no longer fits the remaining total budget (or, for fairness variants, any
//! group budget) are dropped.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::{compute_group_budgets, GainStep, GroupBudgets, SelectionResult, StrategyKind};
use crate::disease::InfluenceFn;
use crate::error::Result;
use crate::network::{Grouping, MobilityNetwork};

/// Absolute slack on the total budget comparison.
const TOTAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOptions {
    /// Total budget `B` in persons.
    pub budget: f64,
    /// Group budgets to respect, if any.
    pub grouping: Option<Grouping>,
    pub lazy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub cbg: usize,
    /// Normalized marginal gain as of round `round`.
    pub gain: f64,
    /// `f(Z + cbg)` as of round `round`.
    pub influence: f64,
    /// Size of `Z` when the gain was computed.
    pub round: usize,
}

fn by_gain(a: &Candidate, b: &Candidate) -> Ordering {
    b.gain.total_cmp(&a.gain).then(a.cbg.cmp(&b.cbg))
}

struct Feasibility<'a> {
    network: &'a MobilityNetwork,
    budget: f64,
    used: f64,
    groups: Option<GroupBudgets>,
}

impl Feasibility<'_> {
    fn fits(&self, cbg: usize) -> bool {
        self.used + self.network.population(cbg) <= self.budget + TOTAL_SLACK
            && self
                .groups
                .as_ref()
                .is_none_or(|g| g.fits(self.network, cbg))
    }

    fn charge(&mut self, cbg: usize) -> Result<()> {
        if let Some(g) = self.groups.as_mut() {
            g.charge_selection(self.network, cbg)?;
        }
        self.used += self.network.population(cbg);
        Ok(())
    }
}

fn evaluate_with(influence: &impl InfluenceFn, selected: &[usize], cbg: usize) -> f64 {
    let mut seeds = Vec::with_capacity(selected.len() + 1);
    seeds.extend_from_slice(selected);
    seeds.push(cbg);
    influence.evaluate(&seeds)
}

/// Greedy selection maximizing `influence` per vaccinated resident.
pub fn select_greedy(
    network: &MobilityNetwork,
    influence: &impl InfluenceFn,
    options: &GreedyOptions,
) -> Result<SelectionResult> {
    let k = network.num_cbgs();
    let mut feasibility = Feasibility {
        network,
        budget: options.budget,
        used: 0.0,
        groups: options
            .grouping
            .map(|g| compute_group_budgets(network, g, options.budget)),
    };

    let mut evaluations = k;
    let mut candidates: Vec<Candidate> = (0..k)
        .into_par_iter()
        .map(|c| {
            let value = influence.evaluate(&[c]);
            Candidate {
                cbg: c,
                gain: value / network.population(c),
                influence: value,
                round: 0,
            }
        })
        .collect();
    candidates.retain(|c| feasibility.fits(c.cbg));
    candidates.sort_by(by_gain);

    let mut selected: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut spread = 0.0;

    while !candidates.is_empty() {
        let round = selected.len();
        if options.lazy {
            while candidates[0].round != round {
                let top = &mut candidates[0];
                let value = evaluate_with(influence, &selected, top.cbg);
                evaluations += 1;
                top.gain = (value - spread) / network.population(top.cbg);
                top.influence = value;
                top.round = round;
                // Only the head changed; move it down to its sorted position.
                let head = candidates.remove(0);
                let pos = candidates.partition_point(|c| by_gain(c, &head) == Ordering::Less);
                candidates.insert(pos, head);
            }
        } else if round > 0 {
            let sel = &selected;
            candidates.par_iter_mut().for_each(|cand| {
                let value = evaluate_with(influence, sel, cand.cbg);
                cand.gain = (value - spread) / network.population(cand.cbg);
                cand.influence = value;
                cand.round = round;
            });
            evaluations += candidates.len();
            candidates.sort_by(by_gain);
        }

        let best = candidates.remove(0);
        feasibility.charge(best.cbg)?;
        spread = best.influence;
        selected.push(best.cbg);
        trace.push(GainStep {
            cbg: best.cbg,
            gain: best.gain,
            influence: best.influence,
        });
        candidates.retain(|c| feasibility.fits(c.cbg));
    }

    if selected.is_empty() {
        log::warn!(
            "no CBG fits the budget of {:.1} persons; selection is empty",
            options.budget
        );
    }
    let mut result =
        SelectionResult::from_selected(network, StrategyKind::Im, options.budget, selected);
    result.gain_trace = trace;
    result.evaluation_count = evaluations;
    Ok(result)
}
