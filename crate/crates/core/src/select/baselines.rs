use rand::seq::SliceRandom;

use super::{SelectionResult, StrategyKind};
use crate::network::MobilityNetwork;
use crate::rng::stream_rng;

/// Walks `order`, taking every CBG that still fits within `budget`.
fn fill(
    network: &MobilityNetwork,
    order: impl IntoIterator<Item = usize>,
    budget: f64,
) -> Vec<usize> {
    let mut used = 0.0;
    let mut selected = Vec::new();
    for c in order {
        let n = network.population(c);
        if used + n <= budget {
            used += n;
            selected.push(c);
        }
    }
    selected
}

/// RAND: CBGs in a seeded random order, skipping those that would overflow.
pub fn select_random(network: &MobilityNetwork, budget: f64, rng_seed: u64) -> SelectionResult {
    let mut order: Vec<usize> = (0..network.num_cbgs()).collect();
    order.shuffle(&mut stream_rng(rng_seed, 0));
    let selected = fill(network, order, budget);
    SelectionResult::from_selected(network, StrategyKind::Rand, budget, selected)
}

/// CS: oldest CBGs by median age first (ties by id), skipping those that
/// would overflow.
pub fn select_oldest(network: &MobilityNetwork, budget: f64) -> SelectionResult {
    let cbgs = network.cbgs();
    let mut order: Vec<usize> = (0..cbgs.len()).collect();
    order.sort_by(|&a, &b| {
        cbgs[b]
            .median_age
            .total_cmp(&cbgs[a].median_age)
            .then(cbgs[a].id.cmp(&cbgs[b].id))
    });
    let selected = fill(network, order, budget);
    SelectionResult::from_selected(network, StrategyKind::Cs, budget, selected)
}
