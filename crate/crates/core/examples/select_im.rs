//! Influence-maximizing selection and its equal-treatment variants.
//!
//! IM-R caps each racial group's share of the vaccines at its share of the
//! population, IM-I does the same for income quartiles.

use fairvax::disease::{DiseaseParams, SimMode};
use fairvax::metrics::{kl_divergence, treatment_distribution, GroupDistribution};
use fairvax::network::{generate_synthetic, Grouping, SyntheticSpec};
use fairvax::select::{select, SelectionResult, StrategyKind, StrategySpec};

pub fn run_example() -> fairvax::Result<Vec<SelectionResult>> {
    let spec = SyntheticSpec {
        cbgs: 80,
        pois: 160,
        horizon_hours: 168,
        mean_visits_per_hour: 1200.0,
        ..SyntheticSpec::default()
    };
    let network = generate_synthetic(&spec, 3)?;
    let params = DiseaseParams::default();

    let mut results = Vec::new();
    for kind in [StrategyKind::Im, StrategyKind::ImR, StrategyKind::ImI] {
        let spec = StrategySpec {
            selection_window: 168,
            sigma_mode: SimMode::MeanField,
            ..StrategySpec::new(kind)
        };
        let chosen = select(&network, &params, &spec, 0)?;
        let kl = |g| {
            let p = treatment_distribution(&network, &chosen.selected, g)?;
            kl_divergence(&p, &GroupDistribution::reference(&network, g))
        };
        println!(
            "{:>5}: {} CBGs, {:.0} of {:.0} doses, {} sigma evaluations, KL race {:.2e} income {:.2e}",
            kind.as_str(),
            chosen.selected.len(),
            chosen.budget_used,
            chosen.budget,
            chosen.evaluation_count,
            kl(Grouping::Race)?,
            kl(Grouping::Income)?
        );
        results.push(chosen);
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
