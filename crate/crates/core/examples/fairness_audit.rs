//! Audit the oldest-first baseline against age-weighted, income-fair IM:
//! infections averted and KL divergence from population shares.

use fairvax::disease::{DiseaseParams, SimMode};
use fairvax::experiment::{evaluate_selection, MetricSummary};
use fairvax::network::{generate_synthetic, SyntheticSpec};
use fairvax::rng::derive_seed;
use fairvax::select::{select, StrategyKind, StrategySpec};

pub fn run_example() -> fairvax::Result<Vec<(StrategyKind, MetricSummary)>> {
    let spec = SyntheticSpec {
        cbgs: 60,
        pois: 120,
        horizon_hours: 336,
        mean_visits_per_hour: 900.0,
        ..SyntheticSpec::default()
    };
    let network = generate_synthetic(&spec, 5)?;
    let params = DiseaseParams {
        p0: 0.005,
        ..DiseaseParams::default()
    };
    let seeds: Vec<u64> = (0..8).map(|s| derive_seed(99, s)).collect();

    let mut out = Vec::new();
    for kind in [StrategyKind::Cs, StrategyKind::ImIa] {
        let spec = StrategySpec {
            selection_window: 168,
            sigma_mode: SimMode::MeanField,
            ..StrategySpec::new(kind)
        };
        let chosen = select(&network, &params, &spec, 0)?;
        let records = evaluate_selection(&network, &params, &chosen.selected, 168, 336, &seeds)?;
        let s = MetricSummary::from_records(&records).expect("seeds are non-empty");
        let kl = |x: Option<fairvax::experiment::Stat>| {
            x.map_or("-".to_string(), |x| format!("{:.2e}", x.mean))
        };
        println!(
            "{:>5}: {:5.1}% fewer infections, {:5.1}% risk-weighted | treatment KL race {} income {} | outcome KL race {} income {}",
            kind.as_str(),
            s.pct_decrease.mean,
            s.pct_decrease_risk_weighted.mean,
            kl(s.treatment_kl_race),
            kl(s.treatment_kl_income),
            kl(s.outcome_kl_race),
            kl(s.outcome_kl_income),
        );
        out.push((kind, s));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
