//! A lockdown in which richer CBGs cut their visits more than poorer ones,
//! measured per income quartile and per racial group.

use fairvax::metrics::mobility_reduction;
use fairvax::network::{generate_synthetic, Grouping, SyntheticSpec};

pub fn run_example() -> fairvax::Result<Vec<f64>> {
    let spec = SyntheticSpec {
        cbgs: 60,
        pois: 100,
        horizon_hours: 72,
        mean_visits_per_hour: 600.0,
        ..SyntheticSpec::default()
    };
    let before = generate_synthetic(&spec, 2)?;
    // Q1 keeps 80% of its visits, Q4 keeps 35%.
    let kept = [0.8, 0.65, 0.5, 0.35];
    let cbgs = before.cbgs();
    let visits = before
        .visits()
        .scaled(|_, v| kept[cbgs[v.cbg as usize].income_group as usize - 1])?;
    let after = before.with_visits(visits)?;

    let by_income = mobility_reduction(&before, &after, Grouping::Income)?;
    let by_race = mobility_reduction(&before, &after, Grouping::Race)?;
    for (grouping, values) in [(Grouping::Income, &by_income), (Grouping::Race, &by_race)] {
        let line: Vec<String> = before
            .group_labels(grouping)
            .iter()
            .zip(values.iter())
            .map(|(l, r)| format!("{l}: {:.0}%", 100.0 * r))
            .collect();
        println!("reduction by {grouping}: {}", line.join(", "));
    }
    Ok(by_income)
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
