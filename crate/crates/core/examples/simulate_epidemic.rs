//! One stochastic epidemic against the mean-field expectation, with and
//! without vaccinating the oldest CBGs two weeks in.

use fairvax::disease::{run, run_mean_field, DiseaseParams, Scenario};
use fairvax::network::{generate_synthetic, SyntheticSpec};
use fairvax::select::select_oldest;

pub fn run_example() -> fairvax::Result<(f64, f64)> {
    let spec = SyntheticSpec {
        cbgs: 60,
        pois: 120,
        horizon_hours: 504,
        mean_visits_per_hour: 900.0,
        ..SyntheticSpec::default()
    };
    let network = generate_synthetic(&spec, 11)?;
    let params = DiseaseParams {
        p0: 0.005,
        ..DiseaseParams::default()
    };

    let mut scenario = Scenario::everywhere(&network, 504);
    scenario.record_trajectory = true;
    let sampled = run(&network, &params, &scenario, 42)?;
    let expected = run_mean_field(&network, &params, &scenario)?;

    let trajectory = sampled.trajectory.as_ref().expect("recorded");
    for day in (0..=21).step_by(7) {
        let [s, e, i, r] = trajectory[day * 24];
        println!("day {day:>2}: S={s:.0} E={e:.0} I={i:.0} R={r:.0}");
    }
    let n = network.total_population() as f64;
    println!(
        "exposed or worse after 3 weeks: sampled {:.0} ({:.2}%), mean-field {:.0}",
        sampled.eir_total,
        100.0 * sampled.eir_total / n,
        expected.eir_total
    );

    let oldest = select_oldest(&network, 0.05 * n);
    let vaccinated = Scenario {
        vaccinated: oldest.selected.clone(),
        vaccination_hour: 336,
        ..Scenario::everywhere(&network, 504)
    };
    let after = run(&network, &params, &vaccinated, 42)?;
    println!(
        "vaccinating the {} oldest CBGs at day 14: {:.0} exposed or worse",
        oldest.selected.len(),
        after.eir_total
    );
    Ok((sampled.eir_total, expected.eir_total))
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
