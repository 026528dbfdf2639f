//! Generate a segregated synthetic network, round-trip it through the CSV
//! format and look at its demographic structure.

use fairvax::network::{
    generate_synthetic, load_network_dir, write_network_dir, Grouping, SyntheticSpec,
};

pub fn run_example() -> fairvax::Result<Vec<f64>> {
    let spec = SyntheticSpec {
        cbgs: 80,
        pois: 150,
        horizon_hours: 168,
        mean_visits_per_hour: 1200.0,
        ..SyntheticSpec::default()
    };
    let network = generate_synthetic(&spec, 7)?;

    let dir = tempfile::tempdir().expect("temp dir");
    write_network_dir(&network, dir.path())?;
    let reloaded = load_network_dir(dir.path())?;
    assert_eq!(reloaded.cbgs(), network.cbgs());

    println!(
        "{} CBGs, {} POIs, {} residents, {} hourly visit records",
        network.num_cbgs(),
        network.num_pois(),
        network.total_population(),
        network.visits().len()
    );
    let n = network.total_population() as f64;
    for grouping in Grouping::ALL {
        let shares: Vec<String> = network
            .group_labels(grouping)
            .iter()
            .zip(network.group_totals(grouping))
            .map(|(label, total)| format!("{label}={:.3}", total / n))
            .collect();
        println!("{grouping:>6}: {}", shares.join(" "));
    }

    // Share of the first racial group by income quartile.
    let mut by_quartile = [(0.0, 0.0); 4];
    for cbg in network.cbgs() {
        let q = &mut by_quartile[cbg.income_group as usize - 1];
        q.0 += cbg.racial_fractions[0] * cbg.population as f64;
        q.1 += cbg.population as f64;
    }
    let first_group: Vec<f64> = by_quartile.iter().map(|(a, b)| a / b).collect();
    for (q, share) in first_group.iter().enumerate() {
        println!("Q{}: first group share {:.2}", q + 1, share);
    }
    Ok(first_group)
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
