//! CELF lazy evaluation against plain greedy on a weighted-coverage objective.
//! Both pick the same CBGs; CELF needs far fewer evaluations.

use fairvax::network::{Cbg, MobilityNetwork, RiskTable, VisitMatrix};
use fairvax::select::{select_greedy, GreedyOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> fairvax::Result<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = 40;
    let cbgs = (0..k)
        .map(|i| {
            Cbg::new(
                i as u64,
                rng.random_range(100..1000),
                vec![1.0],
                i as f64,
                40.0,
            )
        })
        .collect();
    let network = MobilityNetwork::new(
        cbgs,
        vec![],
        VisitMatrix::empty(0),
        vec!["all".into()],
        &RiskTable::default(),
    )?;

    // Each CBG covers a handful of 200 weighted items; f(Z) is the covered weight.
    let weights: Vec<f64> = (0..200).map(|_| rng.random_range(1.0..10.0)).collect();
    let covers: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            (0..rng.random_range(5..30))
                .map(|_| rng.random_range(0..200))
                .collect()
        })
        .collect();
    let coverage = |z: &[usize]| {
        let mut hit = vec![false; weights.len()];
        z.iter()
            .flat_map(|&c| &covers[c])
            .for_each(|&j| hit[j] = true);
        weights
            .iter()
            .zip(&hit)
            .filter(|(_, &h)| h)
            .map(|(w, _)| w)
            .sum::<f64>()
    };

    let budget = 0.3 * network.total_population() as f64;
    let run = |lazy| {
        select_greedy(
            &network,
            &coverage,
            &GreedyOptions {
                budget,
                grouping: None,
                lazy,
            },
        )
    };
    let lazy = run(true)?;
    let eager = run(false)?;
    assert_eq!(lazy.selected, eager.selected);
    println!("selected {:?}", lazy.selected);
    println!(
        "evaluations: lazy {} vs eager {}; covered weight {:.1}",
        lazy.evaluation_count,
        eager.evaluation_count,
        coverage(&lazy.selected)
    );
    Ok((lazy.evaluation_count, eager.evaluation_count))
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
