#![allow(dead_code)]

use fairvax::disease::{init_state, DiseaseParams, Sampled, SeirState, SimMode, Stepper};
use fairvax::network::{
    generate_synthetic, Cbg, MobilityNetwork, Poi, RiskTable, SyntheticSpec, Visit, VisitMatrix,
};
use fairvax::rng::stream_rng;

/// `(population, racial fractions, median income, median age)`.
pub type Row<'a> = (u64, &'a [f64], f64, f64);

pub fn network(
    rows: &[Row<'_>],
    pois: usize,
    horizon: usize,
    visits: &[(usize, u32, u32, f64)],
) -> MobilityNetwork {
    let m = rows[0].1.len();
    let cbgs = rows
        .iter()
        .enumerate()
        .map(|(i, &(n, fr, inc, age))| Cbg::new(100 + i as u64, n, fr.to_vec(), inc, age))
        .collect();
    let pois = (0..pois)
        .map(|p| Poi {
            id: 500 + p as u64,
            area_sqft: 1_000.0,
            dwell_fraction: 0.5,
        })
        .collect();
    let triplets = visits
        .iter()
        .map(|&(t, cbg, poi, weight)| (t, Visit { cbg, poi, weight }))
        .collect();
    MobilityNetwork::new(
        cbgs,
        pois,
        VisitMatrix::from_triplets(horizon, triplets).unwrap(),
        (0..m).map(|j| format!("g{j}")).collect(),
        &RiskTable::default(),
    )
    .unwrap()
}

/// Equal-sized single-race CBGs with no visits.
pub fn isolated(pops: &[u64]) -> MobilityNetwork {
    let rows: Vec<Row<'_>> = pops
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, &[1.0][..], 1_000.0 * (i + 1) as f64, 40.0))
        .collect();
    network(&rows, 0, 0, &[])
}

pub fn small_spec(cbgs: usize, horizon: usize) -> SyntheticSpec {
    SyntheticSpec {
        cbgs,
        pois: (cbgs * 3).max(4),
        horizon_hours: horizon,
        mean_visits_per_hour: 15.0 * cbgs as f64,
        pois_per_cbg: 5,
        ..SyntheticSpec::default()
    }
}

pub fn small_network(cbgs: usize, horizon: usize, seed: u64) -> MobilityNetwork {
    generate_synthetic(&small_spec(cbgs, horizon), seed).unwrap()
}

/// Steps a stochastic run hour by hour, handing every intermediate state to `check`.
pub fn stochastic_states(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    seeded: &[usize],
    hours: usize,
    seed: u64,
    mut check: impl FnMut(&SeirState, &SeirState),
) {
    let mut state = init_state(network, seeded, params.p0, SimMode::Stochastic).unwrap();
    let mut stepper = Stepper::new(network, params);
    let mut draws = Sampled(stream_rng(seed, 0));
    let none = vec![false; network.num_cbgs()];
    for _ in 0..hours {
        let before = state.clone();
        stepper.step(&mut state, &none, &mut draws);
        check(&before, &state);
    }
}

/// Every subset of `0..k` as a sorted index list.
pub fn subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << k).map(move |mask| (0..k).filter(|i| mask >> i & 1 == 1).collect())
}

/// Reference greedy: each round scans every remaining CBG that still fits the
/// budget and takes the best population-normalized gain, lowest index on ties.
pub fn stepwise_greedy(
    network: &MobilityNetwork,
    f: &impl Fn(&[usize]) -> f64,
    budget: f64,
) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut used = 0.0;
    let mut spread = 0.0;
    loop {
        let mut best: Option<(usize, f64, f64)> = None;
        for c in 0..network.num_cbgs() {
            let n = network.population(c);
            if chosen.contains(&c) || used + n > budget + 1e-9 {
                continue;
            }
            let mut z = chosen.clone();
            z.push(c);
            let value = f(&z);
            let gain = (value - spread) / n;
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((c, gain, value));
            }
        }
        let Some((c, _, value)) = best else { break };
        chosen.push(c);
        used += network.population(c);
        spread = value;
    }
    chosen
}

/// Best influence over every subset whose population fits `budget`.
pub fn brute_force_optimum(
    network: &MobilityNetwork,
    f: &impl Fn(&[usize]) -> f64,
    budget: f64,
) -> (Vec<usize>, f64) {
    subsets(network.num_cbgs())
        .filter(|z| z.iter().map(|&c| network.population(c)).sum::<f64>() <= budget + 1e-9)
        .map(|z| {
            let v = f(&z);
            (z, v)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}
