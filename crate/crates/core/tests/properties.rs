mod common;

use std::collections::HashMap;

use fairvax::disease::{
    init_state, run, run_mean_field, sigma, sigma_a, DiseaseParams, Expected, InfluenceConfig,
    Sampled, Scenario, SimMode, Stepper,
};
use fairvax::metrics::{kl_divergence, pct_decrease, treatment_distribution, GroupDistribution};
use fairvax::network::{
    generate_synthetic, write_network_dir, Grouping, Mixing, RiskTable, SyntheticSpec,
    INCOME_GROUPS,
};
use fairvax::rng::stream_rng;
use fairvax::select::{
    compute_group_budgets, select, select_greedy, select_oldest, GreedyOptions, StrategyKind,
    StrategySpec, GROUP_SLACK,
};
use proptest::prelude::*;

use common::*;

fn mean_field_sigma(
    net: &fairvax::network::MobilityNetwork,
    params: &DiseaseParams,
    window: usize,
) -> impl Fn(&[usize]) -> f64 + Sync {
    let net = net.clone();
    let params = params.clone();
    let config = InfluenceConfig::new(window, 1, SimMode::MeanField, 0);
    move |z: &[usize]| sigma(&net, &params, z, &config).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compartments_conserve_population(
        k in 1usize..8,
        net_seed in 0u64..1000,
        run_seed in any::<u64>(),
        beta_home in 0.0f64..0.5,
        psi in 0.0f64..3000.0,
        p0 in 0.001f64..0.3,
        delta_e in 1.0f64..120.0,
        delta_i in 1.0f64..120.0,
    ) {
        let net = small_network(k, 48, net_seed);
        let params = DiseaseParams { beta_home, psi, p0, delta_e_hours: delta_e, delta_i_hours: delta_i };
        let seeded: Vec<usize> = (0..k).step_by(2).collect();
        stochastic_states(&net, &params, &seeded, 48, run_seed, |before, after| {
            for c in 0..k {
                let n = net.population(c);
                assert_eq!(after.s[c] + after.e[c] + after.i[c] + after.r[c], n);
                assert!(after.r[c] >= before.r[c]);
                assert!(after.s[c] <= before.s[c]);
                for x in [after.s[c], after.e[c], after.i[c], after.r[c]] {
                    assert!(x >= 0.0 && x.fract() == 0.0);
                }
            }
        });
    }

    #[test]
    fn mean_field_sigma_grows_with_the_seed_set(
        net_seed in 0u64..1000,
        base in proptest::collection::vec(0usize..6, 0..4),
        extra in 0usize..6,
    ) {
        let net = small_network(6, 72, net_seed);
        let f = mean_field_sigma(&net, &DiseaseParams::default(), 72);
        let mut z = base.clone();
        z.sort_unstable();
        z.dedup();
        let smaller = f(&z);
        z.push(extra);
        z.sort_unstable();
        z.dedup();
        prop_assert!(f(&z) >= smaller - 1e-9);
    }

    #[test]
    fn selections_stay_within_budgets(
        k in 2usize..12,
        net_seed in 0u64..1000,
        fraction in 0.05f64..0.6,
        kind in proptest::sample::select(StrategyKind::ALL.to_vec()),
    ) {
        let net = small_network(k, 24, net_seed);
        let spec = StrategySpec {
            budget_fraction: fraction,
            selection_window: 24,
            sigma_mode: SimMode::MeanField,
            ..StrategySpec::new(kind)
        };
        let r = select(&net, &DiseaseParams::default(), &spec, net_seed).unwrap();
        let budget = fraction * net.total_population() as f64;
        prop_assert!(r.budget_used <= budget + 1e-9);
        if let Some(g) = kind.fairness_grouping() {
            let b = compute_group_budgets(&net, g, budget);
            for (used, cap) in r.used_by_group(g).iter().zip(&b.budgets) {
                prop_assert!(*used <= cap + GROUP_SLACK);
            }
        }
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_itself(masses in proptest::collection::vec(0.01f64..10.0, 1..6)) {
        let p = GroupDistribution::from_masses(Grouping::Race, &masses).unwrap();
        prop_assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let mut shifted = masses.clone();
        shifted[0] *= 3.0;
        let q = GroupDistribution::from_masses(Grouping::Race, &shifted).unwrap();
        prop_assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
    }
}

#[test]
fn no_transmission_leaves_only_the_initial_exposures() {
    let net = small_network(10, 120, 4);
    let params = DiseaseParams {
        beta_home: 0.0,
        psi: 0.0,
        ..DiseaseParams::default()
    };
    let scenario = Scenario::everywhere(&net, 120);
    let initial = init_state(&net, &scenario.seeded, params.p0, SimMode::Stochastic).unwrap();
    let result = run(&net, &params, &scenario, 9).unwrap();
    assert_eq!(result.eir_total, initial.e.iter().sum::<f64>());
}

#[test]
fn philadelphia_seeding_exposes_one_in_a_thousand() {
    let params = DiseaseParams::default();
    assert_eq!(
        (params.beta_home, params.psi, params.p0),
        (0.02, 300.0, 0.001)
    );
    let net = isolated(&[1000]);
    let state = init_state(&net, &[0], params.p0, SimMode::Stochastic).unwrap();
    assert_eq!((state.s[0], state.e[0]), (999.0, 1.0));
}

#[test]
fn home_exposures_average_the_binomial_mean() {
    let net = isolated(&[1000]);
    let params = DiseaseParams {
        psi: 0.0,
        delta_e_hours: 1e9,
        delta_i_hours: 1e9,
        ..DiseaseParams::default()
    };
    let mut start = init_state(&net, &[], params.p0, SimMode::Stochastic).unwrap();
    start.s[0] = 900.0;
    start.i[0] = 100.0;
    let mut stepper = Stepper::new(&net, &params);

    let mut expected = start.clone();
    stepper.step(&mut expected, &[false], &mut Expected);
    assert!((900.0 - expected.s[0] - 1.8).abs() < 1e-12);

    let draws = 100_000;
    let mut rng = Sampled(stream_rng(3, 0));
    let mut total = 0.0;
    for _ in 0..draws {
        let mut s = start.clone();
        stepper.step(&mut s, &[false], &mut rng);
        total += 900.0 - s.s[0];
    }
    let mean = total / draws as f64;
    assert!((mean - 1.8).abs() < 0.03, "mean {mean}");
}

#[test]
fn sigma_is_monotone_on_every_pair_of_subsets() {
    let net = small_network(5, 168, 11);
    let f = mean_field_sigma(&net, &DiseaseParams::default(), 168);
    let values: HashMap<Vec<usize>, f64> = subsets(5).map(|z| (z.clone(), f(&z))).collect();
    for (a, fa) in &values {
        for (b, fb) in &values {
            let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
            union.sort_unstable();
            union.dedup();
            assert!(values[&union] >= fa.max(*fb) - 1e-9, "{a:?} {b:?}");
        }
    }
}

/// Two young CBGs sharing a POI, the first more mobile, and one old CBG that stays home.
fn young_mobile_old_isolated() -> fairvax::network::MobilityNetwork {
    let visits: Vec<_> = (0..168)
        .flat_map(|t| [(t, 0, 0, 3.0), (t, 1, 0, 1.0)])
        .collect();
    network(
        &[
            (1000, &[1.0], 50_000.0, 25.0),
            (1000, &[1.0], 60_000.0, 25.0),
            (1000, &[1.0], 70_000.0, 90.0),
        ],
        1,
        168,
        &visits,
    )
}

#[test]
fn risk_weighting_changes_the_candidate_ranking() {
    let net = young_mobile_old_isolated();
    assert_eq!(net.cbgs()[2].risk_weight, 350.0);
    let params = DiseaseParams {
        p0: 0.01,
        ..DiseaseParams::default()
    };
    let config = InfluenceConfig::new(168, 1, SimMode::MeanField, 0);
    let rank = |weighted: bool| {
        let score = |c: usize| {
            if weighted {
                sigma_a(&net, &params, &[c], &config).unwrap()
            } else {
                sigma(&net, &params, &[c], &config).unwrap()
            }
        };
        (0..3)
            .max_by(|a, b| score(*a).total_cmp(&score(*b)))
            .unwrap()
    };
    assert_eq!(rank(false), 0);
    assert_eq!(rank(true), 2);
}

#[test]
fn three_cbg_greedy_matches_the_oracles() {
    let net = young_mobile_old_isolated();
    let f = mean_field_sigma(&net, &DiseaseParams::default(), 168);
    let budget = 2000.0;
    for lazy in [true, false] {
        let r = select_greedy(
            &net,
            &f,
            &GreedyOptions {
                budget,
                grouping: None,
                lazy,
            },
        )
        .unwrap();
        assert_eq!(r.selected, stepwise_greedy(&net, &f, budget));
        assert_eq!(r.selected.len(), 2);
        let (_, best) = brute_force_optimum(&net, &f, budget);
        let ratio = f(&r.selected) / best;
        println!("greedy/optimal = {ratio:.4}");
        assert!(ratio >= 0.63);
    }
}

#[test]
fn segregated_networks_tie_race_to_income() {
    for seed in [0, 7] {
        let net = generate_synthetic(&SyntheticSpec::default(), seed).unwrap();
        let xs: Vec<f64> = net.cbgs().iter().map(|c| c.income_group as f64).collect();
        let ys: Vec<f64> = net.cbgs().iter().map(|c| c.racial_fractions[0]).collect();
        let r = pearson(&xs, &ys);
        assert!(r > 0.5, "seed {seed}: r = {r}");
    }
    let uniform = SyntheticSpec {
        mixing: Mixing::Uniform,
        ..SyntheticSpec::default()
    };
    let net = generate_synthetic(&uniform, 0).unwrap();
    let xs: Vec<f64> = net.cbgs().iter().map(|c| c.income_group as f64).collect();
    let ys: Vec<f64> = net.cbgs().iter().map(|c| c.racial_fractions[0]).collect();
    assert!(pearson(&xs, &ys).abs() < 0.3);
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn generation_is_byte_identical_per_seed() {
    let spec = SyntheticSpec {
        cbgs: 200,
        pois: 500,
        horizon_hours: 840,
        ..SyntheticSpec::default()
    };
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        write_network_dir(
            &generate_synthetic(&spec, 7).unwrap(),
            &dir.path().join(name),
        )
        .unwrap();
    }
    for file in ["cbgs.csv", "pois.csv", "visits.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
}

#[test]
fn single_cbg_network_is_valid() {
    let net = generate_synthetic(&small_spec(1, 24), 0).unwrap();
    assert_eq!(net.num_cbgs(), 1);
    let r = run_mean_field(
        &net,
        &DiseaseParams::default(),
        &Scenario::everywhere(&net, 24),
    )
    .unwrap();
    assert!(r.eir_total > 0.0);
}

#[test]
fn eight_equal_cbgs_split_the_budget_in_quarters() {
    let net = isolated(&[500; 8]);
    let groups: Vec<u8> = net.cbgs().iter().map(|c| c.income_group).collect();
    assert_eq!(groups, [1, 1, 2, 2, 3, 3, 4, 4]);
    let b = compute_group_budgets(&net, Grouping::Income, 400.0);
    assert_eq!(b.budgets, vec![100.0; INCOME_GROUPS]);
}

#[test]
fn death_risk_multipliers() {
    let t = RiskTable::death();
    assert_eq!(t.multiplier(35.0), 3.5);
    assert_eq!(t.multiplier(86.0), 350.0);
    assert_eq!(t.multiplier(22.0), 1.0);
}

#[test]
fn five_percent_of_the_baseline() {
    assert_eq!(pct_decrease(360_000.0, 342_000.0).unwrap(), 5.0);
}

#[test]
fn vaccinated_populations_respect_a_five_percent_budget() {
    let spec = SyntheticSpec {
        cbgs: 100,
        pois: 200,
        horizon_hours: 48,
        mean_visits_per_hour: 1000.0,
        population_min: 1000,
        population_max: 1000,
        ..SyntheticSpec::default()
    };
    let net = generate_synthetic(&spec, 2).unwrap();
    assert_eq!(net.total_population(), 100_000);
    for kind in StrategyKind::ALL {
        let spec = StrategySpec {
            selection_window: 48,
            sigma_mode: SimMode::MeanField,
            ..StrategySpec::new(kind)
        };
        let r = select(&net, &DiseaseParams::default(), &spec, 0).unwrap();
        assert!(r.budget_used <= 5000.0, "{kind}: {}", r.budget_used);
        if kind != StrategyKind::None && kind.fairness_grouping().is_none() {
            assert_eq!(r.budget_used, 5000.0, "{kind}");
        }
    }
}

#[test]
fn oldest_first_skips_what_does_not_fit() {
    let net = network(
        &[
            (500, &[1.0], 1.0, 80.0),
            (200, &[1.0], 2.0, 60.0),
            (200, &[1.0], 3.0, 40.0),
        ],
        0,
        0,
        &[],
    );
    assert_eq!(select_oldest(&net, 300.0).selected, vec![1]);
    assert_eq!(select_oldest(&net, 700.0).selected, vec![0, 1]);
}

#[test]
fn treatment_shares_follow_vaccinated_populations() {
    let net = network(
        &[(100, &[1.0, 0.0], 1.0, 40.0), (300, &[0.0, 1.0], 2.0, 40.0)],
        0,
        0,
        &[],
    );
    let p = treatment_distribution(&net, &[0, 1], Grouping::Race).unwrap();
    assert_eq!(p.values, vec![0.25, 0.75]);
}
