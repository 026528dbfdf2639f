//! Seeded generator for desk-scale mobility networks with demographic structure.
//!
//! CBGs and POIs are scattered on the unit square. Each CBG visits a fixed set
//! of nearby, popular POIs; its hourly visitor count is Poisson with a mean
//! that follows a diurnal profile and the CBG's mobility propensity. Low-income
//! and young CBGs are more mobile. In segregated mode the share of the first
//! racial group rises with median income.

use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma, LogNormal, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{Cbg, MobilityNetwork, Poi, RiskTable, Visit, VisitMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mixing {
    /// Racial composition independent of income.
    Uniform,
    /// Racial composition correlated with income quartile.
    Segregated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub cbgs: usize,
    pub pois: usize,
    pub race_groups: usize,
    pub horizon_hours: usize,
    /// Expected number of POI visits across the whole network per hour.
    pub mean_visits_per_hour: f64,
    pub mixing: Mixing,
    /// Log-odds slope, against standardized income, of a CBG being dominated
    /// by the first racial group.
    pub segregation_strength: f64,
    /// Dirichlet concentration splitting the remaining share among the other
    /// racial groups; small values concentrate it in one group.
    pub minority_concentration: f64,
    pub population_min: u64,
    pub population_max: u64,
    pub income_median: f64,
    pub income_log_sd: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    /// Correlation between standardized income rank and median age.
    pub age_income_correlation: f64,
    /// How much more mobile low-income CBGs are (log-propensity per income sd).
    pub mobility_income_elasticity: f64,
    /// How much less mobile old CBGs are (log-propensity per age sd).
    pub mobility_age_elasticity: f64,
    /// Number of distinct POIs each CBG visits.
    pub pois_per_cbg: usize,
    /// Distance decay of POI choice, in unit-square lengths.
    pub locality_scale: f64,
    pub poi_area_median_sqft: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            cbgs: 200,
            pois: 500,
            race_groups: 4,
            horizon_hours: 840,
            mean_visits_per_hour: 3000.0,
            mixing: Mixing::Segregated,
            segregation_strength: 3.0,
            minority_concentration: 0.1,
            population_min: 300,
            population_max: 3000,
            income_median: 60_000.0,
            income_log_sd: 0.5,
            age_mean: 40.0,
            age_sd: 9.0,
            age_income_correlation: 0.4,
            mobility_income_elasticity: 0.6,
            mobility_age_elasticity: 1.5,
            pois_per_cbg: 20,
            locality_scale: 0.2,
            poi_area_median_sqft: 40_000.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSyntheticSpec(m.to_string()));
        if self.cbgs == 0 {
            return bad("cbgs must be positive");
        }
        if self.pois == 0 {
            return bad("pois must be positive");
        }
        if self.race_groups == 0 {
            return bad("race_groups must be positive");
        }
        if self.horizon_hours == 0 {
            return bad("horizon_hours must be positive");
        }
        if self.pois_per_cbg == 0 {
            return bad("pois_per_cbg must be positive");
        }
        if !(self.mean_visits_per_hour >= 0.0 && self.mean_visits_per_hour.is_finite()) {
            return bad("mean_visits_per_hour must be finite and nonnegative");
        }
        if self.population_min == 0 || self.population_min > self.population_max {
            return bad("population range must satisfy 1 <= population_min <= population_max");
        }
        if !(self.income_median > 0.0 && self.income_log_sd >= 0.0) {
            return bad("income_median must be positive and income_log_sd nonnegative");
        }
        if !(self.age_sd >= 0.0 && (0.0..=120.0).contains(&self.age_mean)) {
            return bad("age_mean must lie in [0, 120] and age_sd be nonnegative");
        }
        if !(-1.0..=1.0).contains(&self.age_income_correlation) {
            return bad("age_income_correlation must lie in [-1, 1]");
        }
        if !(self.minority_concentration > 0.0 && self.minority_concentration.is_finite()) {
            return bad("minority_concentration must be positive");
        }
        if !(self.locality_scale > 0.0 && self.poi_area_median_sqft > 0.0) {
            return bad("locality_scale and poi_area_median_sqft must be positive");
        }
        Ok(())
    }
}

/// Relative visit intensity by hour of day; quiet overnight, peaking mid-afternoon.
fn diurnal(hour_of_day: usize) -> f64 {
    let h = hour_of_day as f64;
    let day = if (6.0..22.0).contains(&h) {
        (std::f64::consts::PI * (h - 6.0) / 16.0).sin()
    } else {
        0.0
    };
    0.1 + day
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Normalizes nonnegative weights onto the simplex.
fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|x| *x = 1.0 / n);
    }
    v
}

fn dirichlet(rng: &mut impl Rng, k: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    normalize((0..k).map(|_| gamma.sample(rng)).collect())
}

/// Racial shares of `n` residents drawn as whole-person counts, so groups
/// with an expected count well under one are usually absent.
fn resident_shares(rng: &mut impl Rng, n: u64, probs: &[f64]) -> Vec<f64> {
    let mut remaining = n;
    let mut prob_left = 1.0;
    let mut shares = Vec::with_capacity(probs.len());
    for (j, &p) in probs.iter().enumerate() {
        let count = if j + 1 == probs.len() {
            remaining
        } else {
            let q = (p / prob_left).clamp(0.0, 1.0);
            Binomial::new(remaining, q)
                .expect("valid binomial")
                .sample(rng)
        };
        prob_left -= p;
        remaining -= count;
        shares.push(count as f64 / n as f64);
    }
    shares
}

/// Generates a network that is a pure function of `(spec, seed)`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<MobilityNetwork> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.cbgs;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let cbg_pos: Vec<(f64, f64)> = (0..k).map(|_| (rng.random(), rng.random())).collect();
    let poi_pos: Vec<(f64, f64)> = (0..spec.pois)
        .map(|_| (rng.random(), rng.random()))
        .collect();

    let populations: Vec<u64> = (0..k)
        .map(|_| rng.random_range(spec.population_min..=spec.population_max))
        .collect();
    let income_dist =
        LogNormal::new(spec.income_median.ln(), spec.income_log_sd).expect("valid lognormal");
    let incomes: Vec<f64> = (0..k)
        .map(|_| (income_dist.sample(&mut rng) / 10.0).round() * 10.0)
        .collect();

    // Standardized income rank: uniform on [-sqrt(3), sqrt(3)], unit variance.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| incomes[a].total_cmp(&incomes[b]).then(a.cmp(&b)));
    let mut z_income = vec![0.0; k];
    for (rank, &i) in order.iter().enumerate() {
        let u = if k == 1 {
            0.5
        } else {
            rank as f64 / (k - 1) as f64
        };
        z_income[i] = (u - 0.5) * 12f64.sqrt();
    }

    let m = spec.race_groups;
    let fractions: Vec<Vec<f64>> = (0..k)
        .map(|i| match (m, spec.mixing) {
            (1, _) => vec![1.0],
            (_, Mixing::Uniform) => dirichlet(&mut rng, m, 2.0),
            (_, Mixing::Segregated) => {
                // The first group dominates high-income CBGs; the others
                // share the rest of the income range.
                let logit = 0.4
                    + spec.segregation_strength * z_income[i]
                    + 0.5 * std_normal.sample(&mut rng);
                let dominant = if rng.random::<f64>() < 1.0 / (1.0 + (-logit).exp()) {
                    0
                } else {
                    rng.random_range(1..m)
                };
                let share = rng.random_range(0.7..1.0);
                let rest = dirichlet(&mut rng, m - 1, spec.minority_concentration);
                let mut v: Vec<f64> = rest.into_iter().map(|r| r * (1.0 - share)).collect();
                v.insert(dominant, share);
                v
            }
        })
        .collect();
    let fractions: Vec<Vec<f64>> = fractions
        .iter()
        .zip(&populations)
        .map(|(probs, &n)| resident_shares(&mut rng, n, probs))
        .collect();

    let rho = spec.age_income_correlation;
    let ages: Vec<f64> = (0..k)
        .map(|i| {
            let z = rho * z_income[i] + (1.0 - rho * rho).sqrt() * std_normal.sample(&mut rng);
            ((spec.age_mean + spec.age_sd * z).clamp(18.0, 95.0) * 10.0).round() / 10.0
        })
        .collect();

    let propensity: Vec<f64> = (0..k)
        .map(|i| {
            let z_age = if spec.age_sd > 0.0 {
                (ages[i] - spec.age_mean) / spec.age_sd
            } else {
                0.0
            };
            (-spec.mobility_income_elasticity * z_income[i] - spec.mobility_age_elasticity * z_age
                + 0.25 * std_normal.sample(&mut rng))
            .exp()
        })
        .collect();

    let area_dist = LogNormal::new(spec.poi_area_median_sqft.ln(), 0.8).expect("valid lognormal");
    let popularity_dist = LogNormal::new(0.0, 1.0).expect("valid lognormal");
    let pois: Vec<Poi> = (0..spec.pois)
        .map(|p| Poi {
            id: p as u64,
            area_sqft: area_dist.sample(&mut rng).clamp(100.0, 200_000.0).round(),
            dwell_fraction: (rng.random_range(0.05..0.8f64) * 100.0).round() / 100.0,
        })
        .collect();
    let popularity: Vec<f64> = (0..spec.pois)
        .map(|_| popularity_dist.sample(&mut rng))
        .collect();

    // Each CBG's visited POIs and the probability of choosing each.
    let per_cbg = spec.pois_per_cbg.min(spec.pois);
    let choices: Vec<Vec<(u32, f64)>> = (0..k)
        .map(|i| {
            let weight = |p: usize| {
                popularity[p] * (-dist(cbg_pos[i], poi_pos[p]) / spec.locality_scale).exp()
            };
            let picked = sample_weighted(&mut rng, spec.pois, |p| weight(p).max(1e-300), per_cbg)
                .expect("positive weights");
            let mut picked: Vec<usize> = picked.into_iter().collect();
            picked.sort_unstable();
            let probs = normalize(picked.iter().map(|&p| weight(p)).collect());
            picked.into_iter().map(|p| p as u32).zip(probs).collect()
        })
        .collect();

    let mass: Vec<f64> = (0..k)
        .map(|i| populations[i] as f64 * propensity[i])
        .collect();
    let total_mass: f64 = mass.iter().sum();
    let diurnal_mean = (0..24).map(diurnal).sum::<f64>() / 24.0;

    let mut triplets = Vec::new();
    for t in 0..spec.horizon_hours {
        let hourly = spec.mean_visits_per_hour * diurnal(t % 24) / diurnal_mean;
        for i in 0..k {
            let mean = hourly * mass[i] / total_mass;
            if mean <= 0.0 {
                continue;
            }
            let mut remaining = Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64;
            let mut prob_left = 1.0;
            for (slot, &(poi, prob)) in choices[i].iter().enumerate() {
                if remaining == 0 {
                    break;
                }
                let count = if slot + 1 == choices[i].len() {
                    remaining
                } else {
                    let p = (prob / prob_left).clamp(0.0, 1.0);
                    Binomial::new(remaining, p)
                        .expect("valid binomial")
                        .sample(&mut rng)
                };
                prob_left -= prob;
                remaining -= count;
                if count > 0 {
                    triplets.push((
                        t,
                        Visit {
                            cbg: i as u32,
                            poi,
                            weight: count as f64,
                        },
                    ));
                }
            }
        }
    }

    let cbgs: Vec<Cbg> = (0..k)
        .map(|i| {
            Cbg::new(
                i as u64,
                populations[i],
                fractions[i].clone(),
                incomes[i],
                ages[i],
            )
        })
        .collect();
    let race_labels = (1..=m).map(|j| j.to_string()).collect();
    let visits = VisitMatrix::from_triplets(spec.horizon_hours, triplets)?;
    MobilityNetwork::new(cbgs, pois, visits, race_labels, &RiskTable::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            cbgs: 40,
            pois: 60,
            horizon_hours: 48,
            mean_visits_per_hour: 200.0,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate_synthetic(&small(), 7).unwrap();
        let b = generate_synthetic(&small(), 7).unwrap();
        assert_eq!(a.cbgs(), b.cbgs());
        assert_eq!(a.pois(), b.pois());
        assert_eq!(a.visits(), b.visits());
        let c = generate_synthetic(&small(), 8).unwrap();
        assert_ne!(a.cbgs(), c.cbgs());
    }

    #[test]
    fn single_cbg_network() {
        let spec = SyntheticSpec { cbgs: 1, ..small() };
        let net = generate_synthetic(&spec, 1).unwrap();
        assert_eq!(net.num_cbgs(), 1);
        assert_eq!(net.cbgs()[0].income_group, 1);
    }

    #[test]
    fn rejects_nonpositive_sizes() {
        for spec in [
            SyntheticSpec { cbgs: 0, ..small() },
            SyntheticSpec { pois: 0, ..small() },
            SyntheticSpec {
                race_groups: 0,
                ..small()
            },
            SyntheticSpec {
                horizon_hours: 0,
                ..small()
            },
            SyntheticSpec {
                population_min: 0,
                ..small()
            },
        ] {
            assert!(matches!(
                generate_synthetic(&spec, 1),
                Err(Error::InvalidSyntheticSpec(_))
            ));
        }
    }

    #[test]
    fn income_quartiles_balanced() {
        let net = generate_synthetic(&small(), 3).unwrap();
        let mut counts = [0usize; 4];
        for c in net.cbgs() {
            counts[c.income_group as usize - 1] += 1;
        }
        assert_eq!(counts, [10, 10, 10, 10]);
    }

    #[test]
    fn low_income_cbgs_visit_more() {
        let spec = SyntheticSpec {
            cbgs: 200,
            mean_visits_per_hour: 2000.0,
            ..small()
        };
        let net = generate_synthetic(&spec, 5).unwrap();
        let mut per_capita = [0.0f64; 4];
        let mut pop = [0.0f64; 4];
        for (_, v) in net.visits().iter() {
            per_capita[net.cbgs()[v.cbg as usize].income_group as usize - 1] += v.weight;
        }
        for c in net.cbgs() {
            pop[c.income_group as usize - 1] += c.population as f64;
        }
        let rate: Vec<f64> = (0..4).map(|q| per_capita[q] / pop[q]).collect();
        assert!(rate[0] > rate[3], "{rate:?}");
    }
}
