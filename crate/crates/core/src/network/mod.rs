//! Temporal bipartite mobility network between census block groups (CBGs) and
//! points of interest (POIs).
//!
//! Node sets are fixed; only the hourly visit weights vary. Visits are stored
//! sparse, one contiguous block of `(cbg, poi, weight)` triplets per hour, so
//! the simulator can stream the graph hour by hour.

mod demographics;
mod io;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use demographics::{
    assign_income_groups, assign_risk_weights, income_quartile_bounds, RiskTable,
};
pub use io::{load_network, load_network_dir, write_network_dir, CBG_FILE, POI_FILE, VISITS_FILE};
pub use synthetic::{generate_synthetic, Mixing, SyntheticSpec};

/// Tolerance on `sum(racial_fractions) == 1`.
pub const FRACTION_TOLERANCE: f64 = 1e-9;

/// Number of income groups (quartiles of the CBG median-income distribution).
pub const INCOME_GROUPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cbg {
    /// External identifier, as it appears in the input files.
    pub id: u64,
    pub population: u64,
    /// Fraction of residents in each racial group; sums to one.
    pub racial_fractions: Vec<f64>,
    pub median_income: f64,
    /// Income quartile, `1..=4`.
    pub income_group: u8,
    pub median_age: f64,
    /// Age-associated risk multiplier (1 for the 18-29 reference bracket).
    pub risk_weight: f64,
}

impl Cbg {
    pub fn new(
        id: u64,
        population: u64,
        racial_fractions: Vec<f64>,
        median_income: f64,
        median_age: f64,
    ) -> Self {
        Cbg {
            id,
            population,
            racial_fractions,
            median_income,
            income_group: 1,
            median_age,
            risk_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poi {
    pub id: u64,
    pub area_sqft: f64,
    /// Median fraction of an hour a visitor spends at the POI, in `(0, 1]`.
    pub dwell_fraction: f64,
}

/// One hourly edge of the bipartite graph: `weight` residents of `cbg` visit `poi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub cbg: u32,
    pub poi: u32,
    pub weight: f64,
}

/// Sparse hourly visit weights `w^t_ij`.
///
/// Hours at or beyond `horizon` carry no visits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VisitMatrix {
    horizon: usize,
    offsets: Vec<usize>,
    visits: Vec<Visit>,
}

impl VisitMatrix {
    /// Builds the matrix from `(hour, visit)` pairs in any order. Triplets are
    /// sorted by `(hour, cbg, poi)`; duplicate edges within an hour are kept.
    pub fn from_triplets(horizon: usize, mut triplets: Vec<(usize, Visit)>) -> Result<Self> {
        for (hour, v) in &triplets {
            if *hour >= horizon {
                return Err(Error::InvalidNetwork(format!(
                    "visit at hour {hour} is outside the horizon {horizon}"
                )));
            }
            if !v.weight.is_finite() || v.weight < 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "visit weight {} at hour {hour} is not finite and nonnegative",
                    v.weight
                )));
            }
        }
        triplets.sort_by(|(ha, a), (hb, b)| (ha, a.cbg, a.poi).cmp(&(hb, b.cbg, b.poi)));
        let mut offsets = vec![0usize; horizon + 1];
        for (hour, _) in &triplets {
            offsets[hour + 1] += 1;
        }
        for t in 0..horizon {
            offsets[t + 1] += offsets[t];
        }
        Ok(VisitMatrix {
            horizon,
            offsets,
            visits: triplets.into_iter().map(|(_, v)| v).collect(),
        })
    }

    pub fn empty(horizon: usize) -> Self {
        VisitMatrix {
            horizon,
            offsets: vec![0; horizon + 1],
            visits: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Visits during `hour`, sorted by `(cbg, poi)`.
    pub fn hour(&self, hour: usize) -> &[Visit] {
        if hour >= self.horizon {
            return &[];
        }
        &self.visits[self.offsets[hour]..self.offsets[hour + 1]]
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Iterates `(hour, visit)` over all stored triplets.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Visit)> + '_ {
        (0..self.horizon).flat_map(move |t| self.hour(t).iter().map(move |v| (t, v)))
    }

    /// Returns a copy with every weight multiplied by `factor(visit)`.
    pub fn scaled(&self, mut factor: impl FnMut(usize, &Visit) -> f64) -> Result<Self> {
        let triplets = self
            .iter()
            .map(|(t, v)| {
                let mut v = *v;
                v.weight *= factor(t, &v);
                (t, v)
            })
            .collect();
        VisitMatrix::from_triplets(self.horizon, triplets)
    }
}

/// Social grouping used for budgets and fairness audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Race,
    Income,
}

impl Grouping {
    pub const ALL: [Grouping; 2] = [Grouping::Race, Grouping::Income];

    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::Race => "race",
            Grouping::Income => "income",
        }
    }
}

impl std::fmt::Display for Grouping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct MobilityNetwork {
    cbgs: Vec<Cbg>,
    pois: Vec<Poi>,
    visits: VisitMatrix,
    race_labels: Vec<String>,
    income_labels: Vec<String>,
    race_totals: Vec<f64>,
    income_totals: Vec<f64>,
    total_population: u64,
}

impl MobilityNetwork {
    /// Validates the inputs, assigns income quartiles and risk weights, and
    /// computes the group population totals `N_j` for both groupings.
    pub fn new(
        mut cbgs: Vec<Cbg>,
        pois: Vec<Poi>,
        visits: VisitMatrix,
        race_labels: Vec<String>,
        risk_table: &RiskTable,
    ) -> Result<Self> {
        if cbgs.is_empty() {
            return Err(Error::InvalidNetwork("network has no CBGs".into()));
        }
        let m = race_labels.len();
        if m == 0 {
            return Err(Error::InvalidNetwork(
                "at least one racial group is required".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, c) in cbgs.iter().enumerate() {
            if !seen.insert(c.id) {
                return Err(Error::InvalidNetwork(format!("duplicate CBG id {}", c.id)));
            }
            validate_cbg(c, m)
                .map_err(|msg| Error::InvalidNetwork(format!("CBG {} (index {i}): {msg}", c.id)))?;
        }
        let mut seen = std::collections::HashSet::new();
        for p in &pois {
            if !seen.insert(p.id) {
                return Err(Error::InvalidNetwork(format!("duplicate POI id {}", p.id)));
            }
            if !(p.area_sqft > 0.0 && p.area_sqft.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "POI {}: area must be positive, got {}",
                    p.id, p.area_sqft
                )));
            }
            if !(p.dwell_fraction > 0.0 && p.dwell_fraction <= 1.0) {
                return Err(Error::InvalidNetwork(format!(
                    "POI {}: dwell fraction must lie in (0, 1], got {}",
                    p.id, p.dwell_fraction
                )));
            }
        }
        for (t, v) in visits.iter() {
            if v.cbg as usize >= cbgs.len() || v.poi as usize >= pois.len() {
                return Err(Error::InvalidNetwork(format!(
                    "visit at hour {t} references CBG index {} / POI index {} out of range",
                    v.cbg, v.poi
                )));
            }
        }

        assign_income_groups(&mut cbgs);
        assign_risk_weights(&mut cbgs, risk_table);

        let total_population = cbgs.iter().map(|c| c.population).sum();
        let mut race_totals = vec![0.0; m];
        let mut income_totals = vec![0.0; INCOME_GROUPS];
        for c in &cbgs {
            let n = c.population as f64;
            for (total, a) in race_totals.iter_mut().zip(&c.racial_fractions) {
                *total += a * n;
            }
            income_totals[c.income_group as usize - 1] += n;
        }
        Ok(MobilityNetwork {
            cbgs,
            pois,
            visits,
            race_labels,
            income_labels: (1..=INCOME_GROUPS).map(|q| format!("Q{q}")).collect(),
            race_totals,
            income_totals,
            total_population,
        })
    }

    pub fn cbgs(&self) -> &[Cbg] {
        &self.cbgs
    }

    pub fn pois(&self) -> &[Poi] {
        &self.pois
    }

    pub fn visits(&self) -> &VisitMatrix {
        &self.visits
    }

    pub fn num_cbgs(&self) -> usize {
        self.cbgs.len()
    }

    pub fn num_pois(&self) -> usize {
        self.pois.len()
    }

    pub fn race_labels(&self) -> &[String] {
        &self.race_labels
    }

    pub fn income_labels(&self) -> &[String] {
        &self.income_labels
    }

    /// Total population `N`.
    pub fn total_population(&self) -> u64 {
        self.total_population
    }

    pub fn population(&self, cbg: usize) -> f64 {
        self.cbgs[cbg].population as f64
    }

    pub fn group_labels(&self, grouping: Grouping) -> &[String] {
        match grouping {
            Grouping::Race => &self.race_labels,
            Grouping::Income => &self.income_labels,
        }
    }

    pub fn num_groups(&self, grouping: Grouping) -> usize {
        self.group_labels(grouping).len()
    }

    /// Group population totals `N_j`.
    pub fn group_totals(&self, grouping: Grouping) -> &[f64] {
        match grouping {
            Grouping::Race => &self.race_totals,
            Grouping::Income => &self.income_totals,
        }
    }

    /// Adds `amount` residents of CBG `cbg` to `out`, split across groups:
    /// by racial fractions for race, entirely to the CBG's own quartile for income.
    pub fn apportion(&self, cbg: usize, grouping: Grouping, amount: f64, out: &mut [f64]) {
        let c = &self.cbgs[cbg];
        match grouping {
            Grouping::Race => {
                for (o, a) in out.iter_mut().zip(&c.racial_fractions) {
                    *o += a * amount;
                }
            }
            Grouping::Income => out[c.income_group as usize - 1] += amount,
        }
    }

    /// Looks up the dense index of an external CBG id.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.cbgs.iter().position(|c| c.id == id)
    }

    /// Same nodes, different visits; used for before/after mobility comparisons.
    pub fn with_visits(&self, visits: VisitMatrix) -> Result<Self> {
        for (t, v) in visits.iter() {
            if v.cbg as usize >= self.cbgs.len() || v.poi as usize >= self.pois.len() {
                return Err(Error::InvalidNetwork(format!(
                    "visit at hour {t} references CBG index {} / POI index {} out of range",
                    v.cbg, v.poi
                )));
            }
        }
        Ok(MobilityNetwork {
            visits,
            ..self.clone()
        })
    }
}

fn validate_cbg(c: &Cbg, m: usize) -> std::result::Result<(), String> {
    if c.population < 1 {
        return Err("population must be at least 1".into());
    }
    if c.racial_fractions.len() != m {
        return Err(format!(
            "expected {m} racial fractions, got {}",
            c.racial_fractions.len()
        ));
    }
    if c.racial_fractions.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err("racial fractions must lie in [0, 1]".into());
    }
    let sum: f64 = c.racial_fractions.iter().sum();
    if (sum - 1.0).abs() > FRACTION_TOLERANCE {
        return Err(format!("racial fractions sum to {sum}, not 1"));
    }
    if !c.median_income.is_finite() {
        return Err("median income must be finite".into());
    }
    if !(0.0..=120.0).contains(&c.median_age) {
        return Err(format!("median age {} outside [0, 120]", c.median_age));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cbg(id: u64, n: u64, fr: &[f64], income: f64, age: f64) -> Cbg {
        Cbg::new(id, n, fr.to_vec(), income, age)
    }

    fn labels(m: usize) -> Vec<String> {
        (1..=m).map(|j| j.to_string()).collect()
    }

    #[test]
    fn visit_matrix_groups_by_hour() {
        let v = |c, p, w| Visit {
            cbg: c,
            poi: p,
            weight: w,
        };
        let m = VisitMatrix::from_triplets(
            3,
            vec![(2, v(1, 0, 1.0)), (0, v(0, 1, 2.0)), (0, v(0, 0, 3.0))],
        )
        .unwrap();
        assert_eq!(m.hour(0), &[v(0, 0, 3.0), v(0, 1, 2.0)]);
        assert!(m.hour(1).is_empty());
        assert_eq!(m.hour(2), &[v(1, 0, 1.0)]);
        assert!(m.hour(7).is_empty());
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn visit_matrix_rejects_negative_weight() {
        let r = VisitMatrix::from_triplets(
            1,
            vec![(
                0,
                Visit {
                    cbg: 0,
                    poi: 0,
                    weight: -1.0,
                },
            )],
        );
        assert!(r.is_err());
    }

    #[test]
    fn group_totals_sum_to_population() {
        let cbgs = vec![
            cbg(10, 1000, &[0.3, 0.7], 10.0, 30.0),
            cbg(11, 500, &[1.0, 0.0], 20.0, 50.0),
            cbg(12, 250, &[0.5, 0.5], 30.0, 80.0),
        ];
        let net = MobilityNetwork::new(
            cbgs,
            vec![],
            VisitMatrix::empty(0),
            labels(2),
            &RiskTable::default(),
        )
        .unwrap();
        assert_eq!(net.total_population(), 1750);
        for g in Grouping::ALL {
            let s: f64 = net.group_totals(g).iter().sum();
            assert!((s - 1750.0).abs() < 1e-9);
        }
        assert_eq!(
            net.group_totals(Grouping::Race),
            &[300.0 + 500.0 + 125.0, 700.0 + 125.0]
        );
        assert_eq!(net.index_of(12), Some(2));
    }

    #[test]
    fn rejects_fractions_not_summing_to_one() {
        let cbgs = vec![cbg(1, 100, &[0.5, 0.4], 1.0, 30.0)];
        let err = MobilityNetwork::new(
            cbgs,
            vec![],
            VisitMatrix::empty(0),
            labels(2),
            &RiskTable::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sum"), "{err}");
    }

    #[test]
    fn rejects_dangling_visit() {
        let cbgs = vec![cbg(1, 100, &[1.0], 1.0, 30.0)];
        let pois = vec![Poi {
            id: 0,
            area_sqft: 10.0,
            dwell_fraction: 0.5,
        }];
        let visits = VisitMatrix::from_triplets(
            1,
            vec![(
                0,
                Visit {
                    cbg: 0,
                    poi: 3,
                    weight: 1.0,
                },
            )],
        )
        .unwrap();
        assert!(
            MobilityNetwork::new(cbgs, pois, visits, labels(1), &RiskTable::default()).is_err()
        );
    }

    #[test]
    fn rejects_bad_poi_and_age() {
        let pois = vec![Poi {
            id: 0,
            area_sqft: 10.0,
            dwell_fraction: 1.5,
        }];
        let cbgs = vec![cbg(1, 100, &[1.0], 1.0, 30.0)];
        assert!(MobilityNetwork::new(
            cbgs,
            pois,
            VisitMatrix::empty(0),
            labels(1),
            &RiskTable::default()
        )
        .is_err());
        let cbgs = vec![cbg(1, 100, &[1.0], 1.0, 130.0)];
        assert!(MobilityNetwork::new(
            cbgs,
            vec![],
            VisitMatrix::empty(0),
            labels(1),
            &RiskTable::default()
        )
        .is_err());
    }

    #[test]
    fn apportion_race_and_income() {
        let cbgs = vec![
            cbg(1, 1000, &[0.3, 0.7], 10.0, 30.0),
            cbg(2, 1000, &[0.3, 0.7], 20.0, 30.0),
            cbg(3, 1000, &[0.3, 0.7], 30.0, 30.0),
            cbg(4, 1000, &[0.3, 0.7], 40.0, 30.0),
        ];
        let net = MobilityNetwork::new(
            cbgs,
            vec![],
            VisitMatrix::empty(0),
            labels(2),
            &RiskTable::default(),
        )
        .unwrap();
        let mut out = vec![0.0; 2];
        net.apportion(0, Grouping::Race, 1000.0, &mut out);
        assert_eq!(out, vec![300.0, 700.0]);
        let mut out = vec![0.0; 4];
        net.apportion(1, Grouping::Income, 1000.0, &mut out);
        assert_eq!(out, vec![0.0, 1000.0, 0.0, 0.0]);
    }
}
