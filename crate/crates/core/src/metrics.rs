//! Evaluation metrics: KL-divergence fairness scores, infection reductions
//! and mobility reduction by group.
//!
//! KL divergences are in nats. The reference distribution for both equal
//! treatment and equal outcome is the network's group composition
//! `q(j) = N_j / N`.

use serde::{Deserialize, Serialize};

use crate::disease::SimulationResult;
use crate::error::{Error, Result};
use crate::network::{Grouping, MobilityNetwork};

const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A distribution over the groups of one grouping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution {
    pub grouping: Grouping,
    pub values: Vec<f64>,
}

impl GroupDistribution {
    /// Normalizes nonnegative masses onto the simplex.
    pub fn from_masses(grouping: Grouping, masses: &[f64]) -> Result<Self> {
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::UndefinedMetric(format!(
                "group masses must be finite and nonnegative: {masses:?}"
            )));
        }
        let total: f64 = masses.iter().sum();
        if total <= 0.0 {
            return Err(Error::UndefinedMetric(format!(
                "no mass to distribute over {grouping} groups"
            )));
        }
        Ok(GroupDistribution {
            grouping,
            values: masses.iter().map(|m| m / total).collect(),
        })
    }

    /// `q(j) = N_j / N`.
    pub fn reference(network: &MobilityNetwork, grouping: Grouping) -> Self {
        GroupDistribution::from_masses(grouping, network.group_totals(grouping))
            .expect("network populations are positive")
    }
}

/// `D_KL(p || q) = sum_j p_j ln(p_j / q_j)`, with `0 ln(0/q) = 0`.
pub fn kl_divergence(p: &GroupDistribution, q: &GroupDistribution) -> Result<f64> {
    if p.grouping != q.grouping || p.values.len() != q.values.len() {
        return Err(Error::UndefinedMetric(format!(
            "distributions over different groupings ({} with {} groups vs {} with {})",
            p.grouping,
            p.values.len(),
            q.grouping,
            q.values.len()
        )));
    }
    for d in [p, q] {
        let sum: f64 = d.values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE || d.values.iter().any(|v| *v < 0.0) {
            return Err(Error::UndefinedMetric(format!(
                "not a distribution: {:?}",
                d.values
            )));
        }
    }
    let mut kl = 0.0;
    for (j, (&pj, &qj)) in p.values.iter().zip(&q.values).enumerate() {
        if qj == 0.0 {
            if pj > 0.0 {
                return Err(Error::UndefinedMetric(format!(
                    "p({j}) = {pj} but q({j}) = 0; divergence is infinite"
                )));
            }
            log::warn!(
                "{} group {j} has zero reference mass; excluded from support",
                p.grouping
            );
            continue;
        }
        if pj > 0.0 {
            kl += pj * (pj / qj).ln();
        }
    }
    // Rounding can leave a tiny negative value when p == q.
    Ok(kl.max(0.0))
}

/// Group composition of the vaccinated population, `(N_j / N)_V`.
pub fn treatment_distribution(
    network: &MobilityNetwork,
    selected: &[usize],
    grouping: Grouping,
) -> Result<GroupDistribution> {
    if selected.is_empty() {
        return Err(Error::UndefinedMetric(
            "treatment distribution of an empty selection".into(),
        ));
    }
    let mut masses = vec![0.0; network.num_groups(grouping)];
    for &c in selected {
        if c >= network.num_cbgs() {
            return Err(Error::UnknownCbg(c));
        }
        network.apportion(c, grouping, network.population(c), &mut masses);
    }
    GroupDistribution::from_masses(grouping, &masses)
}

/// Share of exposed-or-worse residents falling in each group, `(N_j / N)_EIR`.
pub fn outcome_distribution(
    result: &SimulationResult,
    network: &MobilityNetwork,
    grouping: Grouping,
) -> Result<GroupDistribution> {
    if result.eir_total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "outcome distribution with zero infections".into(),
        ));
    }
    let by_group = result.eir_by_group(grouping);
    if by_group.len() != network.num_groups(grouping) {
        return Err(Error::UndefinedMetric(
            "simulation result does not match the network".into(),
        ));
    }
    GroupDistribution::from_masses(grouping, by_group)
}

/// Percentage decrease of `strategy_eir` relative to `baseline_eir`; negative
/// when the strategy is worse than the baseline.
pub fn pct_decrease(baseline_eir: f64, strategy_eir: f64) -> Result<f64> {
    if baseline_eir.is_nan() || baseline_eir <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "percentage decrease against a baseline of {baseline_eir}"
        )));
    }
    Ok(100.0 * (baseline_eir - strategy_eir) / baseline_eir)
}

/// `sum_i mu_i * EIR_i` over the final state.
pub fn risk_weighted_eir(result: &SimulationResult, network: &MobilityNetwork) -> f64 {
    crate::disease::risk_weighted_eir(network, result)
}

/// Per group, `1 - post / pre` of total group-apportioned visit weight.
pub fn mobility_reduction(
    pre: &MobilityNetwork,
    post: &MobilityNetwork,
    grouping: Grouping,
) -> Result<Vec<f64>> {
    let same_nodes = pre.cbgs().len() == post.cbgs().len()
        && pre.pois().len() == post.pois().len()
        && pre
            .cbgs()
            .iter()
            .zip(post.cbgs())
            .all(|(a, b)| a.id == b.id)
        && pre
            .pois()
            .iter()
            .zip(post.pois())
            .all(|(a, b)| a.id == b.id);
    if !same_nodes {
        return Err(Error::UndefinedMetric(
            "networks have different node sets".into(),
        ));
    }
    let group_mobility = |net: &MobilityNetwork| {
        let mut out = vec![0.0; pre.num_groups(grouping)];
        for (_, v) in net.visits().iter() {
            pre.apportion(v.cbg as usize, grouping, v.weight, &mut out);
        }
        out
    };
    let before = group_mobility(pre);
    let after = group_mobility(post);
    before
        .iter()
        .zip(&after)
        .enumerate()
        .map(|(j, (b, a))| {
            if *b <= 0.0 {
                Err(Error::UndefinedMetric(format!(
                    "{grouping} group {} has no mobility before",
                    pre.group_labels(grouping)[j]
                )))
            } else {
                Ok(1.0 - a / b)
            }
        })
        .collect()
}

/// Equal-treatment and equal-outcome divergences for both groupings.
/// Treatment scores are `None` when nothing was vaccinated; outcome scores
/// are `None` when nobody was infected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub treatment_kl_race: Option<f64>,
    pub treatment_kl_income: Option<f64>,
    pub outcome_kl_race: Option<f64>,
    pub outcome_kl_income: Option<f64>,
    pub reference: Vec<GroupDistribution>,
    pub treatment: Vec<GroupDistribution>,
    pub outcome: Vec<GroupDistribution>,
}

impl FairnessReport {
    pub fn evaluate(
        network: &MobilityNetwork,
        selected: &[usize],
        result: &SimulationResult,
    ) -> Result<Self> {
        let mut report = FairnessReport {
            treatment_kl_race: None,
            treatment_kl_income: None,
            outcome_kl_race: None,
            outcome_kl_income: None,
            reference: Vec::new(),
            treatment: Vec::new(),
            outcome: Vec::new(),
        };
        for grouping in Grouping::ALL {
            let q = GroupDistribution::reference(network, grouping);
            let treatment = if selected.is_empty() {
                None
            } else {
                let p = treatment_distribution(network, selected, grouping)?;
                let kl = kl_divergence(&p, &q)?;
                report.treatment.push(p);
                Some(kl)
            };
            let outcome = if result.eir_total > 0.0 {
                let p = outcome_distribution(result, network, grouping)?;
                let kl = kl_divergence(&p, &q)?;
                report.outcome.push(p);
                Some(kl)
            } else {
                None
            };
            match grouping {
                Grouping::Race => {
                    report.treatment_kl_race = treatment;
                    report.outcome_kl_race = outcome;
                }
                Grouping::Income => {
                    report.treatment_kl_income = treatment;
                    report.outcome_kl_income = outcome;
                }
            }
            report.reference.push(q);
        }
        Ok(report)
    }

    pub fn treatment_kl(&self, grouping: Grouping) -> Option<f64> {
        match grouping {
            Grouping::Race => self.treatment_kl_race,
            Grouping::Income => self.treatment_kl_income,
        }
    }

    pub fn outcome_kl(&self, grouping: Grouping) -> Option<f64> {
        match grouping {
            Grouping::Race => self.outcome_kl_race,
            Grouping::Income => self.outcome_kl_income,
        }
    }
}
