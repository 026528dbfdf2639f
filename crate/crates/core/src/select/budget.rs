use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Grouping, MobilityNetwork};

/// Slack, in persons, allowed on each group budget. Race charges are
/// fractional, so exact equality with `B_j` is generally unattainable.
pub const GROUP_SLACK: f64 = 0.5;

/// Per-group vaccine budgets `B_j` and amounts consumed so far `B'_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBudgets {
    pub grouping: Grouping,
    pub budgets: Vec<f64>,
    pub consumed: Vec<f64>,
}

/// Splits the total budget proportionally to group size: `B_j = N_j / N * B`.
pub fn compute_group_budgets(
    network: &MobilityNetwork,
    grouping: Grouping,
    budget: f64,
) -> GroupBudgets {
    let n = network.total_population() as f64;
    let budgets: Vec<f64> = network
        .group_totals(grouping)
        .iter()
        .map(|nj| nj / n * budget)
        .collect();
    GroupBudgets {
        grouping,
        consumed: vec![0.0; budgets.len()],
        budgets,
    }
}

impl GroupBudgets {
    /// Persons of each group that vaccinating `cbg` would use.
    pub fn charges(&self, network: &MobilityNetwork, cbg: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.budgets.len()];
        network.apportion(cbg, self.grouping, network.population(cbg), &mut out);
        out
    }

    /// Whether `cbg` can be added without exceeding any group budget.
    pub fn fits(&self, network: &MobilityNetwork, cbg: usize) -> bool {
        self.first_violation(network, cbg).is_none()
    }

    fn first_violation(&self, network: &MobilityNetwork, cbg: usize) -> Option<(usize, f64)> {
        self.charges(network, cbg)
            .iter()
            .enumerate()
            .map(|(j, charge)| (j, self.consumed[j] + charge))
            .find(|&(j, would_be)| would_be > self.budgets[j] + GROUP_SLACK)
    }

    /// Records the vaccination of `cbg`: every racial group is charged its share
    /// of the population; for income only the CBG's own quartile is charged.
    pub fn charge_selection(&mut self, network: &MobilityNetwork, cbg: usize) -> Result<()> {
        if let Some((group, would_be)) = self.first_violation(network, cbg) {
            return Err(Error::InfeasibleCharge {
                cbg,
                group,
                would_be,
                budget: self.budgets[group],
            });
        }
        network.apportion(
            cbg,
            self.grouping,
            network.population(cbg),
            &mut self.consumed,
        );
        Ok(())
    }

    pub fn remaining(&self) -> Vec<f64> {
        self.budgets
            .iter()
            .zip(&self.consumed)
            .map(|(b, c)| b - c)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Cbg, RiskTable, VisitMatrix};

    fn net(rows: &[(u64, &[f64], f64)]) -> MobilityNetwork {
        let cbgs = rows
            .iter()
            .enumerate()
            .map(|(i, (n, fr, inc))| Cbg::new(i as u64, *n, fr.to_vec(), *inc, 40.0))
            .collect();
        let m = rows[0].1.len();
        MobilityNetwork::new(
            cbgs,
            vec![],
            VisitMatrix::empty(0),
            (1..=m).map(|j| j.to_string()).collect(),
            &RiskTable::default(),
        )
        .unwrap()
    }

    #[test]
    fn budgets_are_proportional() {
        // N = 10000, N_1 = 2500.
        let n = net(&[(2500, &[1.0, 0.0], 1.0), (7500, &[0.0, 1.0], 2.0)]);
        let b = compute_group_budgets(&n, Grouping::Race, 500.0);
        assert_eq!(b.budgets, vec![125.0, 375.0]);
        let n = net(&[(6000, &[1.0, 0.0], 1.0), (4000, &[0.0, 1.0], 2.0)]);
        let b = compute_group_budgets(&n, Grouping::Race, 100.0);
        assert_eq!(b.budgets, vec![60.0, 40.0]);
        assert_eq!(b.budgets.iter().sum::<f64>(), 100.0);
    }

    #[test]
    fn income_budgets_equal_for_equal_populations() {
        let rows: Vec<(u64, &[f64], f64)> = (0..8)
            .map(|i| (1000u64, &[1.0][..], 10.0 * (i + 1) as f64))
            .collect();
        let n = net(&rows);
        let b = compute_group_budgets(&n, Grouping::Income, 800.0);
        assert_eq!(b.budgets, vec![200.0; 4]);
    }

    #[test]
    fn race_and_income_charges() {
        let n = net(&[
            (1000, &[0.3, 0.7], 10.0),
            (1000, &[0.5, 0.5], 20.0),
            (1000, &[0.5, 0.5], 30.0),
            (1000, &[0.5, 0.5], 40.0),
        ]);
        let mut race = compute_group_budgets(&n, Grouping::Race, 4000.0);
        race.charge_selection(&n, 0).unwrap();
        assert_eq!(race.consumed, vec![300.0, 700.0]);
        assert_eq!(race.consumed.iter().sum::<f64>(), 1000.0);
        let mut income = compute_group_budgets(&n, Grouping::Income, 4000.0);
        income.charge_selection(&n, 1).unwrap();
        assert_eq!(income.consumed, vec![0.0, 1000.0, 0.0, 0.0]);
    }

    #[test]
    fn infeasible_charge_rejected() {
        let n = net(&[(1000, &[1.0, 0.0], 1.0), (1000, &[0.0, 1.0], 2.0)]);
        let mut b = compute_group_budgets(&n, Grouping::Race, 1000.0);
        assert!(!b.fits(&n, 0));
        assert!(matches!(
            b.charge_selection(&n, 0),
            Err(Error::InfeasibleCharge { .. })
        ));
        assert_eq!(b.consumed, vec![0.0, 0.0]);
    }
}
