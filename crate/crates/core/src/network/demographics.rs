use serde::{Deserialize, Serialize};

use super::{Cbg, INCOME_GROUPS};

/// Percentile with linear interpolation between order statistics.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// The 25th, 50th and 75th percentiles of CBG median incomes, unweighted by
/// population.
pub fn income_quartile_bounds(incomes: &[f64]) -> [f64; 3] {
    let mut sorted = incomes.to_vec();
    sorted.sort_by(f64::total_cmp);
    [0.25, 0.5, 0.75].map(|q| percentile(&sorted, q))
}

/// Labels each CBG with its income quartile `1..=4`. A CBG whose income equals
/// a quartile boundary falls in the lower quartile.
pub fn assign_income_groups(cbgs: &mut [Cbg]) {
    if cbgs.is_empty() {
        return;
    }
    let incomes: Vec<f64> = cbgs.iter().map(|c| c.median_income).collect();
    let bounds = income_quartile_bounds(&incomes);
    for c in cbgs.iter_mut() {
        let above = bounds.iter().filter(|b| c.median_income > **b).count();
        c.income_group = (1 + above.min(INCOME_GROUPS - 1)) as u8;
    }
}

/// Maps median age to a risk multiplier relative to 18-29 year olds.
///
/// Each bracket is `(lower_age_inclusive, multiplier)`; ages below the first
/// bracket get 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskTable {
    brackets: Vec<(f64, f64)>,
}

impl RiskTable {
    pub fn new(mut brackets: Vec<(f64, f64)>) -> Self {
        brackets.sort_by(|a, b| a.0.total_cmp(&b.0));
        RiskTable { brackets }
    }

    /// CDC death-rate ratios by age bracket.
    pub fn death() -> Self {
        RiskTable::new(vec![
            (30.0, 3.5),
            (40.0, 10.0),
            (50.0, 25.0),
            (65.0, 60.0),
            (75.0, 140.0),
            (85.0, 350.0),
        ])
    }

    /// Every CBG weighted 1.
    pub fn uniform() -> Self {
        RiskTable::new(Vec::new())
    }

    pub fn multiplier(&self, age: f64) -> f64 {
        self.brackets
            .iter()
            .rev()
            .find(|(lower, _)| age >= *lower)
            .map_or(1.0, |(_, m)| *m)
    }
}

impl Default for RiskTable {
    fn default() -> Self {
        RiskTable::death()
    }
}

pub fn assign_risk_weights(cbgs: &mut [Cbg], table: &RiskTable) {
    for c in cbgs {
        c.risk_weight = table.multiplier(c.median_age);
    }
}
