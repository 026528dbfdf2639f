//! Metapopulation SEIR model on the CBG-POI mobility network.
//!
//! Each hour, new exposures in CBG `i` are
//!
//! ```text
//! N(S->E) ~ Pois( S_i/n_i * sum_j lambda_pj(t) * w_ij(t) ) + Binom(S_i, lambda_ci(t))
//! lambda_pj(t) = psi * d_j^2 / a_j * sum_i w_ij(t) * I_i/n_i
//! lambda_ci(t) = beta_home * I_i/n_i
//! ```
//!
//! and progressions are `Binom(E_i, 1/delta_E)` and `Binom(I_i, 1/delta_I)`.
//! Draws are clamped to the source compartment so counts never go negative.
//! Mean-field mode replaces every draw by its expectation.

mod influence;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Grouping, MobilityNetwork};
use crate::rng::stream_rng;

pub(crate) use influence::risk_weighted_eir;
pub use influence::{sigma, sigma_a, EpidemicInfluence, InfluenceConfig, InfluenceFn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiseaseParams {
    /// Hourly home transmission rate.
    pub beta_home: f64,
    /// POI transmission scaling.
    pub psi: f64,
    /// Probability that a resident of a seeded CBG is exposed at hour 0.
    pub p0: f64,
    pub delta_e_hours: f64,
    pub delta_i_hours: f64,
}

impl Default for DiseaseParams {
    /// Philadelphia calibration with the prior model's exposure and infectious periods.
    fn default() -> Self {
        DiseaseParams {
            beta_home: 0.02,
            psi: 300.0,
            p0: 0.001,
            delta_e_hours: 96.0,
            delta_i_hours: 84.0,
        }
    }
}

impl DiseaseParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if !(self.beta_home >= 0.0 && self.beta_home.is_finite()) {
            return bad(format!(
                "beta_home must be nonnegative, got {}",
                self.beta_home
            ));
        }
        if !(self.psi >= 0.0 && self.psi.is_finite()) {
            return bad(format!("psi must be nonnegative, got {}", self.psi));
        }
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return bad(format!("p0 must lie in (0, 1], got {}", self.p0));
        }
        if !(self.delta_e_hours >= 1.0 && self.delta_i_hours >= 1.0) {
            return bad("exposure and infectious periods must be at least one hour".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SimMode {
    /// Integer compartments with sampled transitions.
    #[default]
    Stochastic,
    /// Real-valued compartments with expected transitions.
    MeanField,
}

/// Per-CBG compartment counts at hour `hour`.
///
/// `vaccinated` counts residents moved from S to R by vaccination; they are
/// part of `r` but not of the exposed-or-worse tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeirState {
    pub s: Vec<f64>,
    pub e: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
    pub vaccinated: Vec<f64>,
    pub hour: usize,
}

impl SeirState {
    pub fn num_cbgs(&self) -> usize {
        self.s.len()
    }

    /// Exposed-or-worse residents of CBG `cbg`.
    pub fn eir(&self, cbg: usize) -> f64 {
        self.e[cbg] + self.i[cbg] + self.r[cbg] - self.vaccinated[cbg]
    }

    pub fn total(&self, cbg: usize) -> f64 {
        self.s[cbg] + self.e[cbg] + self.i[cbg] + self.r[cbg]
    }

    /// Network-wide `[S, E, I, R]`.
    pub fn totals(&self) -> [f64; 4] {
        [&self.s, &self.e, &self.i, &self.r].map(|v| v.iter().sum())
    }

    /// Fraction of CBG `cbg` residents in each compartment.
    pub fn fractions(&self, cbg: usize) -> [f64; 4] {
        let n = self.total(cbg);
        [self.s[cbg], self.e[cbg], self.i[cbg], self.r[cbg]].map(|x| x / n)
    }

    /// Moves every susceptible resident of the flagged CBGs to the removed state.
    pub fn vaccinate(&mut self, mask: &[bool]) {
        for (c, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            let s = std::mem::take(&mut self.s[c]);
            self.r[c] += s;
            self.vaccinated[c] += s;
        }
    }
}

/// Round half up.
fn round_count(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Initial state: a `p0` share of each seeded CBG exposed, everyone else susceptible.
pub fn init_state(
    network: &MobilityNetwork,
    seeded: &[usize],
    p0: f64,
    mode: SimMode,
) -> Result<SeirState> {
    let k = network.num_cbgs();
    let mut state = SeirState {
        s: network.cbgs().iter().map(|c| c.population as f64).collect(),
        e: vec![0.0; k],
        i: vec![0.0; k],
        r: vec![0.0; k],
        vaccinated: vec![0.0; k],
        hour: 0,
    };
    for &c in seeded {
        if c >= k {
            return Err(Error::UnknownCbg(c));
        }
        let n = network.population(c);
        let exposed = match mode {
            SimMode::Stochastic => round_count(n * p0).min(n),
            SimMode::MeanField => n * p0,
        };
        state.e[c] = exposed;
        state.s[c] = n - exposed;
    }
    Ok(state)
}

/// Source of transition counts: sampled or expected.
pub trait Transitions {
    fn poisson(&mut self, mean: f64) -> f64;
    fn binomial(&mut self, n: f64, p: f64) -> f64;
}

pub struct Sampled<R>(pub R);

impl<R: Rng> Transitions for Sampled<R> {
    fn poisson(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        Poisson::new(mean)
            .expect("finite positive mean")
            .sample(&mut self.0)
    }

    fn binomial(&mut self, n: f64, p: f64) -> f64 {
        if n <= 0.0 || p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return n;
        }
        Binomial::new(n as u64, p)
            .expect("valid binomial")
            .sample(&mut self.0) as f64
    }
}

pub struct Expected;

impl Transitions for Expected {
    fn poisson(&mut self, mean: f64) -> f64 {
        mean.max(0.0)
    }

    fn binomial(&mut self, n: f64, p: f64) -> f64 {
        n * p.clamp(0.0, 1.0)
    }
}

/// Advances states by one hour over a fixed network; owns the scratch buffers.
pub struct Stepper<'a> {
    network: &'a MobilityNetwork,
    params: &'a DiseaseParams,
    /// `psi * d^2 / a` per POI.
    poi_coef: Vec<f64>,
    poi_rate: Vec<f64>,
    pressure: Vec<f64>,
    infectious_share: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(network: &'a MobilityNetwork, params: &'a DiseaseParams) -> Self {
        let poi_coef = network
            .pois()
            .iter()
            .map(|p| params.psi * p.dwell_fraction * p.dwell_fraction / p.area_sqft)
            .collect();
        Stepper {
            network,
            params,
            poi_coef,
            poi_rate: vec![0.0; network.num_pois()],
            pressure: vec![0.0; network.num_cbgs()],
            infectious_share: vec![0.0; network.num_cbgs()],
        }
    }

    /// Applies the transitions for hour `state.hour` in place. CBGs flagged in
    /// `vaccinated` receive no new exposures.
    pub fn step(
        &mut self,
        state: &mut SeirState,
        vaccinated: &[bool],
        draws: &mut impl Transitions,
    ) {
        let net = self.network;
        let cbgs = net.cbgs();
        let mut any_infectious = false;
        for (c, share) in self.infectious_share.iter_mut().enumerate() {
            *share = state.i[c] / cbgs[c].population as f64;
            any_infectious |= *share > 0.0;
        }

        self.pressure.iter_mut().for_each(|x| *x = 0.0);
        let visits = net.visits().hour(state.hour);
        if any_infectious && !visits.is_empty() {
            self.poi_rate.iter_mut().for_each(|x| *x = 0.0);
            for v in visits {
                self.poi_rate[v.poi as usize] += v.weight * self.infectious_share[v.cbg as usize];
            }
            for (rate, coef) in self.poi_rate.iter_mut().zip(&self.poi_coef) {
                *rate *= coef;
            }
            for v in visits {
                self.pressure[v.cbg as usize] += v.weight * self.poi_rate[v.poi as usize];
            }
        }

        let delta_e = 1.0 / self.params.delta_e_hours;
        let delta_i = 1.0 / self.params.delta_i_hours;
        for (c, cbg) in cbgs.iter().enumerate() {
            let (s, e, i) = (state.s[c], state.e[c], state.i[c]);
            if s == 0.0 && e == 0.0 && i == 0.0 {
                continue;
            }
            let n = cbg.population as f64;
            let new_exposed = if s > 0.0 && !vaccinated.get(c).copied().unwrap_or(false) {
                let home_rate = (self.params.beta_home * self.infectious_share[c]).min(1.0);
                let from_pois = draws.poisson(s / n * self.pressure[c]);
                let from_home = draws.binomial(s, home_rate);
                (from_pois + from_home).min(s)
            } else {
                0.0
            };
            let new_infectious = draws.binomial(e, delta_e).min(e);
            let new_removed = draws.binomial(i, delta_i).min(i);
            state.s[c] = s - new_exposed;
            state.e[c] = e + new_exposed - new_infectious;
            state.i[c] = i + new_infectious - new_removed;
            state.r[c] += new_removed;
        }
        state.hour += 1;
    }
}

/// Everything a single run needs besides the network and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seeded: Vec<usize>,
    pub vaccinated: Vec<usize>,
    pub vaccination_hour: usize,
    pub horizon: usize,
    pub record_trajectory: bool,
}

impl Scenario {
    /// Seeds every CBG, no vaccination.
    pub fn everywhere(network: &MobilityNetwork, horizon: usize) -> Self {
        Scenario {
            seeded: (0..network.num_cbgs()).collect(),
            vaccinated: Vec::new(),
            vaccination_hour: 0,
            horizon,
            record_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub final_state: SeirState,
    /// `N_EIR`.
    pub eir_total: f64,
    pub eir_by_race: Vec<f64>,
    pub eir_by_income: Vec<f64>,
    /// Network-wide `[S, E, I, R]` at every hour `0..=horizon`, if recorded.
    pub trajectory: Option<Vec<[f64; 4]>>,
}

impl SimulationResult {
    fn from_state(
        network: &MobilityNetwork,
        state: SeirState,
        trajectory: Option<Vec<[f64; 4]>>,
    ) -> Self {
        let mut eir_by_race = vec![0.0; network.num_groups(Grouping::Race)];
        let mut eir_by_income = vec![0.0; network.num_groups(Grouping::Income)];
        let mut eir_total = 0.0;
        for c in 0..network.num_cbgs() {
            let eir = state.eir(c);
            eir_total += eir;
            network.apportion(c, Grouping::Race, eir, &mut eir_by_race);
            network.apportion(c, Grouping::Income, eir, &mut eir_by_income);
        }
        SimulationResult {
            final_state: state,
            eir_total,
            eir_by_race,
            eir_by_income,
            trajectory,
        }
    }

    pub fn eir_by_group(&self, grouping: Grouping) -> &[f64] {
        match grouping {
            Grouping::Race => &self.eir_by_race,
            Grouping::Income => &self.eir_by_income,
        }
    }
}

/// Runs `scenario` with the given transition source.
pub fn simulate(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    scenario: &Scenario,
    mode: SimMode,
    draws: &mut impl Transitions,
) -> Result<SimulationResult> {
    params.validate()?;
    if scenario.vaccination_hour > scenario.horizon {
        return Err(Error::VaccinationAfterHorizon {
            vaccination_hour: scenario.vaccination_hour,
            horizon: scenario.horizon,
        });
    }
    let k = network.num_cbgs();
    let mut mask = vec![false; k];
    for &c in &scenario.vaccinated {
        if c >= k {
            return Err(Error::UnknownCbg(c));
        }
        mask[c] = true;
    }
    let no_mask = vec![false; k];

    let mut state = init_state(network, &scenario.seeded, params.p0, mode)?;
    let mut trajectory = scenario.record_trajectory.then(|| {
        let mut t = Vec::with_capacity(scenario.horizon + 1);
        t.push(state.totals());
        t
    });
    let mut stepper = Stepper::new(network, params);
    for t in 0..scenario.horizon {
        if t == scenario.vaccination_hour {
            state.vaccinate(&mask);
        }
        let active = if t >= scenario.vaccination_hour {
            &mask
        } else {
            &no_mask
        };
        stepper.step(&mut state, active, draws);
        if let Some(traj) = trajectory.as_mut() {
            traj.push(state.totals());
        }
    }
    if scenario.vaccination_hour == scenario.horizon {
        state.vaccinate(&mask);
    }
    Ok(SimulationResult::from_state(network, state, trajectory))
}

/// Stochastic run, deterministic for a fixed `rng_seed`.
pub fn run(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    scenario: &Scenario,
    rng_seed: u64,
) -> Result<SimulationResult> {
    simulate(
        network,
        params,
        scenario,
        SimMode::Stochastic,
        &mut Sampled(stream_rng(rng_seed, 0)),
    )
}

/// Deterministic run with every draw replaced by its expectation.
pub fn run_mean_field(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    scenario: &Scenario,
) -> Result<SimulationResult> {
    simulate(network, params, scenario, SimMode::MeanField, &mut Expected)
}

/// Dispatches on `mode`; `rng_seed` is ignored in mean-field mode.
pub fn run_mode(
    network: &MobilityNetwork,
    params: &DiseaseParams,
    scenario: &Scenario,
    mode: SimMode,
    rng_seed: u64,
) -> Result<SimulationResult> {
    match mode {
        SimMode::Stochastic => run(network, params, scenario, rng_seed),
        SimMode::MeanField => run_mean_field(network, params, scenario),
    }
}
