use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disease::{DiseaseParams, SimMode};
use crate::error::{Error, Result};
use crate::network::{
    generate_synthetic, load_network_dir, MobilityNetwork, SyntheticSpec, CBG_FILE, POI_FILE,
    VISITS_FILE,
};
use crate::select::{StrategyKind, StrategySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkSource {
    /// A directory holding `cbgs.csv`, `pois.csv` and `visits.csv`.
    Files { dir: PathBuf },
    Synthetic {
        seed: u64,
        #[serde(default)]
        spec: SyntheticSpec,
    },
}

impl NetworkSource {
    pub fn build(&self) -> Result<MobilityNetwork> {
        match self {
            NetworkSource::Files { dir } => load_network_dir(dir),
            NetworkSource::Synthetic { seed, spec } => generate_synthetic(spec, *seed),
        }
    }
}

/// One experiment: every strategy evaluated on one network over paired seeds.
///
/// ```toml
/// strategies = ["none", "rand", "cs", "im", "im-i"]
/// n_seeds = 30
/// output_dir = "runs/demo"
///
/// [network]
/// source = "synthetic"
/// seed = 7
///
/// [disease]
/// beta_home = 0.02
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    pub disease: DiseaseParams,
    pub strategies: Vec<StrategyKind>,
    pub budget_fraction: f64,
    /// Hours of mobility used for selection; vaccination happens at this hour.
    pub selection_window_hours: usize,
    pub horizon_hours: usize,
    /// Paired evaluation seeds shared by every strategy.
    pub n_seeds: usize,
    pub eval_seed: u64,
    /// Seed for RAND's shuffles and the influence replicates of IM selections.
    pub selection_seed: u64,
    /// RAND is averaged over this many independent selections.
    pub rand_selections: usize,
    pub sigma_replicates: usize,
    pub sigma_mode: SimMode,
    pub lazy_eval: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            network: NetworkSource::Synthetic {
                seed: 0,
                spec: SyntheticSpec::default(),
            },
            disease: DiseaseParams::default(),
            strategies: StrategyKind::ALL.to_vec(),
            budget_fraction: 0.05,
            selection_window_hours: 336,
            horizon_hours: 840,
            n_seeds: 30,
            eval_seed: 1_000,
            selection_seed: 0,
            rand_selections: 3,
            sigma_replicates: 5,
            sigma_mode: SimMode::Stochastic,
            lazy_eval: true,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        // Relative network directories resolve against the config file.
        if let NetworkSource::Files { dir } = &mut config.network {
            if dir.is_relative() {
                if let Some(parent) = path.parent() {
                    *dir = parent.join(&*dir);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        if self.selection_window_hours > self.horizon_hours {
            return bad(format!(
                "selection window {} exceeds horizon {}",
                self.selection_window_hours, self.horizon_hours
            ));
        }
        if self.n_seeds == 0 {
            return bad("n_seeds must be at least 1".into());
        }
        if self.rand_selections == 0 {
            return bad("rand_selections must be at least 1".into());
        }
        self.disease.validate()?;
        self.strategy_spec(StrategyKind::Im).validate()
    }

    pub fn strategy_spec(&self, kind: StrategyKind) -> StrategySpec {
        StrategySpec {
            kind,
            budget_fraction: self.budget_fraction,
            lazy_eval: self.lazy_eval,
            sigma_replicates: self.sigma_replicates,
            selection_window: self.selection_window_hours,
            sigma_mode: self.sigma_mode,
        }
    }

    /// Strategies to run, with NONE first since it is every comparison's baseline.
    pub fn strategies_with_baseline(&self) -> Vec<StrategyKind> {
        let mut out = vec![StrategyKind::None];
        for &k in &self.strategies {
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }

    /// SHA-256 over the canonical JSON of every field that affects results.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// [`hash`](Self::hash), extended with the bytes of the network files for a
    /// file-backed network so edited inputs invalidate stored cells.
    pub fn provenance_hash(&self) -> Result<String> {
        let NetworkSource::Files { dir } = &self.network else {
            return Ok(self.hash());
        };
        let mut hasher = Sha256::new();
        hasher.update(self.hash().as_bytes());
        for name in [CBG_FILE, POI_FILE, VISITS_FILE] {
            let path = dir.join(name);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
        Ok(hex::encode(hasher.finalize()))
    }
}
