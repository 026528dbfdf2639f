use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use fairvax::disease::{run_mode, DiseaseParams, Scenario, SimMode, SimulationResult};
use fairvax::experiment::{
    evaluate_selection, export_plot_data, run_experiment, ExperimentConfig, ExperimentReport,
    MetricSummary, RunRecord, WORKERS_ENV,
};
use fairvax::metrics::risk_weighted_eir;
use fairvax::network::{generate_synthetic, load_network_dir, write_network_dir, SyntheticSpec};
use fairvax::rng::derive_seed;
use fairvax::select::{select, SelectionFile, StrategyKind, StrategySpec};
use fairvax::{Error, Result};

#[derive(Parser)]
#[command(
    name = "fairvax",
    version,
    about = "Fair vaccination by influence maximization on mobility networks"
)]
#[command(after_help = format!("Experiment cells run on ${WORKERS_ENV} worker threads (default: one per core)."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic network as cbgs.csv, pois.csv and visits.csv.
    Generate {
        /// TOML file of synthetic spec keys; defaults apply to missing keys.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose CBGs to vaccinate and write the selection JSON.
    Select {
        #[arg(long, default_value = "im")]
        strategy: StrategyKind,
        #[arg(long, default_value_t = 0.05)]
        budget_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Re-evaluate every candidate each round instead of CELF lazy evaluation.
        #[arg(long)]
        no_lazy: bool,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one epidemic, optionally with a selection vaccinated at the selection window.
    Simulate {
        #[arg(long)]
        selection: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record network-wide S, E, I, R at every hour.
        #[arg(long)]
        trajectory: bool,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a selection over paired seeds against no vaccination.
    Evaluate {
        #[arg(long)]
        selection: PathBuf,
        #[arg(long, default_value_t = 30)]
        seeds: usize,
        /// Base of the evaluation seeds.
        #[arg(long, default_value_t = 1000)]
        seed: u64,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full strategy-by-seed experiment from a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config's strategy list (comma separated).
        #[arg(long, value_delimiter = ',')]
        strategy: Option<Vec<StrategyKind>>,
        #[arg(long)]
        budget_fraction: Option<f64>,
        #[arg(long)]
        seeds: Option<usize>,
        #[command(flatten)]
        overrides: ParamFlags,
    },
    /// Write performance.csv and fairness.csv from a report.json.
    Export {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    network: PathBuf,
    /// TOML file of run parameters; flags override its keys.
    #[arg(long)]
    params: Option<PathBuf>,
    #[command(flatten)]
    flags: ParamFlags,
}

#[derive(Args, Default)]
struct ParamFlags {
    #[arg(long)]
    beta_home: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    delta_e_hours: Option<f64>,
    #[arg(long)]
    delta_i_hours: Option<f64>,
    #[arg(long)]
    horizon_hours: Option<usize>,
    #[arg(long)]
    selection_window_hours: Option<usize>,
    #[arg(long)]
    sigma_replicates: Option<usize>,
    /// Use expected transitions instead of sampled ones.
    #[arg(long)]
    mean_field: bool,
}

/// Keys accepted in a `--params` file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunParams {
    beta_home: f64,
    psi: f64,
    p0: f64,
    delta_e_hours: f64,
    delta_i_hours: f64,
    horizon_hours: usize,
    selection_window_hours: usize,
    sigma_replicates: usize,
    mean_field: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        let d = DiseaseParams::default();
        RunParams {
            beta_home: d.beta_home,
            psi: d.psi,
            p0: d.p0,
            delta_e_hours: d.delta_e_hours,
            delta_i_hours: d.delta_i_hours,
            horizon_hours: 840,
            selection_window_hours: 336,
            sigma_replicates: 5,
            mean_field: false,
        }
    }
}

impl RunParams {
    fn load(common: &Common) -> Result<Self> {
        let mut p = match &common.params {
            Some(path) => toml::from_str(&read(path)?)?,
            None => RunParams::default(),
        };
        let f = &common.flags;
        p.beta_home = f.beta_home.unwrap_or(p.beta_home);
        p.psi = f.psi.unwrap_or(p.psi);
        p.p0 = f.p0.unwrap_or(p.p0);
        p.delta_e_hours = f.delta_e_hours.unwrap_or(p.delta_e_hours);
        p.delta_i_hours = f.delta_i_hours.unwrap_or(p.delta_i_hours);
        p.horizon_hours = f.horizon_hours.unwrap_or(p.horizon_hours);
        p.selection_window_hours = f.selection_window_hours.unwrap_or(p.selection_window_hours);
        p.sigma_replicates = f.sigma_replicates.unwrap_or(p.sigma_replicates);
        p.mean_field |= f.mean_field;
        if p.selection_window_hours > p.horizon_hours {
            return Err(Error::InvalidConfig(format!(
                "selection window {} exceeds horizon {}",
                p.selection_window_hours, p.horizon_hours
            )));
        }
        p.disease().validate()?;
        Ok(p)
    }

    fn disease(&self) -> DiseaseParams {
        DiseaseParams {
            beta_home: self.beta_home,
            psi: self.psi,
            p0: self.p0,
            delta_e_hours: self.delta_e_hours,
            delta_i_hours: self.delta_i_hours,
        }
    }

    fn mode(&self) -> SimMode {
        if self.mean_field {
            SimMode::MeanField
        } else {
            SimMode::Stochastic
        }
    }
}

#[derive(Serialize)]
struct SimulateOutput<'a> {
    seed: u64,
    mode: SimMode,
    vaccinated: Vec<u64>,
    eir_risk_weighted: f64,
    #[serde(flatten)]
    result: &'a SimulationResult,
}

#[derive(Serialize)]
struct EvaluateOutput {
    strategy: StrategyKind,
    #[serde(rename = "V")]
    v: Vec<u64>,
    seeds: Vec<u64>,
    records: Vec<RunRecord>,
    summary: Option<MetricSummary>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, json).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate { spec, seed, out } => {
            let spec: SyntheticSpec = match spec {
                Some(path) => toml::from_str(&read(&path)?)?,
                None => SyntheticSpec::default(),
            };
            let network = generate_synthetic(&spec, seed)?;
            write_network_dir(&network, &out)?;
            log::info!(
                "wrote {} CBGs, {} POIs, {} visit records to {}",
                network.num_cbgs(),
                network.num_pois(),
                network.visits().len(),
                out.display()
            );
        }
        Command::Select {
            strategy,
            budget_fraction,
            seed,
            no_lazy,
            common,
            out,
        } => {
            let params = RunParams::load(&common)?;
            let network = load_network_dir(&common.network)?;
            let spec = StrategySpec {
                kind: strategy,
                budget_fraction,
                lazy_eval: !no_lazy,
                sigma_replicates: params.sigma_replicates,
                selection_window: params.selection_window_hours,
                sigma_mode: params.mode(),
            };
            let result = select(&network, &params.disease(), &spec, seed)?;
            SelectionFile::from_result(&network, &result).write(&out)?;
        }
        Command::Simulate {
            selection,
            seed,
            trajectory,
            common,
            out,
        } => {
            let params = RunParams::load(&common)?;
            let network = load_network_dir(&common.network)?;
            let vaccinated = match &selection {
                Some(path) => SelectionFile::read(path)?.to_result(&network)?.selected,
                None => Vec::new(),
            };
            let scenario = Scenario {
                vaccinated: vaccinated.clone(),
                vaccination_hour: params.selection_window_hours,
                record_trajectory: trajectory,
                ..Scenario::everywhere(&network, params.horizon_hours)
            };
            let result = run_mode(&network, &params.disease(), &scenario, params.mode(), seed)?;
            write_json(
                &out,
                &SimulateOutput {
                    seed,
                    mode: params.mode(),
                    vaccinated: vaccinated.iter().map(|&c| network.cbgs()[c].id).collect(),
                    eir_risk_weighted: risk_weighted_eir(&result, &network),
                    result: &result,
                },
            )?;
        }
        Command::Evaluate {
            selection,
            seeds,
            seed,
            common,
            out,
        } => {
            if seeds == 0 {
                return Err(Error::InvalidConfig("--seeds must be at least 1".into()));
            }
            let params = RunParams::load(&common)?;
            let network = load_network_dir(&common.network)?;
            let file = SelectionFile::read(&selection)?;
            let chosen = file.to_result(&network)?;
            let seeds: Vec<u64> = (0..seeds as u64).map(|s| derive_seed(seed, s)).collect();
            let records = evaluate_selection(
                &network,
                &params.disease(),
                &chosen.selected,
                params.selection_window_hours,
                params.horizon_hours,
                &seeds,
            )?;
            let summary = MetricSummary::from_records(&records);
            write_json(
                &out,
                &EvaluateOutput {
                    strategy: file.strategy,
                    v: file.v,
                    seeds,
                    records,
                    summary,
                },
            )?;
        }
        Command::Experiment {
            config,
            out,
            strategy,
            budget_fraction,
            seeds,
            overrides: f,
        } => {
            let mut c = ExperimentConfig::load(&config)?;
            c.output_dir = out.or(c.output_dir);
            c.strategies = strategy.unwrap_or(c.strategies);
            c.budget_fraction = budget_fraction.unwrap_or(c.budget_fraction);
            c.n_seeds = seeds.unwrap_or(c.n_seeds);
            c.disease.beta_home = f.beta_home.unwrap_or(c.disease.beta_home);
            c.disease.psi = f.psi.unwrap_or(c.disease.psi);
            c.disease.p0 = f.p0.unwrap_or(c.disease.p0);
            c.disease.delta_e_hours = f.delta_e_hours.unwrap_or(c.disease.delta_e_hours);
            c.disease.delta_i_hours = f.delta_i_hours.unwrap_or(c.disease.delta_i_hours);
            c.horizon_hours = f.horizon_hours.unwrap_or(c.horizon_hours);
            c.selection_window_hours = f.selection_window_hours.unwrap_or(c.selection_window_hours);
            c.sigma_replicates = f.sigma_replicates.unwrap_or(c.sigma_replicates);
            if f.mean_field {
                c.sigma_mode = SimMode::MeanField;
            }
            let report = run_experiment(&c)?;
            if c.output_dir.is_none() {
                print!("{}", report.to_json()?);
            }
            if !report.failures.is_empty() {
                for failure in &report.failures {
                    eprintln!("error: {}: {}", failure.strategy, failure.message);
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Export { report, out } => {
            let report = ExperimentReport::read(&report)?;
            export_plot_data(&report, &out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
