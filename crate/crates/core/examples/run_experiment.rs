//! A small end-to-end experiment: selection, paired-seed evaluation, the
//! persisted report and the plot CSVs. Rerunning reuses the stored cells.

use fairvax::disease::{DiseaseParams, SimMode};
use fairvax::experiment::{
    run_experiment_with_workers, ExperimentConfig, ExperimentReport, NetworkSource,
    PERFORMANCE_FILE,
};
use fairvax::network::SyntheticSpec;
use fairvax::select::StrategyKind;

pub fn run_example() -> fairvax::Result<ExperimentReport> {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = ExperimentConfig {
        network: NetworkSource::Synthetic {
            seed: 4,
            spec: SyntheticSpec {
                cbgs: 50,
                pois: 100,
                horizon_hours: 336,
                mean_visits_per_hour: 800.0,
                ..SyntheticSpec::default()
            },
        },
        disease: DiseaseParams {
            p0: 0.005,
            ..DiseaseParams::default()
        },
        strategies: vec![
            StrategyKind::Rand,
            StrategyKind::Cs,
            StrategyKind::Im,
            StrategyKind::ImI,
        ],
        selection_window_hours: 168,
        horizon_hours: 336,
        n_seeds: 6,
        sigma_mode: SimMode::MeanField,
        output_dir: Some(dir.path().to_path_buf()),
        ..ExperimentConfig::default()
    };
    let report = run_experiment_with_workers(&config, Some(2))?;
    let again = run_experiment_with_workers(&config, Some(2))?;
    assert_eq!(report, again);

    println!("config {}", &report.config_hash[..12]);
    print!(
        "{}",
        std::fs::read_to_string(dir.path().join(PERFORMANCE_FILE)).expect("written")
    );
    Ok(report)
}

#[allow(dead_code)]
fn main() -> fairvax::Result<()> {
    run_example().map(|_| ())
}
