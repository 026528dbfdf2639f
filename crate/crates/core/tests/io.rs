use std::fs;
use std::path::Path;

use fairvax::network::{generate_synthetic, load_network_dir, write_network_dir, SyntheticSpec};
use fairvax::Error;

fn write_files(dir: &Path, cbgs: &str, pois: &str, visits: &str) {
    fs::write(dir.join("cbgs.csv"), cbgs).unwrap();
    fs::write(dir.join("pois.csv"), pois).unwrap();
    fs::write(dir.join("visits.csv"), visits).unwrap();
}

const CBGS: &str = "id,population,median_income,median_age,race_frac_a,race_frac_b
1,1000,40000,35,0.5,0.5
2,800,90000,50,0.2,0.8
";
const POIS: &str = "id,area_sqft,dwell_fraction\n7,2000,0.25\n";

#[test]
fn loads_and_rewrites_identically() {
    let dir = tempfile::tempdir().unwrap();
    write_files(
        dir.path(),
        CBGS,
        POIS,
        "hour,cbg_id,poi_id,weight\n0,1,7,3\n5,2,7,1.5\n",
    );
    let net = load_network_dir(dir.path()).unwrap();
    assert_eq!(net.num_cbgs(), 2);
    assert_eq!(net.visits().horizon(), 6);
    assert_eq!(net.cbgs()[0].risk_weight, 3.5);

    let out = dir.path().join("copy");
    write_network_dir(&net, &out).unwrap();
    let again = load_network_dir(&out).unwrap();
    assert_eq!(again.cbgs(), net.cbgs());
    assert_eq!(again.visits(), net.visits());
}

#[test]
fn synthetic_networks_round_trip() {
    let net = generate_synthetic(
        &SyntheticSpec {
            cbgs: 30,
            pois: 60,
            horizon_hours: 48,
            ..SyntheticSpec::default()
        },
        5,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_network_dir(&net, dir.path()).unwrap();
    let back = load_network_dir(dir.path()).unwrap();
    assert_eq!(back.cbgs(), net.cbgs());
    assert_eq!(back.pois(), net.pois());
    assert_eq!(back.visits(), net.visits());
}

#[test]
fn empty_visits_mean_no_mobility() {
    let dir = tempfile::tempdir().unwrap();
    write_files(dir.path(), CBGS, POIS, "hour,cbg_id,poi_id,weight\n");
    let net = load_network_dir(dir.path()).unwrap();
    assert!(net.visits().is_empty());
    assert_eq!(net.visits().hour(0), &[]);
}

#[test]
fn fractions_must_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let cbgs =
        "id,population,median_income,median_age,race_frac_a,race_frac_b\n1,1000,40000,35,0.5,0.4\n";
    write_files(dir.path(), cbgs, POIS, "hour,cbg_id,poi_id,weight\n");
    let err = load_network_dir(dir.path()).unwrap_err();
    assert!(err.is_config_error());
    match err {
        Error::Schema {
            file, row, column, ..
        } => {
            assert_eq!(
                (file.as_str(), row, column.as_str()),
                ("cbgs.csv", 2, "race_frac_a")
            );
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn schema_errors_name_file_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    write_files(
        dir.path(),
        CBGS,
        POIS,
        "hour,cbg_id,poi_id,weight\n0,1,7,3\n1,2,99,1\n",
    );
    let msg = load_network_dir(dir.path()).unwrap_err().to_string();
    assert!(
        msg.contains("visits.csv") && msg.contains("row 3") && msg.contains("poi_id"),
        "{msg}"
    );

    write_files(
        dir.path(),
        CBGS,
        "id,area,dwell_fraction\n7,2000,0.25\n",
        "hour,cbg_id,poi_id,weight\n",
    );
    let msg = load_network_dir(dir.path()).unwrap_err().to_string();
    assert!(
        msg.contains("pois.csv") && msg.contains("area_sqft"),
        "{msg}"
    );

    write_files(
        dir.path(),
        CBGS,
        POIS,
        "hour,cbg_id,poi_id,weight\n0,1,7,-2\n",
    );
    let msg = load_network_dir(dir.path()).unwrap_err().to_string();
    assert!(msg.contains("weight"), "{msg}");
}

#[test]
fn missing_files_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_network_dir(&dir.path().join("nowhere")).unwrap_err();
    assert!(err.is_config_error());
}
