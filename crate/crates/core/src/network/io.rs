//! CSV ingestion and export.
//!
//! ```text
//! cbgs.csv    id,population,median_income,median_age,race_frac_<label>,...
//! pois.csv    id,area_sqft,dwell_fraction
//! visits.csv  hour,cbg_id,poi_id,weight        (hour is 0-based)
//! ```

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::{Cbg, MobilityNetwork, Poi, RiskTable, Visit, VisitMatrix, FRACTION_TOLERANCE};
use crate::error::{Error, Result};

pub const CBG_FILE: &str = "cbgs.csv";
pub const POI_FILE: &str = "pois.csv";
pub const VISITS_FILE: &str = "visits.csv";

const RACE_PREFIX: &str = "race_frac_";

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check_header(name: &str, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    for (k, col) in expected.iter().enumerate() {
        match found.get(k) {
            Some(h) if h == *col => {}
            other => {
                return Err(Error::schema(
                    name,
                    1,
                    *col,
                    format!("expected header column {k} to be `{col}`, found {other:?}"),
                ))
            }
        }
    }
    Ok(())
}

struct Row<'a> {
    file: &'a str,
    line: usize,
    record: &'a csv::StringRecord,
    header: &'a csv::StringRecord,
}

impl Row<'_> {
    fn parse<T: FromStr>(&self, col: usize) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let name = self.header.get(col).unwrap_or("?");
        let raw = self
            .record
            .get(col)
            .ok_or_else(|| Error::schema(self.file, self.line, name, "missing value"))?;
        raw.parse::<T>().map_err(|e| {
            Error::schema(
                self.file,
                self.line,
                name,
                format!("cannot parse `{raw}`: {e}"),
            )
        })
    }

    fn error(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::schema(
            self.file,
            self.line,
            self.header.get(col).unwrap_or("?"),
            msg,
        )
    }
}

fn for_each_row(
    path: &Path,
    expected: &[&str],
    mut f: impl FnMut(&Row<'_>) -> Result<()>,
) -> Result<csv::StringRecord> {
    let name = file_name(path);
    let mut reader = open_csv(path)?;
    let header = reader.headers()?.clone();
    check_header(&name, &header, expected)?;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        f(&Row {
            file: &name,
            line,
            record: &record,
            header: &header,
        })?;
    }
    Ok(header)
}

fn read_cbgs(path: &Path) -> Result<(Vec<Cbg>, Vec<String>)> {
    let name = file_name(path);
    let mut reader = open_csv(path)?;
    let header = reader.headers()?.clone();
    check_header(
        &name,
        &header,
        &["id", "population", "median_income", "median_age"],
    )?;
    let mut labels = Vec::new();
    for (k, col) in header.iter().enumerate().skip(4) {
        match col.strip_prefix(RACE_PREFIX) {
            Some(label) if !label.is_empty() => labels.push(label.to_string()),
            _ => {
                return Err(Error::schema(
                    &name,
                    1,
                    col,
                    format!("column {k} must be named `{RACE_PREFIX}<label>`"),
                ))
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::schema(
            &name,
            1,
            RACE_PREFIX,
            "no racial fraction columns",
        ));
    }
    drop(reader);

    let mut cbgs = Vec::new();
    for_each_row(
        path,
        &["id", "population", "median_income", "median_age"],
        |row| {
            let id: u64 = row.parse(0)?;
            let population: u64 = row.parse(1)?;
            if population < 1 {
                return Err(row.error(1, "population must be at least 1"));
            }
            let median_income: f64 = row.parse(2)?;
            let median_age: f64 = row.parse(3)?;
            if !(0.0..=120.0).contains(&median_age) {
                return Err(row.error(3, format!("median age {median_age} outside [0, 120]")));
            }
            let mut fractions = Vec::with_capacity(labels.len());
            for k in 0..labels.len() {
                let a: f64 = row.parse(4 + k)?;
                if !(0.0..=1.0).contains(&a) {
                    return Err(row.error(4 + k, format!("fraction {a} outside [0, 1]")));
                }
                fractions.push(a);
            }
            let sum: f64 = fractions.iter().sum();
            if (sum - 1.0).abs() > FRACTION_TOLERANCE {
                return Err(row.error(4, format!("racial fractions sum to {sum}, not 1")));
            }
            cbgs.push(Cbg::new(
                id,
                population,
                fractions,
                median_income,
                median_age,
            ));
            Ok(())
        },
    )?;
    Ok((cbgs, labels))
}

fn read_pois(path: &Path) -> Result<Vec<Poi>> {
    let mut pois = Vec::new();
    for_each_row(path, &["id", "area_sqft", "dwell_fraction"], |row| {
        let id: u64 = row.parse(0)?;
        let area_sqft: f64 = row.parse(1)?;
        if !(area_sqft > 0.0 && area_sqft.is_finite()) {
            return Err(row.error(1, format!("area must be positive, got {area_sqft}")));
        }
        let dwell_fraction: f64 = row.parse(2)?;
        if !(dwell_fraction > 0.0 && dwell_fraction <= 1.0) {
            return Err(row.error(
                2,
                format!("dwell fraction must lie in (0, 1], got {dwell_fraction}"),
            ));
        }
        pois.push(Poi {
            id,
            area_sqft,
            dwell_fraction,
        });
        Ok(())
    })?;
    Ok(pois)
}

fn index_map<T>(
    items: &[T],
    id: impl Fn(&T) -> u64,
    what: &str,
    file: &str,
) -> Result<HashMap<u64, u32>> {
    let mut map = HashMap::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        if map.insert(id(item), k as u32).is_some() {
            return Err(Error::schema(
                file,
                k + 2,
                "id",
                format!("duplicate {what} id {}", id(item)),
            ));
        }
    }
    Ok(map)
}

fn read_visits(
    path: &Path,
    cbg_index: &HashMap<u64, u32>,
    poi_index: &HashMap<u64, u32>,
) -> Result<VisitMatrix> {
    let mut triplets = Vec::new();
    let mut horizon = 0usize;
    for_each_row(path, &["hour", "cbg_id", "poi_id", "weight"], |row| {
        let hour: usize = row.parse(0)?;
        let cbg_id: u64 = row.parse(1)?;
        let poi_id: u64 = row.parse(2)?;
        let weight: f64 = row.parse(3)?;
        let cbg = *cbg_index
            .get(&cbg_id)
            .ok_or_else(|| row.error(1, format!("unknown CBG id {cbg_id}")))?;
        let poi = *poi_index
            .get(&poi_id)
            .ok_or_else(|| row.error(2, format!("unknown POI id {poi_id}")))?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(row.error(
                3,
                format!("weight must be finite and nonnegative, got {weight}"),
            ));
        }
        horizon = horizon.max(hour + 1);
        triplets.push((hour, Visit { cbg, poi, weight }));
        Ok(())
    })?;
    VisitMatrix::from_triplets(horizon, triplets)
}

/// Loads and validates a network from the three CSV files.
pub fn load_network(
    cbg_file: &Path,
    poi_file: &Path,
    visits_file: &Path,
) -> Result<MobilityNetwork> {
    let (cbgs, race_labels) = read_cbgs(cbg_file)?;
    let pois = read_pois(poi_file)?;
    let cbg_index = index_map(&cbgs, |c| c.id, "CBG", &file_name(cbg_file))?;
    let poi_index = index_map(&pois, |p| p.id, "POI", &file_name(poi_file))?;
    let visits = read_visits(visits_file, &cbg_index, &poi_index)?;
    MobilityNetwork::new(cbgs, pois, visits, race_labels, &RiskTable::default())
}

/// Loads `cbgs.csv`, `pois.csv` and `visits.csv` from `dir`.
pub fn load_network_dir(dir: &Path) -> Result<MobilityNetwork> {
    load_network(
        &dir.join(CBG_FILE),
        &dir.join(POI_FILE),
        &dir.join(VISITS_FILE),
    )
}

fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the network in the same format [`load_network_dir`] reads.
pub fn write_network_dir(network: &MobilityNetwork, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join(CBG_FILE);
    let mut out = create(&path)?;
    let io = |e| Error::io(&path, e);
    write!(out, "id,population,median_income,median_age").map_err(io)?;
    for label in network.race_labels() {
        write!(out, ",{RACE_PREFIX}{label}").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    for c in network.cbgs() {
        write!(
            out,
            "{},{},{},{}",
            c.id, c.population, c.median_income, c.median_age
        )
        .map_err(io)?;
        for a in &c.racial_fractions {
            write!(out, ",{a}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)?;

    let path = dir.join(POI_FILE);
    let mut out = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(out, "id,area_sqft,dwell_fraction").map_err(io)?;
    for p in network.pois() {
        writeln!(out, "{},{},{}", p.id, p.area_sqft, p.dwell_fraction).map_err(io)?;
    }
    out.flush().map_err(io)?;

    let path = dir.join(VISITS_FILE);
    let mut out = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(out, "hour,cbg_id,poi_id,weight").map_err(io)?;
    let (cbgs, pois) = (network.cbgs(), network.pois());
    for (t, v) in network.visits().iter() {
        writeln!(
            out,
            "{t},{},{},{}",
            cbgs[v.cbg as usize].id, pois[v.poi as usize].id, v.weight
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}
