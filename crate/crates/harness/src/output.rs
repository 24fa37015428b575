//! CSV and JSON emission.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::run::TrialSummary;

pub const CSV_HEADER: &str = "trial,n,delta,eps,gamma,failed_edges,collisions,max_abs_delta,well_behaved,balanced,seed";

/// Writes one row per trial, in trial order.
pub fn write_csv<W: Write>(trials: &[TrialSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if trials.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for t in trials {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(trials: &[TrialSummary]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(trials, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_csv_file(trials: &[TrialSummary], path: &Path) -> Result<()> {
    write_csv(trials, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// A CSV row read back for reporting.
#[derive(Clone, Debug, PartialEq, serde::Deserialize)]
pub struct CsvRow {
    pub trial: usize,
    pub n: usize,
    pub delta: usize,
    pub eps: f64,
    pub gamma: usize,
    pub failed_edges: Option<usize>,
    pub collisions: Option<usize>,
    pub max_abs_delta: Option<f64>,
    pub well_behaved: Option<bool>,
    pub balanced: Option<bool>,
    pub seed: u64,
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    Ok(rows)
}
