//! Time-series CSV files.

use std::path::Path;

use chemolab_core::rates::TimeSeries;
use chemolab_core::Field;

use crate::error::{CliError, Result};
use crate::report::{format_float, write_file};

pub const HEADER: [&str; 9] = [
    "t",
    "dist_u",
    "dist_v",
    "dist_w",
    "dist_z",
    "mass_u",
    "mass_vw",
    "min_all",
    "criterion_norm",
];

pub fn to_csv(ts: &TimeSeries) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for i in 0..ts.len() {
        let row = [
            ts.times[i],
            ts.dist.u[i],
            ts.dist.v[i],
            ts.dist.w[i],
            ts.dist.z[i],
            ts.mass_u[i],
            ts.mass_vw[i],
            ts.min_all[i],
            ts.criterion_norm[i],
        ];
        w.write_record(row.iter().map(|x| format_float(*x))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn write_csv(ts: &TimeSeries, path: &Path) -> Result<()> {
    write_file(path, &to_csv(ts))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<TimeSeries> {
    let err = |message: String| CliError::Csv {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| err(e.to_string()))?.clone();
    if header.iter().ne(HEADER) {
        return Err(err(format!("header must be '{}'", HEADER.join(","))));
    }
    let mut ts = TimeSeries::default();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(format!("row {}: non-numeric value", i + 2)))?;
        if row.len() != HEADER.len() {
            return Err(err(format!("row {}: expected {} columns", i + 2, HEADER.len())));
        }
        ts.times.push(row[0]);
        for (k, f) in Field::ALL.iter().enumerate() {
            ts.dist.get_mut(*f).push(row[1 + k]);
        }
        ts.mass_u.push(row[5]);
        ts.mass_vw.push(row[6]);
        ts.min_all.push(row[7]);
        ts.criterion_norm.push(row[8]);
    }
    ts.validate().map_err(|e| err(e.to_string()))?;
    Ok(ts)
}

pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_csv(&text, path)
}
