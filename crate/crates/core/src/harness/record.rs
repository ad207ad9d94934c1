//! CSV row types. Error values are written in scientific notation with 17
//! significant digits so a written file parses back to identical floats.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

fn sci17<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_str(&format!("{v:.16e}"))
    } else {
        s.serialize_str(&v.to_string())
    }
}

/// One `(cell, algorithm, trial)` outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub s: f64,
    pub eta_max_rel: f64,
    pub w_max_rel: f64,
    pub seed: u64,
    pub success: u8,
    #[serde(serialize_with = "sci17")]
    pub final_rel_err: f64,
    pub iterations: usize,
    pub wall_time_ms: u64,
}

/// One iteration of a convergence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRow {
    pub experiment: String,
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub t: usize,
    #[serde(serialize_with = "sci17")]
    pub rel_err: f64,
    pub kept: usize,
    #[serde(serialize_with = "sci17")]
    pub median_stat: f64,
}

pub const RESULT_HEADER: &str =
    "experiment,algorithm,n,m,s,eta_max_rel,w_max_rel,seed,success,final_rel_err,iterations,wall_time_ms";
pub const ITER_HEADER: &str = "experiment,algorithm,n,m,seed,t,rel_err,kept,median_stat";

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::NumericalFailure(format!("csv: {e}"))
}

/// Writes rows with a header line, comma separated, LF terminated. A header
/// is written even when `rows` is empty.
pub fn write_rows<W: Write, R: Serialize>(out: W, header: &str, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header.split(',')).map_err(io_err)?;
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_rows<Rd: Read, R: for<'de> Deserialize<'de>>(input: Rd) -> Result<Vec<R>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(io_err))
        .collect()
}
