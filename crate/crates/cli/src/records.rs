use std::io::{self, Write};

use fuzzy_ari::{BatchCell, IndexKind, Method};
use serde::Serialize;

use crate::Format;

/// One comparison under one model. CSV and JSON share these fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub comparison: Option<usize>,
    pub first: String,
    pub second: String,
    pub model: String,
    pub sided: String,
    pub kind: String,
    pub method: Option<String>,
    pub raw: Option<f64>,
    pub expected: Option<f64>,
    pub adjusted: Option<f64>,
    pub std_error: Option<f64>,
    pub expected_std_error: Option<f64>,
    pub samples: Option<u64>,
    /// Base seed given on the command line or drawn from entropy.
    pub seed: u64,
    /// Seed of this cell's Monte-Carlo run, derived from the base seed and the inputs.
    pub mc_seed: u64,
    pub flags: String,
    pub error: Option<String>,
}

impl Record {
    pub fn from_cell(
        comparison: Option<usize>,
        first: &str,
        second: &str,
        cell: &BatchCell<f64>,
        kind: IndexKind,
        one_sided: bool,
        seed: u64,
    ) -> Self {
        let mut r = Record {
            comparison,
            first: first.to_owned(),
            second: second.to_owned(),
            model: cell.model.family.to_string(),
            sided: if one_sided { "one" } else { "two" }.to_owned(),
            kind: kind.to_string(),
            method: None,
            raw: None,
            expected: None,
            adjusted: None,
            std_error: None,
            expected_std_error: None,
            samples: None,
            seed,
            mc_seed: cell.seed,
            flags: String::new(),
            error: None,
        };
        match &cell.result {
            Ok(a) => {
                r.method = Some(
                    match a.provenance.method {
                        Method::ClosedForm => "closed_form",
                        Method::MonteCarlo => "monte_carlo",
                    }
                    .to_owned(),
                );
                r.raw = Some(a.raw);
                r.expected = Some(a.expected);
                r.adjusted = Some(a.adjusted);
                r.std_error = Some(a.std_error);
                r.expected_std_error = Some(a.expected_std_error);
                r.samples = Some(a.provenance.samples);
                r.flags = a.provenance.flags.describe();
            }
            Err(e) => r.error = Some(e.to_string()),
        }
        r
    }
}

pub fn write_records<W: Write, R: Serialize>(
    mut out: W,
    format: Format,
    records: &[R],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r).map_err(io::Error::other)?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
            out.flush()
        }
    }
}
