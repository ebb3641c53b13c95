//! Labeled longitudinal samples and their CSV encodings.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::vector::{RawVector, UnitVector};

/// One input vector with its subject identity and visit year.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub input: RawVector,
    pub subject_id: usize,
    pub year: usize,
}

fn header(prefix: &str, dim: usize) -> String {
    let mut h = String::from("subject_id,year");
    for i in 0..dim {
        h.push_str(&format!(",{prefix}{i}"));
    }
    h
}

fn write_rows<'a, W: Write>(
    mut out: W,
    prefix: &str,
    dim: usize,
    rows: impl Iterator<Item = (usize, usize, &'a [f64])>,
) -> Result<()> {
    writeln!(out, "{}", header(prefix, dim))?;
    for (subject, year, values) in rows {
        write!(out, "{subject},{year}")?;
        for v in values {
            // Display prints the shortest string that parses back to the same f64
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

type Row = (usize, usize, Vec<f64>);

fn read_rows<R: Read>(input: R, prefix: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "subject_id" || &headers[1] != "year" {
        return Err(Error::Csv("expected header subject_id,year,...".into()));
    }
    for (i, h) in headers.iter().skip(2).enumerate() {
        if h != format!("{prefix}{i}") {
            return Err(Error::Csv(format!("unexpected column {h:?}")));
        }
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse_err = |what: &str| Error::Csv(format!("row {}: bad {what}", line + 1));
        let subject = record[0].parse().map_err(|_| parse_err("subject_id"))?;
        let year = record[1].parse().map_err(|_| parse_err("year"))?;
        let values = record
            .iter()
            .skip(2)
            .map(|f| f.parse::<f64>().map_err(|_| parse_err("value")))
            .collect::<Result<Vec<_>>>()?;
        rows.push((subject, year, values));
    }
    Ok(rows)
}

/// Writes `subject_id,year,x0,...,x{D-1}`.
pub fn write_dataset_csv<W: Write>(samples: &[LabeledSample], out: W) -> Result<()> {
    let dim = samples.first().map_or(0, |s| s.input.dim());
    if let Some(s) = samples.iter().find(|s| s.input.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: s.input.dim(),
        });
    }
    write_rows(
        out,
        "x",
        dim,
        samples.iter().map(|s| (s.subject_id, s.year, s.input.as_slice())),
    )
}

pub fn read_dataset_csv<R: Read>(input: R) -> Result<Vec<LabeledSample>> {
    read_rows(input, "x")?
        .into_iter()
        .map(|(subject_id, year, values)| {
            Ok(LabeledSample {
                input: RawVector::new(values)?,
                subject_id,
                year,
            })
        })
        .collect()
}

/// A unit embedding for one sample, tagged like the dataset row it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub subject_id: usize,
    pub year: usize,
    pub embedding: UnitVector,
}

/// Writes `subject_id,year,e0,...,e{D-1}`.
pub fn write_embeddings_csv<W: Write>(rows: &[EmbeddingRow], out: W) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.embedding.dim());
    write_rows(
        out,
        "e",
        dim,
        rows.iter().map(|r| (r.subject_id, r.year, r.embedding.as_slice())),
    )
}

pub fn read_embeddings_csv<R: Read>(input: R) -> Result<Vec<EmbeddingRow>> {
    read_rows(input, "e")?
        .into_iter()
        .map(|(subject_id, year, values)| {
            Ok(EmbeddingRow {
                subject_id,
                year,
                embedding: UnitVector::from_unit(values)?,
            })
        })
        .collect()
}

/// Splits by subject: the highest-numbered `ceil(fraction * n)` subjects are
/// held out. Both parts keep the original sample order.
pub fn split_by_subject(
    samples: &[LabeledSample],
    holdout_fraction: f64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if !(0.0..1.0).contains(&holdout_fraction) {
        return Err(Error::ConfigInvalid {
            field: "holdout_fraction",
            reason: format!("{holdout_fraction} not in [0, 1)"),
        });
    }
    let subjects: Vec<usize> = samples
        .iter()
        .map(|s| s.subject_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let n_test = (holdout_fraction * subjects.len() as f64).ceil() as usize;
    let cut = subjects.len() - n_test;
    let held: BTreeSet<usize> = subjects[cut..].iter().copied().collect();
    Ok(samples.iter().cloned().partition(|s| !held.contains(&s.subject_id)))
}
