//! Matrix file formats.
//!
//! * CSV: headerless, one row per data set, comma-separated decimal entries.
//! * JSON: `{"concepts": [...], "datasets": [...], "dataset_sizes": [...], "entries": [[...]]}`.
//!
//! Entries are written with Rust's shortest round-trip float formatting, so a
//! written matrix re-parses to an entrywise-equal matrix.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{NonnegativeMatrix, SpaceIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    concepts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datasets: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dataset_sizes: Option<Vec<usize>>,
    entries: Vec<Vec<f64>>,
}

pub fn read_matrix<R: Read>(reader: R, format: Format) -> Result<NonnegativeMatrix> {
    match format {
        Format::Csv => read_csv(reader),
        Format::Json => read_json(reader),
    }
}

pub fn write_matrix<W: Write>(m: &NonnegativeMatrix, writer: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(m, writer),
        Format::Json => write_json(m, writer),
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<NonnegativeMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| {
                    Error::Parse(format!("row {i}, column {j}: cannot parse {field:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no matrix rows found".into()));
    }
    NonnegativeMatrix::from_rows(&rows)
}

pub fn write_csv<W: Write>(m: &NonnegativeMatrix, mut writer: W) -> Result<()> {
    for i in 0..m.rows() {
        let line = m
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<NonnegativeMatrix> {
    let doc: MatrixDocument = serde_json::from_reader(reader)?;
    let m = NonnegativeMatrix::from_rows(&doc.entries)?;
    let (rows, cols) = m.shape();
    if doc.concepts.is_none() && doc.datasets.is_none() && doc.dataset_sizes.is_none() {
        return Ok(m);
    }
    let concepts = doc
        .concepts
        .unwrap_or_else(|| (1..=cols).map(|j| format!("h{j}")).collect());
    let datasets = doc
        .datasets
        .unwrap_or_else(|| (1..=rows).map(|i| format!("d{i}")).collect());
    let sizes = doc.dataset_sizes.unwrap_or_else(|| vec![1; datasets.len()]);
    m.with_index(SpaceIndex::new(concepts, datasets, sizes)?)
}

pub fn write_json<W: Write>(m: &NonnegativeMatrix, mut writer: W) -> Result<()> {
    let doc = MatrixDocument {
        concepts: m.index().map(|ix| ix.concept_labels().to_vec()),
        datasets: m.index().map(|ix| ix.dataset_labels().to_vec()),
        dataset_sizes: m.index().map(|ix| ix.dataset_sizes().to_vec()),
        entries: m.to_rows(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writeln!(writer)?;
    Ok(())
}
