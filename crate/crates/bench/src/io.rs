//! CSV tables and vector files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{BenchError, Result};

pub fn write_table<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_table<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(BenchError::from))
        .collect()
}

pub fn write_table_file<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    write_table(rows, fs::File::create(path)?)
}

pub fn read_table_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    read_table(fs::File::open(path)?)
}

/// Reads a vector stored as comma- and/or newline-separated numbers.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| BenchError::Config(format!("invalid number {t:?} in vector file")))
        })
        .collect()
}

/// One value per line, shortest round-trip formatting.
pub fn write_vector(values: &[f64], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for v in values {
        writeln!(f, "{v:?}")?;
    }
    f.flush()?;
    Ok(())
}
