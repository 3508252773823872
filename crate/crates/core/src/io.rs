//! CSV serialization of functions, spectra, kernels and atoms.
//!
//! Layout: optional `# key=value,...` metadata lines, the column header
//! `index,re,im`, then one row per index. Floats are written in shortest
//! round-trip form.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::spectral::{CylinderFunction, Spectrum};

/// Writes `values` with the given metadata pairs as a leading comment line.
/// Commas inside metadata values become `;` so the line splits cleanly.
pub fn write_values<W: Write>(
    sink: W,
    metadata: &[(&str, String)],
    values: &[Complex64],
) -> Result<()> {
    let mut sink = sink;
    if !metadata.is_empty() {
        let line: Vec<String> = metadata
            .iter()
            .map(|(k, v)| format!("{k}={}", v.replace(',', ";")))
            .collect();
        writeln!(sink, "# {}", line.join(",")).map_err(io_error)?;
    }
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["index", "re", "im"])?;
    for (i, v) in values.iter().enumerate() {
        writer.write_record([i.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    writer.flush().map_err(io_error)?;
    Ok(())
}

fn io_error(source: std::io::Error) -> Error {
    Error::Io {
        path: "<stream>".into(),
        source,
    }
}

/// Parsed CSV: metadata pairs and values in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub metadata: Vec<(String, String)>,
    pub values: Vec<Complex64>,
}

pub fn read_values<R: Read>(source: R) -> Result<ValueTable> {
    let mut text = String::new();
    let mut source = source;
    source.read_to_string(&mut text).map_err(io_error)?;
    let mut metadata = Vec::new();
    for line in text.lines().filter(|l| l.starts_with('#')) {
        for pair in line.trim_start_matches('#').trim().split(',') {
            if let Some((k, v)) = pair.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<(usize, Complex64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::Parse(format!("row {:?} has fewer than 3 columns", record)))
        };
        let index = field(0)?
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad index {:?}", field(0))))?;
        let re = field(1)?
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad real part {:?}", field(1))))?;
        let im = field(2)?
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad imaginary part {:?}", field(2))))?;
        rows.push((index, Complex64::new(re, im)));
    }
    rows.sort_by_key(|(i, _)| *i);
    if rows.iter().enumerate().any(|(pos, (i, _))| pos != *i) {
        return Err(Error::Parse("indices must be exactly 0..len".into()));
    }
    Ok(ValueTable {
        metadata,
        values: rows.into_iter().map(|(_, v)| v).collect(),
    })
}

pub fn read_function<R: Read>(source: R, spec: Arc<GroupSpec>) -> Result<CylinderFunction> {
    CylinderFunction::new(spec, read_values(source)?.values)
}

pub fn read_spectrum<R: Read>(source: R, spec: Arc<GroupSpec>) -> Result<Spectrum> {
    Spectrum::new(spec, read_values(source)?.values)
}
