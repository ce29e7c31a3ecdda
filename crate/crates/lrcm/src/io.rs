//! CSV input and output.
//!
//! Two dialects are supported: the UCI Forest Fires table (read only), and
//! a plain dataset table whose columns are the features, then `y`, then an
//! optional `component`. Numbers are written with Rust's shortest
//! round-trip formatting, so a written dataset reloads bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use lrcm_core::data::Dataset;
use lrcm_core::numerics::DenseMatrix;

use crate::Error;

/// Numeric predictors kept from the Forest Fires table, in order.
pub const FOREST_FIRES_FEATURES: [&str; 10] = ["X", "Y", "FFMC", "DMC", "ISI", "DC", "temp", "RH", "wind", "rain"];
pub const FOREST_FIRES_RESPONSE: &str = "area";

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, Error> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_field(record: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<f64, Error> {
    let raw = record.get(idx).unwrap_or("");
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        })
}

/// Reads the Forest Fires table, keeping the ten numeric predictors and the
/// burned area. Text columns (`month`, `day`) are ignored. Rows are
/// numbered from 1 after the header in error messages.
pub fn read_forest_fires<R: Read>(reader: R) -> Result<Dataset, Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let feature_idx: Vec<usize> = FOREST_FIRES_FEATURES
        .iter()
        .map(|name| column_index(&headers, name))
        .collect::<Result<_, _>>()?;
    let area_idx = column_index(&headers, FOREST_FIRES_RESPONSE)?;

    let mut data = Vec::new();
    let mut y = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let row = k + 1;
        for (&idx, name) in feature_idx.iter().zip(FOREST_FIRES_FEATURES) {
            data.push(parse_field(&record, idx, row, name)?);
        }
        y.push(parse_field(&record, area_idx, row, FOREST_FIRES_RESPONSE)?);
    }
    let features =
        DenseMatrix::from_vec(y.len(), FOREST_FIRES_FEATURES.len(), data).map_err(|e| Error::Config(e.to_string()))?;
    let names = FOREST_FIRES_FEATURES.iter().map(|s| s.to_string()).collect();
    Ok(Dataset::new(features, y, None, names)?)
}

pub fn load_forest_fires(path: impl AsRef<Path>) -> Result<Dataset, Error> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_forest_fires(file)
}

pub fn write_dataset_csv<W: Write>(ds: &Dataset, writer: W) -> Result<(), Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push("y");
    if ds.component.is_some() {
        header.push("component");
    }
    wtr.write_record(&header)?;
    let mut fields = Vec::with_capacity(header.len());
    for i in 0..ds.len() {
        fields.clear();
        fields.extend(ds.features.row(i).iter().map(|v| v.to_string()));
        fields.push(ds.y[i].to_string());
        if let Some(c) = &ds.component {
            fields.push(c[i].to_string());
        }
        wtr.write_record(&fields)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<Dataset, Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let y_idx = column_index(&headers, "y")?;
    let comp_idx = headers.iter().position(|h| h == "component");
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != y_idx && Some(i) != comp_idx)
        .collect();
    let names: Vec<String> = feature_idx.iter().map(|&i| headers[i].to_string()).collect();

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut component = comp_idx.map(|_| Vec::new());
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let row = k + 1;
        for (&idx, name) in feature_idx.iter().zip(&names) {
            data.push(parse_field(&record, idx, row, name)?);
        }
        y.push(parse_field(&record, y_idx, row, "y")?);
        if let (Some(idx), Some(c)) = (comp_idx, component.as_mut()) {
            let raw = record.get(idx).unwrap_or("");
            let id = raw.trim().parse::<u32>().map_err(|_| Error::Parse {
                row,
                column: "component".to_string(),
                value: raw.to_string(),
            })?;
            c.push(id);
        }
    }
    let features = DenseMatrix::from_vec(y.len(), names.len(), data).map_err(|e| Error::Config(e.to_string()))?;
    Ok(Dataset::new(features, y, component, names)?)
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_csv(ds, std::io::BufWriter::new(file))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, Error> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_csv(file)
}
