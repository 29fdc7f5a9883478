//! CSV rendering, manifest files and checksums.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::table::{Column, FigureDataset, Manifest, Table};
use crate::error::ExperimentError;

pub const MANIFEST_SUFFIX: &str = ".manifest.toml";

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn render_csv(table: &Table) -> Result<Vec<u8>, ExperimentError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.column_names())?;
    for row in 0..table.n_rows() {
        let record = table.columns.iter().map(|(_, c)| match c {
            Column::Real(v) => format_real(v[row]),
            Column::Text(v) => v[row].clone(),
        });
        w.write_record(record)?;
    }
    w.into_inner().map_err(|e| ExperimentError::Manifest(e.to_string()))
}

/// Parses a CSV produced by [`render_csv`]; columns that parse as reals
/// everywhere become `Real`, the rest `Text`.
pub fn parse_csv(name: &str, bytes: &[u8]) -> Result<Table, ExperimentError> {
    let mut r = csv::Reader::from_reader(bytes);
    let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for rec in r.records() {
        for (i, field) in rec?.iter().enumerate() {
            raw[i].push(field.to_string());
        }
    }
    let mut table = Table::new(name);
    for (h, vals) in headers.into_iter().zip(raw) {
        let parsed: Option<Vec<f64>> = vals.iter().map(|s| parse_real(s)).collect();
        match parsed {
            Some(v) => table.push(h, Column::Real(v)),
            None => table.push(h, Column::Text(vals)),
        }
    }
    Ok(table)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn checksum_key(file: &str) -> String {
    format!("sha256.{file}")
}

fn io_err(path: &Path, source: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), source }
}

/// Writes every table as `<name>.csv` and a `<figure_id>.manifest.toml`
/// listing the files with their checksums. Returns the written paths,
/// manifest last.
pub fn write_dataset(dataset: &FigureDataset, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut manifest = dataset.manifest.clone();
    let mut written = Vec::new();
    let mut files = Vec::new();
    for table in &dataset.tables {
        let bytes = render_csv(table)?;
        let file = format!("{}.csv", table.name);
        let path = dir.join(&file);
        fs::write(&path, &bytes).map_err(|e| io_err(&path, e))?;
        manifest.set(checksum_key(&file), sha256_hex(&bytes));
        files.push(file);
        written.push(path);
    }
    manifest.set("files", files.join(","));
    let path = dir.join(format!("{}{MANIFEST_SUFFIX}", dataset.figure_id));
    fs::write(&path, manifest.to_toml_string()).map_err(|e| io_err(&path, e))?;
    written.push(path);
    Ok(written)
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Manifest::from_toml_str(&text)
}

/// Files listed in a manifest, with their recorded checksums.
pub fn manifest_files(manifest: &Manifest) -> Result<Vec<(String, String)>, ExperimentError> {
    let files = manifest.get_str("files")?;
    files
        .split(',')
        .filter(|f| !f.is_empty())
        .map(|f| Ok((f.to_string(), manifest.get_str(&checksum_key(f))?.to_string())))
        .collect()
}
