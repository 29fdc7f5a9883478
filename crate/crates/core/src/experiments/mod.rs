//! Parameter sweeps, figure datasets and their on-disk form.

pub mod figures;
pub mod io;
pub mod peak;
pub mod sweep;
pub mod table;

use std::fs;
use std::path::Path;

use crate::error::ExperimentError;

pub use figures::{reproduce_figure, FigureOptions, FIGURE_IDS};
pub use io::{read_manifest, write_dataset};
pub use peak::{exceedance_interval, find_peak, Exceedance, Peak};
pub use sweep::{run_sweep, Branch, Kernel, SweepSpec};
pub use table::{Column, FigureDataset, Grid, Manifest, Table};

/// Re-runs whatever a manifest describes.
pub fn rerun(manifest: &Manifest) -> Result<FigureDataset, ExperimentError> {
    match manifest.get_str("kind")? {
        "figure" => {
            let opts = FigureOptions {
                grid_scale: manifest.get_f64("grid_scale")?,
                steps_per_period: manifest.get_usize("steps_per_period")?,
            };
            reproduce_figure(manifest.get_str("figure_id")?, &opts)
        }
        "sweep" => run_sweep(&SweepSpec::from_manifest(manifest)?),
        other => Err(ExperimentError::Manifest(format!("cannot re-run a `{other}` manifest from the library"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    /// `(file, recorded checksum, new checksum)`.
    pub files: Vec<(String, String, String)>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        !self.files.is_empty() && self.files.iter().all(|(_, a, b)| a == b)
    }
}

/// Re-runs the manifest at `manifest_path` into `out_dir` and compares
/// checksums file by file.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> Result<ReplayReport, ExperimentError> {
    let recorded = read_manifest(manifest_path)?;
    let ds = rerun(&recorded)?;
    write_dataset(&ds, out_dir)?;
    let mut files = Vec::new();
    for (file, sum) in io::manifest_files(&recorded)? {
        let path = out_dir.join(&file);
        let fresh = match fs::read(&path) {
            Ok(bytes) => io::sha256_hex(&bytes),
            Err(_) => String::new(),
        };
        files.push((file, sum, fresh));
    }
    Ok(ReplayReport { files })
}
