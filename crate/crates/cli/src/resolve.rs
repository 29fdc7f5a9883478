//! Parameter resolution (flag, then config file, then default) and the exit
//! code contract.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use nhsense_core::experiments::Grid;
use nhsense_core::{DynamicsError, ExperimentError, Manifest, ModelError, NoiseError, SpectralError};

pub const OUT_DIR_ENV: &str = "NHSENSE_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing flags and config values.
    Usage(String),
    Io(String),
    /// The computation itself failed (blow-up, no solution, mismatching replay).
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) | Self::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NoMatchedWindow { .. } | SpectralError::InconsistentHamiltonian { .. } => {
                Self::Numeric(e.to_string())
            }
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Blowup(_) => Self::Numeric(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Spectral(e) => e.into(),
            ExperimentError::Dynamics(e) => e.into(),
            ExperimentError::Noise(e) => e.into(),
            ExperimentError::Model(e) => e.into(),
            ExperimentError::Io { .. } | ExperimentError::Csv(_) => Self::Io(e.to_string()),
            ExperimentError::DegenerateColumn(_) => Self::Numeric(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

/// Looks values up in flag, config, default order and echoes every resolved
/// value under its flag name, so the echo can serve as a config on replay.
pub struct Resolver {
    config: Manifest,
    pub echo: Manifest,
    used: BTreeSet<String>,
}

impl Resolver {
    pub fn new(config: Manifest) -> Self {
        Self { config, echo: Manifest::new(), used: BTreeSet::new() }
    }

    pub fn from_file(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::new(Manifest::new())) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let config = Manifest::from_toml_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Ok(Self::new(config))
    }

    fn lookup(&mut self, key: &str) -> bool {
        let present = self.config.get(key).is_some();
        if present {
            self.used.insert(key.to_string());
        }
        present
    }

    fn bad(key: &str, want: &str) -> CliError {
        CliError::Usage(format!("config key `{key}` must be {want}"))
    }

    pub fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None if self.lookup(key) => Some(self.config.get_f64(key).map_err(|_| Self::bad(key, "a number"))?),
            None => None,
        };
        if let Some(v) = v {
            self.echo.set_f64(key, v);
        }
        Ok(v)
    }

    pub fn f64_or(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64, CliError> {
        let v = self.opt_f64(key, flag)?.unwrap_or(default);
        self.echo.set_f64(key, v);
        Ok(v)
    }

    pub fn f64_req(&mut self, key: &str, flag: Option<f64>) -> Result<f64, CliError> {
        self.opt_f64(key, flag)?.ok_or_else(|| missing(key))
    }

    pub fn opt_usize(&mut self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None if self.lookup(key) => {
                Some(self.config.get_usize(key).map_err(|_| Self::bad(key, "a non-negative integer"))?)
            }
            None => None,
        };
        if let Some(v) = v {
            self.echo.set(key, v as i64);
        }
        Ok(v)
    }

    pub fn usize_or(&mut self, key: &str, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
        let v = self.opt_usize(key, flag)?.unwrap_or(default);
        self.echo.set(key, v as i64);
        Ok(v)
    }

    pub fn opt_str(&mut self, key: &str, flag: Option<&str>) -> Result<Option<String>, CliError> {
        let v = match flag {
            Some(v) => Some(v.to_string()),
            None if self.lookup(key) => Some(self.config.get_str(key).map_err(|_| Self::bad(key, "a string"))?.to_string()),
            None => None,
        };
        if let Some(v) = &v {
            self.echo.set(key, v.as_str());
        }
        Ok(v)
    }

    pub fn str_or(&mut self, key: &str, flag: Option<&str>, default: &str) -> Result<String, CliError> {
        let v = self.opt_str(key, flag)?.unwrap_or_else(|| default.to_string());
        self.echo.set(key, v.as_str());
        Ok(v)
    }

    /// Switch flags: present on the command line means `true`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        let v = if flag {
            true
        } else if self.lookup(key) {
            self.config.get_bool(key).map_err(|_| Self::bad(key, "true or false"))?
        } else {
            false
        };
        self.echo.set(key, v);
        Ok(v)
    }

    /// Output directory: flag, config, `NHSENSE_OUT_DIR`, then `.`. Not echoed.
    pub fn out_dir(&mut self, flag: Option<&Path>) -> Result<PathBuf, CliError> {
        if let Some(p) = flag {
            return Ok(p.to_path_buf());
        }
        if self.lookup("out") {
            return Ok(PathBuf::from(self.config.get_str("out").map_err(|_| Self::bad("out", "a path"))?));
        }
        Ok(std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from))
    }

    /// Config keys that no command looked at.
    pub fn unused(&self) -> Vec<String> {
        self.config.entries().map(|(k, _)| k.clone()).filter(|k| !self.used.contains(k)).collect()
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing required value `--{key}` (flag or config key)"))
}

/// `start:end`.
pub fn parse_span(key: &str, s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("`--{key}`: bad number `{p}`")));
    match parts.as_slice() {
        [a, b] => Ok((num(a)?, num(b)?)),
        _ => Err(CliError::Usage(format!("`--{key}` expects start:end, got `{s}`"))),
    }
}

/// `min:max:n`.
pub fn parse_grid(key: &str, s: &str) -> Result<Grid, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(CliError::Usage(format!("`--{key}` expects min:max:n, got `{s}`")));
    };
    let (min, max) = parse_span(key, &format!("{a}:{b}"))?;
    let n = n.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("`--{key}`: bad point count `{n}`")))?;
    let grid = Grid::new(min, max, n);
    grid.validate("grid").map_err(|_| CliError::Usage(format!("`--{key}`: need n >= 2 and min < max, got `{s}`")))?;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_config_beats_default() {
        let config = Manifest::from_toml_str("g0 = 0.5\ndelta0 = 0.25\n").unwrap();
        let mut r = Resolver::new(config);
        assert_eq!(r.f64_or("g0", Some(0.1), 0.0).unwrap(), 0.1);
        assert_eq!(r.f64_or("delta0", None, 0.0).unwrap(), 0.25);
        assert_eq!(r.f64_or("gamma0", None, 0.75).unwrap(), 0.75);
        assert_eq!(r.echo.get_f64("gamma0").unwrap(), 0.75);
        assert_eq!(r.unused(), vec!["g0".to_string()]);
    }

    #[test]
    fn integer_config_values_are_accepted_as_reals() {
        let mut r = Resolver::new(Manifest::from_toml_str("omega = 3").unwrap());
        assert_eq!(r.f64_req("omega", None).unwrap(), 3.0);
        assert!(matches!(r.f64_req("g0", None), Err(CliError::Usage(_))));
    }

    #[test]
    fn grids_and_spans() {
        let g = parse_grid("t-grid", "0:2:2001").unwrap();
        assert_eq!((g.min, g.max, g.n), (0.0, 2.0, 2001));
        assert!(parse_grid("t-grid", "0:2").is_err());
        assert!(parse_grid("t-grid", "2:0:5").is_err());
        assert_eq!(parse_span("t-span", "0:4").unwrap(), (0.0, 4.0));
        assert!(parse_span("t-span", "x:4").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(DynamicsError::Blowup(1.0)).code(), 4);
        assert_eq!(CliError::from(ExperimentError::UnknownFigure("x".into())).code(), 2);
        let io = ExperimentError::Io { path: "p".into(), source: std::io::Error::other("x") };
        assert_eq!(CliError::from(io).code(), 3);
    }
}
