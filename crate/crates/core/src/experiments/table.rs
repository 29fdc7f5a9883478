use std::collections::BTreeMap;

use crate::error::ExperimentError;

/// Uniform grid of `n` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        Self { min, max, n }
    }

    pub fn validate(&self, name: &'static str) -> Result<(), ExperimentError> {
        if self.n < 2 || !(self.min.is_finite() && self.max.is_finite()) || self.min >= self.max {
            return Err(ExperimentError::BadGrid(name));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let i = i as f64;
                (self.min * (last - i) + self.max * i) / last
            })
            .collect()
    }

    /// Same span with `(n − 1)·scale` intervals (at least one).
    pub fn scaled(&self, scale: f64) -> Self {
        let intervals = (((self.n - 1) as f64) * scale).round().max(1.0) as usize;
        Self { n: intervals + 1, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Real(Vec<f64>),
    Text(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named columns of equal length; serialized as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<(String, Column)>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), columns: Vec::new() }
    }

    pub fn with_real(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.push(name, Column::Real(values));
        self
    }

    pub fn with_text(mut self, name: impl Into<String>, values: Vec<String>) -> Self {
        self.push(name, Column::Text(values));
        self
    }

    pub fn push(&mut self, name: impl Into<String>, column: Column) {
        let name = name.into();
        if let Some(first) = self.columns.first() {
            assert_eq!(first.1.len(), column.len(), "column `{name}` has the wrong length");
        }
        self.columns.push((name, column));
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn column(&self, name: &str) -> Result<&Column, ExperimentError> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| ExperimentError::MissingColumn(name.to_string()))
    }

    pub fn real(&self, name: &str) -> Result<&[f64], ExperimentError> {
        match self.column(name)? {
            Column::Real(v) => Ok(v),
            Column::Text(_) => Err(ExperimentError::MissingColumn(format!("{name} (not numeric)"))),
        }
    }

    pub fn text(&self, name: &str) -> Result<&[String], ExperimentError> {
        match self.column(name)? {
            Column::Text(v) => Ok(v),
            Column::Real(_) => Err(ExperimentError::MissingColumn(format!("{name} (not text)"))),
        }
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }
}

/// Flat key-value run description. Keys are sorted, so the rendered text is
/// stable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest(BTreeMap<String, toml::Value>);

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<toml::Value>) {
        self.0.insert(key.into(), value.into());
    }

    pub fn set_f64(&mut self, key: impl Into<String>, value: f64) {
        self.set(key, value);
    }

    pub fn get(&self, key: &str) -> Option<&toml::Value> {
        self.0.get(key)
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, ExperimentError> {
        match self.0.get(key) {
            Some(toml::Value::Float(f)) => Ok(*f),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            _ => Err(ExperimentError::Manifest(format!("missing numeric key `{key}`"))),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, ExperimentError> {
        match self.0.get(key) {
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            _ => Err(ExperimentError::Manifest(format!("missing integer key `{key}`"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<&str, ExperimentError> {
        match self.0.get(key) {
            Some(toml::Value::String(s)) => Ok(s),
            _ => Err(ExperimentError::Manifest(format!("missing string key `{key}`"))),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<bool, ExperimentError> {
        match self.0.get(key) {
            Some(toml::Value::Boolean(b)) => Ok(*b),
            _ => Err(ExperimentError::Manifest(format!("missing boolean key `{key}`"))),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &toml::Value)> {
        self.0.iter()
    }

    pub fn remove(&mut self, key: &str) -> Option<toml::Value> {
        self.0.remove(key)
    }

    pub fn extend(&mut self, other: &Manifest) {
        for (k, v) in &other.0 {
            self.0.insert(k.clone(), v.clone());
        }
    }

    pub fn to_toml_string(&self) -> String {
        let table: toml::Table = self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        table.to_string()
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ExperimentError> {
        let table: toml::Table = s.parse().map_err(|e: toml::de::Error| ExperimentError::Manifest(e.to_string()))?;
        let mut out = BTreeMap::new();
        for (k, v) in table {
            if matches!(v, toml::Value::Table(_) | toml::Value::Array(_)) {
                return Err(ExperimentError::Manifest(format!("key `{k}` is not a flat value")));
            }
            out.insert(k, v);
        }
        Ok(Self(out))
    }
}

/// Tables produced by one run plus the manifest needed to re-run it.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureDataset {
    pub figure_id: String,
    pub tables: Vec<Table>,
    pub manifest: Manifest,
}

impl FigureDataset {
    pub fn table(&self, name: &str) -> Result<&Table, ExperimentError> {
        self.tables
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| ExperimentError::MissingColumn(format!("table {name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_hit_endpoints() {
        let g = Grid::new(-0.2, 0.0, 201);
        let v = g.values();
        assert_eq!(v[0], -0.2);
        assert_eq!(v[200], 0.0);
        assert!((v[62] - (-0.138)).abs() < 1e-15);
        assert!(Grid::new(1.0, 1.0, 5).validate("x").is_err());
        assert!(Grid::new(0.0, 1.0, 1).validate("x").is_err());
        assert_eq!(Grid::new(0.0, 2.0, 2001).scaled(0.25).n, 501);
        assert_eq!(Grid::new(0.0, 2.0, 3).scaled(0.01).n, 2);
    }

    #[test]
    fn manifest_round_trips_through_toml() {
        let mut m = Manifest::new();
        m.set_f64("g0", 0.1);
        m.set_f64("tiny", 1e-300);
        m.set_f64("third", 1.0 / 3.0);
        m.set("figure_id", "fig2b");
        m.set("n", 2001i64);
        m.set("guard", true);
        let text = m.to_toml_string();
        let back = Manifest::from_toml_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.get_f64("third").unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert!(Manifest::from_toml_str("[nested]\na = 1\n").is_err());
    }

    #[test]
    fn table_lookup() {
        let t = Table::new("x").with_real("a", vec![1.0, 2.0]).with_text("s", vec!["ok".into(), "ok".into()]);
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.real("a").unwrap(), &[1.0, 2.0]);
        assert!(t.real("s").is_err());
        assert!(matches!(t.real("zz"), Err(ExperimentError::MissingColumn(_))));
    }
}
