use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("tabulated trajectory needs at least two strictly increasing sample times")]
    BadTable,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("hamiltonian trace {found} does not match the trajectory point (expected {expected})")]
    InconsistentHamiltonian { expected: String, found: String },
    #[error("time range must span at least one period ({period}), got [{start}, {end}]")]
    RangeTooShort { start: f64, end: f64, period: f64 },
    #[error("no matched window: max over t of a(t) - b(t) is {max_gap:e} <= 0")]
    NoMatchedWindow { max_gap: f64 },
    #[error("optimal window needs a nonzero coupling (c = 16 g^2 = {c})")]
    ZeroCoupling { c: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("initial state is zero")]
    ZeroState,
    #[error("{per_period:.1} steps per period is below the required minimum of {min}")]
    TooFewSteps { per_period: f64, min: usize },
    #[error("invalid time span [{0}, {1}]")]
    BadSpan(f64, f64),
    #[error("sample time {0} lies outside the integration span")]
    SampleOutOfSpan(f64),
    #[error("sample times collapse onto the same integration step near t = {0}")]
    SampleCollision(f64),
    #[error("initial density matrix is invalid: {0}")]
    BadDensityMatrix(String),
    #[error("lambda grid must be strictly increasing with at least two points")]
    BadGrid,
    #[error("state vector became non-finite at t = {0}")]
    Blowup(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid noise parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("monte carlo needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("eta range [{0}, {1}] is invalid")]
    BadRange(f64, f64),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid grid `{0}`: need n >= 2 and min < max")]
    BadGrid(&'static str),
    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),
    #[error("table has no column `{0}`")]
    MissingColumn(String),
    #[error("column `{0}` is degenerate (all finite values equal or none finite)")]
    DegenerateColumn(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
