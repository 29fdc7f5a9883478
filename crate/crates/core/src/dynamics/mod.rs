//! Time evolution of the eigenstate-based sensor.

pub mod integrator;
mod master;
mod population;
mod schrodinger;

use crate::algebra::{ComplexMat2, ComplexVec2, C64};
use crate::error::DynamicsError;

pub use integrator::{propagate, rk4_step, OdeState, StepGrid};
pub use master::{evolve_master_equation, evolve_master_equation_with};
pub use population::{
    enhancement_sp, finite_diff_susceptibility, normalized_population, population_with_perturbation, ChiSample,
    Populations,
};
pub use schrodinger::{evolve_schrodinger, evolve_schrodinger_with, initial_state};

pub const DEFAULT_STEPS_PER_PERIOD: usize = 20_000;
pub const MIN_STEPS_PER_PERIOD: usize = 1_000;

/// Unnormalized state. The physical amplitude is `amplitudes · exp(log_scale)`;
/// the stored vector is kept at unit norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub amplitudes: ComplexVec2,
    pub log_scale: f64,
}

impl StateVector {
    pub fn new(t: f64, psi: ComplexVec2) -> Result<Self, DynamicsError> {
        if !psi.is_finite() {
            return Err(DynamicsError::Blowup(t));
        }
        let n = psi.norm();
        if n == 0.0 {
            return Err(DynamicsError::ZeroState);
        }
        Ok(Self { t, amplitudes: psi * (1.0 / n), log_scale: n.ln() })
    }

    /// Norm of the unnormalized state.
    pub fn physical_norm(&self) -> f64 {
        self.log_scale.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub t: f64,
    pub rho: ComplexMat2,
}

impl DensityMatrix {
    pub const VALIDATION_TOL: f64 = 1e-9;

    /// Checks Hermiticity, unit trace and positivity within `VALIDATION_TOL`.
    pub fn new(t: f64, rho: ComplexMat2) -> Result<Self, DynamicsError> {
        let d = Self { t, rho };
        if !rho.is_finite() {
            return Err(DynamicsError::BadDensityMatrix("non-finite entry".into()));
        }
        if d.hermiticity_error() > Self::VALIDATION_TOL {
            return Err(DynamicsError::BadDensityMatrix("not hermitian".into()));
        }
        if (d.trace() - 1.0).norm() > Self::VALIDATION_TOL {
            return Err(DynamicsError::BadDensityMatrix(format!("trace {} != 1", d.trace())));
        }
        if d.min_eigenvalue() < -Self::VALIDATION_TOL {
            return Err(DynamicsError::BadDensityMatrix("negative eigenvalue".into()));
        }
        Ok(d)
    }

    pub fn from_pure(t: f64, psi: &ComplexVec2) -> Result<Self, DynamicsError> {
        let n = psi.norm_sqr();
        if n == 0.0 {
            return Err(DynamicsError::ZeroState);
        }
        Self::new(t, psi.outer_conj(psi) * (1.0 / n))
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        self.rho.matmul(&self.rho).trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.rho - self.rho.adjoint()).frobenius_norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.rho + self.rho.adjoint()) * 0.5;
        h.hermitian_eigenvalues()[0]
    }
}

/// Which eigenvector to start from, or an explicit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Plus,
    Minus,
    Custom(ComplexVec2),
}

/// Where the perturbation λ enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaProtocol {
    /// λ shifts the coupling during propagation and in the analysis basis.
    #[default]
    Propagated,
    /// Propagate with λ = 0; λ only changes the analysis basis.
    AnalysisOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub min_steps_per_period: usize,
    /// Re-run with half the step and compare populations.
    pub accuracy_guard: bool,
    pub guard_tolerance: f64,
    pub protocol: LambdaProtocol,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            min_steps_per_period: MIN_STEPS_PER_PERIOD,
            accuracy_guard: true,
            guard_tolerance: 1e-6,
            protocol: LambdaProtocol::Propagated,
        }
    }
}

impl EvolveOptions {
    pub fn without_guard(self) -> Self {
        Self { accuracy_guard: false, ..self }
    }
}

/// Step-halving comparison of the sampled populations.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyGuard {
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl AccuracyGuard {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshots {
    Pure(Vec<StateVector>),
    Mixed(Vec<DensityMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    /// Node times actually used (requested samples snapped to the step grid).
    pub times: Vec<f64>,
    pub snapshots: Snapshots,
    /// Normalized for Schrödinger runs, the raw real part `Re⟨φ̂₊|ρ|φ₊⟩` for
    /// master-equation runs. NaN where the analysis basis is at an EP.
    pub populations_plus: Vec<f64>,
    pub populations_minus: Vec<f64>,
    pub ep_degenerate: Vec<bool>,
    /// Master-equation runs only: `|q₊| / (|q₊| + |q₋|)`.
    pub p_plus_norm: Option<Vec<f64>>,
    pub guard: Option<AccuracyGuard>,
    pub max_snap_error: f64,
    /// Largest `|tr ρ − 1|` seen before each re-projection (0 for pure states).
    pub max_trace_drift: f64,
    pub n_steps: usize,
}

impl EvolutionRecord {
    pub fn states(&self) -> Option<&[StateVector]> {
        match &self.snapshots {
            Snapshots::Pure(s) => Some(s),
            Snapshots::Mixed(_) => None,
        }
    }

    pub fn density_matrices(&self) -> Option<&[DensityMatrix]> {
        match &self.snapshots {
            Snapshots::Mixed(m) => Some(m),
            Snapshots::Pure(_) => None,
        }
    }
}

/// Number of steps for `span` at `per_period` steps per period (at least 1).
pub fn steps_for_span(period: f64, span: f64, per_period: usize) -> usize {
    ((span / period) * per_period as f64).ceil().max(1.0) as usize
}

pub(crate) fn check_step_density(period: f64, grid: &StepGrid, min: usize) -> Result<(), DynamicsError> {
    let per_period = grid.n_steps as f64 * period / (grid.end - grid.start);
    // relative slack so that `steps_for_span` output always passes
    if per_period * (1.0 + 1e-9) < min as f64 {
        return Err(DynamicsError::TooFewSteps { per_period, min });
    }
    Ok(())
}

pub(crate) fn population_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
