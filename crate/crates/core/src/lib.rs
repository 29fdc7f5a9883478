//! Time-modulated non-Hermitian two-level sensors.
//!
//! The crate covers the eigenvalue-based sensor (closed-form splitting and
//! susceptibility), the eigenstate-based sensor (non-unitary Schrödinger and
//! Lindblad propagation with biorthogonal populations), a background-noise
//! model, and the sweep/figure machinery that serializes datasets.

pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod noise;
pub mod spectral;

pub use algebra::{ComplexMat2, ComplexVec2, C64};
pub use error::{DynamicsError, ExperimentError, ModelError, NoiseError, SpectralError};
pub use model::{eval_trajectory, hamiltonian_nh, hamiltonian_perturbed, Modulation, SensorConfig, TrajectoryPoint};
pub use spectral::{
    eigensystem, energy_splitting, enhancement_se, ep_proximity, optimal_time, polar_decomposition,
    susceptibility_chi, Enhancement, PolarDecomposition, Regime, Spectrum, Susceptibility,
};
pub use dynamics::{
    enhancement_sp, evolve_master_equation, evolve_schrodinger, finite_diff_susceptibility, normalized_population,
    population_with_perturbation, DensityMatrix, EvolutionRecord, EvolveOptions, InitialState, LambdaProtocol,
    Populations, StateVector,
};
pub use noise::{
    crossover_eta, min_lambda_uncertainty, monte_carlo_uncertainty, noisy_population, population_uncertainty,
    Crossover, LambdaUncertainty, NoiseModel, OperatingPoint, UncertaintyResult,
};
pub use experiments::{
    find_peak, reproduce_figure, run_sweep, FigureDataset, FigureOptions, Grid, Kernel, Manifest, Peak, SweepSpec,
    Table,
};
