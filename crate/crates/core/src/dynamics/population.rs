//! Biorthogonal eigenstate populations and the population susceptibility.

use crate::algebra::ComplexVec2;
use crate::error::DynamicsError;
use crate::model::SensorConfig;
use crate::spectral::{spectrum_at, Enhancement, Spectrum};

/// Normalized eigenstate populations at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Populations {
    Resolved { p_plus: f64, p_minus: f64 },
    /// The analysis basis coalesced (EP); populations are undefined there.
    EpDegenerate,
}

impl Populations {
    pub fn p_plus(&self) -> f64 {
        match self {
            Self::Resolved { p_plus, .. } => *p_plus,
            Self::EpDegenerate => f64::NAN,
        }
    }

    pub fn p_minus(&self) -> f64 {
        match self {
            Self::Resolved { p_minus, .. } => *p_minus,
            Self::EpDegenerate => f64::NAN,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Self::EpDegenerate)
    }
}

/// `P_m = |⟨φ̂_m|Ψ⟩|² / Σₙ |⟨φ̂ₙ|Ψ⟩|²`; invariant under any rescaling of `psi`.
pub fn normalized_population(spectrum: &Spectrum, psi: &ComplexVec2) -> Populations {
    if spectrum.ep_condition_flag {
        return Populations::EpDegenerate;
    }
    let n_plus = spectrum.left_plus.pair(psi).norm_sqr();
    let n_minus = spectrum.left_minus.pair(psi).norm_sqr();
    let total = n_plus + n_minus;
    if !(total > 0.0 && total.is_finite()) {
        return Populations::EpDegenerate;
    }
    Populations::Resolved { p_plus: n_plus / total, p_minus: n_minus / total }
}

/// Populations in the left-eigenvector basis of the Hamiltonian with coupling
/// `g0 + lambda` (the `lambda` argument replaces the config's own).
pub fn population_with_perturbation(config: &SensorConfig, lambda: f64, t: f64, psi: &ComplexVec2) -> Populations {
    normalized_population(&spectrum_at(&config.with_lambda(lambda), t), psi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSample {
    /// Left node of the difference.
    pub lambda: f64,
    pub chi: f64,
}

/// Forward difference `[P(λᵢ₊₁) − P(λᵢ)] / (λᵢ₊₁ − λᵢ)`, reported at `λᵢ`.
///
/// NaN populations (EP-degenerate nodes) give NaN susceptibilities.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must take the rejecting branch
pub fn finite_diff_susceptibility(samples: &[(f64, f64)]) -> Result<Vec<ChiSample>, DynamicsError> {
    if samples.len() < 2 || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(DynamicsError::BadGrid);
    }
    Ok(samples
        .windows(2)
        .map(|w| ChiSample { lambda: w[0].0, chi: (w[1].1 - w[0].1) / (w[1].0 - w[0].0) })
        .collect())
}

/// `S_P = |χ_NH / χ_H|`.
pub fn enhancement_sp(chi_nh: f64, chi_h: f64) -> Enhancement {
    Enhancement::from_magnitudes(chi_nh, chi_h)
}
