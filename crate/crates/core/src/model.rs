//! Sensor parameters, the time-modulated trajectory family and Hamiltonian
//! assembly.
//!
//! Energies are in units of the level reference `epsilon` with ħ = 1. The
//! estimated perturbation `lambda` is a deviation of the coupling, so it is
//! folded into the off-diagonal entries: `g = g0 + lambda`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::algebra::{ComplexMat2, C64};
use crate::error::ModelError;

/// Shape of `δ(t)` and `γ₋(t)` along the modulation cycle.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Modulation {
    /// `δ(t) = Δ₀ sin(ωt)`, `γ₋(t) = Γ₀ sin²(ωt/2)`.
    #[default]
    Harmonic,
    /// Tabulated samples, linearly interpolated and repeated with the span
    /// of the table as period.
    Tabulated(Arc<TabulatedModulation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModulation {
    times: Vec<f64>,
    delta: Vec<f64>,
    gamma_minus: Vec<f64>,
}

impl TabulatedModulation {
    pub fn new(times: Vec<f64>, delta: Vec<f64>, gamma_minus: Vec<f64>) -> Result<Self, ModelError> {
        if times.len() < 2 || times.len() != delta.len() || times.len() != gamma_minus.len() {
            return Err(ModelError::BadTable);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::BadTable);
        }
        let all = times.iter().chain(&delta).chain(&gamma_minus);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("table entry"));
        }
        Ok(Self { times, delta, gamma_minus })
    }

    /// Samples `(δ, γ₋)` at `t`, wrapping `t` into the table span.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        let t0 = self.times[0];
        let span = self.times[self.times.len() - 1] - t0;
        let local = t0 + (t - t0).rem_euclid(span);
        let k = match self.times.partition_point(|&x| x <= local) {
            0 => 0,
            k => (k - 1).min(self.times.len() - 2),
        };
        let (ta, tb) = (self.times[k], self.times[k + 1]);
        let w = (local - ta) / (tb - ta);
        let lerp = |v: &[f64]| v[k] + w * (v[k + 1] - v[k]);
        (lerp(&self.delta), lerp(&self.gamma_minus))
    }
}

/// All scalar parameters of one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub epsilon: f64,
    pub g0: f64,
    pub delta0: f64,
    pub gamma0: f64,
    pub omega: f64,
    /// Gain/loss ratio, `γ₊(t) = α γ₋(t)`. The second EP condition
    /// (`δ = 0`, `2g = |γ₋|`) only holds for `α = -1`.
    pub alpha: f64,
    pub lambda: f64,
    pub modulation: Modulation,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            g0: 0.0,
            delta0: 0.0,
            gamma0: 0.0,
            omega: PI,
            alpha: -1.0,
            lambda: 0.0,
            modulation: Modulation::Harmonic,
        }
    }
}

impl SensorConfig {
    /// Harmonic sensor with `ε = 1` and `λ = 0`.
    pub fn harmonic(g0: f64, delta0: f64, gamma0: f64, omega: f64, alpha: f64) -> Self {
        Self { g0, delta0, gamma0, omega, alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("epsilon", self.epsilon),
            ("g0", self.g0),
            ("delta0", self.delta0),
            ("gamma0", self.gamma0),
            ("omega", self.omega),
            ("alpha", self.alpha),
            ("lambda", self.lambda),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter { name, reason: format!("{v} is not finite") });
            }
        }
        if self.omega <= 0.0 {
            return Err(ModelError::InvalidParameter {
                name: "omega",
                reason: format!("must be positive, got {}", self.omega),
            });
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Time unit of the figure axes, `π/ω`.
    pub fn half_period(&self) -> f64 {
        PI / self.omega
    }

    pub fn coupling(&self) -> f64 {
        self.g0 + self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn with_gamma0(&self, gamma0: f64) -> Self {
        Self { gamma0, ..self.clone() }
    }

    /// Same trajectory with the loss amplitude switched off.
    pub fn hermitian_companion(&self) -> Self {
        self.with_gamma0(0.0)
    }

    pub fn trajectory_at(&self, t: f64) -> TrajectoryPoint {
        eval_trajectory(self, t)
    }

    pub fn hamiltonian_at(&self, t: f64) -> ComplexMat2 {
        hamiltonian_nh(&self.trajectory_at(t), self.epsilon)
    }
}

/// Instantaneous parameters on the trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub delta: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub g: f64,
}

impl TrajectoryPoint {
    /// Point with explicit values; `gamma_plus = alpha * gamma_minus`.
    pub fn new(t: f64, delta: f64, gamma_minus: f64, alpha: f64, g: f64) -> Self {
        Self { t, delta, gamma_minus, gamma_plus: alpha * gamma_minus, g }
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    pub fn is_hermitian(&self) -> bool {
        self.gamma_minus == 0.0 && self.gamma_plus == 0.0
    }
}

pub fn eval_trajectory(config: &SensorConfig, t: f64) -> TrajectoryPoint {
    let (delta, gamma_minus) = match &config.modulation {
        Modulation::Harmonic => {
            let phase = config.omega * t;
            let s = (0.5 * phase).sin();
            (config.delta0 * phase.sin(), config.gamma0 * s * s)
        }
        Modulation::Tabulated(table) => table.sample(t),
    };
    TrajectoryPoint::new(t, delta, gamma_minus, config.alpha, config.coupling())
}

/// `[[ε+δ−iγ₋/2, g], [g, ε−iγ₊/2]]`.
pub fn hamiltonian_nh(point: &TrajectoryPoint, epsilon: f64) -> ComplexMat2 {
    let g = C64::new(point.g, 0.0);
    ComplexMat2::new(
        C64::new(epsilon + point.delta, -0.5 * point.gamma_minus),
        g,
        g,
        C64::new(epsilon, -0.5 * point.gamma_plus),
    )
}

/// `H_S + λ σ_x`, with the perturbation added to the point's coupling.
pub fn hamiltonian_perturbed(point: &TrajectoryPoint, epsilon: f64, lambda: f64) -> ComplexMat2 {
    hamiltonian_nh(&point.with_coupling(point.g + lambda), epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_config() -> SensorConfig {
        SensorConfig::harmonic(0.02, 0.04, 0.2, PI, -1.0)
    }

    #[test]
    fn trajectory_examples() {
        let c = fig_config();
        let p = eval_trajectory(&c, 0.0);
        assert_eq!((p.delta, p.gamma_minus, p.gamma_plus, p.g), (0.0, 0.0, 0.0, 0.02));

        let p = eval_trajectory(&c, 1.0);
        assert!(p.delta.abs() < 1e-17);
        assert!((p.gamma_minus - 0.2).abs() < 1e-16);
        assert!((p.gamma_plus + 0.2).abs() < 1e-16);

        let p = eval_trajectory(&c, 0.5);
        assert!((p.delta - 0.04).abs() < 1e-17);
        assert!((p.gamma_minus - 0.1).abs() < 1e-16);
        assert!((p.gamma_plus + 0.1).abs() < 1e-16);
    }

    #[test]
    fn gamma_plus_is_bitwise_alpha_times_gamma_minus() {
        let c = SensorConfig { alpha: 0.37, ..fig_config() };
        for k in 0..50 {
            let p = eval_trajectory(&c, k as f64 * 0.137);
            assert_eq!(p.gamma_plus, 0.37 * p.gamma_minus);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian_nh(&TrajectoryPoint::new(0.0, 0.0, 0.0, -1.0, 0.02), 1.0);
        assert_eq!(h, h.adjoint());
        assert_eq!(h.get(0, 1), C64::new(0.02, 0.0));

        let h = hamiltonian_nh(&TrajectoryPoint::new(0.0, 0.0, 0.2, -1.0, 0.1), 1.0);
        assert_eq!(h.get(0, 0), C64::new(1.0, -0.1));
        assert_eq!(h.get(1, 1), C64::new(1.0, 0.1));

        let h = hamiltonian_nh(&TrajectoryPoint::new(0.0, 0.04, 0.1, -1.0, 0.02), 1.0);
        assert_eq!(h.get(0, 0), C64::new(1.04, -0.05));
        assert_eq!(h.get(1, 1), C64::new(1.0, 0.05));
    }

    #[test]
    fn perturbed_examples() {
        let p = TrajectoryPoint::new(0.3, 0.01, 0.02, -1.0, 0.1);
        assert_eq!(hamiltonian_perturbed(&p, 1.0, 0.0), hamiltonian_nh(&p, 1.0));
        let p0 = TrajectoryPoint::new(0.0, 0.0, 0.0, -1.0, 0.1);
        let h = hamiltonian_perturbed(&p0, 1.0, 0.01);
        assert!((h.get(0, 1).re - 0.11).abs() < 1e-16);
        let p0 = TrajectoryPoint::new(0.0, 0.0, 0.0, -1.0, 0.02);
        assert_eq!(hamiltonian_perturbed(&p0, 1.0, -0.02).get(1, 0), C64::new(0.0, 0.0));
    }

    #[test]
    fn validation_rejects_bad_omega() {
        assert!(SensorConfig { omega: 0.0, ..fig_config() }.validate().is_err());
        assert!(SensorConfig { g0: f64::NAN, ..fig_config() }.validate().is_err());
        assert!(fig_config().validate().is_ok());
    }

    #[test]
    fn tabulated_interpolates_and_wraps() {
        let table = TabulatedModulation::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(table.sample(0.5), (0.5, 0.25));
        assert_eq!(table.sample(2.5), (0.5, 0.25));
        assert_eq!(table.sample(-1.5), (0.5, 0.25));
        let c = SensorConfig { modulation: Modulation::Tabulated(Arc::new(table)), ..fig_config() };
        let p = eval_trajectory(&c, 1.0);
        assert_eq!((p.delta, p.gamma_minus, p.gamma_plus), (1.0, 0.5, -0.5));
        assert!(TabulatedModulation::new(vec![0.0, 0.0], vec![0.0; 2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn tabulated_harmonic_reproduces_builtin() {
        let c = fig_config();
        let n = 20001;
        let t: Vec<f64> = (0..n).map(|k| c.period() * k as f64 / (n - 1) as f64).collect();
        let d = t.iter().map(|&x| eval_trajectory(&c, x).delta).collect();
        let g = t.iter().map(|&x| eval_trajectory(&c, x).gamma_minus).collect();
        let tab = SensorConfig {
            modulation: Modulation::Tabulated(Arc::new(TabulatedModulation::new(t, d, g).unwrap())),
            ..c.clone()
        };
        for k in 0..97 {
            let x = 0.0413 * k as f64;
            let (a, b) = (eval_trajectory(&c, x), eval_trajectory(&tab, x));
            assert!((a.delta - b.delta).abs() < 1e-8);
            assert!((a.gamma_minus - b.gamma_minus).abs() < 1e-8);
        }
    }
}
