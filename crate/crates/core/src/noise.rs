//! Background-noise model for population readout.
//!
//! Spurious counts `N′±` are uniform on `[0, η± N]` and enter the measured
//! population to first order as
//! `P′₊ = P₊ + (1 − P₊) N′₊/N − P₊ N′₋/N`.
//! The uniform mean `η/2` is deliberately not subtracted.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;

use crate::error::NoiseError;

pub const DEFAULT_DELTA_P_REL: f64 = 0.03;
pub const MIN_MC_SAMPLES: usize = 10_000;
const ETA_SUM_CAP: f64 = 0.5;
const ETA_SUM_WARN: f64 = 0.1;
const MC_SHARD: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub eta_plus: f64,
    pub eta_minus: f64,
    /// Population fluctuation relative to `P₊`.
    pub delta_p_rel: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(eta_plus: f64, eta_minus: f64) -> Result<Self, NoiseError> {
        let m = Self { eta_plus, eta_minus, delta_p_rel: DEFAULT_DELTA_P_REL, seed: 0 };
        m.validate()?;
        if eta_plus + eta_minus > ETA_SUM_WARN {
            warn!("η₊ + η₋ = {} is outside the first-order regime", eta_plus + eta_minus);
        }
        Ok(m)
    }

    pub fn symmetric(eta: f64) -> Result<Self, NoiseError> {
        Self::new(eta, eta)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_delta_p_rel(self, delta_p_rel: f64) -> Self {
        Self { delta_p_rel, ..self }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (name, v) in [("eta_plus", self.eta_plus), ("eta_minus", self.eta_minus)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(NoiseError::InvalidParameter { name, reason: format!("{v} not in [0, 1)") });
            }
        }
        if self.eta_plus + self.eta_minus > ETA_SUM_CAP {
            return Err(NoiseError::InvalidParameter {
                name: "eta_plus + eta_minus",
                reason: format!("{} exceeds the cap {ETA_SUM_CAP}", self.eta_plus + self.eta_minus),
            });
        }
        if !(self.delta_p_rel.is_finite() && self.delta_p_rel >= 0.0) {
            return Err(NoiseError::InvalidParameter {
                name: "delta_p_rel",
                reason: format!("{} must be finite and nonnegative", self.delta_p_rel),
            });
        }
        Ok(())
    }

    /// `ΔP₊ = delta_p_rel · P₊`.
    pub fn delta_p(&self, p_plus: f64) -> f64 {
        self.delta_p_rel * p_plus
    }
}

pub fn noisy_population(p_plus: f64, frac_plus: f64, frac_minus: f64) -> f64 {
    p_plus + (1.0 - p_plus) * frac_plus - p_plus * frac_minus
}

/// `ΔP′₊ = sqrt{[1 − (η₊+η₋)]² ΔP₊² + (1 − P₊)² η₊² + P₊² η₋²}`.
pub fn population_uncertainty(p_plus: f64, dp_plus: f64, model: &NoiseModel) -> f64 {
    propagated(p_plus, dp_plus, model.eta_plus, model.eta_minus)
}

fn propagated(p: f64, dp: f64, eta_p: f64, eta_m: f64) -> f64 {
    let damp = 1.0 - (eta_p + eta_m);
    (damp * damp * dp * dp + (1.0 - p).powi(2) * eta_p * eta_p + p * p * eta_m * eta_m).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaUncertainty {
    Finite(f64),
    /// Zero susceptibility: λ cannot be resolved at all.
    Divergent,
}

impl LambdaUncertainty {
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Divergent => f64::INFINITY,
        }
    }
}

/// `Δλ′ ≈ ΔP′₊ / |χ|`.
pub fn min_lambda_uncertainty(dp_prime: f64, chi: f64) -> LambdaUncertainty {
    if chi == 0.0 || chi.is_nan() {
        return LambdaUncertainty::Divergent;
    }
    LambdaUncertainty::Finite(dp_prime / chi.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyResult {
    /// Noisy population with both spurious fractions at their means.
    pub p_prime: f64,
    pub dp_prime: f64,
    pub dlambda_min: LambdaUncertainty,
}

pub fn uncertainty(p_plus: f64, chi: f64, model: &NoiseModel) -> UncertaintyResult {
    let dp_prime = population_uncertainty(p_plus, model.delta_p(p_plus), model);
    UncertaintyResult {
        p_prime: noisy_population(p_plus, 0.5 * model.eta_plus, 0.5 * model.eta_minus),
        dp_prime,
        dlambda_min: min_lambda_uncertainty(dp_prime, chi),
    }
}

/// One sensor's readout statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub p: f64,
    pub dp: f64,
    pub chi: f64,
}

impl OperatingPoint {
    /// `dp` from the relative fluctuation convention.
    pub fn relative(p: f64, chi: f64, delta_p_rel: f64) -> Self {
        Self { p, dp: delta_p_rel * p, chi }
    }

    pub fn dp_prime(&self, eta: f64) -> f64 {
        propagated(self.p, self.dp, eta, eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossover {
    At(f64),
    /// The two ΔP′₊ curves coincide everywhere; reported at the range start.
    Degenerate(f64),
    None,
}

/// η (with `η₊ = η₋ = η`) at which both sensors have equal ΔP′₊, by bisection.
pub fn crossover_eta(nh: &OperatingPoint, h: &OperatingPoint, eta_range: (f64, f64)) -> Result<Crossover, NoiseError> {
    let (lo, hi) = eta_range;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi && 2.0 * hi <= ETA_SUM_CAP) {
        return Err(NoiseError::BadRange(lo, hi));
    }
    let diff = |eta: f64| nh.dp_prime(eta) - h.dp_prime(eta);
    if nh.p == h.p && nh.dp.abs() == h.dp.abs() {
        return Ok(Crossover::Degenerate(lo));
    }
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (diff(a), diff(b));
    if fa == 0.0 {
        return Ok(Crossover::At(a));
    }
    if fb == 0.0 {
        return Ok(Crossover::At(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(Crossover::None);
    }
    let sa = fa.signum();
    while b - a > 1e-8 {
        let m = 0.5 * (a + b);
        let fm = diff(m);
        if fm == 0.0 {
            return Ok(Crossover::At(m));
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(Crossover::At(0.5 * (a + b)))
}

/// Sample standard deviation of `P′₊` with `N′±/N ~ U[0, η±]` and
/// `P₊ ~ N(p_plus, dp_plus)`, pushed through the first-order readout.
///
/// Samples are drawn in fixed-size shards, each from its own ChaCha stream,
/// so the result depends only on `(model.seed, n_samples)`.
pub fn monte_carlo_uncertainty(
    p_plus: f64,
    dp_plus: f64,
    model: &NoiseModel,
    n_samples: usize,
) -> Result<f64, NoiseError> {
    model.validate()?;
    if n_samples < MIN_MC_SAMPLES {
        return Err(NoiseError::TooFewSamples { got: n_samples, min: MIN_MC_SAMPLES });
    }
    if !(dp_plus.is_finite() && dp_plus >= 0.0) {
        return Err(NoiseError::InvalidParameter { name: "dp_plus", reason: format!("{dp_plus}") });
    }
    let uniform = |eta: f64| Uniform::new_inclusive(0.0, eta).expect("eta validated");
    let (u_plus, u_minus) = (uniform(model.eta_plus), uniform(model.eta_minus));
    let gauss = Normal::new(p_plus, dp_plus).map_err(|e| NoiseError::InvalidParameter {
        name: "dp_plus",
        reason: e.to_string(),
    })?;

    let n_shards = n_samples.div_ceil(MC_SHARD);
    let shards: Vec<Moments> = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream(shard as u64);
            let count = MC_SHARD.min(n_samples - shard * MC_SHARD);
            let mut m = Moments::default();
            for _ in 0..count {
                let p = gauss.sample(&mut rng);
                let fp = u_plus.sample(&mut rng);
                let fm = u_minus.sample(&mut rng);
                m.push(noisy_population(p, fp, fm));
            }
            m
        })
        .collect();
    let total = shards.into_iter().fold(Moments::default(), Moments::merge);
    Ok((total.m2 / (total.n - 1.0)).sqrt())
}

/// Welford accumulator.
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Self { n, mean: a.mean + d * b.n / n, m2: a.m2 + b.m2 + d * d * a.n * b.n / n }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noisy_population_examples() {
        assert_eq!(noisy_population(0.42, 0.0, 0.0), 0.42);
        assert!((noisy_population(0.5, 0.03, 0.03) - 0.5).abs() < 1e-16);
        assert!((noisy_population(0.3784, 0.025, 0.025) - 0.38448).abs() < 1e-12);
    }

    #[test]
    fn propagated_uncertainty_examples() {
        let clean = NoiseModel::new(0.0, 0.0).unwrap();
        assert_eq!(population_uncertainty(0.3, 0.01, &clean), 0.01);

        let m = NoiseModel::symmetric(0.04).unwrap();
        let p: f64 = 0.3;
        let want = 0.04 * ((1.0 - p).powi(2) + p * p).sqrt();
        assert!((population_uncertainty(p, 0.0, &m) - want).abs() < 1e-15);

        let m = NoiseModel::symmetric(0.05).unwrap();
        let dp = m.delta_p(0.3784);
        assert!((dp - 0.011352).abs() < 1e-15);
        assert!((population_uncertainty(0.3784, dp, &m) - 0.037794).abs() < 1e-6);
    }

    #[test]
    fn lambda_uncertainty_examples() {
        assert_eq!(min_lambda_uncertainty(0.0, 3.0), LambdaUncertainty::Finite(0.0));
        assert_eq!(min_lambda_uncertainty(0.1, 0.0), LambdaUncertainty::Divergent);
        let a = min_lambda_uncertainty(0.02, -7.0).value();
        let b = min_lambda_uncertainty(0.02, -14.0).value();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn uncertainty_bundles_the_pieces() {
        let m = NoiseModel::symmetric(0.05).unwrap();
        let r = uncertainty(0.3784, 50.0, &m);
        assert!((r.p_prime - 0.38448).abs() < 1e-12);
        assert!((r.dlambda_min.value() - r.dp_prime / 50.0).abs() < 1e-18);
    }

    #[test]
    fn crossover_matches_closed_form_quadratic() {
        let nh = OperatingPoint::relative(0.3784, 0.0, 0.03);
        let h = OperatingPoint::relative(0.49, 0.0, 0.03);
        // (1−2η)² (dp_nh² − dp_h²) + η² (s_nh − s_h) = 0 with s = (1−p)² + p²
        let s = |p: f64| (1.0 - p).powi(2) + p * p;
        let k = ((h.dp.powi(2) - nh.dp.powi(2)) / (s(nh.p) - s(h.p))).sqrt();
        let oracle = k / (1.0 + 2.0 * k);
        let Crossover::At(eta) = crossover_eta(&nh, &h, (0.0, 0.1)).unwrap() else { panic!() };
        assert!((eta - oracle).abs() < 1e-8, "{eta} vs {oracle}");
        assert!((eta - 0.0491).abs() < 1e-4);
    }

    #[test]
    fn crossover_degenerate_and_absent() {
        let a = OperatingPoint::relative(0.4, 3.0, 0.03);
        assert_eq!(crossover_eta(&a, &a, (0.0, 0.1)).unwrap(), Crossover::Degenerate(0.0));
        let low = OperatingPoint { p: 0.5, dp: 0.001, chi: 1.0 };
        let high = OperatingPoint { p: 0.5, dp: 0.01, chi: 1.0 };
        assert_eq!(crossover_eta(&low, &high, (0.0, 0.1)).unwrap(), Crossover::None);
        assert!(crossover_eta(&low, &high, (0.1, 0.0)).is_err());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.3, 0.3).is_err());
        assert!(NoiseModel::new(0.2, 0.2).is_ok());
        assert_eq!(NoiseModel::new(0.01, 0.0).unwrap().delta_p_rel, 0.03);
    }

    #[test]
    fn monte_carlo_zero_noise_is_zero() {
        let m = NoiseModel::new(0.0, 0.0).unwrap();
        assert_eq!(monte_carlo_uncertainty(0.4, 0.0, &m, 20_000).unwrap(), 0.0);
        assert!(monte_carlo_uncertainty(0.4, 0.0, &m, 10).is_err());
    }

    #[test]
    fn monte_carlo_matches_exact_uniform_variance() {
        // symmetric P = 0.5: Var = 0.25 · 2 · η²/12 exactly
        let eta = 0.02;
        let m = NoiseModel::symmetric(eta).unwrap().with_seed(7);
        let n = 400_000;
        let mc = monte_carlo_uncertainty(0.5, 0.0, &m, n).unwrap();
        let exact = (0.25 * 2.0 * eta * eta / 12.0f64).sqrt();
        // standard error of a sample std of a near-gaussian is ≈ σ/√(2n)
        assert!((mc - exact).abs() < 4.0 * exact / (2.0 * n as f64).sqrt() * 1.5, "{mc} vs {exact}");
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let m = NoiseModel::symmetric(0.01).unwrap().with_seed(42);
        let a = monte_carlo_uncertainty(0.3784, 0.011352, &m, 200_000).unwrap();
        let b = monte_carlo_uncertainty(0.3784, 0.011352, &m, 200_000).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = monte_carlo_uncertainty(0.3784, 0.011352, &m.with_seed(43), 200_000).unwrap();
        assert_ne!(a, c);
    }
}
