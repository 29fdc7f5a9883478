//! Closed-form spectral analysis of the 2×2 sensor Hamiltonian.
//!
//! Everything here uses the principal square root. Eigenvalue labels `±`
//! follow the formula, never an energy ordering, so `E₊ − E₋ = Δ_E` holds
//! identically and the labels swap whenever the discriminant crosses the
//! negative real axis.

use crate::algebra::{principal_sqrt, ComplexMat2, ComplexVec2, C64, I, ZERO};
use crate::error::SpectralError;
use crate::model::{eval_trajectory, SensorConfig, TrajectoryPoint};

/// Relative tolerance on `|A₊ − A₋|` below which eigenvectors are treated as coalesced.
pub const COALESCENCE_TOL: f64 = 1e-12;
/// Largest biorthogonality residual accepted before a spectrum is flagged.
pub const BIORTHOGONALITY_TOL: f64 = 1e-10;

/// `u = 2δ − i(γ₋ − γ₊)`; the discriminant is `(iu)² − 16g²`.
fn detuning_term(point: &TrajectoryPoint) -> C64 {
    C64::new(2.0 * point.delta, -(point.gamma_minus - point.gamma_plus))
}

/// Discriminant `z = (γ₋ − γ₊ + 2iδ)² − 16g²`, snapped to exactly zero when
/// it is a rounding residue of the two cancelling terms.
pub fn discriminant(point: &TrajectoryPoint) -> C64 {
    let w = C64::new(point.gamma_minus - point.gamma_plus, 2.0 * point.delta);
    let c = 16.0 * point.g * point.g;
    let z = w * w - c;
    let scale = w.norm_sqr() + c;
    if z.norm() <= 8.0 * f64::EPSILON * scale {
        ZERO
    } else {
        z
    }
}

/// `Δ_E = (i/2) √z` on the principal branch. Exactly zero at an EP.
pub fn energy_splitting(point: &TrajectoryPoint) -> C64 {
    0.5 * I * principal_sqrt(discriminant(point))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub e_plus: C64,
    pub e_minus: C64,
    pub delta_e: C64,
    pub a_plus: C64,
    pub a_minus: C64,
    /// Unit-norm right eigenvectors.
    pub right_plus: ComplexVec2,
    pub right_minus: ComplexVec2,
    /// Row covectors scaled so that `⟨φ̂ₙ|φₘ⟩ = δₙₘ`.
    pub left_plus: ComplexVec2,
    pub left_minus: ComplexVec2,
    /// Set at (or numerically indistinguishable from) an exceptional point.
    /// Left covectors are then unscaled and populations are undefined.
    pub ep_condition_flag: bool,
}

impl Spectrum {
    /// Largest `|⟨φ̂ₙ|φₘ⟩ − δₙₘ|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let pairs = [
            (self.left_plus.pair(&self.right_plus) - 1.0).norm(),
            (self.left_minus.pair(&self.right_minus) - 1.0).norm(),
            self.left_plus.pair(&self.right_minus).norm(),
            self.left_minus.pair(&self.right_plus).norm(),
        ];
        pairs.into_iter().fold(0.0, f64::max)
    }

    /// `Σₙ |φₙ⟩⟨φ̂ₙ|`, the identity away from EPs.
    pub fn closure(&self) -> ComplexMat2 {
        self.right_plus.outer_row(&self.left_plus) + self.right_minus.outer_row(&self.left_minus)
    }

    /// `max(‖Hφ₊ − E₊φ₊‖, ‖Hφ₋ − E₋φ₋‖)`.
    pub fn eigen_residual(&self, h: &ComplexMat2) -> f64 {
        let r = |v: &ComplexVec2, e: C64| (h.apply(v) - v.scale(e)).norm();
        r(&self.right_plus, self.e_plus).max(r(&self.right_minus, self.e_minus))
    }
}

fn right_vector(a: C64, a_alt: C64, g: f64) -> ComplexVec2 {
    let four_g = C64::new(4.0 * g, 0.0);
    let primary = ComplexVec2::new(a, four_g);
    let alt = ComplexVec2::new(four_g, a_alt);
    let (np, na) = (primary.norm(), alt.norm());
    // [A, 4g] vanishes for decoupled levels; the first-row form [4g, A'] is
    // the same eigenvector there.
    if np >= 1e-8 * na && np > 0.0 {
        primary.scale(C64::new(1.0 / np, 0.0))
    } else if na > 0.0 {
        alt.scale(C64::new(1.0 / na, 0.0))
    } else {
        ComplexVec2::basis(0)
    }
}

fn biorthonormal_left(right: &ComplexVec2) -> Option<ComplexVec2> {
    // H is complex symmetric, so the left eigenvector is the transposed right one.
    let d = right.pair(right);
    if d.norm() == 0.0 {
        return None;
    }
    let left = right.scale(d.inv());
    left.is_finite().then_some(left)
}

/// Eigenvalues and biorthogonal eigenvectors at `point`.
///
/// `h` must be the matrix assembled from the same point; this is checked
/// through its trace.
pub fn eigensystem(h: &ComplexMat2, point: &TrajectoryPoint, epsilon: f64) -> Result<Spectrum, SpectralError> {
    let delta_e = energy_splitting(point);
    let center = C64::new(2.0 * (2.0 * epsilon + point.delta), -(point.gamma_plus + point.gamma_minus));
    let e_plus = 0.25 * (center + 2.0 * delta_e);
    let e_minus = 0.25 * (center - 2.0 * delta_e);

    let trace = h.trace();
    if (trace - (e_plus + e_minus)).norm() > 1e-12 * trace.norm().max(1.0) {
        return Err(SpectralError::InconsistentHamiltonian {
            expected: format!("{}", e_plus + e_minus),
            found: format!("{trace}"),
        });
    }

    let u = detuning_term(point);
    let a_plus = u + 2.0 * delta_e;
    let a_minus = u - 2.0 * delta_e;
    let right_plus = right_vector(a_plus, 2.0 * delta_e - u, point.g);
    let right_minus = right_vector(a_minus, -2.0 * delta_e - u, point.g);

    let coalesced = (a_plus - a_minus).norm()
        <= COALESCENCE_TOL * (a_plus.norm() + a_minus.norm() + 4.0 * point.g.abs());

    let mut spectrum = Spectrum {
        e_plus,
        e_minus,
        delta_e,
        a_plus,
        a_minus,
        right_plus,
        right_minus,
        left_plus: right_plus,
        left_minus: right_minus,
        ep_condition_flag: true,
    };
    if coalesced {
        return Ok(spectrum);
    }
    if let (Some(lp), Some(lm)) = (biorthonormal_left(&right_plus), biorthonormal_left(&right_minus)) {
        spectrum.left_plus = lp;
        spectrum.left_minus = lm;
        spectrum.ep_condition_flag = spectrum.biorthogonality_residual() > BIORTHOGONALITY_TOL;
    }
    Ok(spectrum)
}

/// Spectrum of the sensor Hamiltonian at time `t`.
pub fn spectrum_at(config: &SensorConfig, t: f64) -> Spectrum {
    let point = eval_trajectory(config, t);
    let h = crate::model::hamiltonian_nh(&point, config.epsilon);
    eigensystem(&h, &point, config.epsilon).expect("matrix assembled from the same point")
}

/// Splitting susceptibility `∂Δ_E/∂g`, tagged when it diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Susceptibility {
    Finite(C64),
    /// Pole at `Δ_E = 0`; `sign` is the sign of `4g`.
    Divergent { sign: f64 },
}

impl Susceptibility {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Self::Divergent { .. })
    }

    pub fn magnitude(&self) -> f64 {
        match self {
            Self::Finite(c) => c.norm(),
            Self::Divergent { .. } => f64::INFINITY,
        }
    }

    pub fn re(&self) -> f64 {
        match self {
            Self::Finite(c) => c.re,
            Self::Divergent { sign } => sign * f64::INFINITY,
        }
    }

    pub fn im(&self) -> f64 {
        match self {
            Self::Finite(c) => c.im,
            Self::Divergent { sign } => sign * f64::INFINITY,
        }
    }
}

/// `χ = 4g / Δ_E`.
pub fn susceptibility_chi(point: &TrajectoryPoint) -> Susceptibility {
    let de = energy_splitting(point);
    if de == ZERO {
        let sign = if point.g < 0.0 { -1.0 } else { 1.0 };
        Susceptibility::Divergent { sign }
    } else {
        Susceptibility::Finite(4.0 * point.g / de)
    }
}

/// Magnitude ratio of two susceptibilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enhancement {
    Finite(f64),
    Divergent,
    /// 0/0 or ∞/∞.
    Undefined,
}

impl Enhancement {
    /// Builds `|num / den|` from magnitudes where `f64::INFINITY` marks a pole.
    pub fn from_magnitudes(num: f64, den: f64) -> Self {
        let (num, den) = (num.abs(), den.abs());
        if num.is_nan() || den.is_nan() {
            return Self::Undefined;
        }
        match (num.is_infinite(), den.is_infinite(), den == 0.0) {
            (true, true, _) => Self::Undefined,
            (true, false, _) => Self::Divergent,
            (false, true, _) => Self::Finite(0.0),
            (false, false, true) if num == 0.0 => Self::Undefined,
            (false, false, true) => Self::Divergent,
            (false, false, false) => Self::Finite(num / den),
        }
    }

    /// `f64::INFINITY` for divergent, NaN for undefined.
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Divergent => f64::INFINITY,
            Self::Undefined => f64::NAN,
        }
    }
}

/// `S_E = |χ_NH / χ_H|`, the Hermitian point being the same trajectory with `Γ₀ = 0`.
pub fn enhancement_se(point_nh: &TrajectoryPoint, point_h: &TrajectoryPoint) -> Enhancement {
    Enhancement::from_magnitudes(susceptibility_chi(point_nh).magnitude(), susceptibility_chi(point_h).magnitude())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub rho_sq: f64,
    /// `atan2(2√(ab), a − b − c)`, in `(−π, π]`.
    pub theta: f64,
}

pub fn polar_decomposition(point: &TrajectoryPoint, alpha: f64) -> PolarDecomposition {
    let a = (1.0 - alpha).powi(2) * point.gamma_minus * point.gamma_minus;
    let b = 4.0 * point.delta * point.delta;
    let c = 16.0 * point.g * point.g;
    let ca = c - a;
    let rho_sq = ca * ca + 2.0 * b * ca + b * b + 4.0 * a * b;
    let theta = (2.0 * (a * b).sqrt()).atan2(a - b - c);
    PolarDecomposition { a, b, c, rho_sq, theta }
}

/// How the optimal time was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `c = a(τ) − b(τ)` has a solution in range.
    Matched,
    /// `c` exceeds `max[a − b]`; τ is the argmax.
    Saturated,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Matched => "matched",
            Self::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalTime {
    pub tau: f64,
    pub regime: Regime,
    /// `max_t [a(t) − b(t)]` over the range.
    pub max_gap: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub points_per_period: usize,
    /// Root tolerance on `|c − (a − b)|`, energy² units.
    pub tol_root: f64,
    /// Bisection stops when the bracket is below this fraction of a period.
    pub rel_interval: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { points_per_period: 100_000, tol_root: 1e-10, rel_interval: 1e-12 }
    }
}

fn check_range(config: &SensorConfig, t_range: (f64, f64)) -> Result<(), SpectralError> {
    config.validate()?;
    let period = config.period();
    let (start, end) = t_range;
    if !(start.is_finite() && end.is_finite()) || end - start < period * (1.0 - 1e-12) {
        return Err(SpectralError::RangeTooShort { start, end, period });
    }
    Ok(())
}

fn grid(t_range: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let (start, end) = t_range;
    (0..=n).map(move |i| start + (end - start) * (i as f64 / n as f64))
}

fn grid_size(config: &SensorConfig, t_range: (f64, f64), per_period: usize) -> usize {
    (((t_range.1 - t_range.0) / config.period()) * per_period as f64).ceil().max(2.0) as usize
}

/// Minimizes `f` on `[lo, hi]`, returning `(x, f(x))`.
pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 { (x1, f1) } else { (x2, f2) }
}

fn gap(config: &SensorConfig, t: f64) -> f64 {
    let p = polar_decomposition(&eval_trajectory(config, t), config.alpha);
    p.a - p.b
}

/// Optimal sensing time from the eigenvalue-matching condition.
pub fn optimal_time(config: &SensorConfig, t_range: (f64, f64)) -> Result<OptimalTime, SpectralError> {
    optimal_time_with(config, t_range, &SearchOptions::default())
}

pub fn optimal_time_with(
    config: &SensorConfig,
    t_range: (f64, f64),
    opts: &SearchOptions,
) -> Result<OptimalTime, SpectralError> {
    check_range(config, t_range)?;
    let n = grid_size(config, t_range, opts.points_per_period);
    let ts: Vec<f64> = grid(t_range, n).collect();
    let gaps: Vec<f64> = ts.iter().map(|&t| gap(config, t)).collect();
    let c = 16.0 * config.coupling().powi(2);

    let (imax, _) = gaps
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let lo = ts[imax.saturating_sub(1)];
    let hi = ts[(imax + 1).min(n)];
    let (t_ref, neg) = golden_section_min(|t| -gap(config, t), lo, hi, 1e-14 * config.period());
    let (t_star, max_gap) = if -neg >= gaps[imax] { (t_ref, -neg) } else { (ts[imax], gaps[imax]) };

    if max_gap <= 0.0 {
        return Err(SpectralError::NoMatchedWindow { max_gap });
    }
    if c <= 0.0 {
        return Err(SpectralError::ZeroCoupling { c });
    }
    if c > max_gap + opts.tol_root {
        return Ok(OptimalTime { tau: t_star, regime: Regime::Saturated, max_gap, c });
    }

    let h = |t: f64| gap(config, t) - c;
    let mut tau = None;
    for i in 0..=n {
        let hi_val = gaps[i] - c;
        if hi_val.abs() < opts.tol_root && (i == 0 || (gaps[i - 1] - c).signum() != hi_val.signum()) {
            tau = Some(ts[i]);
            break;
        }
        if i > 0 {
            let lo_val = gaps[i - 1] - c;
            if lo_val.signum() != hi_val.signum() && lo_val != 0.0 {
                tau = Some(bisect(&h, ts[i - 1], ts[i], opts.rel_interval * config.period()));
                break;
            }
        }
    }
    // A tangential touch of the maximum (c = max[a − b]) has no sign change.
    let tangent = ((max_gap - c).abs() < opts.tol_root).then_some(t_star);
    let tau = match (tau, tangent) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(SpectralError::NoMatchedWindow { max_gap }),
    };
    Ok(OptimalTime { tau, regime: Regime::Matched, max_gap, c })
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpProximity {
    pub t_min: f64,
    pub de_min: f64,
}

/// Minimum of `|Δ_E(t)|` over the range: zero means the trajectory crosses an EP.
pub fn ep_proximity(config: &SensorConfig, t_range: (f64, f64)) -> Result<EpProximity, SpectralError> {
    ep_proximity_with(config, t_range, &SearchOptions::default())
}

pub fn ep_proximity_with(
    config: &SensorConfig,
    t_range: (f64, f64),
    opts: &SearchOptions,
) -> Result<EpProximity, SpectralError> {
    check_range(config, t_range)?;
    let n = grid_size(config, t_range, opts.points_per_period);
    let de = |t: f64| energy_splitting(&eval_trajectory(config, t)).norm();
    let (imin, t_grid, v_grid) = grid(t_range, n)
        .enumerate()
        .map(|(i, t)| (i, t, de(t)))
        .fold((0, t_range.0, f64::INFINITY), |acc, x| if x.2 < acc.2 { x } else { acc });
    if v_grid == 0.0 {
        return Ok(EpProximity { t_min: t_grid, de_min: 0.0 });
    }
    let step = (t_range.1 - t_range.0) / n as f64;
    let lo = if imin == 0 { t_grid } else { t_grid - step };
    let hi = if imin == n { t_grid } else { t_grid + step };
    let (t_ref, v_ref) = golden_section_min(de, lo, hi, 1e-14 * config.period());
    Ok(if v_ref < v_grid {
        EpProximity { t_min: t_ref, de_min: v_ref }
    } else {
        EpProximity { t_min: t_grid, de_min: v_grid }
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::model::hamiltonian_nh;

    fn pt(delta: f64, gamma_minus: f64, g: f64) -> TrajectoryPoint {
        TrajectoryPoint::new(0.0, delta, gamma_minus, -1.0, g)
    }

    fn fig1(g0: f64) -> SensorConfig {
        SensorConfig::harmonic(g0, 0.04, 0.2, PI, -1.0)
    }

    #[test]
    fn splitting_hermitian_zero_detuning_is_minus_two_g() {
        let de = energy_splitting(&pt(0.0, 0.0, 0.02));
        assert!((de - C64::new(-0.04, 0.0)).norm() < 1e-17);
    }

    #[test]
    fn splitting_vanishes_at_second_ep_condition() {
        assert_eq!(energy_splitting(&pt(0.0, 0.2, 0.1)), ZERO);
    }

    #[test]
    fn splitting_at_reference_window_matches_oracle() {
        // independent evaluation with 30-digit arithmetic
        let p = eval_trajectory(&fig1(0.02), 0.295);
        let de = energy_splitting(&p).norm();
        assert!((de - 0.052_485_445_953_897_43).abs() < 1e-14, "{de}");
    }

    #[test]
    fn negative_detuning_keeps_principal_sign() {
        // 0 * (negative δ) produces -0.0 in the imaginary part of z
        let de = energy_splitting(&TrajectoryPoint::new(0.0, -0.03, 0.0, -1.0, 0.02));
        let expected = -(0.03f64 * 0.03 + 4.0 * 0.02 * 0.02).sqrt();
        assert!((de.re - expected).abs() < 1e-16 && de.im == 0.0, "{de}");
    }

    #[test]
    fn eigensystem_hermitian_labels_follow_branch() {
        let p = pt(0.0, 0.0, 0.02);
        let s = eigensystem(&hamiltonian_nh(&p, 1.0), &p, 1.0).unwrap();
        assert!((s.e_plus - C64::new(0.98, 0.0)).norm() < 1e-15);
        assert!((s.e_minus - C64::new(1.02, 0.0)).norm() < 1e-15);
        assert!(!s.ep_condition_flag);
    }

    #[test]
    fn eigensystem_at_ep_sets_flag() {
        let p = pt(0.0, 0.2, 0.1);
        let s = eigensystem(&hamiltonian_nh(&p, 1.0), &p, 1.0).unwrap();
        assert!(s.ep_condition_flag);
        assert!((s.e_plus - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(s.e_plus, s.e_minus);
        assert!(s.right_plus.is_finite() && s.left_plus.is_finite());
    }

    #[test]
    fn eigensystem_residual_at_quarter_period() {
        let c = fig1(0.1);
        let p = eval_trajectory(&c, 0.5);
        let h = hamiltonian_nh(&p, 1.0);
        let s = eigensystem(&h, &p, 1.0).unwrap();
        assert!(s.eigen_residual(&h) < 1e-10);
        assert!(s.biorthogonality_residual() < 1e-12);
    }

    #[test]
    fn eigensystem_decoupled_levels() {
        let p = pt(0.03, 0.0, 0.0);
        let h = hamiltonian_nh(&p, 1.0);
        let s = eigensystem(&h, &p, 1.0).unwrap();
        assert!(!s.ep_condition_flag);
        assert!(s.eigen_residual(&h) < 1e-15);
        assert!(s.biorthogonality_residual() < 1e-15);
    }

    #[test]
    fn eigensystem_rejects_foreign_matrix() {
        let p = pt(0.0, 0.0, 0.02);
        let other = hamiltonian_nh(&pt(0.5, 0.0, 0.02), 1.0);
        assert!(matches!(eigensystem(&other, &p, 1.0), Err(SpectralError::InconsistentHamiltonian { .. })));
    }

    #[test]
    fn chi_examples() {
        match susceptibility_chi(&pt(0.0, 0.0, 0.37)) {
            Susceptibility::Finite(c) => assert!((c - C64::new(-2.0, 0.0)).norm() < 1e-15),
            other => panic!("{other:?}"),
        }
        match susceptibility_chi(&pt(0.0, 0.2, 0.1006689)) {
            Susceptibility::Finite(c) => {
                assert!((c.re + 17.378_195_788_419_76).abs() < 1e-9, "{c}");
                assert!(c.im.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(susceptibility_chi(&pt(0.0, 0.2, 0.1)), Susceptibility::Divergent { sign: 1.0 });
    }

    #[test]
    fn se_examples() {
        let p = pt(0.01, 0.0, 0.05);
        assert_eq!(enhancement_se(&p, &p), Enhancement::Finite(1.0));
        let g = 0.1 * (1.0 + 0.006689);
        let se = enhancement_se(&pt(0.0, 0.2, g), &pt(0.0, 0.0, g)).value();
        assert!((se - 8.689_097_894_209_88).abs() < 1e-8, "{se}");
        assert_eq!(enhancement_se(&pt(0.0, 0.2, 0.1), &pt(0.0, 0.0, 0.1)), Enhancement::Divergent);
    }

    #[test]
    fn enhancement_tagging() {
        assert_eq!(Enhancement::from_magnitudes(0.0, 0.0), Enhancement::Undefined);
        assert_eq!(Enhancement::from_magnitudes(1.0, 0.0), Enhancement::Divergent);
        assert_eq!(Enhancement::from_magnitudes(1.0, f64::INFINITY), Enhancement::Finite(0.0));
        assert!(Enhancement::Undefined.value().is_nan());
    }

    #[test]
    fn polar_examples() {
        let p = polar_decomposition(&pt(0.0, 0.0, 0.02), -1.0);
        assert_eq!((p.a, p.b), (0.0, 0.0));
        assert!((p.c - 6.4e-3).abs() < 1e-18);
        assert!((p.rho_sq - p.c * p.c).abs() < 1e-20);

        let p = polar_decomposition(&eval_trajectory(&fig1(0.02), 0.295), -1.0);
        assert!((p.a - 6.386_559_853_144_691e-3).abs() < 1e-15);
        assert!((p.b - 4.092_771_539_325_534e-3).abs() < 1e-15);
        assert!((p.c - 6.4e-3).abs() < 1e-18);
    }

    #[test]
    fn optimal_time_matched_at_half_period() {
        let r = optimal_time(&fig1(0.1), (0.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::Matched);
        assert!((r.tau - 1.0).abs() < 1e-6, "{}", r.tau);
    }

    #[test]
    fn optimal_time_matched_quadratic_oracle() {
        // 0.1856 y² − 0.0256 y − 0.0064 = 0 with y = sin²(ωτ/2)
        let (qa, qb, qc) = (0.1856f64, -0.0256f64, -0.0064f64);
        let y = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        let tau = 2.0 * y.sqrt().asin() / PI;
        let r = optimal_time(&fig1(0.02), (0.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::Matched);
        assert!((r.tau - tau).abs() < 1e-9, "{} vs {tau}", r.tau);
        assert!((r.tau - 0.345_733_438_785_163_3).abs() < 1e-9);
    }

    #[test]
    fn optimal_time_saturated() {
        let r = optimal_time(&fig1(1.0), (0.0, 2.0)).unwrap();
        assert_eq!(r.regime, Regime::Saturated);
        assert!((r.tau - 1.0).abs() < 1e-6);
    }

    #[test]
    fn optimal_time_errors() {
        assert!(matches!(optimal_time(&fig1(0.1), (0.0, 1.0)), Err(SpectralError::RangeTooShort { .. })));
        let flat = SensorConfig::harmonic(0.1, 0.04, 0.0, PI, -1.0);
        assert!(matches!(optimal_time(&flat, (0.0, 2.0)), Err(SpectralError::NoMatchedWindow { .. })));
    }

    #[test]
    fn ep_proximity_examples() {
        let r = ep_proximity(&fig1(0.1), (0.0, 2.0)).unwrap();
        assert_eq!(r.de_min, 0.0);
        assert!((r.t_min - 1.0).abs() < 1e-12);

        let constant = SensorConfig::harmonic(0.03, 0.0, 0.0, PI, -1.0);
        let r = ep_proximity(&constant, (0.0, 2.0)).unwrap();
        assert!((r.de_min - 0.06).abs() < 1e-15);

        let far = SensorConfig::harmonic(0.02, 0.04, 0.1, PI, -1.0);
        assert!(ep_proximity(&far, (0.0, 2.0)).unwrap().de_min > 0.02);
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, fx) = golden_section_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && (fx - 1.0).abs() < 1e-12);
    }
}
