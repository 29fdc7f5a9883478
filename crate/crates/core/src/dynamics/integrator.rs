//! Classical fixed-step fourth-order Runge–Kutta on a uniform step grid.

use std::ops::{Add, Mul};

use crate::algebra::{ComplexMat2, ComplexVec2};
use crate::error::DynamicsError;

pub trait OdeState: Copy + Add<Output = Self> + Mul<f64, Output = Self> {}

impl OdeState for ComplexVec2 {}
impl OdeState for ComplexMat2 {}

pub fn rk4_step<S: OdeState>(rhs: &impl Fn(f64, &S) -> S, t: f64, y: &S, h: f64) -> S {
    let half = 0.5 * h;
    let k1 = rhs(t, y);
    let k2 = rhs(t + half, &(*y + k1 * half));
    let k3 = rhs(t + half, &(*y + k2 * half));
    let k4 = rhs(t + h, &(*y + k3 * h));
    *y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// `n_steps` equal steps over `[start, end]`. Node times are computed from the
/// index so they do not accumulate rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGrid {
    pub start: f64,
    pub end: f64,
    pub n_steps: usize,
}

impl StepGrid {
    pub fn new(start: f64, end: f64, n_steps: usize) -> Result<Self, DynamicsError> {
        if !(start.is_finite() && end.is_finite()) || end <= start || n_steps == 0 {
            return Err(DynamicsError::BadSpan(start, end));
        }
        Ok(Self { start, end, n_steps })
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.n_steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            return self.end;
        }
        self.start + (self.end - self.start) * (k as f64 / self.n_steps as f64)
    }

    pub fn refined(&self) -> Self {
        Self { n_steps: 2 * self.n_steps, ..*self }
    }

    /// Snaps each sample to its nearest node. Returns node indices (strictly
    /// increasing) and the largest snapping error.
    pub fn snap(&self, samples: &[f64]) -> Result<(Vec<usize>, f64), DynamicsError> {
        let h = self.step();
        let tol = 1e-9 * h;
        let mut out = Vec::with_capacity(samples.len());
        let mut max_err = 0.0f64;
        for &s in samples {
            if !s.is_finite() || s < self.start - tol || s > self.end + tol {
                return Err(DynamicsError::SampleOutOfSpan(s));
            }
            let k = (((s - self.start) / h).round() as usize).min(self.n_steps);
            if out.last().is_some_and(|&prev| prev >= k) {
                return Err(DynamicsError::SampleCollision(s));
            }
            max_err = max_err.max((self.time(k) - s).abs());
            out.push(k);
        }
        Ok((out, max_err))
    }
}

/// Integrates from `grid.start`, calling `project` after every step and
/// `on_sample` at each requested node (node 0 included when requested).
pub fn propagate<S: OdeState>(
    grid: &StepGrid,
    y0: S,
    rhs: impl Fn(f64, &S) -> S,
    sample_nodes: &[usize],
    mut project: impl FnMut(&mut S),
    mut on_sample: impl FnMut(usize, f64, &S) -> Result<(), DynamicsError>,
) -> Result<S, DynamicsError> {
    let h = grid.step();
    let mut y = y0;
    let mut next = 0;
    if sample_nodes.first() == Some(&0) {
        on_sample(0, grid.start, &y)?;
        next = 1;
    }
    let last = sample_nodes.last().copied().unwrap_or(grid.n_steps);
    for k in 0..last {
        y = rk4_step(&rhs, grid.time(k), &y, h);
        project(&mut y);
        if next < sample_nodes.len() && sample_nodes[next] == k + 1 {
            on_sample(next, grid.time(k + 1), &y)?;
            next += 1;
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{C64, I};

    #[test]
    fn rk4_global_error_is_fourth_order_on_rotation() {
        // y' = -i y, y(0) = 1 → e^{-it}
        let rhs = |_t: f64, y: &ComplexVec2| y.scale(-I);
        let err = |n: usize| {
            let grid = StepGrid::new(0.0, 3.0, n).unwrap();
            let y = propagate(&grid, ComplexVec2::basis(0), rhs, &[n], |_| {}, |_, _, _| Ok(())).unwrap();
            (y.0[0] - C64::from_polar(1.0, -3.0)).norm()
        };
        let ratio = err(40) / err(80);
        assert!((ratio.log2() - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn snapping_rejects_collisions_and_out_of_range() {
        let grid = StepGrid::new(0.0, 1.0, 10).unwrap();
        let (idx, err) = grid.snap(&[0.0, 0.31, 1.0]).unwrap();
        assert_eq!(idx, vec![0, 3, 10]);
        assert!((err - 0.01).abs() < 1e-12);
        assert!(grid.snap(&[0.3, 0.31]).is_err());
        assert!(grid.snap(&[1.5]).is_err());
        assert!(StepGrid::new(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn node_times_hit_endpoints_exactly() {
        let grid = StepGrid::new(0.0, 0.98, 9800).unwrap();
        assert_eq!(grid.time(9800), 0.98);
        assert_eq!(grid.time(4900), 0.49);
    }
}
