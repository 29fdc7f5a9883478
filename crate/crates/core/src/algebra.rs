//! Dense 2×2 complex algebra used by every other module.

use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::ModelError;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Principal square root with the branch cut on the negative real axis.
///
/// On the cut the result always has a nonnegative imaginary part, whatever
/// the sign of the zero imaginary input. `Complex64::sqrt` follows the sign
/// of `-0.0`, which would flip eigenvalue labels for negative detuning.
pub fn principal_sqrt(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    if x == 0.0 && y == 0.0 {
        return ZERO;
    }
    let r = x.hypot(y);
    if x >= 0.0 {
        let t = ((r + x) * 0.5).sqrt();
        C64::new(t, y / (2.0 * t))
    } else {
        let t = ((r - x) * 0.5).sqrt();
        let im = if y == 0.0 { t } else { t.copysign(y) };
        C64::new(y.abs() / (2.0 * t), im)
    }
}

/// Two-component complex vector (a ket, or a row covector when used as a bra).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexVec2(pub [C64; 2]);

impl ComplexVec2 {
    pub fn new(a: C64, b: C64) -> Self {
        Self([a, b])
    }

    pub fn try_new(a: C64, b: C64) -> Result<Self, ModelError> {
        let v = Self([a, b]);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinite("vector entry"))
        }
    }

    pub fn basis(index: usize) -> Self {
        let mut v = [ZERO; 2];
        v[index] = ONE;
        Self(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }

    /// Bilinear pairing `Σ aᵢ bᵢ` (no conjugation): a row covector acting on a ket.
    pub fn pair(&self, ket: &ComplexVec2) -> C64 {
        self.0[0] * ket.0[0] + self.0[1] * ket.0[1]
    }

    /// Hermitian inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &ComplexVec2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// Outer product `|self⟩⟨other|` with `other` conjugated.
    pub fn outer_conj(&self, other: &ComplexVec2) -> ComplexMat2 {
        let (a, b) = (self.0, other.0);
        ComplexMat2([
            a[0] * b[0].conj(),
            a[0] * b[1].conj(),
            a[1] * b[0].conj(),
            a[1] * b[1].conj(),
        ])
    }

    /// Outer product `|self⟩(row)` of a ket with a row covector, no conjugation.
    pub fn outer_row(&self, row: &ComplexVec2) -> ComplexMat2 {
        let (a, b) = (self.0, row.0);
        ComplexMat2([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }
}

impl Index<usize> for ComplexVec2 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl Add for ComplexVec2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }
}

impl Sub for ComplexVec2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }
}

impl Mul<f64> for ComplexVec2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self([self.0[0] * s, self.0[1] * s])
    }
}

/// Row-major 2×2 complex matrix `[m00, m01, m10, m11]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat2(pub [C64; 4]);

impl ComplexMat2 {
    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Self([m00, m01, m10, m11])
    }

    /// Checked constructor; rejects NaN and infinite entries.
    pub fn try_new(m00: C64, m01: C64, m10: C64, m11: C64) -> Result<Self, ModelError> {
        let m = Self([m00, m01, m10, m11]);
        if m.is_finite() {
            Ok(m)
        } else {
            Err(ModelError::NonFinite("matrix entry"))
        }
    }

    pub fn zeros() -> Self {
        Self([ZERO; 4])
    }

    pub fn identity() -> Self {
        Self([ONE, ZERO, ZERO, ONE])
    }

    pub fn pauli_x() -> Self {
        Self([ZERO, ONE, ONE, ZERO])
    }

    /// `σ₋ = |0⟩⟨1|` in the `{|1⟩, |0⟩}` ordering: moves index 0 into index 1.
    pub fn lowering() -> Self {
        Self([ZERO, ZERO, ONE, ZERO])
    }

    pub fn raising() -> Self {
        Self([ZERO, ONE, ZERO, ZERO])
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[2 * row + col]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        self.0[0] + self.0[3]
    }

    pub fn det(&self) -> C64 {
        self.0[0] * self.0[3] - self.0[1] * self.0[2]
    }

    pub fn adjoint(&self) -> Self {
        let m = self.0;
        Self([m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|c| c * s))
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let (a, b) = (self.0, o.0);
        Self([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }

    pub fn apply(&self, v: &ComplexVec2) -> ComplexVec2 {
        let m = self.0;
        ComplexVec2([m[0] * v.0[0] + m[1] * v.0[1], m[2] * v.0[0] + m[3] * v.0[1]])
    }

    /// Row covector times matrix.
    pub fn apply_left(&self, row: &ComplexVec2) -> ComplexVec2 {
        let m = self.0;
        ComplexVec2([
            row.0[0] * m[0] + row.0[1] * m[2],
            row.0[0] * m[1] + row.0[1] * m[3],
        ])
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.matmul(o) - o.matmul(self)
    }

    pub fn anticommutator(&self, o: &Self) -> Self {
        self.matmul(o) + o.matmul(self)
    }

    /// Eigenvalues of a Hermitian matrix (real, ascending). Only the Hermitian
    /// part is used.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0].re;
        let d = self.0[3].re;
        let b = 0.5 * (self.0[1] + self.0[2].conj());
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half, mean + half]
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self.0;
        for (x, y) in out.iter_mut().zip(o.0) {
            *x += y;
        }
        Self(out)
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut out = self.0;
        for (x, y) in out.iter_mut().zip(o.0) {
            *x -= y;
        }
        Self(out)
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|c| c * s))
    }
}
