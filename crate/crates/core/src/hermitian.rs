//! 2x2 Hermitian matrices standing in for real (1,1)-forms on a surface.
//!
//! A form `i h_{ij̄} dz^i ∧ dz̄^j` is stored by its coefficient matrix with
//! `h_{21̄} = conj(h_{12̄})` implied.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian2 {
    pub h11: f64,
    pub h22: f64,
    pub h12: Complex64,
}

impl Hermitian2 {
    pub const ZERO: Hermitian2 = Hermitian2 { h11: 0.0, h22: 0.0, h12: Complex64 { re: 0.0, im: 0.0 } };

    pub const IDENTITY: Hermitian2 = Hermitian2 { h11: 1.0, h22: 1.0, h12: Complex64 { re: 0.0, im: 0.0 } };

    pub fn new(h11: f64, h22: f64, h12: Complex64) -> Self {
        Hermitian2 { h11, h22, h12 }
    }

    pub fn diag(h11: f64, h22: f64) -> Self {
        Hermitian2 { h11, h22, h12: Complex64::new(0.0, 0.0) }
    }

    /// Real symmetric matrix `[[a, c], [c, b]]`.
    pub fn real(a: f64, b: f64, c: f64) -> Self {
        Hermitian2 { h11: a, h22: b, h12: Complex64::new(c, 0.0) }
    }

    /// Rank-one form `h_{ij̄} = v_i conj(v_j)`.
    pub fn outer(v: &ComplexGradient2) -> Self {
        Hermitian2 { h11: v.d1.norm_sqr(), h22: v.d2.norm_sqr(), h12: v.d1 * v.d2.conj() }
    }

    /// Entry `(i, j)` with zero-based indices.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            (0, 0) => Complex64::new(self.h11, 0.0),
            (1, 1) => Complex64::new(self.h22, 0.0),
            (0, 1) => self.h12,
            (1, 0) => self.h12.conj(),
            _ => panic!("Hermitian2 index ({i}, {j}) out of range"),
        }
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12.norm_sqr()
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.h11 + self.h22);
        let half_gap = 0.5 * (self.h11 - self.h22);
        let r = half_gap.hypot(self.h12.norm());
        [mean - r, mean + r]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest absolute eigenvalue, i.e. the spectral norm.
    pub fn norm(&self) -> f64 {
        let [lo, hi] = self.eigenvalues();
        lo.abs().max(hi.abs())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.h11 > 0.0 && self.det() > 0.0
    }

    pub fn inverse(&self) -> Result<Hermitian2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular { det });
        }
        Ok(Hermitian2 { h11: self.h22 / det, h22: self.h11 / det, h12: -self.h12 / det })
    }

    /// `h(v, v̄) = h_{ij̄} v^i conj(v^j)`, real for Hermitian `h`.
    pub fn contract(&self, v: &ComplexGradient2) -> f64 {
        self.h11 * v.d1.norm_sqr() + self.h22 * v.d2.norm_sqr() + 2.0 * (self.h12 * v.d1 * v.d2.conj()).re
    }

    pub fn scale(&self, s: f64) -> Hermitian2 {
        Hermitian2 { h11: self.h11 * s, h22: self.h22 * s, h12: self.h12 * s }
    }

    pub fn is_finite(&self) -> bool {
        self.h11.is_finite() && self.h22.is_finite() && self.h12.re.is_finite() && self.h12.im.is_finite()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Hermitian2) -> f64 {
        (self.h11 - other.h11).abs().max((self.h22 - other.h22).abs()).max((self.h12 - other.h12).norm())
    }
}

impl Add for Hermitian2 {
    type Output = Hermitian2;
    fn add(self, rhs: Hermitian2) -> Hermitian2 {
        Hermitian2 { h11: self.h11 + rhs.h11, h22: self.h22 + rhs.h22, h12: self.h12 + rhs.h12 }
    }
}

impl Sub for Hermitian2 {
    type Output = Hermitian2;
    fn sub(self, rhs: Hermitian2) -> Hermitian2 {
        Hermitian2 { h11: self.h11 - rhs.h11, h22: self.h22 - rhs.h22, h12: self.h12 - rhs.h12 }
    }
}

impl Mul<Hermitian2> for f64 {
    type Output = Hermitian2;
    fn mul(self, rhs: Hermitian2) -> Hermitian2 {
        rhs.scale(self)
    }
}

/// The (1,0)-part of a gradient: `(∂_{z1} f, ∂_{z2} f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGradient2 {
    pub d1: Complex64,
    pub d2: Complex64,
}

impl ComplexGradient2 {
    pub fn new(d1: Complex64, d2: Complex64) -> Self {
        ComplexGradient2 { d1, d2 }
    }

    pub fn component(&self, i: usize) -> Complex64 {
        match i {
            0 => self.d1,
            1 => self.d2,
            _ => panic!("ComplexGradient2 index {i} out of range"),
        }
    }

    pub fn scale(&self, s: f64) -> ComplexGradient2 {
        ComplexGradient2 { d1: self.d1 * s, d2: self.d2 * s }
    }

    pub fn max_norm(&self) -> f64 {
        self.d1.norm().max(self.d2.norm())
    }

    pub fn max_abs_diff(&self, other: &ComplexGradient2) -> f64 {
        (self.d1 - other.d1).norm().max((self.d2 - other.d2).norm())
    }
}

/// `tr_a b = a^{ij̄} b_{ij̄}`, the trace of `b` with respect to the metric `a`.
///
/// On a surface this equals `2 (a ∧ b) / a²`.
pub fn trace_pair(a: &Hermitian2, b: &Hermitian2) -> Result<f64> {
    let det = a.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular { det });
    }
    Ok((a.h22 * b.h11 + a.h11 * b.h22 - 2.0 * (a.h12 * b.h12.conj()).re) / det)
}
