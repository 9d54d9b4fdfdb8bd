//! Complex 2x2 transfer matrices.
//!
//! A transfer matrix maps the (right-moving, left-moving) amplitude pair on
//! the right side of a scatterer to the pair on its left side. Lossless,
//! reciprocal scatterers embedded in a common ambient medium give unimodular
//! matrices of the form
//!
//! ```text
//! M = | 1/t    r*/t* |
//!     | r/t    1/t*  |
//! ```
//!
//! with determinant one. That unimodularity is what the Chebyshev power
//! identity in [`crate::bloch`] relies on.

use num_complex::Complex64;

use crate::cell::ScatterAmplitudes;
use crate::error::{Error, Result};

/// Smallest |t| we are willing to invert when forming a transfer matrix.
///
/// Finite lossless stacks never reach t = 0 exactly, but deep gaps at large
/// period counts can underflow; failing loudly beats returning infinities.
const MIN_TRANSMISSION: f64 = 1e-300;

/// 2x2 complex matrix acting on boundary amplitude vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub const IDENTITY: TransferMatrix = TransferMatrix {
        m11: Complex64::new(1.0, 0.0),
        m12: Complex64::new(0.0, 0.0),
        m21: Complex64::new(0.0, 0.0),
        m22: Complex64::new(1.0, 0.0),
    };

    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        TransferMatrix { m11, m12, m21, m22 }
    }

    /// Matrix product `self * rhs`.
    ///
    /// Composition follows the propagation order: if `rhs` carries amplitudes
    /// across the right-hand scatterer and `self` across the left-hand one,
    /// the product carries them across both.
    pub fn compose(&self, rhs: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Half of the matrix trace; for a unimodular lossless cell its real part
    /// is the Bloch cosine.
    pub fn half_trace(&self) -> Complex64 {
        0.5 * (self.m11 + self.m22)
    }

    /// Applies the matrix to an amplitude pair.
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    /// Entrywise linear combination `a * self + b * other`.
    pub fn linear_combination(a: f64, m: &TransferMatrix, b: f64, other: &TransferMatrix) -> Self {
        TransferMatrix {
            m11: a * m.m11 + b * other.m11,
            m12: a * m.m12 + b * other.m12,
            m21: a * m.m21 + b * other.m21,
            m22: a * m.m22 + b * other.m22,
        }
    }

    /// Largest entry magnitude, used for relative comparisons.
    pub fn max_norm(&self) -> f64 {
        self.m11
            .norm()
            .max(self.m12.norm())
            .max(self.m21.norm())
            .max(self.m22.norm())
    }

    /// Frobenius norm of the entrywise difference.
    pub fn distance(&self, other: &TransferMatrix) -> f64 {
        ((self.m11 - other.m11).norm_sqr()
            + (self.m12 - other.m12).norm_sqr()
            + (self.m21 - other.m21).norm_sqr()
            + (self.m22 - other.m22).norm_sqr())
        .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }
}

/// Builds the transfer matrix of a lossless scatterer from its amplitudes.
///
/// Fails with [`Error::SingularMatrix`] when |t| is too small to invert;
/// that regime corresponds to total reflection.
pub fn matrix_from_amplitudes(s: &ScatterAmplitudes) -> Result<TransferMatrix> {
    if s.t.norm() < MIN_TRANSMISSION {
        return Err(Error::SingularMatrix);
    }
    let inv_t = s.t.inv();
    let ratio = s.r / s.t;
    Ok(TransferMatrix {
        m11: inv_t,
        m12: ratio.conj(),
        m21: ratio,
        m22: inv_t.conj(),
    })
}

/// Reads the amplitudes back out of a transfer matrix.
///
/// Inverse of [`matrix_from_amplitudes`]: t = 1/m11 and r = m21/m11.
pub fn amplitudes_from_matrix(m: &TransferMatrix) -> Result<ScatterAmplitudes> {
    if m.m11.norm() < MIN_TRANSMISSION || !m.m11.is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(ScatterAmplitudes {
        t: m.m11.inv(),
        r: m.m21 / m.m11,
    })
}
