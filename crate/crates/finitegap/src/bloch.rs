//! Bloch phase, Chebyshev auxiliaries, and N-period stack amplitudes.
//!
//! For a lossless unit cell с transmission t, the infinite-lattice Bloch
//! phase beta obeys cos beta = Re(1/t). The N-th power of the unimodular
//! cell matrix collapses, by Cayley-Hamilton, to a linear combination
//!
//! ```text
//! M^N = Xi_N(x) M - Xi_{N-1}(x) I,      x = cos beta
//! ```
//!
//! where Xi_N(x) = U_{N-1}(x) is the Chebyshev polynomial of the second kind
//! and Theta_N(x) = T_N(x) the first kind. Everything here is evaluated
//! through the three-term recurrence in x, which stays regular at band edges
//! (|x| = 1) and inside gaps (|x| > 1), where trigonometric forms break down.

use num_complex::Complex64;

use crate::cell::ScatterAmplitudes;
use crate::error::{Error, Result};
use crate::matrix::TransferMatrix;

/// Hard cap on the period count; beyond this the recurrences are outside
/// their useful range anyway (inside a gap the terms grow exponentially).
pub const MAX_PERIODS: usize = 10_000;

/// Magnitude at which the recurrence is declared overflowed, comfortably
/// below f64::MAX so intermediate arithmetic cannot reach infinity first.
const OVERFLOW_LIMIT: f64 = 1e290;

/// Relative tolerance between a supplied Bloch cosine and the half-trace of
/// the matrix it is claimed to describe.
const TRACE_TOLERANCE: f64 = 1e-8;

/// Bloch cosine of a unit cell and the gap flag derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochData {
    /// x = cos beta = Re(1/t). Inside a gap |x| exceeds one and beta is
    /// complex; x itself stays real and well defined.
    pub x: f64,
    /// True when |x| > 1, i.e. the infinite lattice has no propagating mode.
    pub in_gap: bool,
}

/// Computes the Bloch cosine from the unit-cell transmission amplitude.
pub fn bloch_cos(t: Complex64) -> Result<BlochData> {
    let norm_sqr = t.norm_sqr();
    if norm_sqr == 0.0 || !norm_sqr.is_finite() {
        return Err(Error::Domain(format!(
            "Bloch cosine needs a finite nonzero transmission, got {t}"
        )));
    }
    let x = t.re / norm_sqr;
    Ok(BlochData {
        x,
        in_gap: x.abs() > 1.0,
    })
}

/// Chebyshev values used by the stack formulas: Xi_N, Xi_{N-1}, Theta_N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevPair {
    /// Xi_N(x) = U_{N-1}(x) = sin(N beta)/sin(beta) on |x| <= 1.
    pub xi: f64,
    /// Xi_{N-1}(x), carried along because the stack formulas always need it.
    pub xi_prev: f64,
    /// Theta_N(x) = T_N(x) = cos(N beta) on |x| <= 1.
    pub theta: f64,
}

/// Evaluates Xi_N and Theta_N by the three-term recurrence.
///
/// Valid for every real x; no trigonometric branch cuts. Orders above
/// [`MAX_PERIODS`] are rejected, and growth past the representable range
/// reports [`Error::RecurrenceOverflow`].
pub fn chebyshev_pair(x: f64, n: usize) -> Result<ChebyshevPair> {
    if n > MAX_PERIODS {
        return Err(Error::TooManyPeriods(n, MAX_PERIODS));
    }
    // Xi_0 = 0, Xi_1 = 1; Theta_0 = 1, Theta_1 = x.
    let (mut xi_prev, mut xi) = (0.0f64, 1.0f64);
    let (mut th_prev, mut th) = (1.0f64, x);
    if n == 0 {
        // Xi_{-1} = -1 closes the recurrence downward.
        return Ok(ChebyshevPair {
            xi: 0.0,
            xi_prev: -1.0,
            theta: 1.0,
        });
    }
    for order in 1..n {
        let xi_next = 2.0 * x * xi - xi_prev;
        let th_next = 2.0 * x * th - th_prev;
        if xi_next.abs() > OVERFLOW_LIMIT || th_next.abs() > OVERFLOW_LIMIT {
            return Err(Error::RecurrenceOverflow {
                order: order + 1,
                x,
            });
        }
        xi_prev = xi;
        xi = xi_next;
        th_prev = th;
        th = th_next;
    }
    Ok(ChebyshevPair {
        xi,
        xi_prev,
        theta: th,
    })
}

/// Derivative of Xi_N with respect to x, by the recurrence
/// Xi'_{k+1} = 2 Xi_k + 2x Xi'_k - Xi'_{k-1}.
///
/// Regular everywhere, including x = +-1 where the closed csc-based forms
/// have removable singularities.
pub fn chebyshev_xi_derivative(x: f64, n: usize) -> Result<f64> {
    if n > MAX_PERIODS {
        return Err(Error::TooManyPeriods(n, MAX_PERIODS));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let (mut xi_prev, mut xi) = (0.0f64, 1.0f64);
    let (mut d_prev, mut d) = (0.0f64, 0.0f64);
    for order in 1..n {
        let d_next = 2.0 * xi + 2.0 * x * d - d_prev;
        let xi_next = 2.0 * x * xi - xi_prev;
        if xi_next.abs() > OVERFLOW_LIMIT || d_next.abs() > OVERFLOW_LIMIT {
            return Err(Error::RecurrenceOverflow {
                order: order + 1,
                x,
            });
        }
        d_prev = d;
        d = d_next;
        xi_prev = xi;
        xi = xi_next;
    }
    Ok(d)
}

/// N-th power of a unimodular transfer matrix via the Chebyshev identity.
///
/// `x` must be the Bloch cosine belonging to `m`; it is cross-checked against
/// the half-trace and rejected on disagreement, since a mismatch means the
/// two came from different pipelines.
pub fn matrix_power(m: &TransferMatrix, x: f64, n: usize) -> Result<TransferMatrix> {
    let half_trace = m.half_trace().re;
    if (x - half_trace).abs() > TRACE_TOLERANCE * half_trace.abs().max(1.0) {
        return Err(Error::TraceMismatch { x, half_trace });
    }
    if n == 0 {
        return Ok(TransferMatrix::IDENTITY);
    }
    let pair = chebyshev_pair(x, n)?;
    Ok(TransferMatrix::linear_combination(
        pair.xi,
        m,
        -pair.xi_prev,
        &TransferMatrix::IDENTITY,
    ))
}

/// Amplitudes of the N-period stack from the unit-cell amplitudes.
///
/// ```text
/// 1/t_N   = (1/t) Xi_N - Xi_{N-1}
/// r_N/t_N = (r/t) Xi_N
/// ```
///
/// Losslessness of (t, r) propagates to (t_N, r_N).
pub fn stack_amplitudes(unit: &ScatterAmplitudes, periods: usize) -> Result<ScatterAmplitudes> {
    if periods == 0 {
        return Err(Error::Domain(
            "stack needs at least one period".to_string(),
        ));
    }
    let bloch = bloch_cos(unit.t)?;
    let pair = chebyshev_pair(bloch.x, periods)?;
    let inv_t_n = unit.t.inv() * pair.xi - pair.xi_prev;
    let t_n = inv_t_n.inv();
    let r_n = t_n * (unit.r / unit.t) * pair.xi;
    if !t_n.is_finite() || !r_n.is_finite() {
        return Err(Error::RecurrenceOverflow {
            order: periods,
            x: bloch.x,
        });
    }
    Ok(ScatterAmplitudes { t: t_n, r: r_n })
}
