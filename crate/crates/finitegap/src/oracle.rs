//! Independent reference implementations used to cross-check the closed
//! forms: direct transfer-matrix assembly, a Runge-Kutta solve of the wave
//! equation, adaptive quadrature, and extrapolated numeric derivatives.
//!
//! Nothing here knows about Chebyshev recurrences or analytic stack
//! formulas; agreement between this module and the fast paths is what the
//! test suite leans on.

use num_complex::Complex64;

use crate::cell::UnitCell;
use crate::error::{Error, Result};
use crate::matrix::TransferMatrix;

/// Default sampling density for the ODE solve, in points per local
/// wavelength. At this density the accumulated RK4 error over a few
/// structure lengths stays near 1e-9.
pub const DEFAULT_RESOLUTION: f64 = 2000.0;

/// Transfer matrix of a single index step, left medium `n_i` to right
/// medium `n_j`, in the convention where reflection off a denser medium
/// from the left carries a minus sign.
pub fn interface_matrix(n_i: f64, n_j: f64) -> TransferMatrix {
    let r = (n_i - n_j) / (n_i + n_j);
    let t = 2.0 * n_i / (n_i + n_j);
    let s = Complex64::new(1.0 / t, 0.0);
    TransferMatrix {
        m11: s,
        m12: s * r,
        m21: s * r,
        m22: s,
    }
}

/// Transfer matrix of free propagation over length `len` at wavenumber `k`,
/// re-referencing right-edge amplitudes to the left edge.
pub fn propagation_matrix(k: f64, len: f64) -> TransferMatrix {
    let phase = Complex64::new(0.0, -k * len).exp();
    TransferMatrix {
        m11: phase,
        m12: Complex64::ZERO,
        m21: Complex64::ZERO,
        m22: phase.conj(),
    }
}

/// Transfer matrix of one unit cell at angular frequency `omega`, assembled
/// interface by interface with ambient medium on both sides.
pub fn cell_matrix(cell: &UnitCell, omega: f64) -> Result<TransferMatrix> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "cell matrix needs a positive frequency, got {omega}"
        )));
    }
    let ambient = cell.ambient_index();
    let mut m = TransferMatrix::IDENTITY;
    let mut previous = ambient;
    for layer in cell.layers() {
        m = m.compose(&interface_matrix(previous, layer.index));
        m = m.compose(&propagation_matrix(layer.wavenumber(omega), layer.thickness));
        previous = layer.index;
    }
    m = m.compose(&interface_matrix(previous, ambient));
    if !m.is_finite() {
        return Err(Error::Domain(format!(
            "cell matrix is not finite at omega = {omega}"
        )));
    }
    Ok(m)
}

/// N-fold product of the unit-cell matrix, computed by repeated
/// multiplication with no algebraic shortcuts.
pub fn direct_matrix_product(cell: &UnitCell, periods: usize, omega: f64) -> Result<TransferMatrix> {
    let unit = cell_matrix(cell, omega)?;
    let mut m = TransferMatrix::IDENTITY;
    for _ in 0..periods {
        m = m.compose(&unit);
    }
    Ok(m)
}

/// Result of integrating the wave equation across the full stack.
#[derive(Debug, Clone)]
pub struct OdeField {
    /// Transmission amplitude for a unit wave incident from the left.
    pub t: Complex64,
    /// Reflection amplitude for the same incidence.
    pub r: Complex64,
    /// Field values at the requested positions, normalized so the incident
    /// wave has unit amplitude at the left boundary.
    pub values: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    k: f64,
    left: f64,
    right: f64,
}

fn flatten(cell: &UnitCell, periods: usize, omega: f64) -> Vec<Segment> {
    let mut segments = Vec::with_capacity(periods * cell.layers().len());
    let mut x = 0.0;
    for _ in 0..periods {
        for layer in cell.layers() {
            let right = x + layer.thickness;
            segments.push(Segment {
                k: layer.wavenumber(omega),
                left: x,
                right,
            });
            x = right;
        }
    }
    segments
}

/// One fourth-order Runge-Kutta step of E'' = -k^2 E for the state (E, E').
fn rk4_step(state: [Complex64; 2], h: f64, k_sqr: f64) -> [Complex64; 2] {
    let f = |s: [Complex64; 2]| [s[1], -k_sqr * s[0]];
    let k1 = f(state);
    let k2 = f([state[0] + 0.5 * h * k1[0], state[1] + 0.5 * h * k1[1]]);
    let k3 = f([state[0] + 0.5 * h * k2[0], state[1] + 0.5 * h * k2[1]]);
    let k4 = f([state[0] + h * k3[0], state[1] + h * k3[1]]);
    [
        state[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        state[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Marches the state from `from` to `to` (leftward, `to < from`) inside a
/// single homogeneous segment, resolving `resolution` points per wavelength.
fn march(state: [Complex64; 2], from: f64, to: f64, k: f64, resolution: f64) -> [Complex64; 2] {
    let span = to - from;
    if span == 0.0 {
        return state;
    }
    let wavelengths = span.abs() * k / (2.0 * std::f64::consts::PI);
    let steps = (wavelengths * resolution).ceil().max(4.0) as usize;
    let h = span / steps as f64;
    let mut s = state;
    for _ in 0..steps {
        s = rk4_step(s, h, k * k);
    }
    s
}

/// Integrates E'' + n(x)^2 omega^2 E = 0 across `periods` repetitions of the
/// cell, right to left, and decomposes the boundary values into scattering
/// amplitudes. Field samples are taken at `positions` (structure coordinates
/// in [0, total length], any order).
///
/// The march starts from a pure outgoing wave at the right boundary, so every
/// sample is exact up to integration error with no interface matching.
pub fn ode_field_solve(
    cell: &UnitCell,
    periods: usize,
    omega: f64,
    positions: &[f64],
    resolution: f64,
) -> Result<OdeField> {
    if periods == 0 {
        return Err(Error::Domain("field solve needs at least one period".to_string()));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "field solve needs a positive frequency, got {omega}"
        )));
    }
    if !(resolution >= 1.0) {
        return Err(Error::Domain(format!(
            "resolution must be at least one point per wavelength, got {resolution}"
        )));
    }
    let segments = flatten(cell, periods, omega);
    let total = segments.last().map(|s| s.right).unwrap_or(0.0);
    let slack = 1e-12 * total.max(1.0);

    let mut order: Vec<usize> = (0..positions.len()).collect();
    for (i, &p) in positions.iter().enumerate() {
        if !(p >= -slack && p <= total + slack) {
            return Err(Error::Domain(format!(
                "sample position {p} (index {i}) lies outside the structure [0, {total}]"
            )));
        }
    }
    order.sort_by(|&a, &b| positions[b].total_cmp(&positions[a]));

    let k_ambient = cell.ambient_index() * omega;
    let mut state = [Complex64::ONE, Complex64::new(0.0, k_ambient)];
    let mut x = total;
    let mut seg = segments.len() - 1;
    let mut values = vec![Complex64::ZERO; positions.len()];

    for &idx in &order {
        let target = positions[idx].clamp(0.0, total);
        while target < segments[seg].left - slack {
            state = march(state, x, segments[seg].left, segments[seg].k, resolution);
            x = segments[seg].left;
            seg -= 1;
        }
        state = march(state, x, target.max(segments[seg].left), segments[seg].k, resolution);
        x = target.max(segments[seg].left);
        values[idx] = state[0];
    }
    loop {
        state = march(state, x, segments[seg].left, segments[seg].k, resolution);
        x = segments[seg].left;
        if seg == 0 {
            break;
        }
        seg -= 1;
    }

    // At the left boundary the solution splits into incident and reflected
    // plane waves: E = p e^{ikx} + q e^{-ikx}.
    let ik = Complex64::new(0.0, k_ambient);
    let p = 0.5 * (state[0] + state[1] / ik);
    let q = state[0] - p;
    if p.norm() < 1e-300 {
        return Err(Error::Domain(format!(
            "incident amplitude vanished at omega = {omega}"
        )));
    }
    for v in &mut values {
        *v /= p;
    }
    Ok(OdeField {
        t: p.inv(),
        r: q / p,
        values,
    })
}

fn simpson_slice(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let (left, lm, flm) = simpson_slice(f, a, fa, m, fm);
    let (right, rm, frm) = simpson_slice(f, m, fm, b, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Domain(format!(
            "quadrature failed to converge on [{a}, {b}]"
        )));
    }
    Ok(simpson_recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)?
        + simpson_recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson_slice(&f, a, fa, b, fb);
    simpson_recurse(&f, a, fa, b, fb, whole, m, fm, tol, 60)
}

/// Central-difference derivative of a complex-valued function with one
/// Richardson extrapolation step. Returns the extrapolated value and an
/// error estimate from the difference of the two stencils.
pub fn richardson_derivative(
    f: impl Fn(f64) -> Complex64,
    x: f64,
    h: f64,
) -> (Complex64, f64) {
    let coarse = (f(x + h) - f(x - h)) / (2.0 * h);
    let half = 0.5 * h;
    let fine = (f(x + half) - f(x - half)) / (2.0 * half);
    let value = (4.0 * fine - coarse) / 3.0;
    let err = (fine - coarse).norm() / 3.0;
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{qw_unit_amplitudes, UnitCell};
    use crate::matrix::amplitudes_from_matrix;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interface_matrices_telescope() {
        let m = interface_matrix(1.0, 3.0).compose(&interface_matrix(3.0, 1.7));
        let direct = interface_matrix(1.0, 1.7);
        assert!(m.distance(&direct) < 1e-14);
    }

    #[test]
    fn interface_determinant_is_index_ratio() {
        let m = interface_matrix(1.5, 2.5);
        assert_abs_diff_eq!(m.determinant().re, 2.5 / 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(m.determinant().im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quarter_wave_midgap_matrix_by_hand() {
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        let m = cell_matrix(&cell, cell.midgap_frequency()).unwrap();
        assert_abs_diff_eq!(m.m11.re, -1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(m.m12.re, -0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(m.m21.re, -0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(m.m22.re, -1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(m.m11.im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.determinant().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matched_slab_is_a_pure_phase_everywhere() {
        let cell = UnitCell::homogeneous(1.8).unwrap();
        let omega = 2.1;
        let k = 1.8 * omega;
        let positions: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let sol = ode_field_solve(&cell, 1, omega, &positions, DEFAULT_RESOLUTION).unwrap();
        assert!((sol.t - Complex64::new(0.0, k).exp()).norm() < 1e-9);
        assert!(sol.r.norm() < 1e-9);
        for (x, v) in positions.iter().zip(&sol.values) {
            let plane = Complex64::new(0.0, k * x).exp();
            assert!((v - plane).norm() < 1e-9, "deviation at x = {x}");
        }
    }

    #[test]
    fn ode_amplitudes_match_the_closed_form() {
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        let omega0 = cell.midgap_frequency();
        for w in [0.31, 0.8, 1.0, 1.47] {
            let sol = ode_field_solve(&cell, 3, w * omega0, &[], DEFAULT_RESOLUTION).unwrap();
            let unit = qw_unit_amplitudes(1.0, 2.0, w).unwrap();
            let stack = crate::bloch::stack_amplitudes(&unit, 3).unwrap();
            assert!(
                (sol.t - stack.t).norm() < 1e-8,
                "t mismatch {} at w = {w}",
                (sol.t - stack.t).norm()
            );
            assert!(
                (sol.r - stack.r).norm() < 1e-8,
                "r mismatch {} at w = {w}",
                (sol.r - stack.r).norm()
            );
        }
    }

    #[test]
    fn direct_product_matches_cell_matrix_composition() {
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        let omega = 0.9 * cell.midgap_frequency();
        let unit = cell_matrix(&cell, omega).unwrap();
        let two = direct_matrix_product(&cell, 2, omega).unwrap();
        assert!(two.distance(&unit.compose(&unit)) < 1e-14);
        let amps = amplitudes_from_matrix(&two).unwrap();
        assert_abs_diff_eq!(amps.flux_defect(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_handles_smooth_integrands() {
        let val = adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-11);
        let val = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert_abs_diff_eq!(val, 1.0f64.exp() - 1.0, epsilon = 1e-11);
    }

    #[test]
    fn derivative_extrapolation_beats_plain_central_difference() {
        let f = |x: f64| Complex64::new(x.sin(), x.cos());
        let (d, err) = richardson_derivative(f, 0.3, 1e-4);
        assert!((d.re - 0.3f64.cos()).abs() < 1e-12);
        assert!((d.im + 0.3f64.sin()).abs() < 1e-12);
        assert!(err < 1e-9);
    }
}
