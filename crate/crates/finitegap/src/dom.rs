//! Density of modes of the finite stack, by three independent routes.
//!
//! The DOM is the frequency derivative of the stack's transmission phase per
//! unit length, rho = (d arg t_N / d omega) / (N d): the reciprocal of the
//! group velocity a wave packet experiences crossing the structure. Three
//! evaluations are provided:
//!
//! - phase derivative: numeric differentiation of t_N, no algebra trusted;
//! - closed form: Chebyshev expression in the unit-cell t and dt/d omega;
//! - quarter-wave: fully analytic trigonometric form for bilayer cells.
//!
//! The closed form is evaluated in the Bloch-cosine variable x, where every
//! ingredient is a polynomial; the textbook csc-beta expressions have
//! removable singularities at band edges (|x| = 1) and are avoided.

use crate::bloch::{chebyshev_pair, chebyshev_xi_derivative};
use crate::cell::double_boundary;
use crate::error::{Error, Result};
use crate::oracle;
use crate::stack::Stack;

/// Default step (in omega_rel) for the phase-derivative route.
pub const DEFAULT_PHASE_STEP: f64 = 1e-6;

/// Relative drift between derivative stencils above which a sample is
/// considered inaccurate.
pub const DRIFT_WARNING: f64 = 1e-7;

/// Which evaluation produced a DOM sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomRoute {
    /// Numeric derivative of the full-stack transmission phase.
    PhaseDerivative,
    /// Chebyshev closed form in the unit-cell amplitudes.
    ClosedForm,
    /// Trigonometric closed form, quarter-wave bilayers only.
    QuarterWave,
}

impl DomRoute {
    /// Short name used in output columns and diagnostics.
    pub fn label(&self) -> &'static str {
        match self {
            DomRoute::PhaseDerivative => "phase",
            DomRoute::ClosedForm => "closed",
            DomRoute::QuarterWave => "qw",
        }
    }
}

/// One DOM evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomSample {
    pub omega_rel: f64,
    /// Physical DOM, units of inverse velocity (c = 1). Multiply by the
    /// bulk velocity for the dimensionless form plotted in figures.
    pub rho: f64,
    pub route: DomRoute,
    /// Relative accuracy estimate of the underlying frequency derivative;
    /// zero for fully analytic routes.
    pub drift: f64,
}

/// Group velocity of the bulk medium equivalent to a quarter-wave bilayer,
/// c (1/n1 + 1/n2) / 2.
pub fn bulk_velocity(n1: f64, n2: f64) -> Result<f64> {
    if !(n1 > 0.0) || !n1.is_finite() {
        return Err(Error::NonPositiveIndex(n1));
    }
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::NonPositiveIndex(n2));
    }
    Ok(0.5 * (1.0 / n1 + 1.0 / n2))
}

fn check_frequency(omega_rel: f64, route: DomRoute) -> Result<()> {
    if !(omega_rel > 0.0) || !omega_rel.is_finite() {
        return Err(Error::NonFinite {
            quantity: "frequency".to_string(),
            omega_rel,
            route: route.label().to_string(),
        });
    }
    Ok(())
}

fn finite_sample(omega_rel: f64, rho: f64, route: DomRoute, drift: f64) -> Result<DomSample> {
    if !rho.is_finite() {
        return Err(Error::NonFinite {
            quantity: "density of modes".to_string(),
            omega_rel,
            route: route.label().to_string(),
        });
    }
    Ok(DomSample {
        omega_rel,
        rho,
        route,
        drift,
    })
}

/// DOM by numeric differentiation of the stack transmission.
///
/// With t_N = u + iv, d(arg t_N)/d omega = (u v' - v u')/(u^2 + v^2); u' and
/// v' come from one extrapolated central difference of t_N, so no phase
/// unwrapping is ever needed.
pub fn dom_phase_derivative(stack: &Stack, omega_rel: f64, h: f64) -> Result<DomSample> {
    check_frequency(omega_rel, DomRoute::PhaseDerivative)?;
    // Keep the stencil strictly inside the positive frequency axis.
    let h = h.min(omega_rel / 4.0);
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "phase-derivative step must be positive, got {h}"
        )));
    }
    let t_n = stack.amplitudes(omega_rel)?.t;
    let f = |w: f64| {
        stack
            .amplitudes(w)
            .map(|s| s.t)
            .unwrap_or(num_complex::Complex64::new(f64::NAN, f64::NAN))
    };
    let (dt, err) = oracle::richardson_derivative(f, omega_rel, h);
    if !dt.is_finite() {
        return Err(Error::NonFinite {
            quantity: "transmission derivative".to_string(),
            omega_rel,
            route: DomRoute::PhaseDerivative.label().to_string(),
        });
    }
    // Im(dt/t) = (u v' - v u')/(u^2 + v^2); the omega0 factor converts the
    // omega_rel derivative to a physical frequency derivative.
    let d_phase = (dt / t_n).im;
    let rho = d_phase / (stack.total_length() * stack.omega0());
    let drift = if d_phase.abs() > 0.0 {
        err / d_phase.abs()
    } else {
        err
    };
    finite_sample(omega_rel, rho, DomRoute::PhaseDerivative, drift)
}

/// DOM from the unit-cell amplitudes by the Chebyshev closed form.
///
/// In the variables x = Re(1/t) and nu = Im(t)/|t|^2, with primes denoting
/// d/d omega,
///
/// ```text
///         (nu' U + nu x' U') T_N  -  N nu x' U^2
/// rho  =  -------------------------------------- ,   U = U_{N-1}(x)
///                 N d (T_N^2 + nu^2 U^2)
/// ```
///
/// which is the phase derivative of 1/t_N = T_N - i nu U_{N-1} carried out
/// analytically. All factors are polynomials in x, so band edges need no
/// special casing.
pub fn dom_closed_form(stack: &Stack, omega_rel: f64) -> Result<DomSample> {
    check_frequency(omega_rel, DomRoute::ClosedForm)?;
    let unit = stack.unit_amplitudes(omega_rel)?;
    let (dt_rel, derivative_err) = stack.unit_transmission_derivative(omega_rel)?;
    let n = stack.periods();

    let t = unit.t;
    let inv_t = t.inv();
    let x = inv_t.re;
    let nu = -inv_t.im;
    // d(1/t)/d omega_rel = -t'/t^2, split into the derivatives of x and nu.
    let d_inv = -dt_rel / (t * t);
    let dx = d_inv.re;
    let dnu = -d_inv.im;

    let pair = chebyshev_pair(x, n)?;
    let u = pair.xi;
    let theta = pair.theta;
    let du = chebyshev_xi_derivative(x, n)?;

    let numerator = (dnu * u + nu * dx * du) * theta - (n as f64) * nu * dx * u * u;
    let denominator = theta * theta + nu * nu * u * u;
    let rho = numerator / (stack.total_length() * stack.omega0() * denominator);
    let drift = if derivative_err > 0.0 {
        derivative_err / dt_rel.norm().max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    finite_sample(omega_rel, rho, DomRoute::ClosedForm, drift)
}

/// DOM of a quarter-wave bilayer stack, fully analytic.
///
/// With theta = pi omega_rel, x = (cos theta - R12)/T12, and the double
/// boundary coefficients T12, R12 of the two layer indices,
///
/// ```text
///        pi T12     2 N T12 cos^2(theta/2) + R12 sin^2(theta/2) Xi_2N
/// rho = -------- · ---------------------------------------------------
///       w0 N d      (1 - 2 R12 + cos theta)(T12^2 Th_N^2 + sin^2 theta Xi_N^2)
/// ```
///
/// The first denominator factor equals T12 (x + 1), so the expression is a
/// removable 0/0 exactly at the lower gap edge; elsewhere it agrees with
/// [`dom_closed_form`] to roundoff. Evaluation at the exact edge fails with
/// a non-finite error rather than silently switching forms.
pub fn dom_quarter_wave(stack: &Stack, omega_rel: f64) -> Result<DomSample> {
    check_frequency(omega_rel, DomRoute::QuarterWave)?;
    if !stack.cell().is_quarter_wave() {
        return Err(Error::Domain(
            "quarter-wave DOM route needs a quarter-wave bilayer cell".to_string(),
        ));
    }
    let n1 = stack.cell().layers()[0].index;
    let n2 = stack.cell().layers()[1].index;
    let (big_t, big_r) = double_boundary(n1, n2)?;
    let n = stack.periods();

    let theta = std::f64::consts::PI * omega_rel;
    let x = (theta.cos() - big_r) / big_t;
    let pair = chebyshev_pair(x, n)?;
    let xi_2n = chebyshev_pair(x, 2 * n)?.xi;

    let half = 0.5 * theta;
    let numerator = 2.0 * (n as f64) * big_t * half.cos().powi(2)
        + big_r * half.sin().powi(2) * xi_2n;
    let denominator = (1.0 - 2.0 * big_r + theta.cos())
        * (big_t * big_t * pair.theta * pair.theta + theta.sin().powi(2) * pair.xi * pair.xi);
    let scale = std::f64::consts::PI * big_t
        / (stack.omega0() * stack.total_length());
    finite_sample(omega_rel, scale * numerator / denominator, DomRoute::QuarterWave, 0.0)
}

/// Evaluates the DOM by the requested route with default settings.
pub fn dom(stack: &Stack, route: DomRoute, omega_rel: f64) -> Result<DomSample> {
    match route {
        DomRoute::PhaseDerivative => dom_phase_derivative(stack, omega_rel, DEFAULT_PHASE_STEP),
        DomRoute::ClosedForm => dom_closed_form(stack, omega_rel),
        DomRoute::QuarterWave => dom_quarter_wave(stack, omega_rel),
    }
}

/// Number of scan intervals used to bracket roots before bisection.
const SCAN_INTERVALS: usize = 4096;

/// Bisection tolerance on omega_rel for edge and resonance roots.
const ROOT_TOLERANCE: f64 = 1e-12;

fn bisect(mut lo: f64, mut f_lo: f64, mut hi: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<f64> {
    debug_assert!(f_lo != 0.0);
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn scan_roots(
    lo: f64,
    hi: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Domain(format!(
            "root scan needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / SCAN_INTERVALS as f64;
    let samples: Result<Vec<(f64, f64)>> = (0..=SCAN_INTERVALS)
        .map(|i| {
            let w = lo + step * i as f64;
            Ok((w, f(w)?))
        })
        .collect();
    let samples = samples?;
    let mut roots = Vec::new();
    for pair in samples.windows(2) {
        let (w0, f0) = pair[0];
        let (_, f1) = pair[1];
        // Strict sign changes only: a tangential touch is not a crossing.
        if f0 != 0.0 && f1 != 0.0 && (f0 > 0.0) != (f1 > 0.0) {
            roots.push(bisect(w0, f0, pair[1].0, &f)?);
        }
    }
    // A sample that is exactly zero is a crossing only if the nearest
    // nonzero values on both sides have opposite signs.
    for i in 0..samples.len() {
        if samples[i].1 != 0.0 {
            continue;
        }
        let before = samples[..i].iter().rev().map(|s| s.1).find(|v| *v != 0.0);
        let after = samples[i + 1..].iter().map(|s| s.1).find(|v| *v != 0.0);
        if let (Some(b), Some(a)) = (before, after) {
            if (b > 0.0) != (a > 0.0) {
                roots.push(samples[i].0);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 4.0 * ROOT_TOLERANCE);
    Ok(roots)
}

/// Frequencies in (lo, hi) where the infinite lattice's Bloch cosine crosses
/// |x| = 1: the boundaries of the photonic gaps.
///
/// Tangential touches (|x| reaching 1 without exceeding it, as in a
/// homogeneous medium) are not edges and are not reported.
pub fn band_edges(stack: &Stack, lo: f64, hi: f64) -> Result<Vec<f64>> {
    scan_roots(lo, hi, |w| Ok(stack.bloch(w)?.x.abs() - 1.0))
}

/// Frequencies in (lo, hi) where the stack transmits perfectly (T_N = 1).
///
/// These are the zeros of Xi_N(x(omega)), which all lie strictly inside pass
/// bands; the stack then scatters as if absent.
pub fn transmission_resonances(stack: &Stack, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let n = stack.periods();
    scan_roots(lo, hi, |w| Ok(chebyshev_pair(stack.bloch(w)?.x, n)?.xi))
}

/// Closed-form first-pass-band resonance frequencies of a quarter-wave
/// stack: cos(pi omega_rel) = T12 cos(m pi / N) + R12 for m = 1..N-1.
pub fn qw_resonance_frequencies(n1: f64, n2: f64, periods: usize) -> Result<Vec<f64>> {
    if periods == 0 {
        return Err(Error::Domain("resonances need at least one period".to_string()));
    }
    let (big_t, big_r) = double_boundary(n1, n2)?;
    let n = periods as f64;
    let mut out = Vec::with_capacity(periods - 1);
    for m in 1..periods {
        let bloch = (m as f64) * std::f64::consts::PI / n;
        out.push((big_t * bloch.cos() + big_r).acos() / std::f64::consts::PI);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const MIDGAP_RHO_VBULK: f64 = 0.299_414_634_146_341_46; // 3069/10250 exactly
    const EDGE_RHO_VBULK: f64 = 25.0 / 36.0;

    fn default_stack() -> Stack {
        Stack::quarter_wave(1.0, 2.0, 5).unwrap()
    }

    #[test]
    fn bulk_velocity_values() {
        assert_abs_diff_eq!(bulk_velocity(1.0, 2.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(bulk_velocity(1.5, 1.5).unwrap(), 1.0 / 1.5, epsilon = 1e-15);
        assert!(bulk_velocity(0.0, 1.0).is_err());
    }

    #[test]
    fn midgap_suppression_value() {
        let stack = default_stack();
        let v = stack.bulk_velocity();
        for route in [DomRoute::PhaseDerivative, DomRoute::ClosedForm, DomRoute::QuarterWave] {
            let s = dom(&stack, route, 1.0).unwrap();
            assert_abs_diff_eq!(s.rho * v, MIDGAP_RHO_VBULK, epsilon = 1e-8);
        }
        // The analytic routes agree with the exact fraction to roundoff.
        let closed = dom_closed_form(&stack, 1.0).unwrap();
        assert_abs_diff_eq!(closed.rho * v, MIDGAP_RHO_VBULK, epsilon = 1e-13);
    }

    #[test]
    fn band_edge_value_is_regular() {
        // At the exact lower gap edge x = -1; the x-polynomial form needs no
        // limit taking. rho v_bulk there is exactly 25/36.
        let stack = default_stack();
        let edge = (-7.0f64 / 9.0).acos() / std::f64::consts::PI;
        let s = dom_closed_form(&stack, edge).unwrap();
        assert_abs_diff_eq!(s.rho * stack.bulk_velocity(), EDGE_RHO_VBULK, epsilon = 1e-10);
    }

    #[test]
    fn long_wavelength_limit() {
        // As omega_rel -> 0 the DOM times bulk velocity tends to 1/T12.
        let stack = default_stack();
        let s = dom_quarter_wave(&stack, 1e-4).unwrap();
        assert_abs_diff_eq!(s.rho * stack.bulk_velocity(), 9.0 / 8.0, epsilon = 1e-6);
    }

    #[test]
    fn three_routes_agree_off_the_edges() {
        let stack = default_stack();
        let edge = (-7.0f64 / 9.0).acos() / std::f64::consts::PI;
        let edges = [edge, 2.0 - edge];
        for i in 0..200 {
            let w = 0.01 + 1.98 * (i as f64) / 199.0;
            if edges.iter().any(|e| (w - e).abs() < 1e-3) {
                continue;
            }
            let phase = dom_phase_derivative(&stack, w, DEFAULT_PHASE_STEP).unwrap();
            let closed = dom_closed_form(&stack, w).unwrap();
            let qw = dom_quarter_wave(&stack, w).unwrap();
            let scale = phase.rho.abs();
            assert!(
                (phase.rho - closed.rho).abs() < 1e-6 * scale,
                "phase vs closed at {w}: {} vs {}",
                phase.rho,
                closed.rho
            );
            assert!(
                (qw.rho - closed.rho).abs() < 1e-9 * scale,
                "qw vs closed at {w}: {} vs {}",
                qw.rho,
                closed.rho
            );
        }
    }

    #[test]
    fn midgap_symmetry_of_the_quarter_wave_route() {
        let stack = default_stack();
        for w in [0.6, 0.3, 0.9, 1.0 - 1e-3, 0.123456] {
            let lo = dom_quarter_wave(&stack, w).unwrap().rho;
            let hi = dom_quarter_wave(&stack, 2.0 - w).unwrap().rho;
            assert_abs_diff_eq!(lo, hi, epsilon = 1e-10 * lo.abs());
        }
    }

    #[test]
    fn homogeneous_dom_is_the_index() {
        // c = 1, so rho = n for a uniform medium, by every route. The
        // trigonometric route is an indeterminate 0/0 exactly at omega_rel
        // = 1 when the indices match (the gap has shrunk to a point), so it
        // is evaluated next to it instead.
        let stack = Stack::quarter_wave(1.5, 1.5, 4).unwrap();
        for route in [DomRoute::PhaseDerivative, DomRoute::ClosedForm, DomRoute::QuarterWave] {
            for w in [0.2, 0.7, 1.0, 1.5] {
                let w = if route == DomRoute::QuarterWave && w == 1.0 {
                    0.999
                } else {
                    w
                };
                let s = dom(&stack, route, w).unwrap();
                assert_abs_diff_eq!(s.rho / 1.5, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn single_period_closed_form_reduces_to_the_unit_cell() {
        let stack = Stack::quarter_wave(1.0, 2.0, 1).unwrap();
        for w in [0.3, 0.8, 1.2] {
            let phase = dom_phase_derivative(&stack, w, DEFAULT_PHASE_STEP).unwrap();
            let closed = dom_closed_form(&stack, w).unwrap();
            assert_abs_diff_eq!(phase.rho, closed.rho, epsilon = 1e-8 * phase.rho.abs());
        }
    }

    #[test]
    fn first_gap_edges_of_the_default_stack() {
        let stack = default_stack();
        let edges = band_edges(&stack, 0.01, 1.99).unwrap();
        let expected = (-7.0f64 / 9.0).acos() / std::f64::consts::PI;
        assert_eq!(edges.len(), 2, "edges found: {edges:?}");
        assert_abs_diff_eq!(edges[0], expected, epsilon = 1e-10);
        assert_abs_diff_eq!(edges[1], 2.0 - expected, epsilon = 1e-10);
        // The interval between the two edges is exactly the in-gap region.
        let inside = stack.bloch(0.5 * (edges[0] + edges[1])).unwrap();
        assert!(inside.in_gap);
        let outside = stack.bloch(edges[0] - 0.01).unwrap();
        assert!(!outside.in_gap);
    }

    #[test]
    fn homogeneous_media_have_no_edges() {
        let stack = Stack::quarter_wave(1.5, 1.5, 5).unwrap();
        assert!(band_edges(&stack, 0.01, 1.99).unwrap().is_empty());
    }

    #[test]
    fn four_resonances_in_the_first_pass_band() {
        let stack = default_stack();
        let edge = (-7.0f64 / 9.0).acos() / std::f64::consts::PI;
        let found = transmission_resonances(&stack, 0.01, edge).unwrap();
        let expected = qw_resonance_frequencies(1.0, 2.0, 5).unwrap();
        assert_eq!(found.len(), 4);
        assert_eq!(expected.len(), 4);
        for (f, e) in found.iter().zip(&expected) {
            assert_abs_diff_eq!(f, e, epsilon = 1e-10);
            let t = stack.transmittance(*f).unwrap();
            assert!(t >= 1.0 - 1e-10, "T = {t} at resonance {f}");
        }
    }

    #[test]
    fn deeper_stacks_suppress_midgap_and_sharpen_the_edge_peak() {
        let mut previous_mid = f64::INFINITY;
        let mut previous_peak = 0.0;
        for n in [5usize, 8, 12] {
            let stack = Stack::quarter_wave(1.0, 2.0, n).unwrap();
            let mid = dom_closed_form(&stack, 1.0).unwrap().rho;
            assert!(mid < previous_mid, "midgap DOM not decreasing at N = {n}");
            previous_mid = mid;
            // Peak of the band-edge resonance, scanned near the lower edge.
            let mut peak = 0.0f64;
            for i in 0..400 {
                let w = 0.70 + 0.08 * (i as f64) / 399.0;
                peak = peak.max(dom_closed_form(&stack, w).unwrap().rho);
            }
            assert!(peak > previous_peak, "edge peak not increasing at N = {n}");
            previous_peak = peak;
        }
    }

    #[test]
    fn quarter_wave_route_rejects_other_cells() {
        use crate::cell::{Layer, UnitCell};
        let cell = UnitCell::new(
            vec![Layer::new(1.3, 0.4).unwrap(), Layer::new(2.0, 0.6).unwrap()],
            1.0,
        )
        .unwrap();
        let stack = Stack::new(cell, 3).unwrap();
        assert!(dom_quarter_wave(&stack, 0.5).is_err());
        // The other two routes must still work.
        let phase = dom_phase_derivative(&stack, 0.5, DEFAULT_PHASE_STEP).unwrap();
        let closed = dom_closed_form(&stack, 0.5).unwrap();
        assert_abs_diff_eq!(phase.rho, closed.rho, epsilon = 1e-6 * phase.rho.abs());
    }

    proptest! {
        #[test]
        fn dom_is_positive(
            n1 in 1.0f64..3.5,
            n2 in 1.0f64..3.5,
            periods in 1usize..12,
            w in 0.02f64..1.98,
        ) {
            let stack = Stack::quarter_wave(n1, n2, periods).unwrap();
            let s = dom_closed_form(&stack, w).unwrap();
            prop_assert!(s.rho > 0.0, "rho = {} at omega_rel = {w}", s.rho);
        }

        #[test]
        fn routes_agree_on_random_quarter_wave_stacks(
            n1 in 1.0f64..3.0,
            n2 in 1.0f64..3.0,
            periods in 1usize..9,
            w in 0.05f64..1.95,
        ) {
            let stack = Stack::quarter_wave(n1, n2, periods).unwrap();
            // Skip the edge neighborhoods, where the trig form cancels.
            prop_assume!((stack.bloch(w).unwrap().x.abs() - 1.0).abs() > 1e-3);
            let closed = dom_closed_form(&stack, w).unwrap();
            let qw = dom_quarter_wave(&stack, w).unwrap();
            prop_assert!(
                (closed.rho - qw.rho).abs() < 1e-8 * closed.rho.abs(),
                "closed {} vs qw {} at omega_rel = {w}",
                closed.rho,
                qw.rho
            );
        }

        #[test]
        fn symmetry_about_midgap(
            n1 in 1.0f64..3.0,
            n2 in 1.0f64..3.0,
            periods in 1usize..9,
            w in 0.05f64..0.95,
        ) {
            let stack = Stack::quarter_wave(n1, n2, periods).unwrap();
            let lo = dom_quarter_wave(&stack, w).unwrap().rho;
            let hi = dom_quarter_wave(&stack, 2.0 - w).unwrap().rho;
            prop_assert!((lo - hi).abs() <= 1e-10 * lo.abs());
        }
    }
}
