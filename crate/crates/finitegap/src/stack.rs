//! A finite periodic stack: one unit cell repeated N times between
//! semi-infinite ambient media.
//!
//! All frequency-dependent quantities take `omega_rel`, the frequency in
//! units of the cell's midgap frequency, so a quarter-wave stack has its
//! first gap centered at `omega_rel = 1` regardless of geometry.

use num_complex::Complex64;

use crate::bloch::{self, BlochData, MAX_PERIODS};
use crate::cell::{
    cell_amplitudes, qw_transmission_derivative, qw_unit_amplitudes, ScatterAmplitudes, UnitCell,
};
use crate::error::{Error, Result};
use crate::matrix::{matrix_from_amplitudes, TransferMatrix};
use crate::oracle;

/// Step used for numeric frequency derivatives on cells without a closed
/// form, relative to the midgap frequency.
const DERIVATIVE_STEP: f64 = 1e-6;

/// A unit cell repeated a fixed number of times.
#[derive(Debug, Clone, PartialEq)]
pub struct Stack {
    cell: UnitCell,
    periods: usize,
}

impl Stack {
    pub fn new(cell: UnitCell, periods: usize) -> Result<Self> {
        if periods == 0 {
            return Err(Error::Domain("a stack needs at least one period".to_string()));
        }
        if periods > MAX_PERIODS {
            return Err(Error::TooManyPeriods(periods, MAX_PERIODS));
        }
        Ok(Stack { cell, periods })
    }

    /// Quarter-wave bilayer stack with unit period length.
    pub fn quarter_wave(n1: f64, n2: f64, periods: usize) -> Result<Self> {
        Stack::new(UnitCell::quarter_wave(n1, n2)?, periods)
    }

    pub fn cell(&self) -> &UnitCell {
        &self.cell
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Length of the full structure, N d.
    pub fn total_length(&self) -> f64 {
        self.periods as f64 * self.cell.total_length()
    }

    /// The frequency unit: the cell's midgap frequency.
    pub fn omega0(&self) -> f64 {
        self.cell.midgap_frequency()
    }

    /// Physical angular frequency for a given relative frequency.
    pub fn omega(&self, omega_rel: f64) -> f64 {
        omega_rel * self.omega0()
    }

    /// Group velocity of the equivalent bulk medium.
    pub fn bulk_velocity(&self) -> f64 {
        self.cell.bulk_velocity()
    }

    /// Scattering amplitudes of one period.
    ///
    /// Quarter-wave bilayers use the closed form; anything else goes through
    /// the per-layer matrix product.
    pub fn unit_amplitudes(&self, omega_rel: f64) -> Result<ScatterAmplitudes> {
        if self.cell.is_quarter_wave() {
            let n1 = self.cell.layers()[0].index;
            let n2 = self.cell.layers()[1].index;
            qw_unit_amplitudes(n1, n2, omega_rel)
        } else {
            cell_amplitudes(&self.cell, omega_rel)
        }
    }

    /// d t / d omega_rel of the unit-cell transmission, with an error bound.
    ///
    /// Exact for quarter-wave bilayers; otherwise a central difference with
    /// one extrapolation step, whose reported error is the stencil spread.
    pub fn unit_transmission_derivative(&self, omega_rel: f64) -> Result<(Complex64, f64)> {
        if self.cell.is_quarter_wave() {
            let n1 = self.cell.layers()[0].index;
            let n2 = self.cell.layers()[1].index;
            return Ok((qw_transmission_derivative(n1, n2, omega_rel)?, 0.0));
        }
        // Keep the stencil away from zero frequency, where the matrix
        // assembly is undefined.
        let h = DERIVATIVE_STEP.min(omega_rel / 4.0);
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "cannot differentiate the transmission at omega_rel = {omega_rel}"
            )));
        }
        let cell = &self.cell;
        let f = |w: f64| {
            cell_amplitudes(cell, w)
                .map(|s| s.t)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        let (value, err) = oracle::richardson_derivative(f, omega_rel, h);
        if !value.is_finite() {
            return Err(Error::NonFinite {
                quantity: "unit-cell transmission derivative".to_string(),
                omega_rel,
                route: "numeric".to_string(),
            });
        }
        Ok((value, err))
    }

    /// Bloch cosine of the unit cell at this frequency.
    pub fn bloch(&self, omega_rel: f64) -> Result<BlochData> {
        bloch::bloch_cos(self.unit_amplitudes(omega_rel)?.t)
    }

    /// Transfer matrix of one period, built from the unit amplitudes.
    pub fn unit_matrix(&self, omega_rel: f64) -> Result<TransferMatrix> {
        matrix_from_amplitudes(&self.unit_amplitudes(omega_rel)?)
    }

    /// Transfer matrix of the whole stack via the Chebyshev collapse.
    pub fn stack_matrix(&self, omega_rel: f64) -> Result<TransferMatrix> {
        let unit = self.unit_amplitudes(omega_rel)?;
        let m = matrix_from_amplitudes(&unit)?;
        let x = bloch::bloch_cos(unit.t)?.x;
        bloch::matrix_power(&m, x, self.periods)
    }

    /// Scattering amplitudes of the whole stack.
    pub fn amplitudes(&self, omega_rel: f64) -> Result<ScatterAmplitudes> {
        bloch::stack_amplitudes(&self.unit_amplitudes(omega_rel)?, self.periods)
    }

    /// Transmittance |t_N|^2 of the whole stack.
    pub fn transmittance(&self, omega_rel: f64) -> Result<f64> {
        Ok(self.amplitudes(omega_rel)?.transmittance())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midgap_opacity_of_the_five_period_stack() {
        let stack = Stack::quarter_wave(1.0, 2.0, 5).unwrap();
        let t5 = stack.transmittance(1.0).unwrap();
        assert_abs_diff_eq!(t5, (64.0f64 / 1025.0).powi(2), epsilon = 1e-14);
        assert!(stack.bloch(1.0).unwrap().in_gap);
    }

    #[test]
    fn frequency_unit_is_the_midgap() {
        let stack = Stack::quarter_wave(1.0, 2.0, 5).unwrap();
        assert_abs_diff_eq!(stack.omega0(), 0.75 * std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(stack.bulk_velocity(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(stack.total_length(), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn numeric_derivative_matches_the_closed_form() {
        // The quarter-wave path returns the analytic derivative; the numeric
        // stencil applied to the same transmission must reproduce it.
        let stack = Stack::quarter_wave(1.0, 2.0, 5).unwrap();
        for w in [0.3, 0.77, 1.0, 1.6] {
            let (exact, _) = stack.unit_transmission_derivative(w).unwrap();
            let f = |v: f64| stack.unit_amplitudes(v).unwrap().t;
            let (numeric, err) = crate::oracle::richardson_derivative(f, w, 1e-6);
            assert!(
                (exact - numeric).norm() < 1e-8 + 10.0 * err,
                "derivative mismatch at omega_rel = {w}"
            );
        }
    }

    #[test]
    fn general_cells_take_the_numeric_derivative_path() {
        use crate::cell::Layer;
        let cell = UnitCell::new(
            vec![
                Layer::new(1.4, 0.3).unwrap(),
                Layer::new(2.1, 0.5).unwrap(),
                Layer::new(1.1, 0.4).unwrap(),
            ],
            1.0,
        )
        .unwrap();
        let stack = Stack::new(cell, 4).unwrap();
        let (d, err) = stack.unit_transmission_derivative(0.8).unwrap();
        assert!(d.is_finite());
        assert!(err < 1e-7);
        // Cross-check against a plain secant with a coarser step.
        let t_hi = stack.unit_amplitudes(0.8 + 5e-5).unwrap().t;
        let t_lo = stack.unit_amplitudes(0.8 - 5e-5).unwrap().t;
        let secant = (t_hi - t_lo) / 1e-4;
        assert!((d - secant).norm() < 1e-6);
    }

    #[test]
    fn stack_matrix_agrees_with_direct_product() {
        let stack = Stack::quarter_wave(1.0, 2.0, 7).unwrap();
        for w in [0.25, 0.78, 1.0, 1.33] {
            let fast = stack.stack_matrix(w).unwrap();
            let slow =
                crate::oracle::direct_matrix_product(stack.cell(), 7, stack.omega(w)).unwrap();
            let scale = slow.max_norm().max(1.0);
            assert!(
                fast.distance(&slow) < 1e-9 * scale,
                "matrix mismatch at omega_rel = {w}: {}",
                fast.distance(&slow)
            );
        }
    }

    #[test]
    fn period_count_is_validated() {
        assert!(Stack::quarter_wave(1.0, 2.0, 0).is_err());
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        assert!(Stack::new(cell, MAX_PERIODS + 1).is_err());
    }
}
