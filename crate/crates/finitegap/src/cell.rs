//! Layers, unit cells, and their scattering amplitudes.
//!
//! A unit cell is an ordered list of homogeneous lossless layers embedded in
//! an ambient medium of real index. All media are dispersionless, so a cell
//! is characterized entirely by geometry and a single pair of complex
//! amplitudes (t, r) per frequency.
//!
//! Frequencies are expressed throughout as `omega_rel`, the ratio of the
//! physical angular frequency to the cell's midgap frequency, the frequency
//! at which one period accumulates a total optical phase of pi. The speed of
//! light is 1 in internal units.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle;

/// One homogeneous lossless layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    /// Real refractive index, positive.
    pub index: f64,
    /// Thickness, positive, in the same length units as the rest of the cell.
    pub thickness: f64,
}

impl Layer {
    pub fn new(index: f64, thickness: f64) -> Result<Self> {
        if !(index > 0.0) || !index.is_finite() {
            return Err(Error::NonPositiveIndex(index));
        }
        if !(thickness > 0.0) || !thickness.is_finite() {
            return Err(Error::NonPositiveThickness(thickness));
        }
        Ok(Layer { index, thickness })
    }

    /// Wavenumber inside the layer at angular frequency `omega` (c = 1).
    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega * self.index
    }
}

/// One period of the stack: an ordered list of layers plus the ambient index
/// of the semi-infinite media on both sides.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCell {
    layers: Vec<Layer>,
    ambient_index: f64,
}

impl UnitCell {
    pub fn new(layers: Vec<Layer>, ambient_index: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::EmptyCell);
        }
        if !(ambient_index > 0.0) || !ambient_index.is_finite() {
            return Err(Error::NonPositiveIndex(ambient_index));
        }
        Ok(UnitCell {
            layers,
            ambient_index,
        })
    }

    /// Quarter-wave bilayer with unit period length and ambient index n1.
    ///
    /// Thicknesses follow from the indices alone: both layers carry equal
    /// optical thickness, so a = n2/(n1+n2) and b = n1/(n1+n2).
    pub fn quarter_wave(n1: f64, n2: f64) -> Result<Self> {
        let a = Layer::new(n1, n2 / (n1 + n2))?;
        let b = Layer::new(n2, n1 / (n1 + n2))?;
        UnitCell::new(vec![a, b], n1)
    }

    /// Quarter-wave bilayer whose gap is centered at the given frequency.
    ///
    /// Each layer gets optical thickness pi/(2 omega0), i.e. a quarter of the
    /// vacuum wavelength at midgap divided by its index.
    pub fn quarter_wave_with_midgap(n1: f64, n2: f64, omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::Domain(format!(
                "midgap frequency must be positive, got {omega0}"
            )));
        }
        let quarter = std::f64::consts::FRAC_PI_2 / omega0;
        let a = Layer::new(n1, quarter / n1)?;
        let b = Layer::new(n2, quarter / n2)?;
        UnitCell::new(vec![a, b], n1)
    }

    /// Single homogeneous layer of unit length in a matched ambient medium.
    pub fn homogeneous(index: f64) -> Result<Self> {
        Ok(UnitCell {
            layers: vec![Layer::new(index, 1.0)?],
            ambient_index: index,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn ambient_index(&self) -> f64 {
        self.ambient_index
    }

    /// Period length d.
    pub fn total_length(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Sum of index times thickness over the cell.
    pub fn optical_length(&self) -> f64 {
        self.layers.iter().map(|l| l.index * l.thickness).sum()
    }

    /// Frequency at which the cell accumulates a total optical phase of pi.
    ///
    /// For a quarter-wave bilayer this is the center of the first gap; it is
    /// the natural frequency unit for any cell.
    pub fn midgap_frequency(&self) -> f64 {
        std::f64::consts::PI / self.optical_length()
    }

    /// Group velocity of the corresponding bulk medium: the cell length
    /// divided by the transit time, c d / (sum of n l).
    ///
    /// For a quarter-wave bilayer this equals the harmonic mean
    /// c (1/n1 + 1/n2) / 2 returned by [`crate::dom::bulk_velocity`].
    pub fn bulk_velocity(&self) -> f64 {
        self.total_length() / self.optical_length()
    }

    /// True when the cell is a quarter-wave bilayer in an ambient medium
    /// matching its first layer, the geometry the closed quarter-wave
    /// formulas assume.
    pub fn is_quarter_wave(&self) -> bool {
        if self.layers.len() != 2 {
            return false;
        }
        let (a, b) = (self.layers[0], self.layers[1]);
        let optical_a = a.index * a.thickness;
        let optical_b = b.index * b.thickness;
        let scale = optical_a.max(optical_b);
        (optical_a - optical_b).abs() <= 1e-12 * scale
            && (self.ambient_index - a.index).abs() <= 1e-12 * a.index
    }

    /// True when every layer and the ambient medium share one index.
    pub fn is_homogeneous(&self) -> bool {
        self.layers
            .iter()
            .all(|l| (l.index - self.ambient_index).abs() <= 1e-12 * self.ambient_index)
    }

    /// Whether the layer list reads the same forwards and backwards,
    /// including the ambient medium; such cells have a fixed quadrature
    /// relation between their transmission and reflection phases.
    pub fn is_symmetric(&self) -> bool {
        let n = self.layers.len();
        (0..n / 2).all(|i| {
            let (p, q) = (self.layers[i], self.layers[n - 1 - i]);
            (p.index - q.index).abs() <= 1e-12 * p.index
                && (p.thickness - q.thickness).abs() <= 1e-12 * p.thickness
        })
    }
}

/// Complex transmission and reflection amplitudes of a cell or a stack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterAmplitudes {
    pub t: Complex64,
    pub r: Complex64,
}

impl ScatterAmplitudes {
    /// Transmittance T = |t|^2.
    pub fn transmittance(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Reflectance R = |r|^2.
    pub fn reflectance(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// Transmission phase, the argument of t.
    pub fn transmission_phase(&self) -> f64 {
        self.t.arg()
    }

    /// Reflection phase, the argument of r.
    pub fn reflection_phase(&self) -> f64 {
        self.r.arg()
    }

    /// |t|^2 + |r|^2 - 1, which vanishes for lossless scatterers.
    pub fn flux_defect(&self) -> f64 {
        self.transmittance() + self.reflectance() - 1.0
    }
}

/// Interface transmission and reflection coefficients between two media.
///
/// Both are real: t_ij = 2 n_i / (n_i + n_j) and r_ij = (n_j - n_i) / (n_i + n_j),
/// antisymmetric under exchange of the media.
pub fn fresnel(n_i: f64, n_j: f64) -> Result<(f64, f64)> {
    if !(n_i > 0.0) || !n_i.is_finite() {
        return Err(Error::NonPositiveIndex(n_i));
    }
    if !(n_j > 0.0) || !n_j.is_finite() {
        return Err(Error::NonPositiveIndex(n_j));
    }
    let sum = n_i + n_j;
    Ok((2.0 * n_i / sum, (n_j - n_i) / sum))
}

/// Double-boundary transmittance and reflectance of a single interface,
/// T_ij = t_ij t_ji and R_ij = r_ij^2, with T_ij + R_ij = 1 exactly.
pub fn double_boundary(n_i: f64, n_j: f64) -> Result<(f64, f64)> {
    let (t_ij, r_ij) = fresnel(n_i, n_j)?;
    let (t_ji, _) = fresnel(n_j, n_i)?;
    Ok((t_ij * t_ji, r_ij * r_ij))
}

/// Closed-form amplitudes of a quarter-wave bilayer cell.
///
/// With z = exp(i pi omega_rel) and the single-interface coefficients of the
/// two layer indices,
///
/// ```text
/// t = T12 z / (1 - R12 z)
/// r = r12 (z^2 - z) / (1 - R12 z)
/// ```
///
/// At midgap (omega_rel = 1) this gives the real pair
/// t = -T12/(1 + R12), r = 2 r12/(1 + R12).
pub fn qw_unit_amplitudes(n1: f64, n2: f64, omega_rel: f64) -> Result<ScatterAmplitudes> {
    let (_, r12) = fresnel(n1, n2)?;
    let (big_t, big_r) = double_boundary(n1, n2)?;
    let z = Complex64::from_polar(1.0, std::f64::consts::PI * omega_rel);
    let denom = 1.0 - big_r * z;
    Ok(ScatterAmplitudes {
        t: big_t * z / denom,
        r: r12 * (z * z - z) / denom,
    })
}

/// Frequency derivative of the quarter-wave cell transmission, with respect
/// to omega_rel.
///
/// dt/d(omega_rel) = i pi T12 z / (1 - R12 z)^2, the exact derivative of the
/// closed form above.
pub fn qw_transmission_derivative(n1: f64, n2: f64, omega_rel: f64) -> Result<Complex64> {
    let (big_t, big_r) = double_boundary(n1, n2)?;
    let z = Complex64::from_polar(1.0, std::f64::consts::PI * omega_rel);
    let denom = 1.0 - big_r * z;
    Ok(Complex64::new(0.0, std::f64::consts::PI) * big_t * z / (denom * denom))
}

/// Amplitudes of an arbitrary piecewise-constant cell at `omega_rel`, by the
/// per-layer matrix product.
///
/// The frequency scale is the cell's own midgap frequency; agreement with
/// [`qw_unit_amplitudes`] on quarter-wave bilayers is part of the test suite.
pub fn cell_amplitudes(cell: &UnitCell, omega_rel: f64) -> Result<ScatterAmplitudes> {
    let omega = omega_rel * cell.midgap_frequency();
    let m = oracle::cell_matrix(cell, omega)?;
    crate::matrix::amplitudes_from_matrix(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn fresnel_of_vacuum_glass_pair() {
        let (t, r) = fresnel(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(t, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn fresnel_matched_media_do_not_scatter() {
        let (t, r) = fresnel(1.7, 1.7).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn fresnel_reversed_pair() {
        let (t, r) = fresnel(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(t, 4.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r, -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn fresnel_rejects_bad_indices() {
        assert!(fresnel(0.0, 1.0).is_err());
        assert!(fresnel(1.0, -2.0).is_err());
    }

    #[test]
    fn double_boundary_of_vacuum_glass_pair() {
        let (big_t, big_r) = double_boundary(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(big_t, 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(big_r, 1.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn quarter_wave_cell_at_midgap_is_real() {
        let s = qw_unit_amplitudes(1.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.t.re, -0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(s.t.im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.r.re, 0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(s.r.im, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.transmittance(), 0.64, epsilon = 1e-14);
    }

    #[test]
    fn quarter_wave_cell_matches_matrix_product() {
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        for k in 1..40 {
            let w = 0.05 * k as f64;
            let closed = qw_unit_amplitudes(1.0, 2.0, w).unwrap();
            let product = cell_amplitudes(&cell, w).unwrap();
            assert!(
                (closed.t - product.t).norm() < 1e-10,
                "t mismatch at omega_rel = {w}: {} vs {}",
                closed.t,
                product.t
            );
            assert!(
                (closed.r - product.r).norm() < 1e-10,
                "r mismatch at omega_rel = {w}: {} vs {}",
                closed.r,
                product.r
            );
        }
    }

    #[test]
    fn homogeneous_layer_is_a_pure_phase() {
        let cell = UnitCell::homogeneous(1.5).unwrap();
        let s = cell_amplitudes(&cell, 0.7).unwrap();
        let omega = 0.7 * cell.midgap_frequency();
        let expected = Complex64::from_polar(1.0, omega * 1.5);
        assert!((s.t - expected).norm() < 1e-12);
        assert!(s.r.norm() < 1e-14);
    }

    #[test]
    fn quarter_wave_thicknesses_follow_from_indices() {
        let cell = UnitCell::quarter_wave(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(cell.total_length(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cell.layers()[0].thickness, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cell.layers()[1].thickness, 1.0 / 3.0, epsilon = 1e-15);
        // Equal optical thickness per layer.
        let oa = cell.layers()[0].index * cell.layers()[0].thickness;
        let ob = cell.layers()[1].index * cell.layers()[1].thickness;
        assert_abs_diff_eq!(oa, ob, epsilon = 1e-15);
        assert!(cell.is_quarter_wave());
    }

    #[test]
    fn midgap_frequency_scales_with_omega0() {
        let cell = UnitCell::quarter_wave_with_midgap(1.0, 2.0, 2.5).unwrap();
        assert_abs_diff_eq!(cell.midgap_frequency(), 2.5, epsilon = 1e-12);
        assert!(cell.is_quarter_wave());
    }

    proptest! {
        #[test]
        fn fresnel_antisymmetry(n_i in 0.1f64..5.0, n_j in 0.1f64..5.0) {
            let (_, r_ij) = fresnel(n_i, n_j).unwrap();
            let (_, r_ji) = fresnel(n_j, n_i).unwrap();
            prop_assert_eq!(r_ij, -r_ji);
        }

        #[test]
        fn double_boundary_flux_is_unity(n_i in 0.1f64..5.0, n_j in 0.1f64..5.0) {
            let (big_t, big_r) = double_boundary(n_i, n_j).unwrap();
            prop_assert!((big_t + big_r - 1.0).abs() < 1e-14);
        }

        #[test]
        fn quarter_wave_amplitudes_are_lossless(
            n1 in 1.0f64..3.5,
            n2 in 1.0f64..3.5,
            w in 0.01f64..1.99,
        ) {
            let s = qw_unit_amplitudes(n1, n2, w).unwrap();
            prop_assert!(s.flux_defect().abs() < 1e-12);
        }

        #[test]
        fn arbitrary_cells_are_lossless(
            n_a in 1.0f64..3.5,
            n_b in 1.0f64..3.5,
            n_c in 1.0f64..3.5,
            l_a in 0.2f64..1.5,
            l_b in 0.2f64..1.5,
            l_c in 0.2f64..1.5,
            ambient in 1.0f64..2.0,
            w in 0.05f64..1.95,
        ) {
            let cell = UnitCell::new(
                vec![
                    Layer::new(n_a, l_a).unwrap(),
                    Layer::new(n_b, l_b).unwrap(),
                    Layer::new(n_c, l_c).unwrap(),
                ],
                ambient,
            ).unwrap();
            let s = cell_amplitudes(&cell, w).unwrap();
            prop_assert!(s.flux_defect().abs() < 1e-12);
        }

        #[test]
        fn symmetric_cells_have_quadrature_phases(
            n_a in 1.0f64..3.0,
            n_b in 1.0f64..3.0,
            l_a in 0.2f64..1.0,
            l_b in 0.2f64..1.0,
            w in 0.05f64..1.95,
        ) {
            // Palindromic three-layer cell: a b a.
            let cell = UnitCell::new(
                vec![
                    Layer::new(n_a, l_a).unwrap(),
                    Layer::new(n_b, l_b).unwrap(),
                    Layer::new(n_a, l_a).unwrap(),
                ],
                1.0,
            ).unwrap();
            prop_assert!(cell.is_symmetric());
            let s = cell_amplitudes(&cell, w).unwrap();
            // Skip accidental reflection zeros where the phase is undefined.
            prop_assume!(s.reflectance() > 1e-12);
            let diff = s.transmission_phase() - s.reflection_phase();
            let folded = (diff / std::f64::consts::FRAC_PI_2).rem_euclid(4.0);
            let distance_to_odd = (folded - 1.0).abs().min((folded - 3.0).abs());
            prop_assert!(
                distance_to_odd < 1e-9,
                "phase difference {diff} not an odd multiple of pi/2"
            );
        }
    }
}
