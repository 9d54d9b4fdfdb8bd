//! Spontaneous emission of a dipole embedded in the stack.
//!
//! For a dipole oscillating perpendicular to the stack axis at position x,
//! the emission rate into the structure is the mode density at the emission
//! frequency weighted by the normalized modal intensity at the dipole:
//! p = rho(omega) |e(x)|^2. Rates are reported relative to the bulk value
//! p_bulk = 1 / (n_loc N d) of an unbounded medium with the dipole's local
//! index, so a structureless stack gives p_rel = 1 at every frequency.

use crate::dom::{self, DomRoute};
use crate::error::{Error, Result};
use crate::field::StackField;
use crate::stack::Stack;

/// Density regime of the host medium, selecting the local-field model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Dilute medium: the cavity factor n^3.
    Tenuous,
    /// Dense medium: the virtual-cavity factor (2 + n^2) / 3.
    Dense,
}

/// Local-field enhancement factor kappa for a dipole in a medium of index n.
///
/// Reported alongside emission rates for interpretation; it is never folded
/// into p or p_rel, which describe the mode structure alone.
pub fn local_field_factor(index: f64, regime: Regime) -> f64 {
    match regime {
        Regime::Tenuous => index.powi(3),
        Regime::Dense => (2.0 + index * index) / 3.0,
    }
}

/// A dipole's placement inside the stack, addressed by cell and layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole {
    /// 1-based cell index.
    pub cell: usize,
    /// 1-based layer index within the cell.
    pub layer: usize,
    /// Fractional position within the layer, in [0, 1].
    pub position: f64,
}

/// A resolved dipole site: global coordinate and local refractive index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleSite {
    pub position: f64,
    pub index: f64,
}

impl Dipole {
    pub fn new(cell: usize, layer: usize, position: f64) -> Dipole {
        Dipole {
            cell,
            layer,
            position,
        }
    }

    /// Global position and local index of the dipole within this stack.
    ///
    /// A fractional position of exactly 0 or 1 sits on an interface; it
    /// resolves to the named layer's index.
    pub fn resolve(&self, stack: &Stack) -> Result<DipoleSite> {
        let periods = stack.periods();
        if self.cell == 0 || self.cell > periods {
            return Err(Error::CellOutOfRange {
                cell: self.cell,
                periods,
            });
        }
        let layers = stack.cell().layers();
        if self.layer == 0 || self.layer > layers.len() {
            return Err(Error::DipolePlacement(format!(
                "layer {} of a {}-layer cell",
                self.layer,
                layers.len()
            )));
        }
        if !(0.0..=1.0).contains(&self.position) {
            return Err(Error::DipolePlacement(format!(
                "fractional position {} outside [0, 1]",
                self.position
            )));
        }
        let layer = layers[self.layer - 1];
        let offset: f64 = layers[..self.layer - 1].iter().map(|l| l.thickness).sum();
        let position = (self.cell - 1) as f64 * stack.cell().total_length()
            + offset
            + self.position * layer.thickness;
        Ok(DipoleSite {
            position,
            index: layer.index,
        })
    }
}

/// Emission rate at one frequency: absolute and relative to the bulk rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionSample {
    pub omega_rel: f64,
    /// rho(omega) |e(x)|^2, the rate into the structure's modes.
    pub p: f64,
    /// p divided by the bulk rate 1 / (n_loc N d).
    pub p_rel: f64,
}

/// Emission rate of `dipole` at reduced frequency `omega_rel`, with the mode
/// density evaluated by `route`.
pub fn emission_rate(
    stack: &Stack,
    dipole: &Dipole,
    omega_rel: f64,
    route: DomRoute,
) -> Result<EmissionSample> {
    let site = dipole.resolve(stack)?;
    let field = StackField::new(stack, omega_rel)?;
    sample_at_site(stack, &site, &field, omega_rel, route)
}

/// Emission spectrum of `dipole` over a frequency grid.
pub fn emission_spectrum(
    stack: &Stack,
    dipole: &Dipole,
    grid: &[f64],
    route: DomRoute,
) -> Result<Vec<EmissionSample>> {
    let site = dipole.resolve(stack)?;
    grid.iter()
        .map(|&w| {
            let field = StackField::new(stack, w)?;
            sample_at_site(stack, &site, &field, w, route)
        })
        .collect()
}

fn sample_at_site(
    stack: &Stack,
    site: &DipoleSite,
    field: &StackField,
    omega_rel: f64,
    route: DomRoute,
) -> Result<EmissionSample> {
    let density = dom::dom(stack, route, omega_rel)?;
    let intensity = field.normalized_intensity(site.position)?;
    let p = density.rho * intensity;
    let p_bulk = 1.0 / (site.index * stack.total_length());
    let p_rel = p / p_bulk;
    if !p.is_finite() || !p_rel.is_finite() {
        return Err(Error::NonFinite {
            quantity: "emission rate".to_string(),
            omega_rel,
            route: route.label().to_string(),
        });
    }
    Ok(EmissionSample {
        omega_rel,
        p,
        p_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::UnitCell;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn default_stack() -> Stack {
        Stack::quarter_wave(1.0, 2.0, 5).unwrap()
    }

    #[test]
    fn local_field_factors() {
        assert_abs_diff_eq!(local_field_factor(1.0, Regime::Tenuous), 1.0);
        assert_abs_diff_eq!(local_field_factor(1.0, Regime::Dense), 1.0);
        assert_abs_diff_eq!(local_field_factor(2.0, Regime::Tenuous), 8.0);
        assert_abs_diff_eq!(local_field_factor(2.0, Regime::Dense), 2.0);
    }

    #[test]
    fn dipole_site_resolution() {
        let stack = default_stack();
        // Cell 3 spans [2, 3]; layer 1 is 2/3 thick, layer 2 is 1/3 thick.
        let site = Dipole::new(3, 2, 0.5).resolve(&stack).unwrap();
        assert_abs_diff_eq!(site.position, 2.0 + 2.0 / 3.0 + 0.5 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(site.index, 2.0);
        let site = Dipole::new(1, 1, 0.0).resolve(&stack).unwrap();
        assert_abs_diff_eq!(site.position, 0.0);
        assert_abs_diff_eq!(site.index, 1.0);
    }

    #[test]
    fn invalid_placements_are_rejected() {
        let stack = default_stack();
        assert!(matches!(
            Dipole::new(0, 1, 0.5).resolve(&stack),
            Err(Error::CellOutOfRange { .. })
        ));
        assert!(matches!(
            Dipole::new(6, 1, 0.5).resolve(&stack),
            Err(Error::CellOutOfRange { .. })
        ));
        assert!(matches!(
            Dipole::new(2, 3, 0.5).resolve(&stack),
            Err(Error::DipolePlacement(_))
        ));
        assert!(matches!(
            Dipole::new(2, 1, 1.5).resolve(&stack),
            Err(Error::DipolePlacement(_))
        ));
    }

    #[test]
    fn homogeneous_emission_is_the_bulk_rate() {
        let stack = Stack::new(UnitCell::homogeneous(1.5).unwrap(), 4).unwrap();
        let dipole = Dipole::new(2, 1, 0.3);
        for route in [DomRoute::PhaseDerivative, DomRoute::ClosedForm] {
            for w in [0.1, 0.6, 1.0, 1.7] {
                let sample = emission_rate(&stack, &dipole, w, route).unwrap();
                assert_abs_diff_eq!(sample.p_rel, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn band_edge_resonance_favors_the_dense_layer() {
        let stack = default_stack();
        let resonances = dom::qw_resonance_frequencies(1.0, 2.0, 5).unwrap();
        let near_edge = *resonances.last().unwrap();
        let low = emission_rate(
            &stack,
            &Dipole::new(3, 1, 0.5),
            near_edge,
            DomRoute::ClosedForm,
        )
        .unwrap();
        let high = emission_rate(
            &stack,
            &Dipole::new(3, 2, 0.5),
            near_edge,
            DomRoute::ClosedForm,
        )
        .unwrap();
        assert!(
            low.p_rel < high.p_rel,
            "expected layer-2 enhancement, got {} vs {}",
            low.p_rel,
            high.p_rel
        );
        assert!(high.p_rel > 1.0);
    }

    #[test]
    fn midgap_suppression_deepens_with_stack_size() {
        let mut previous = f64::INFINITY;
        for periods in [5, 8, 12] {
            let stack = Stack::quarter_wave(1.0, 2.0, periods).unwrap();
            let center = (periods + 1) / 2;
            let sample = emission_rate(
                &stack,
                &Dipole::new(center, 2, 0.5),
                1.0,
                DomRoute::ClosedForm,
            )
            .unwrap();
            assert!(
                sample.p_rel < previous,
                "midgap rate did not drop going to {periods} periods"
            );
            assert!(sample.p_rel < 0.1);
            previous = sample.p_rel;
        }
    }

    #[test]
    fn spectrum_matches_pointwise_rates() {
        let stack = default_stack();
        let dipole = Dipole::new(3, 2, 0.5);
        let grid = [0.2, 0.9, 1.4];
        let spectrum =
            emission_spectrum(&stack, &dipole, &grid, DomRoute::PhaseDerivative).unwrap();
        for (sample, &w) in spectrum.iter().zip(&grid) {
            let single = emission_rate(&stack, &dipole, w, DomRoute::PhaseDerivative).unwrap();
            assert_abs_diff_eq!(sample.p_rel, single.p_rel, epsilon = 1e-14);
            assert_abs_diff_eq!(sample.omega_rel, w);
        }
    }

    proptest! {
        #[test]
        fn rates_are_positive_and_finite(
            n2 in 1.2f64..3.0,
            cell in 1usize..6,
            layer in 1usize..3,
            frac in 0.0f64..1.0,
            w in 0.05f64..1.95,
        ) {
            let stack = Stack::quarter_wave(1.0, n2, 5).unwrap();
            let dipole = Dipole::new(cell, layer, frac);
            let sample = emission_rate(&stack, &dipole, w, DomRoute::ClosedForm).unwrap();
            prop_assert!(sample.p >= 0.0);
            prop_assert!(sample.p_rel.is_finite());
        }
    }
}
