//! Scattering, mode density, modal fields, and dipole emission in finite
//! one-dimensional periodic dielectric stacks.
//!
//! A stack is N identical lossless unit cells, each a sequence of
//! homogeneous layers embedded in an ambient medium. Everything observable
//! follows from the unit cell's complex transmission and reflection
//! amplitudes at each frequency:
//!
//! - full-stack amplitudes (t_N, r_N) via the Chebyshev reduction of the
//!   N-th transfer-matrix power, without ever multiplying N matrices;
//! - the Bloch parameter cos beta = Re(1/t), whose excursions beyond [-1, 1]
//!   mark the band gaps;
//! - the density of modes rho(omega), the inverse group velocity of the
//!   transmitted wave, by three independent routes (numeric phase
//!   derivative, Chebyshev closed form, quarter-wave closed form);
//! - the modal field E(x) throughout the structure from the exact outer
//!   boundary conditions, its stored energy, and the energy-normalized
//!   intensity |e(x)|^2;
//! - spontaneous emission rates p = rho |e(x)|^2 of an embedded transverse
//!   dipole, relative to the bulk rate of its host layer.
//!
//! Units: the vacuum speed of light is 1, so wavenumbers are n times omega.
//! Frequencies are usually handled relative to the cell's midgap frequency
//! omega_0 = pi / (optical length of one cell); `omega_rel = 1` is the gap
//! center of a quarter-wave stack.
//!
//! Every closed form is cross-checked against slow, obviously-correct
//! references in [`oracle`]: direct matrix products and direct numerical
//! integration of the wave equation. The `validate` CLI subcommand runs
//! the whole comparison suite on any configuration.
//!
//! ```
//! use finitegap::{DomRoute, Stack};
//!
//! // Five quarter-wave cells of indices 1 and 2: the classic Bragg mirror.
//! let stack = Stack::quarter_wave(1.0, 2.0, 5)?;
//!
//! // Midgap: transmission is strongly suppressed...
//! assert!(stack.transmittance(1.0)? < 4e-3);
//!
//! // ...and so is the density of modes, relative to the bulk medium.
//! let rho = finitegap::dom::dom(&stack, DomRoute::ClosedForm, 1.0)?.rho;
//! assert!(rho * stack.bulk_velocity() < 0.3);
//! # Ok::<(), finitegap::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability; the `finitegap`
//! binary drives the same code from JSON run configurations.

pub mod bloch;
pub mod cell;
pub mod config;
pub mod dom;
pub mod emission;
pub mod error;
pub mod field;
pub mod matrix;
pub mod oracle;
pub mod stack;
pub mod sweep;
pub mod validate;

pub use cell::{Layer, ScatterAmplitudes, UnitCell};
pub use config::Config;
pub use dom::{DomRoute, DomSample};
pub use emission::{Dipole, EmissionSample, Regime};
pub use error::{Error, Result};
pub use field::{BoundaryVectors, QwCellField, StackField};
pub use matrix::TransferMatrix;
pub use stack::Stack;
