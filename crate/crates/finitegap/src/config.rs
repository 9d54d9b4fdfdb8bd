//! JSON run configurations: stack geometry, frequency grid, and dipole
//! placements, with bundled presets for the standard figures.
//!
//! Schema (all lengths in units where the unit cell rebuilds them, all
//! frequencies relative to midgap):
//!
//! ```json
//! {
//!   "cell": {"type": "quarter_wave", "n1": 1.0, "n2": 2.0},
//!   "periods": 5,
//!   "grid": {"omega_rel_min": 0.002, "omega_rel_max": 1.998, "points": 512},
//!   "dipoles": [{"cell": 3, "layer": 2, "position": 0.5, "label": "layer2_center"}],
//!   "field_cell": 3
//! }
//! ```
//!
//! The cell may instead be explicit layers:
//! `{"type": "layers", "layers": [{"index": 1.5, "thickness": 0.4}, ...],
//! "ambient_index": 1.0}`. Quarter-wave thicknesses are always derived from
//! the indices (and optionally a midgap frequency `omega0`), never supplied.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::UnitCell;
use crate::emission::Dipole;
use crate::error::{Error, Result};
use crate::stack::Stack;

const DEFAULT_GRID_MIN: f64 = 0.002;
const DEFAULT_GRID_MAX: f64 = 1.998;
const DEFAULT_GRID_POINTS: usize = 512;

/// Unit-cell description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CellConfig {
    /// Bilayer with n1 a = n2 b, thicknesses derived from the indices.
    QuarterWave {
        n1: f64,
        n2: f64,
        /// Midgap frequency; when omitted the cell is normalized to unit
        /// total length instead.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
    },
    /// Arbitrary lossless layers with explicit thicknesses.
    Layers {
        layers: Vec<LayerConfig>,
        ambient_index: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub index: f64,
    pub thickness: f64,
}

/// Frequency grid, relative to midgap. The default spans both band edges
/// symmetrically about omega_rel = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_grid_min")]
    pub omega_rel_min: f64,
    #[serde(default = "default_grid_max")]
    pub omega_rel_max: f64,
    #[serde(default = "default_grid_points")]
    pub points: usize,
}

fn default_grid_min() -> f64 {
    DEFAULT_GRID_MIN
}

fn default_grid_max() -> f64 {
    DEFAULT_GRID_MAX
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for GridConfig {
    fn default() -> GridConfig {
        GridConfig {
            omega_rel_min: DEFAULT_GRID_MIN,
            omega_rel_max: DEFAULT_GRID_MAX,
            points: DEFAULT_GRID_POINTS,
        }
    }
}

impl GridConfig {
    /// Evenly spaced grid values, endpoints included.
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.omega_rel_min > 0.0) || !self.omega_rel_min.is_finite() {
            return Err(config_error(
                "grid.omega_rel_min",
                format!("must be positive and finite, got {}", self.omega_rel_min),
            ));
        }
        if !(self.omega_rel_max > self.omega_rel_min) || !self.omega_rel_max.is_finite() {
            return Err(config_error(
                "grid.omega_rel_max",
                format!(
                    "must exceed omega_rel_min = {}, got {}",
                    self.omega_rel_min, self.omega_rel_max
                ),
            ));
        }
        if self.points < 2 {
            return Err(config_error(
                "grid.points",
                format!("need at least 2 points, got {}", self.points),
            ));
        }
        let span = self.omega_rel_max - self.omega_rel_min;
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| self.omega_rel_min + span * i as f64 / last)
            .collect())
    }
}

/// One dipole placement; `position` is the fraction across the layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleConfig {
    pub cell: usize,
    pub layer: usize,
    #[serde(default = "default_dipole_position")]
    pub position: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn default_dipole_position() -> f64 {
    0.5
}

/// A complete run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub cell: CellConfig,
    pub periods: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dipoles: Vec<DipoleConfig>,
    /// Default cell for field profiles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_cell: Option<usize>,
}

/// A configuration resolved into computable objects.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub stack: Stack,
    pub grid: Vec<f64>,
    pub dipoles: Vec<NamedDipole>,
    pub field_cell: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct NamedDipole {
    pub label: String,
    pub dipole: Dipole,
}

fn config_error(path: &str, message: String) -> Error {
    Error::Config {
        path: path.to_string(),
        message,
    }
}

impl Config {
    /// Parses a configuration from JSON text.
    pub fn from_str(text: &str) -> Result<Config> {
        serde_json::from_str(text).map_err(|e| config_error("<input>", e.to_string()))
    }

    /// Reads and parses a configuration file.
    pub fn from_path(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            config_error(&path.display().to_string(), format!("cannot read: {e}"))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| config_error(&path.display().to_string(), e.to_string()))
    }

    /// A bundled configuration by name: fig4, fig5, fig6, or fig7.
    pub fn builtin(name: &str) -> Result<Config> {
        let text = match name.trim_end_matches(".json") {
            "fig4" => include_str!("../configs/fig4.json"),
            "fig5" => include_str!("../configs/fig5.json"),
            "fig6" => include_str!("../configs/fig6.json"),
            "fig7" => include_str!("../configs/fig7.json"),
            other => {
                return Err(config_error(
                    other,
                    format!("unknown builtin config; available: {:?}", BUILTIN_NAMES),
                ))
            }
        };
        Config::from_str(text)
    }

    /// A 16-hex-digit digest of the parsed configuration, for output headers.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Builds the stack alone.
    pub fn build_stack(&self) -> Result<Stack> {
        let cell = match &self.cell {
            CellConfig::QuarterWave { n1, n2, omega0 } => match omega0 {
                Some(w0) => UnitCell::quarter_wave_with_midgap(*n1, *n2, *w0),
                None => UnitCell::quarter_wave(*n1, *n2),
            },
            CellConfig::Layers {
                layers,
                ambient_index,
            } => {
                let layers: Result<Vec<_>> = layers
                    .iter()
                    .map(|l| crate::cell::Layer::new(l.index, l.thickness))
                    .collect();
                UnitCell::new(layers?, *ambient_index)
            }
        }
        .map_err(|e| config_error("cell", e.to_string()))?;
        Stack::new(cell, self.periods).map_err(|e| config_error("periods", e.to_string()))
    }

    /// Resolves the full scenario, validating grid and dipole placements.
    pub fn build(&self) -> Result<Scenario> {
        let stack = self.build_stack()?;
        let grid = self.grid.values()?;
        let mut dipoles = Vec::with_capacity(self.dipoles.len());
        for (i, spec) in self.dipoles.iter().enumerate() {
            let dipole = Dipole::new(spec.cell, spec.layer, spec.position);
            dipole
                .resolve(&stack)
                .map_err(|e| config_error(&format!("dipoles[{i}]"), e.to_string()))?;
            let label = spec
                .label
                .clone()
                .unwrap_or_else(|| format!("cell{}_layer{}", spec.cell, spec.layer));
            dipoles.push(NamedDipole { label, dipole });
        }
        if let Some(cell) = self.field_cell {
            if cell == 0 || cell > stack.periods() {
                return Err(config_error(
                    "field_cell",
                    format!("cell {cell} outside 1..={}", stack.periods()),
                ));
            }
        }
        Ok(Scenario {
            stack,
            grid,
            dipoles,
            field_cell: self.field_cell,
        })
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["fig4", "fig5", "fig6", "fig7"];
