//! Column-oriented sweep outputs with deterministic CSV and JSON writers.
//!
//! Every sweep produces a table keyed by the first column (reduced
//! frequency, non-decreasing); all values are checked finite before the
//! table is accepted. CSV output carries `#`-prefixed metadata lines, then
//! a header row, then data rows; identical inputs produce byte-identical
//! output apart from the tool version in the first line.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::json;

use crate::config::NamedDipole;
use crate::dom::{self, DomRoute};
use crate::error::{Error, Result};
use crate::field::{qw_cell_field, StackField};
use crate::stack::Stack;

/// Header metadata attached to a sweep.
#[derive(Debug, Clone)]
pub struct SweepMeta {
    pub command: String,
    pub config_hash: String,
    /// Extra key/value header lines, in insertion order.
    pub notes: Vec<(String, String)>,
}

impl SweepMeta {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> SweepMeta {
        SweepMeta {
            command: command.into(),
            config_hash: config_hash.into(),
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, key: impl Into<String>, value: impl Into<String>) -> SweepMeta {
        self.notes.push((key.into(), value.into()));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Column {
        Column {
            name: name.into(),
            values,
        }
    }
}

/// A validated sweep table: equal-length finite columns, the first one
/// non-decreasing.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub meta: SweepMeta,
    pub columns: Vec<Column>,
}

impl SweepOutput {
    pub fn new(meta: SweepMeta, columns: Vec<Column>) -> Result<SweepOutput> {
        if columns.is_empty() || columns[0].values.is_empty() {
            return Err(Error::Domain("empty sweep output".to_string()));
        }
        let rows = columns[0].values.len();
        for column in &columns {
            if column.values.len() != rows {
                return Err(Error::Domain(format!(
                    "column {} has {} rows, expected {rows}",
                    column.name,
                    column.values.len()
                )));
            }
        }
        let key = &columns[0].values;
        if key.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain(format!(
                "key column {} is not non-decreasing",
                columns[0].name
            )));
        }
        for column in &columns {
            for (row, value) in column.values.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        quantity: column.name.clone(),
                        omega_rel: key[row],
                        route: meta.command.clone(),
                    });
                }
            }
        }
        Ok(SweepOutput { meta, columns })
    }

    pub fn rows(&self) -> usize {
        self.columns[0].values.len()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        writeln!(out, "# finitegap {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", self.meta.command)?;
        writeln!(out, "# config: {}", self.meta.config_hash)?;
        for (key, value) in &self.meta.notes {
            writeln!(out, "# {key}: {value}")?;
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(out, "{}", names.join(","))?;
        let mut line = String::new();
        for row in 0..self.rows() {
            line.clear();
            for (i, column) in self.columns.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&column.values[row].to_string());
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let notes: BTreeMap<&str, &str> = self
            .meta
            .notes
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        json!({
            "meta": {
                "tool": "finitegap",
                "version": env!("CARGO_PKG_VERSION"),
                "command": self.meta.command,
                "config": self.meta.config_hash,
                "notes": notes,
            },
            "columns": self
                .columns
                .iter()
                .map(|c| json!({"name": c.name, "values": c.values}))
                .collect::<Vec<_>>(),
        })
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)?;
        Ok(())
    }
}

/// Column names derive from user labels; anything outside [A-Za-z0-9_]
/// would corrupt the CSV header.
fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

/// Mode density scaled by the bulk velocity, one column per route.
pub fn dom_sweep(
    stack: &Stack,
    grid: &[f64],
    routes: &[DomRoute],
    meta: SweepMeta,
) -> Result<SweepOutput> {
    let v_bulk = stack.bulk_velocity();
    let mut columns = vec![Column::new("omega_rel", grid.to_vec())];
    for &route in routes {
        let values: Result<Vec<f64>> = grid
            .iter()
            .map(|&w| Ok(dom::dom(stack, route, w)?.rho * v_bulk))
            .collect();
        columns.push(Column::new(format!("rho_v_bulk_{}", route.label()), values?));
    }
    let meta = meta.note(
        "routes",
        routes
            .iter()
            .map(|r| r.label())
            .collect::<Vec<_>>()
            .join(","),
    );
    SweepOutput::new(meta, columns)
}

/// Unnormalized intensity |E|^2 across one cell, sampled at `points`
/// positions per cell for every grid frequency. Positions are reported in
/// layer-local, cell-local, and global coordinates.
pub fn field_sweep(
    stack: &Stack,
    cell_index: usize,
    grid: &[f64],
    points: usize,
    meta: SweepMeta,
) -> Result<SweepOutput> {
    if points < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 sample points per cell, got {points}"
        )));
    }
    if cell_index == 0 || cell_index > stack.periods() {
        return Err(Error::CellOutOfRange {
            cell: cell_index,
            periods: stack.periods(),
        });
    }
    let cell = stack.cell();
    let length = cell.total_length();
    let offset = (cell_index - 1) as f64 * length;
    let quarter_wave = cell.is_quarter_wave();
    let rows = grid.len() * points;
    let mut omega_col = Vec::with_capacity(rows);
    let mut layer_col = Vec::with_capacity(rows);
    let mut x_layer_col = Vec::with_capacity(rows);
    let mut x_cell_col = Vec::with_capacity(rows);
    let mut x_global_col = Vec::with_capacity(rows);
    let mut intensity_col = Vec::with_capacity(rows);
    for &w in grid {
        // The closed form and the layer march agree to roundoff; the
        // closed form is only available for quarter-wave cells.
        let qw = if quarter_wave {
            Some(qw_cell_field(stack, cell_index, w)?)
        } else {
            None
        };
        let marched;
        let cell_field = if qw.is_none() {
            marched = StackField::new(stack, w)?;
            Some(&marched.cells[cell_index - 1])
        } else {
            None
        };
        for i in 0..points {
            let x = length * i as f64 / (points - 1) as f64;
            let value = match (&qw, cell_field) {
                (Some(q), _) => q.eval(x),
                (None, Some(c)) => c.eval(x)?,
                (None, None) => unreachable!(),
            };
            let (layer, start) = locate_layer(cell, x);
            omega_col.push(w);
            layer_col.push(layer as f64);
            x_layer_col.push(x - start);
            x_cell_col.push(x);
            x_global_col.push(offset + x);
            intensity_col.push(value.norm_sqr());
        }
    }
    let meta = meta.note("cell", cell_index.to_string());
    SweepOutput::new(
        meta,
        vec![
            Column::new("omega_rel", omega_col),
            Column::new("layer", layer_col),
            Column::new("x_layer", x_layer_col),
            Column::new("x_cell", x_cell_col),
            Column::new("x_global", x_global_col),
            Column::new("intensity", intensity_col),
        ],
    )
}

/// 1-based layer index and layer start for a cell-local position.
fn locate_layer(cell: &crate::cell::UnitCell, x: f64) -> (usize, f64) {
    let mut start = 0.0;
    for (i, layer) in cell.layers().iter().enumerate() {
        let end = start + layer.thickness;
        if x < end || i == cell.layers().len() - 1 {
            return (i + 1, start);
        }
        start = end;
    }
    unreachable!("cells have at least one layer");
}

/// Stored mode energy per frequency: the stack total and each cell's share.
pub fn energy_sweep(stack: &Stack, grid: &[f64], meta: SweepMeta) -> Result<SweepOutput> {
    let n = stack.periods();
    let mut omega_col = Vec::with_capacity(grid.len());
    let mut total_col = Vec::with_capacity(grid.len());
    let mut cell_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); n];
    for &w in grid {
        let field = StackField::new(stack, w)?;
        let energy = field.energy();
        omega_col.push(w);
        total_col.push(energy.total);
        for (col, u) in cell_cols.iter_mut().zip(&energy.per_cell) {
            col.push(*u);
        }
    }
    let mut columns = vec![
        Column::new("omega_rel", omega_col),
        Column::new("u_total", total_col),
    ];
    for (i, values) in cell_cols.into_iter().enumerate() {
        columns.push(Column::new(format!("u_cell_{}", i + 1), values));
    }
    SweepOutput::new(meta, columns)
}

/// Bulk-relative emission rate per dipole placement.
pub fn emission_sweep(
    stack: &Stack,
    dipoles: &[NamedDipole],
    grid: &[f64],
    route: DomRoute,
    meta: SweepMeta,
) -> Result<SweepOutput> {
    let sites: Result<Vec<_>> = dipoles.iter().map(|d| d.dipole.resolve(stack)).collect();
    let sites = sites?;
    let total_length = stack.total_length();
    let mut omega_col = Vec::with_capacity(grid.len());
    let mut rate_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); dipoles.len()];
    for &w in grid {
        // One field and one mode density serve every dipole at this
        // frequency.
        let density = dom::dom(stack, route, w)?;
        let field = StackField::new(stack, w)?;
        omega_col.push(w);
        for (col, site) in rate_cols.iter_mut().zip(&sites) {
            let p = density.rho * field.normalized_intensity(site.position)?;
            col.push(p * site.index * total_length);
        }
    }
    let mut meta = meta.note("route", route.label());
    for (named, site) in dipoles.iter().zip(&sites) {
        meta = meta.note(
            format!("dipole_{}", sanitize(&named.label)),
            format!(
                "cell {} layer {} position {} (x = {}, n = {})",
                named.dipole.cell, named.dipole.layer, named.dipole.position, site.position, site.index
            ),
        );
    }
    let mut columns = vec![Column::new("omega_rel", omega_col)];
    for (named, values) in dipoles.iter().zip(rate_cols) {
        columns.push(Column::new(
            format!("p_rel_{}", sanitize(&named.label)),
            values,
        ));
    }
    SweepOutput::new(meta, columns)
}
