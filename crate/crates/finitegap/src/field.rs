//! Modal fields inside the stack: boundary-condition propagation, per-layer
//! field evaluation, stored energy, and energy normalization.
//!
//! The outermost boundary conditions are known exactly for a unit incident
//! wave: (1, r_N) on the left of the structure and (t_N, 0) on the right,
//! written as (right-mover, left-mover) amplitudes in the ambient medium.
//! Applying the unit-cell transfer matrix repeatedly propagates them to
//! every interior cell edge; within a cell the field is marched layer by
//! layer as an exact solution of E'' + k^2 E = 0.
//!
//! Every field here is the raw scattering solution for unit incident
//! amplitude. Normalized modes divide by the square root of the total
//! weighted energy U = integral of n^2 |E|^2 over the stack, making
//! integral n^2 |e|^2 dx = 1.

use num_complex::Complex64;

use crate::bloch;
use crate::cell::{ScatterAmplitudes, UnitCell};
use crate::error::{Error, Result};
use crate::stack::Stack;

/// Relative tolerance for placing an evaluation point inside the structure.
const POSITION_SLACK: f64 = 1e-9;

/// sin(z)/z, series-stable near zero.
fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

fn edge_field(v: &[Complex64; 2]) -> Complex64 {
    v[0] + v[1]
}

fn edge_derivative(v: &[Complex64; 2], k_ambient: f64) -> Complex64 {
    Complex64::new(0.0, k_ambient) * (v[0] - v[1])
}

/// Ambient-referenced wave amplitudes at the two edges of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryVectors {
    /// 1-based cell index within the stack.
    pub cell_index: usize,
    /// (right-mover, left-mover) at the cell's left edge.
    pub lambda: [Complex64; 2],
    /// (right-mover, left-mover) at the cell's right edge.
    pub rho: [Complex64; 2],
}

impl BoundaryVectors {
    /// Field value at the left edge, the sum of the two movers.
    pub fn left_field(&self) -> Complex64 {
        edge_field(&self.lambda)
    }

    /// Field value at the right edge.
    pub fn right_field(&self) -> Complex64 {
        edge_field(&self.rho)
    }

    /// Spatial derivative at the left edge, i k (forward - backward).
    pub fn left_derivative(&self, k_ambient: f64) -> Complex64 {
        edge_derivative(&self.lambda, k_ambient)
    }

    /// Spatial derivative at the right edge.
    pub fn right_derivative(&self, k_ambient: f64) -> Complex64 {
        edge_derivative(&self.rho, k_ambient)
    }
}

/// Edge amplitudes of cell `cell_index` (1-based), propagated inward from
/// the right boundary condition (t_N, 0) by Chebyshev matrix powers.
pub fn boundary_vectors(stack: &Stack, cell_index: usize, omega_rel: f64) -> Result<BoundaryVectors> {
    let n = stack.periods();
    if cell_index == 0 || cell_index > n {
        return Err(Error::CellOutOfRange {
            cell: cell_index,
            periods: n,
        });
    }
    let amps = stack.amplitudes(omega_rel)?;
    let unit = stack.unit_matrix(omega_rel)?;
    let x = stack.bloch(omega_rel)?.x;
    let outer = [amps.t, Complex64::ZERO];
    let rho = bloch::matrix_power(&unit, x, n - cell_index)?.apply(outer);
    let lambda = bloch::matrix_power(&unit, x, n - cell_index + 1)?.apply(outer);
    Ok(BoundaryVectors {
        cell_index,
        lambda,
        rho,
    })
}

/// Field inside one homogeneous layer, as the value and slope at its left
/// edge. E(xi) = value cos(k xi) + slope xi sinc(k xi) solves the wave
/// equation exactly for those initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerField {
    pub index: f64,
    pub length: f64,
    pub wavenumber: f64,
    pub value: Complex64,
    pub slope: Complex64,
}

impl LayerField {
    /// Field at local coordinate xi in [0, length].
    pub fn eval(&self, xi: f64) -> Complex64 {
        let kx = self.wavenumber * xi;
        self.value * kx.cos() + self.slope * xi * sinc(kx)
    }

    /// Spatial derivative at local coordinate xi.
    pub fn eval_derivative(&self, xi: f64) -> Complex64 {
        let kx = self.wavenumber * xi;
        -self.value * self.wavenumber * kx.sin() + self.slope * kx.cos()
    }

    /// Value and slope at the right edge, continuing into the next layer.
    fn end_state(&self) -> (Complex64, Complex64) {
        (self.eval(self.length), self.eval_derivative(self.length))
    }

    /// Weighted energy integral n^2 |E|^2 over the layer, in closed form.
    pub fn energy(&self) -> f64 {
        let k = self.wavenumber;
        let l = self.length;
        let a = self.value;
        let b = self.slope / k;
        let asq = a.norm_sqr();
        let bsq = b.norm_sqr();
        let cross = (a * b.conj()).re;
        let integral = 0.5 * (asq + bsq) * l
            + 0.25 * (asq - bsq) * (2.0 * k * l).sin() / k
            + cross * (k * l).sin().powi(2) / k;
        self.index * self.index * integral
    }
}

/// Field across one cell: contiguous layer fields plus the edge vectors
/// they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub cell_index: usize,
    pub layers: Vec<LayerField>,
    /// Local left coordinates of each layer within the cell.
    starts: Vec<f64>,
    pub length: f64,
    /// Relative mismatch between the marched right-edge state and the
    /// transfer-matrix right-edge state; a propagation self-check.
    pub propagation_defect: f64,
}

impl CellField {
    fn build(cell: &UnitCell, omega: f64, bv: &BoundaryVectors) -> CellField {
        let k_ambient = cell.ambient_index() * omega;
        let mut value = bv.left_field();
        let mut slope = bv.left_derivative(k_ambient);
        let mut layers = Vec::with_capacity(cell.layers().len());
        let mut starts = Vec::with_capacity(cell.layers().len());
        let mut offset = 0.0;
        for layer in cell.layers() {
            let field = LayerField {
                index: layer.index,
                length: layer.thickness,
                wavenumber: layer.wavenumber(omega),
                value,
                slope,
            };
            (value, slope) = field.end_state();
            starts.push(offset);
            offset += layer.thickness;
            layers.push(field);
        }
        // Slopes are compared in field units (divided by k) so both defect
        // components carry the same scale.
        let expect_value = bv.right_field();
        let expect_slope = bv.right_derivative(k_ambient);
        let scale = expect_value
            .norm()
            .max(expect_slope.norm() / k_ambient)
            .max(1e-300);
        let defect = (value - expect_value)
            .norm()
            .max((slope - expect_slope).norm() / k_ambient)
            / scale;
        CellField {
            cell_index: bv.cell_index,
            layers,
            starts,
            length: offset,
            propagation_defect: defect,
        }
    }

    fn locate(&self, x_local: f64) -> Result<(usize, f64)> {
        let slack = POSITION_SLACK * self.length;
        if !(x_local >= -slack && x_local <= self.length + slack) {
            return Err(Error::Domain(format!(
                "position {x_local} outside cell of length {}",
                self.length
            )));
        }
        let x = x_local.clamp(0.0, self.length);
        let mut i = match self.starts.binary_search_by(|s| s.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        i = i.min(self.layers.len() - 1);
        Ok((i, x - self.starts[i]))
    }

    /// Field at cell-local coordinate x in [0, length].
    pub fn eval(&self, x_local: f64) -> Result<Complex64> {
        let (i, xi) = self.locate(x_local)?;
        Ok(self.layers[i].eval(xi))
    }

    /// Spatial derivative at cell-local coordinate x.
    pub fn eval_derivative(&self, x_local: f64) -> Result<Complex64> {
        let (i, xi) = self.locate(x_local)?;
        Ok(self.layers[i].eval_derivative(xi))
    }

    /// Refractive index at cell-local coordinate x.
    pub fn index_at(&self, x_local: f64) -> Result<f64> {
        let (i, _) = self.locate(x_local)?;
        Ok(self.layers[i].index)
    }

    /// Weighted energy integral over the cell.
    pub fn energy(&self) -> f64 {
        self.layers.iter().map(LayerField::energy).sum()
    }
}

/// Per-cell and total weighted energy of the stack.
#[derive(Debug, Clone, PartialEq)]
pub struct StackEnergy {
    pub per_cell: Vec<f64>,
    pub total: f64,
}

/// The complete scattering field of the stack at one frequency, for unit
/// incident amplitude from the left.
#[derive(Debug, Clone, PartialEq)]
pub struct StackField {
    pub omega_rel: f64,
    pub omega: f64,
    /// Full-stack amplitudes (t_N, r_N) the field was anchored to.
    pub amplitudes: ScatterAmplitudes,
    pub cells: Vec<CellField>,
    /// Mismatch between the left boundary vector marched from the right
    /// edge and the exact (1, r_N).
    pub boundary_defect: f64,
    cell_length: f64,
    total_energy: f64,
}

impl StackField {
    pub fn new(stack: &Stack, omega_rel: f64) -> Result<StackField> {
        let omega = stack.omega(omega_rel);
        let n = stack.periods();
        let amps = stack.amplitudes(omega_rel)?;
        let unit = stack.unit_matrix(omega_rel)?;

        // March the right boundary condition (t_N, 0) leftward; in a gap
        // this is the growing direction, so the march is stable.
        let mut edges = vec![[Complex64::ZERO; 2]; n + 1];
        edges[n] = [amps.t, Complex64::ZERO];
        for i in (0..n).rev() {
            edges[i] = unit.apply(edges[i + 1]);
        }
        let boundary_defect = (edges[0][0] - Complex64::ONE)
            .norm()
            .max((edges[0][1] - amps.r).norm());

        let cells: Vec<CellField> = (1..=n)
            .map(|i| {
                let bv = BoundaryVectors {
                    cell_index: i,
                    lambda: edges[i - 1],
                    rho: edges[i],
                };
                CellField::build(stack.cell(), omega, &bv)
            })
            .collect();
        let total_energy: f64 = cells.iter().map(CellField::energy).sum();
        if !total_energy.is_finite() || !(total_energy > 0.0) {
            return Err(Error::NonFinite {
                quantity: "stack energy".to_string(),
                omega_rel,
                route: "field".to_string(),
            });
        }
        Ok(StackField {
            omega_rel,
            omega,
            amplitudes: amps,
            cells,
            boundary_defect,
            cell_length: stack.cell().total_length(),
            total_energy,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.cell_length * self.cells.len() as f64
    }

    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        let total = self.total_length();
        let slack = POSITION_SLACK * total;
        if !(x >= -slack && x <= total + slack) {
            return Err(Error::Domain(format!(
                "position {x} outside stack of length {total}"
            )));
        }
        let x = x.clamp(0.0, total);
        let i = ((x / self.cell_length) as usize).min(self.cells.len() - 1);
        Ok((i, x - i as f64 * self.cell_length))
    }

    /// Field at global coordinate x in [0, N d].
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let (i, local) = self.locate(x)?;
        self.cells[i].eval(local)
    }

    /// Spatial derivative at global coordinate x.
    pub fn eval_derivative(&self, x: f64) -> Result<Complex64> {
        let (i, local) = self.locate(x)?;
        self.cells[i].eval_derivative(local)
    }

    /// Refractive index at global coordinate x.
    pub fn index_at(&self, x: f64) -> Result<f64> {
        let (i, local) = self.locate(x)?;
        self.cells[i].index_at(local)
    }

    /// Per-cell energies and their sum.
    pub fn energy(&self) -> StackEnergy {
        let per_cell: Vec<f64> = self.cells.iter().map(CellField::energy).collect();
        StackEnergy {
            total: per_cell.iter().sum(),
            per_cell,
        }
    }

    /// Total weighted energy U = integral n^2 |E|^2 over the stack.
    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// Energy-normalized modal intensity |e(x)|^2 = |E(x)|^2 / U, satisfying
    /// integral n^2 |e|^2 dx = 1.
    pub fn normalized_intensity(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.norm_sqr() / self.total_energy)
    }
}

/// Solves E(x) = A f(x) + B g(x) from the field values at the two cell
/// edges: A f(0) + B g(0) = left, A f(L) + B g(L) = right.
///
/// The basis must keep the edge determinant away from zero; (cos kx, sin kx)
/// degenerates whenever k L is a multiple of pi (a half-wave cell), and as
/// k -> 0 the (1, x) basis is the stable choice.
pub fn cell_coefficients_general(
    left: Complex64,
    right: Complex64,
    f: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    length: f64,
) -> Result<(Complex64, Complex64)> {
    let f0 = f(0.0);
    let fl = f(length);
    let g0 = g(0.0);
    let gl = g(length);
    let det = f0 * gl - g0 * fl;
    let scale = (f0.norm() * gl.norm()).max(g0.norm() * fl.norm()).max(1e-300);
    if det.norm() < 1e-12 * scale {
        return Err(Error::DegenerateBasis(det.norm()));
    }
    let a = (left * gl - g0 * right) / det;
    let b = (f0 * right - left * fl) / det;
    Ok((a, b))
}

/// Closed-form field of one cell of a quarter-wave stack.
///
/// In layer 1, E = A cos(k1 xi) + B sin(k1 xi) with xi measured from the
/// cell's left edge; in layer 2, E = C cos(k2 eta) + D sin(k2 eta) with eta
/// measured from the internal interface. k1 a = k2 b = pi omega_rel / 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QwCellField {
    pub cell_index: usize,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub k1: f64,
    pub k2: f64,
    /// Thickness of layer 1 (the internal interface position).
    pub split: f64,
    pub length: f64,
}

impl QwCellField {
    /// Field at cell-local coordinate x in [0, length].
    pub fn eval(&self, x_local: f64) -> Complex64 {
        if x_local < self.split {
            let kx = self.k1 * x_local;
            self.a * kx.cos() + self.b * kx.sin()
        } else {
            let kx = self.k2 * (x_local - self.split);
            self.c * kx.cos() + self.d * kx.sin()
        }
    }

    /// Spatial derivative at cell-local coordinate x.
    pub fn eval_derivative(&self, x_local: f64) -> Complex64 {
        if x_local < self.split {
            let kx = self.k1 * x_local;
            (-self.a * kx.sin() + self.b * kx.cos()) * self.k1
        } else {
            let kx = self.k2 * (x_local - self.split);
            (-self.c * kx.sin() + self.d * kx.cos()) * self.k2
        }
    }
}

/// Cell field coefficients of a quarter-wave stack, entirely from the
/// analytic chain: Chebyshev boundary vectors, then interface continuity.
///
/// A is the left-edge field value and B its scaled derivative; the pair
/// (C, D) follows from continuity of E and E' at the internal interface:
///
/// ```text
/// C = A cos(k1 a) + B sin(k1 a)
/// D = (n1/n2) (B cos(k1 a) - A sin(k1 a))
/// ```
pub fn qw_cell_field(stack: &Stack, cell_index: usize, omega_rel: f64) -> Result<QwCellField> {
    if !stack.cell().is_quarter_wave() {
        return Err(Error::Domain(
            "closed-form cell fields need a quarter-wave bilayer cell".to_string(),
        ));
    }
    let bv = boundary_vectors(stack, cell_index, omega_rel)?;
    let omega = stack.omega(omega_rel);
    let layer1 = stack.cell().layers()[0];
    let layer2 = stack.cell().layers()[1];
    let k1 = layer1.wavenumber(omega);
    let k2 = layer2.wavenumber(omega);
    let k_ambient = stack.cell().ambient_index() * omega;

    let a = bv.left_field();
    // B k1 is the left-edge derivative; the ambient medium matches layer 1,
    // so the ratio k_ambient/k1 is 1 up to the cell tolerance.
    let b = Complex64::i() * (bv.lambda[0] - bv.lambda[1]) * (k_ambient / k1);
    let phase = k1 * layer1.thickness;
    let c = a * phase.cos() + b * phase.sin();
    let d = (k1 / k2) * (b * phase.cos() - a * phase.sin());
    if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(Error::NonFinite {
            quantity: "cell field coefficients".to_string(),
            omega_rel,
            route: "qw".to_string(),
        });
    }
    Ok(QwCellField {
        cell_index,
        a,
        b,
        c,
        d,
        k1,
        k2,
        split: layer1.thickness,
        length: stack.cell().total_length(),
    })
}
