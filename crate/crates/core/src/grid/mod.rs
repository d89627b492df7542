//! Rectangular cell-centred grids with homogeneous Neumann boundaries.
//!
//! Cells are indexed `i + nx * j` (x fastest). Boundary conditions use
//! mirrored ghost cells, so the discrete Laplacian has zero column sums and
//! the cosine modes `cos(kπ(i + ½)/N)` are its exact eigenvectors.

mod cosine;
mod helmholtz;
mod tridiag;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::{Error, Result};

pub use cosine::{CosineBasis, Spectral};
pub use helmholtz::{solve_helmholtz, Helmholtz, DEFAULT_TOL_LIN};
pub use tridiag::solve_tridiagonal;

/// Smallest admissible cell count per axis.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    dims: usize,
    lengths: [f64; 2],
    cells: [usize; 2],
}

impl Domain {
    pub fn new(lengths: &[f64], cells: &[usize]) -> Result<Self> {
        if lengths.len() != cells.len() {
            return Err(Error::InvalidDomain(format!(
                "{} lengths but {} cell counts",
                lengths.len(),
                cells.len()
            )));
        }
        let dims = lengths.len();
        if !(1..=2).contains(&dims) {
            return Err(Error::InvalidDomain(format!("dimension {dims} not in {{1, 2}}")));
        }
        for axis in 0..dims {
            let l = lengths[axis];
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidDomain(format!("length {l} on axis {axis}")));
            }
            if cells[axis] < MIN_CELLS {
                return Err(Error::InvalidDomain(format!(
                    "{} cells on axis {axis} (minimum {MIN_CELLS})",
                    cells[axis]
                )));
            }
        }
        let mut d = Domain {
            dims,
            lengths: [1.0, 1.0],
            cells: [1, 1],
        };
        d.lengths[..dims].copy_from_slice(lengths);
        d.cells[..dims].copy_from_slice(cells);
        Ok(d)
    }

    pub fn interval(length: f64, cells: usize) -> Result<Self> {
        Self::new(&[length], &[cells])
    }

    pub fn rectangle(lengths: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        Self::new(&lengths, &cells)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Cell count along `axis`; 1 for the inactive axis of a 1D domain.
    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// |Ω|, the product of the active lengths.
    pub fn measure(&self) -> f64 {
        self.lengths[..self.dims].iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims).map(|a| self.spacing(a)).product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    /// `(i, j)` of a linear cell index.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.cells[0], index / self.cells[0])
    }

    /// Cell-centre position; the second component is 0 in 1D.
    pub fn center(&self, index: usize) -> [f64; 2] {
        let (i, j) = self.coords(index);
        let x = (i as f64 + 0.5) * self.spacing(0);
        let y = if self.dims == 2 {
            (j as f64 + 0.5) * self.spacing(1)
        } else {
            0.0
        };
        [x, y]
    }

    /// Eigenvalue of `−Δ_h` for the `k`-th cosine mode along `axis`.
    pub fn axis_eigenvalue(&self, axis: usize, k: usize) -> f64 {
        let h = self.spacing(axis);
        let n = self.cells[axis] as f64;
        (2.0 / (h * h)) * (1.0 - (k as f64 * PI / n).cos())
    }

    /// First nonzero Neumann eigenvalue of `−Δ` on the continuum rectangle.
    pub fn lambda1_analytic(&self) -> f64 {
        (0..self.dims)
            .map(|a| {
                let r = PI / self.lengths[a];
                r * r
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// First nonzero eigenvalue of the cell-centred Neumann stencil.
    pub fn lambda1_discrete(&self) -> f64 {
        (0..self.dims)
            .map(|a| self.axis_eigenvalue(a, 1))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis with the smallest nonzero discrete eigenvalue.
    pub fn slowest_axis(&self) -> usize {
        (0..self.dims)
            .min_by(|&a, &b| {
                self.axis_eigenvalue(a, 1)
                    .total_cmp(&self.axis_eigenvalue(b, 1))
            })
            .unwrap_or(0)
    }
}

pub fn lambda1_analytic(domain: &Domain) -> f64 {
    domain.lambda1_analytic()
}

pub fn lambda1_discrete(domain: &Domain) -> f64 {
    domain.lambda1_discrete()
}

/// Cell-centred scalar field. All values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    domain: Domain,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(domain: Domain) -> Self {
        Self::constant(domain, 0.0)
    }

    /// # Panics
    /// If `c` is not finite.
    pub fn constant(domain: Domain, c: f64) -> Self {
        assert!(c.is_finite(), "constant field value must be finite");
        Self {
            domain,
            values: vec![c; domain.len()],
        }
    }

    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { domain, values })
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(domain: Domain, mut f: impl FnMut([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..domain.len()).map(|i| f(domain.center(i))).collect();
        Self::from_values(domain, values)
    }

    /// Samples of the `k`-th cosine mode `cos(kπx_a/L_a)` along `axis`.
    pub fn cosine_mode(domain: Domain, axis: usize, k: usize) -> Self {
        let l = domain.length(axis);
        let values = (0..domain.len())
            .map(|i| (k as f64 * PI * domain.center(i)[axis] / l).cos())
            .collect();
        Self { domain, values }
    }

    /// Unchecked constructor for internal arithmetic.
    pub(crate) fn from_raw(domain: Domain, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        Self { domain, values }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f` by the midpoint rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_volume()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::from_raw(self.domain, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &GridField, b: f64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self::from_raw(self.domain, values))
    }

    /// Field with its mean subtracted.
    pub fn mean_removed(&self) -> Self {
        let m = self.values.iter().sum::<f64>() / self.len() as f64;
        self.map(|v| v - m)
    }
}

/// Face-centred vector field: one normal component per face.
///
/// The x component has `(nx + 1) · ny` entries indexed `i + (nx + 1) j`, the
/// y component (2D only) has `nx · (ny + 1)` entries indexed `i + nx j`.
/// Boundary faces carry the normal flux through ∂Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    domain: Domain,
    components: [Vec<f64>; 2],
}

impl FaceField {
    pub fn face_count(domain: &Domain, axis: usize) -> usize {
        if axis >= domain.dims() {
            return 0;
        }
        match axis {
            0 => (domain.cells(0) + 1) * domain.cells(1),
            _ => domain.cells(0) * (domain.cells(1) + 1),
        }
    }

    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            components: [
                vec![0.0; Self::face_count(&domain, 0)],
                vec![0.0; Self::face_count(&domain, 1)],
            ],
        }
    }

    pub fn from_components(domain: Domain, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        for (axis, c) in [&x, &y].into_iter().enumerate() {
            let expected = Self::face_count(&domain, axis);
            if c.len() != expected {
                return Err(Error::LengthMismatch {
                    expected,
                    got: c.len(),
                });
            }
            if let Some(index) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index });
            }
        }
        Ok(Self {
            domain,
            components: [x, y],
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub(crate) fn component_mut(&mut self, axis: usize) -> &mut [f64] {
        &mut self.components[axis]
    }

    /// Index of the face on the low side (`high = false`) or high side of a
    /// cell along `axis`.
    pub fn face_of_cell(domain: &Domain, axis: usize, i: usize, j: usize, high: bool) -> usize {
        let nx = domain.cells(0);
        match axis {
            0 => i + usize::from(high) + (nx + 1) * j,
            _ => i + nx * (j + usize::from(high)),
        }
    }

    /// Largest face value in magnitude over all axes.
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_axis(&self, axis: usize) -> f64 {
        self.components[axis].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean magnitude per cell of the face components averaged to the
    /// cell centre. Used for L^p norms of vector fields.
    pub fn cell_magnitude(&self) -> GridField {
        let d = self.domain;
        let (nx, ny) = (d.cells(0), d.cells(1));
        let mut out = vec![0.0; d.len()];
        for j in 0..ny {
            for i in 0..nx {
                let mut sq = 0.0;
                for axis in 0..d.dims() {
                    let lo = self.components[axis][Self::face_of_cell(&d, axis, i, j, false)];
                    let hi = self.components[axis][Self::face_of_cell(&d, axis, i, j, true)];
                    let c = 0.5 * (lo + hi);
                    sq += c * c;
                }
                out[d.index(i, j)] = sq.sqrt();
            }
        }
        GridField::from_raw(d, out)
    }
}

/// Second-order Neumann Laplacian with mirrored ghost cells.
pub fn apply_laplacian(f: &GridField) -> GridField {
    let d = *f.domain();
    let mut out = vec![0.0; d.len()];
    laplacian_into(f.values(), &d, &mut out);
    GridField::from_raw(d, out)
}

pub(crate) fn laplacian_into(f: &[f64], d: &Domain, out: &mut [f64]) {
    let (nx, ny) = (d.cells(0), d.cells(1));
    let ihx2 = 1.0 / (d.spacing(0) * d.spacing(0));
    let ihy2 = if d.dims() == 2 {
        1.0 / (d.spacing(1) * d.spacing(1))
    } else {
        0.0
    };
    for j in 0..ny {
        for i in 0..nx {
            let k = i + nx * j;
            let c = f[k];
            let mut acc = 0.0;
            if i > 0 {
                acc += (f[k - 1] - c) * ihx2;
            }
            if i + 1 < nx {
                acc += (f[k + 1] - c) * ihx2;
            }
            if d.dims() == 2 {
                if j > 0 {
                    acc += (f[k - nx] - c) * ihy2;
                }
                if j + 1 < ny {
                    acc += (f[k + nx] - c) * ihy2;
                }
            }
            out[k] = acc;
        }
    }
}

/// Face-normal differences `(f_{i+1} − f_i)/h`; zero on boundary faces.
pub fn gradient_faces(f: &GridField) -> FaceField {
    let d = *f.domain();
    let (nx, ny) = (d.cells(0), d.cells(1));
    let mut g = FaceField::zeros(d);
    let vals = f.values();
    let hx = d.spacing(0);
    {
        let gx = g.component_mut(0);
        for j in 0..ny {
            for i in 1..nx {
                gx[i + (nx + 1) * j] = (vals[i + nx * j] - vals[i - 1 + nx * j]) / hx;
            }
        }
    }
    if d.dims() == 2 {
        let hy = d.spacing(1);
        let gy = g.component_mut(1);
        for j in 1..ny {
            for i in 0..nx {
                gy[i + nx * j] = (vals[i + nx * j] - vals[i + nx * (j - 1)]) / hy;
            }
        }
    }
    g
}

/// Discrete divergence of a face field: net outflow per unit volume.
pub fn divergence(flux: &FaceField) -> GridField {
    let d = *flux.domain();
    let (nx, ny) = (d.cells(0), d.cells(1));
    let mut out = vec![0.0; d.len()];
    for axis in 0..d.dims() {
        let h = d.spacing(axis);
        let c = flux.component(axis);
        for j in 0..ny {
            for i in 0..nx {
                let lo = c[FaceField::face_of_cell(&d, axis, i, j, false)];
                let hi = c[FaceField::face_of_cell(&d, axis, i, j, true)];
                out[i + nx * j] += (hi - lo) / h;
            }
        }
    }
    GridField::from_raw(d, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize) -> Domain {
        Domain::interval(PI, n).unwrap()
    }

    #[test]
    fn lambda1_analytic_examples() {
        assert!((interval(8).lambda1_analytic() - 1.0).abs() < 1e-15);
        let d = Domain::interval(2.0 * PI, 8).unwrap();
        assert!((d.lambda1_analytic() - 0.25).abs() < 1e-15);
        let r = Domain::rectangle([PI, PI / 2.0], [8, 8]).unwrap();
        assert!((r.lambda1_analytic() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Domain::interval(PI, 3).is_err());
        assert!(Domain::interval(-1.0, 8).is_err());
        assert!(Domain::interval(f64::NAN, 8).is_err());
        assert!(Domain::new(&[1.0, 1.0, 1.0], &[4, 4, 4]).is_err());
        assert!(Domain::new(&[1.0], &[4, 4]).is_err());
    }

    #[test]
    fn measure_and_volume() {
        let r = Domain::rectangle([2.0, 3.0], [4, 6]).unwrap();
        assert_eq!(r.measure(), 6.0);
        assert_eq!(r.len(), 24);
        assert!((r.cell_volume() * 24.0 - 6.0).abs() < 1e-14);
    }

    #[test]
    fn constant_is_annihilated() {
        let r = Domain::rectangle([1.0, 2.0], [5, 7]).unwrap();
        let lap = apply_laplacian(&GridField::constant(r, 3.25));
        assert!(lap.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_linear_data() {
        let d = Domain::interval(2.0, 8).unwrap();
        let f = GridField::from_fn(d, |x| x[0]).unwrap();
        let g = gradient_faces(&f);
        let gx = g.component(0);
        assert_eq!(gx[0], 0.0);
        assert_eq!(gx[8], 0.0);
        for v in &gx[1..8] {
            assert!((v - 1.0).abs() < 1e-13);
        }
        assert!(g.component(1).is_empty());
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let r = Domain::rectangle([1.0, 2.0], [6, 5]).unwrap();
        let f = GridField::from_fn(r, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let a = apply_laplacian(&f);
        let b = divergence(&gradient_faces(&f));
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn slowest_axis_is_longest() {
        let r = Domain::rectangle([PI / 2.0, PI], [8, 8]).unwrap();
        assert_eq!(r.slowest_axis(), 1);
    }
}
