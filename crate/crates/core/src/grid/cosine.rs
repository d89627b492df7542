use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::{Domain, GridField};

/// Orthonormal eigenbasis of the 1D cell-centred Neumann stencil.
///
/// Row `k` of the matrix holds `c_k cos(kπ(i + ½)/N)` with `c_0 = √(1/N)`
/// and `c_k = √(2/N)` otherwise.
#[derive(Debug, Clone)]
pub struct CosineBasis {
    n: usize,
    matrix: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl CosineBasis {
    pub fn new(domain: &Domain, axis: usize) -> Self {
        let n = domain.cells(axis);
        let mut matrix = vec![0.0; n * n];
        let c0 = (1.0 / n as f64).sqrt();
        let ck = (2.0 / n as f64).sqrt();
        for k in 0..n {
            let c = if k == 0 { c0 } else { ck };
            for i in 0..n {
                matrix[k * n + i] = c * (k as f64 * PI * (i as f64 + 0.5) / n as f64).cos();
            }
        }
        let eigenvalues = (0..n).map(|k| domain.axis_eigenvalue(axis, k)).collect();
        Self {
            n,
            matrix,
            eigenvalues,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Eigenvalue of `−Δ_h` for mode `k`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn forward(&self, input: &[f64], out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.n) {
            let row = &self.matrix[k * self.n..(k + 1) * self.n];
            *o = row.iter().zip(input).map(|(a, b)| a * b).sum();
        }
    }

    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        out[..self.n].iter_mut().for_each(|o| *o = 0.0);
        for (k, &c) in coeffs.iter().enumerate().take(self.n) {
            if c == 0.0 {
                continue;
            }
            let row = &self.matrix[k * self.n..(k + 1) * self.n];
            for (o, a) in out.iter_mut().zip(row) {
                *o += c * a;
            }
        }
    }
}

/// Tensor-product cosine transform over a whole domain.
#[derive(Debug, Clone)]
pub struct Spectral {
    domain: Domain,
    bases: Vec<CosineBasis>,
}

impl Spectral {
    pub fn new(domain: Domain) -> Self {
        let bases = (0..domain.dims())
            .map(|a| CosineBasis::new(&domain, a))
            .collect();
        Self { domain, bases }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Eigenvalue of `−Δ_h` for the mode stored at linear index `index`.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (kx, ky) = self.domain.coords(index);
        let mut mu = self.bases[0].eigenvalue(kx);
        if self.domain.dims() == 2 {
            mu += self.bases[1].eigenvalue(ky);
        }
        mu
    }

    /// Mode coefficients, laid out like the field (`kx + nx ky`).
    pub fn forward(&self, f: &GridField) -> Vec<f64> {
        self.transform(f.values(), true)
    }

    pub fn inverse(&self, coeffs: &[f64]) -> GridField {
        GridField::from_raw(self.domain, self.transform(coeffs, false))
    }

    fn transform(&self, input: &[f64], forward: bool) -> Vec<f64> {
        let (nx, ny) = (self.domain.cells(0), self.domain.cells(1));
        let mut data = input.to_vec();
        let mut tmp = vec![0.0; nx.max(ny)];
        for j in 0..ny {
            let row = &mut data[j * nx..(j + 1) * nx];
            if forward {
                self.bases[0].forward(row, &mut tmp);
            } else {
                self.bases[0].inverse(row, &mut tmp);
            }
            row.copy_from_slice(&tmp[..nx]);
        }
        if self.domain.dims() == 2 {
            let mut line = vec![0.0; ny];
            for i in 0..nx {
                for j in 0..ny {
                    line[j] = data[i + nx * j];
                }
                if forward {
                    self.bases[1].forward(&line, &mut tmp);
                } else {
                    self.bases[1].inverse(&line, &mut tmp);
                }
                for j in 0..ny {
                    data[i + nx * j] = tmp[j];
                }
            }
        }
        data
    }
}
