use alloc::vec;
use alloc::vec::Vec;

use super::{laplacian_into, solve_tridiagonal, Domain, GridField, Spectral};
use crate::{Error, Result};

/// Relative residual tolerance for the implicit diffusion solves.
pub const DEFAULT_TOL_LIN: f64 = 1e-12;

/// Direct solver for `(s·I − a·Δ_h) x = rhs` with `s > 0`, `a ≥ 0`.
///
/// 1D uses tridiagonal elimination; 2D diagonalises `Δ_h` in the cosine
/// basis. Either way the cell mean of `x` equals `mean(rhs)/s`.
#[derive(Debug, Clone)]
pub struct Helmholtz {
    domain: Domain,
    spectral: Option<Spectral>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
    residual: Vec<f64>,
}

impl Helmholtz {
    pub fn new(domain: Domain) -> Self {
        let n = domain.cells(0);
        Self {
            domain,
            spectral: (domain.dims() == 2).then(|| Spectral::new(domain)),
            lower: vec![0.0; n - 1],
            diag: vec![0.0; n],
            upper: vec![0.0; n - 1],
            rhs: vec![0.0; n],
            residual: vec![0.0; domain.len()],
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn solve(&mut self, shift: f64, a: f64, rhs: &GridField, tol: f64) -> Result<GridField> {
        if *rhs.domain() != self.domain {
            return Err(Error::DomainMismatch);
        }
        if !(shift > 0.0 && a >= 0.0 && shift.is_finite() && a.is_finite()) {
            return Err(Error::InvalidParameters(alloc::format!(
                "helmholtz shift {shift}, coefficient {a}"
            )));
        }
        if a == 0.0 {
            return Ok(rhs.map(|v| v / shift));
        }
        let x = match &self.spectral {
            None => self.solve_1d(shift, a, rhs)?,
            Some(s) => {
                let mut coeffs = s.forward(rhs);
                for (k, c) in coeffs.iter_mut().enumerate() {
                    *c /= shift + a * s.eigenvalue(k);
                }
                s.inverse(&coeffs)
            }
        };
        self.check_residual(shift, a, rhs, &x, tol)?;
        Ok(x)
    }

    fn solve_1d(&mut self, shift: f64, a: f64, rhs: &GridField) -> Result<GridField> {
        let n = self.domain.cells(0);
        let h = self.domain.spacing(0);
        let off = -a / (h * h);
        self.lower.iter_mut().for_each(|l| *l = off);
        self.upper.iter_mut().for_each(|u| *u = off);
        for (i, d) in self.diag.iter_mut().enumerate() {
            let neighbours = usize::from(i > 0) + usize::from(i + 1 < n);
            *d = shift - off * neighbours as f64;
        }
        self.rhs.copy_from_slice(rhs.values());
        let mut x = vec![0.0; n];
        solve_tridiagonal(&self.lower, &mut self.diag, &self.upper, &mut self.rhs, &mut x)?;
        Ok(GridField::from_raw(self.domain, x))
    }

    fn check_residual(
        &mut self,
        shift: f64,
        a: f64,
        rhs: &GridField,
        x: &GridField,
        tol: f64,
    ) -> Result<()> {
        laplacian_into(x.values(), &self.domain, &mut self.residual);
        let mut worst = 0.0f64;
        for ((r, xv), b) in self.residual.iter().zip(x.values()).zip(rhs.values()) {
            let res = shift * xv - a * r - b;
            if !res.is_finite() {
                worst = f64::INFINITY;
                break;
            }
            worst = worst.max(res.abs());
        }
        let scale = rhs.max_abs();
        let allowed = tol * scale;
        if worst > allowed && worst > f64::MIN_POSITIVE {
            return Err(Error::LinearSolve {
                residual: worst,
                tolerance: allowed,
            });
        }
        Ok(())
    }
}

/// Solves `(I − aΔ_h) x = rhs` to [`DEFAULT_TOL_LIN`].
pub fn solve_helmholtz(a: f64, rhs: &GridField) -> Result<GridField> {
    Helmholtz::new(*rhs.domain()).solve(1.0, a, rhs, DEFAULT_TOL_LIN)
}
