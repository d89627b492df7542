//! The field quadruple, initial-data checks, norms and the equilibrium.


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::grid::{gradient_faces, Domain, GridField};
use crate::{Error, Field, PerField, Result};

/// `(u, v, w, z)` at one time, all on the same domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldQuad {
    pub u: GridField,
    pub v: GridField,
    pub w: GridField,
    pub z: GridField,
    pub time: f64,
}

impl FieldQuad {
    pub fn new(u: GridField, v: GridField, w: GridField, z: GridField) -> Result<Self> {
        let d = *u.domain();
        if *v.domain() != d || *w.domain() != d || *z.domain() != d {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            u,
            v,
            w,
            z,
            time: 0.0,
        })
    }

    /// Spatially constant data.
    pub fn constant(domain: Domain, u: f64, v: f64, w: f64, z: f64) -> Self {
        Self {
            u: GridField::constant(domain, u),
            v: GridField::constant(domain, v),
            w: GridField::constant(domain, w),
            z: GridField::constant(domain, z),
            time: 0.0,
        }
    }

    pub fn domain(&self) -> &Domain {
        self.u.domain()
    }

    pub fn field(&self, field: Field) -> &GridField {
        match field {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::W => &self.w,
            Field::Z => &self.z,
        }
    }

    /// Smallest value over all four fields.
    pub fn min_all(&self) -> f64 {
        Field::ALL
            .iter()
            .map(|&f| self.field(f).min())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of a successful initial-data check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    Regular,
    /// `u₀ ≡ 0`: the equilibrium is trivial and the decay-rate bounds say
    /// nothing.
    Degenerate,
}

/// Accepts nonnegative finite data; flags `u₀ ≡ 0` as degenerate.
pub fn validate_initial(q: &FieldQuad) -> Result<InitialData> {
    let d = *q.domain();
    for field in Field::ALL {
        let f = q.field(field);
        if *f.domain() != d {
            return Err(Error::DomainMismatch);
        }
        if let Some((index, &value)) = f
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidInitialData {
                field,
                index,
                value,
            });
        }
    }
    if q.u.values().iter().all(|&v| v == 0.0) {
        Ok(InitialData::Degenerate)
    } else {
        Ok(InitialData::Regular)
    }
}

/// Cell average `(Σ f_i |cell|) / |Ω|`.
pub fn mean(f: &GridField) -> f64 {
    f.integral() / f.domain().measure()
}

/// Discrete `L^p(Ω)` norm with midpoint weights; `p = ∞` gives the max.
pub fn lp_norm(f: &GridField, p: f64) -> Result<f64> {
    lp_norm_values(f.values(), f.domain().cell_volume(), p)
}

pub(crate) fn lp_norm_values(values: &[f64], cell_volume: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    // scaled by the max so large p cannot overflow
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    Ok(max * (sum * cell_volume).powf(1.0 / p))
}

/// `L^p` norm of the face gradient, via cell-averaged magnitudes.
pub fn grad_lp_norm(f: &GridField, p: f64) -> Result<f64> {
    lp_norm(&gradient_faces(f).cell_magnitude(), p)
}

/// `‖f‖_∞ + max_faces |∇_h f|`, the discrete `W^{1,∞}` proxy.
pub fn w1_inf_norm(f: &GridField) -> f64 {
    f.max_abs() + gradient_faces(f).max_abs()
}

/// The constant steady state `(ū₀, v̄₀ + w̄₀, 0, ū₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub u_star: f64,
    pub v_star: f64,
    pub w_star: f64,
    pub z_star: f64,
}

impl Equilibrium {
    pub fn value(&self, field: Field) -> f64 {
        match field {
            Field::U => self.u_star,
            Field::V => self.v_star,
            Field::W => self.w_star,
            Field::Z => self.z_star,
        }
    }

    pub fn as_quad(&self, domain: Domain) -> FieldQuad {
        FieldQuad::constant(domain, self.u_star, self.v_star, self.w_star, self.z_star)
    }
}

pub fn equilibrium_of(q0: &FieldQuad) -> Equilibrium {
    let ubar = mean(&q0.u);
    Equilibrium {
        u_star: ubar,
        v_star: mean(&q0.v) + mean(&q0.w),
        w_star: 0.0,
        z_star: ubar,
    }
}

/// Sup-norm distance of each field to its equilibrium value.
pub fn distance_to_equilibrium(q: &FieldQuad, e: &Equilibrium) -> PerField<f64> {
    PerField::from_fn(|field| {
        let target = e.value(field);
        q.field(field)
            .values()
            .iter()
            .fold(0.0, |m, v| m.max((v - target).abs()))
    })
}
