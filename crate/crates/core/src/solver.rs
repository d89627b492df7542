//! IMEX time integration of the chemotaxis system.
//!
//! One step of size `dt` from `(uⁿ, vⁿ, wⁿ, zⁿ)`:
//!
//! * `u`: donor-cell chemotactic flux `F = u_donor ∂v/∂x` at interior faces
//!   (boundary faces carry no flux), taken explicitly; diffusion implicit:
//!   `(I − dtΔ_h) uⁿ⁺¹ = uⁿ − dt div_h F`.
//! * `w`: exact exponential update `wⁿ⁺¹ = wⁿ exp(−dt zⁿ)`.
//! * `v`: `(I − dtΔ_h) vⁿ⁺¹ = vⁿ + (wⁿ − wⁿ⁺¹)`, so the mass `w` loses is
//!   exactly the mass `v` gains.
//! * `z`: `((1 + dt)I − dtΔ_h) zⁿ⁺¹ = zⁿ + dt uⁿ`.
//!
//! The implicit operators are M-matrices, so with the advective CFL limit
//! every field stays nonnegative.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::grid::{divergence, gradient_faces, Domain, FaceField, GridField, Helmholtz};
use crate::rates::TimeSeries;
use crate::state::{
    distance_to_equilibrium, equilibrium_of, lp_norm, validate_initial, w1_inf_norm, Equilibrium,
    FieldQuad, InitialData,
};
use crate::{Error, PerField, Result};

/// Keeps the advective time-step candidate finite when `∇v ≡ 0`.
pub const GRADIENT_FLOOR: f64 = 1e-14;

/// Values this far below zero (relative to the field's max) are rounding
/// noise from the spectral 2D solve and are reset to 0.
const NEGATIVE_ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t_end: f64,
    pub dt_max: f64,
    /// Fraction of the advective positivity limit, in (0, 1].
    pub cfl_safety: f64,
    pub tol_lin: f64,
    /// Diagnostic cadence in time units.
    pub sample_every: f64,
    /// Blow-up cap on `‖u‖_∞ + ‖v‖_{W^{1,∞}} + ‖z‖_∞`, in units of ū₀.
    pub blowup_threshold: f64,
    /// ε of the `L^{n/4+ε}` boundedness monitor.
    pub criterion_epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt_max: 1e-3,
            cfl_safety: 0.9,
            tol_lin: crate::grid::DEFAULT_TOL_LIN,
            sample_every: 0.05,
            blowup_threshold: 1e6,
            criterion_epsilon: 0.75,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad("t_end must be positive");
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return bad("dt_max must be positive");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.tol_lin > 0.0 && self.tol_lin < 1.0) {
            return bad("tol_lin must lie in (0, 1)");
        }
        if !(self.sample_every.is_finite() && self.sample_every > 0.0) {
            return bad("sample_every must be positive");
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blowup_threshold must be positive");
        }
        if !(self.criterion_epsilon.is_finite() && self.criterion_epsilon > 0.0) {
            return bad("criterion_epsilon must be positive");
        }
        if self.criterion_exponent(domain) < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "n/4 + epsilon = {} < 1 is not a norm exponent",
                self.criterion_exponent(domain)
            )));
        }
        Ok(())
    }

    /// `n/4 + ε`.
    pub fn criterion_exponent(&self, domain: &Domain) -> f64 {
        domain.dims() as f64 / 4.0 + self.criterion_epsilon
    }

    fn blowup_cap(&self, ubar0: f64) -> f64 {
        if ubar0 > 0.0 {
            self.blowup_threshold * ubar0
        } else {
            self.blowup_threshold
        }
    }
}

/// Everything recorded at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    /// Sup-distances to the equilibrium.
    pub dist: PerField<f64>,
    pub mass_u: f64,
    pub mass_vw: f64,
    pub min_all: f64,
    pub u_inf: f64,
    pub w_inf: f64,
    /// `‖u‖_{L^{n/4+ε}}`.
    pub criterion_norm: f64,
    pub v_w1_inf: f64,
    pub z_inf: f64,
    pub blown_up: bool,
    /// `ū₀/2 ≤ u, z ≤ 3ū₀/2` everywhere.
    pub t0_reached: bool,
}

/// Largest stable step for the explicit donor-cell flux, capped by `dt_max`.
pub fn cfl_dt(q: &FieldQuad, cfg: &SolverConfig) -> f64 {
    let g = gradient_faces(&q.v);
    advective_dt(&g, q.domain(), cfg)
}

fn advective_dt(grad_v: &FaceField, d: &Domain, cfg: &SolverConfig) -> f64 {
    let rate: f64 = (0..d.dims())
        .map(|a| (2.0 * grad_v.max_abs_axis(a) + GRADIENT_FLOOR) / d.spacing(a))
        .sum();
    cfg.dt_max.min(cfg.cfl_safety / rate)
}

/// Step size used by [`run`]: the CFL limit and `0.5 / max z`.
pub fn step_size(q: &FieldQuad, cfg: &SolverConfig) -> f64 {
    let dt = cfl_dt(q, cfg);
    let zmax = q.z.max();
    if zmax > 0.0 {
        dt.min(0.5 / zmax)
    } else {
        dt
    }
}

/// Donor-cell chemotactic flux `u_donor · ∂v/∂n` on interior faces.
pub fn chemotactic_flux(u: &GridField, grad_v: &FaceField) -> FaceField {
    let d = *u.domain();
    let (nx, ny) = (d.cells(0), d.cells(1));
    let uv = u.values();
    let mut flux = FaceField::zeros(d);
    for axis in 0..d.dims() {
        let g = grad_v.component(axis);
        let mut out = alloc::vec![0.0; g.len()];
        for j in 0..ny {
            for i in 0..nx {
                // the face on the high side of cell (i, j), if interior
                let interior = match axis {
                    0 => i + 1 < nx,
                    _ => j + 1 < ny,
                };
                if !interior {
                    continue;
                }
                let f = FaceField::face_of_cell(&d, axis, i, j, true);
                let lower = uv[d.index(i, j)];
                let upper = match axis {
                    0 => uv[d.index(i + 1, j)],
                    _ => uv[d.index(i, j + 1)],
                };
                let gf = g[f];
                // mass moves up the v-gradient, out of the donor cell
                out[f] = if gf > 0.0 {
                    lower * gf
                } else if gf < 0.0 {
                    upper * gf
                } else {
                    0.0
                };
            }
        }
        flux.component_mut(axis).copy_from_slice(&out);
    }
    flux
}

/// Reusable IMEX stepper; owns the linear-solver workspace.
#[derive(Debug, Clone)]
pub struct Stepper {
    helmholtz: Helmholtz,
    tol_lin: f64,
}

impl Stepper {
    pub fn new(domain: Domain, tol_lin: f64) -> Self {
        Self {
            helmholtz: Helmholtz::new(domain),
            tol_lin,
        }
    }

    pub fn step(&mut self, q: &FieldQuad, dt: f64) -> Result<FieldQuad> {
        if *q.domain() != *self.helmholtz.domain() {
            return Err(Error::DomainMismatch);
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameters(format!("time step {dt}")));
        }
        let fail = |reason: alloc::string::String| Error::NumericalFailure {
            time: q.time,
            reason,
            last_good: Box::new(q.clone()),
        };
        let wrap = |e: Error| match e {
            Error::LinearSolve { .. } => e,
            other => fail(other.to_string()),
        };

        let grad_v = gradient_faces(&q.v);
        let flux = chemotactic_flux(&q.u, &grad_v);
        let u_explicit = q.u.combine(1.0, &divergence(&flux), -dt).map_err(wrap)?;
        let mut u = self
            .helmholtz
            .solve(1.0, dt, &u_explicit, self.tol_lin)
            .map_err(wrap)?;

        let w_vals: Vec<f64> = q
            .w
            .values()
            .iter()
            .zip(q.z.values())
            .map(|(w, z)| w * (-dt * z).exp())
            .collect();
        let w = GridField::from_raw(*q.domain(), w_vals);
        let released = q.w.combine(1.0, &w, -1.0).map_err(wrap)?;
        let v_rhs = q.v.combine(1.0, &released, 1.0).map_err(wrap)?;
        let mut v = self
            .helmholtz
            .solve(1.0, dt, &v_rhs, self.tol_lin)
            .map_err(wrap)?;

        let z_rhs = q.z.combine(1.0, &q.u, dt).map_err(wrap)?;
        let mut z = self
            .helmholtz
            .solve(1.0 + dt, dt, &z_rhs, self.tol_lin)
            .map_err(wrap)?;

        for (name, f) in [("u", &mut u), ("v", &mut v), ("z", &mut z)] {
            if !f.is_finite() {
                return Err(fail(format!("non-finite {name}")));
            }
            clamp_rounding(f).map_err(|m| fail(format!("{name} lost positivity ({m:e})")))?;
        }
        if !w.is_finite() {
            return Err(fail("non-finite w".to_string()));
        }
        Ok(FieldQuad {
            u,
            v,
            w,
            z,
            time: q.time + dt,
        })
    }
}

fn clamp_rounding(f: &mut GridField) -> core::result::Result<(), f64> {
    let tiny = NEGATIVE_ROUNDING * f.max_abs();
    for v in f.values_mut() {
        if *v < 0.0 {
            if -*v > tiny {
                return Err(*v);
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// One IMEX step with the default linear-solve tolerance.
pub fn step(q: &FieldQuad, dt: f64) -> Result<FieldQuad> {
    Stepper::new(*q.domain(), crate::grid::DEFAULT_TOL_LIN).step(q, dt)
}

pub fn monitor(q: &FieldQuad, cfg: &SolverConfig, e: &Equilibrium) -> Result<Diagnostics> {
    let d = q.domain();
    let ubar = e.u_star;
    let u_inf = q.u.max_abs();
    let z_inf = q.z.max_abs();
    let v_w1_inf = w1_inf_norm(&q.v);
    let trapped = |f: &GridField| f.min() >= 0.5 * ubar && f.max() <= 1.5 * ubar;
    Ok(Diagnostics {
        time: q.time,
        dist: distance_to_equilibrium(q, e),
        mass_u: q.u.integral(),
        mass_vw: q.v.integral() + q.w.integral(),
        min_all: q.min_all(),
        u_inf,
        w_inf: q.w.max_abs(),
        criterion_norm: lp_norm(&q.u, cfg.criterion_exponent(d))?,
        v_w1_inf,
        z_inf,
        blown_up: u_inf + v_w1_inf + z_inf > cfg.blowup_cap(ubar),
        t0_reached: trapped(&q.u) && trapped(&q.z),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlownUp,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: FieldQuad,
    pub diagnostics: Vec<Diagnostics>,
    pub series: TimeSeries,
    pub equilibrium: Equilibrium,
    pub initial: InitialData,
    pub status: RunStatus,
    /// First sample time at which u and z are trapped in `[ū₀/2, 3ū₀/2]`.
    pub t0: Option<f64>,
    pub t0_state: Option<FieldQuad>,
    pub steps: usize,
}

/// Integrates from `q0` to `cfg.t_end`, sampling every `cfg.sample_every`.
///
/// Steps land exactly on sample times. A run that trips the blow-up cap
/// stops early and is returned with [`RunStatus::BlownUp`].
pub fn run(q0: &FieldQuad, cfg: &SolverConfig) -> Result<RunOutput> {
    let domain = *q0.domain();
    cfg.validate(&domain)?;
    let initial = validate_initial(q0)?;
    let e = equilibrium_of(q0);
    let cap = cfg.blowup_cap(e.u_star);
    let mut stepper = Stepper::new(domain, cfg.tol_lin);

    let start = q0.time;
    let end = start + cfg.t_end;
    let mut q = q0.clone();
    let mut diagnostics = Vec::new();
    let mut t0 = None;
    let mut t0_state = None;
    let mut blown = false;
    let mut steps = 0usize;

    let mut record = |q: &FieldQuad, diagnostics: &mut Vec<Diagnostics>, force_blown: bool| {
        let mut diag = monitor(q, cfg, &e)?;
        let prev = diagnostics.last();
        diag.blown_up |= force_blown || prev.is_some_and(|p| p.blown_up);
        diag.t0_reached |= prev.is_some_and(|p| p.t0_reached);
        if diag.t0_reached && t0.is_none() {
            t0 = Some(diag.time);
            t0_state = Some(q.clone());
        }
        let b = diag.blown_up;
        diagnostics.push(diag);
        Ok::<bool, Error>(b)
    };

    blown |= record(&q, &mut diagnostics, false)?;
    let mut sample = 0u64;
    while !blown && q.time < end {
        sample += 1;
        let target = (start + sample as f64 * cfg.sample_every).min(end);
        while q.time < target {
            let remaining = target - q.time;
            let dt_policy = step_size(&q, cfg);
            let n = (remaining / dt_policy * (1.0 - 1e-12)).ceil().max(1.0);
            let dt = remaining / n;
            let mut next = stepper.step(&q, dt)?;
            steps += 1;
            if n == 1.0 {
                next.time = target;
            }
            q = next;
            let size = q.u.max_abs() + w1_inf_norm(&q.v) + q.z.max_abs();
            if size > cap {
                blown = true;
                break;
            }
        }
        blown |= record(&q, &mut diagnostics, blown)?;
    }

    let series = TimeSeries::from_diagnostics(&diagnostics, t0);
    Ok(RunOutput {
        final_state: q,
        diagnostics,
        series,
        equilibrium: e,
        initial,
        status: if blown {
            RunStatus::BlownUp
        } else {
            RunStatus::Completed
        },
        t0,
        t0_state,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn interval() -> Domain {
        Domain::interval(PI, 32).unwrap()
    }

    #[test]
    fn cfl_without_gradient_is_dt_max() {
        let q = FieldQuad::constant(interval(), 1.0, 2.0, 0.3, 1.0);
        let cfg = SolverConfig::default();
        assert_eq!(cfl_dt(&q, &cfg), cfg.dt_max);
    }

    #[test]
    fn cfl_halves_when_gradient_doubles() {
        let d = interval();
        let cfg = SolverConfig {
            dt_max: 10.0,
            ..SolverConfig::default()
        };
        let mut q = FieldQuad::constant(d, 1.0, 1.0, 0.0, 1.0);
        q.v = GridField::from_fn(d, |x| 5.0 * x[0].cos()).unwrap();
        let dt1 = cfl_dt(&q, &cfg);
        q.v = q.v.scaled(2.0);
        let dt2 = cfl_dt(&q, &cfg);
        assert!(dt2 <= 0.5 * dt1 * (1.0 + 1e-12));
        assert!(dt1 <= cfg.dt_max);
    }

    #[test]
    fn flux_is_donor_cell() {
        let d = Domain::interval(4.0, 4).unwrap();
        let u = GridField::from_values(d, alloc::vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        // v increasing between cells 0,1 and decreasing between 2,3
        let v = GridField::from_values(d, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = chemotactic_flux(&u, &gradient_faces(&v));
        assert_eq!(f.component(0), &[0.0, 1.0, 0.0, -4.0, 0.0]);
    }

    #[test]
    fn monitor_flags() {
        let d = interval();
        let e = Equilibrium {
            u_star: 1.0,
            v_star: 1.0,
            w_star: 0.0,
            z_star: 1.0,
        };
        let cfg = SolverConfig::default();
        let diag = monitor(&e.as_quad(d), &cfg, &e).unwrap();
        assert_eq!(diag.dist, PerField::new(0.0, 0.0, 0.0, 0.0));
        assert!(diag.t0_reached);
        assert!(!diag.blown_up);
        // n = 1, eps = 0.75: L^1 norm
        assert!((diag.criterion_norm - PI).abs() < 1e-12);

        let mut q = e.as_quad(d);
        q.u = GridField::constant(d, 2.0 * cfg.blowup_threshold);
        let diag = monitor(&q, &cfg, &e).unwrap();
        assert!(diag.blown_up);
        assert!(!diag.t0_reached);
    }

    #[test]
    fn rejects_bad_config() {
        let d = interval();
        let mut cfg = SolverConfig::default();
        cfg.cfl_safety = 1.5;
        assert!(cfg.validate(&d).is_err());
        let mut cfg = SolverConfig::default();
        cfg.criterion_epsilon = 0.5;
        assert!(cfg.validate(&d).is_err());
        let d2 = Domain::rectangle([1.0, 1.0], [4, 4]).unwrap();
        assert!(cfg.validate(&d2).is_ok());
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let d = interval();
        let q = FieldQuad::constant(d, 1.5, 2.0, 0.0, 1.5);
        let next = step(&q, 1e-2).unwrap();
        for f in crate::Field::ALL {
            for (a, b) in next.field(f).values().iter().zip(q.field(f).values()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
        assert!((next.time - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn constant_data_one_step() {
        let d = interval();
        let (c, wbar, vbar, dt) = (1.3, 0.7, 0.2, 1e-2);
        let q = FieldQuad::constant(d, c, vbar, wbar, c);
        let next = step(&q, dt).unwrap();
        let w_exact = wbar * (-c * dt).exp();
        for i in 0..d.len() {
            assert!((next.u.values()[i] - c).abs() <= 1e-14);
            assert!((next.z.values()[i] - c).abs() <= 1e-14);
            assert!((next.w.values()[i] - w_exact).abs() <= 1e-15);
            assert!((next.v.values()[i] - (vbar + wbar - w_exact)).abs() <= 1e-14);
        }
    }

    #[test]
    fn step_failure_keeps_last_state() {
        let d = interval();
        let q = FieldQuad::constant(d, 1.0, 1.0, 0.0, 1.0);
        assert!(matches!(
            step(&q, -1.0),
            Err(Error::InvalidParameters(_))
        ));
        let mut stepper = Stepper::new(d, 1e-12);
        let mut bad = q.clone();
        bad.u = GridField::constant(d, f64::MAX);
        bad.v = GridField::from_fn(d, |x| 1e300 * x[0]).unwrap();
        match stepper.step(&bad, 1e-3) {
            Err(Error::NumericalFailure { last_good, .. }) => assert_eq!(*last_good, bad),
            Err(Error::LinearSolve { .. }) => {}
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
