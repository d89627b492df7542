//! Decay-rate bounds and the explicit envelope constants.
//!
//! With `λ₁` the first nonzero Neumann eigenvalue and `ū₀` the mean of `u₀`,
//! bounded solutions approach `(ū₀, v̄₀ + w̄₀, 0, ū₀)` with sup-norm rates
//!
//! ```text
//! u: ½ min{λ₁, ū₀/3}    v: min{λ₁, ū₀/3}    w: ū₀/2    z: min{1, λ₁/2, ū₀/6}
//! ```
//!
//! and prefactors `m₁..m₄` built from the semigroup constants `k₁..k₄` and
//! the auxiliary constants `A`, `B`, `C`, `D` below.

use core::f64::consts::E;


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::grid::GridField;
use crate::quadrature::{integrate, log_grid, sup_grid_refine};
use crate::state::{grad_lp_norm, lp_norm};
use crate::{Error, PerField, Result};

/// Decay exponents (1/time) per field.
pub type RateBounds = PerField<f64>;

/// Tolerances for the `sup_{s>0}` computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    /// Relative tolerance of each inner quadrature.
    pub rel_tol: f64,
    /// Number of log-spaced points in the coarse search.
    pub grid_points: usize,
    /// Relative x-tolerance of the golden-section refinement.
    pub x_tol: f64,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            grid_points: 240,
            x_tol: 1e-10,
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(alloc::format!("{name} = {x} must be positive")))
    }
}

fn nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(alloc::format!("{name} = {x} must be nonnegative")))
    }
}

/// `min{λ₁, ū₀/3}`, the v-rate.
fn base_rate(lambda1: f64, ubar0: f64) -> f64 {
    lambda1.min(ubar0 / 3.0)
}

pub fn theoretical_rates(lambda1: f64, ubar0: f64) -> Result<RateBounds> {
    positive("lambda1", lambda1)?;
    if !(ubar0 > 0.0) {
        return Err(Error::DegenerateData(ubar0));
    }
    let v = base_rate(lambda1, ubar0);
    Ok(PerField {
        u: 0.5 * v,
        v,
        w: 0.5 * ubar0,
        z: 1.0f64.min(0.5 * lambda1).min(ubar0 / 6.0),
    })
}

/// `B(ū₀) = sup_{s>0} (s + 2√s) e^{−ū₀s/3}`.
pub fn constant_b(ubar0: f64) -> Result<f64> {
    if !(ubar0.is_finite() && ubar0 > 0.0) {
        return Err(Error::InvalidParameters(alloc::format!(
            "B diverges for ubar0 = {ubar0}"
        )));
    }
    let a = ubar0 / 3.0;
    let g = |s: f64| Ok((s + 2.0 * s.sqrt()) * (-a * s).exp());
    let grid = log_grid(1e-10 / a, 60.0 / a, 400);
    Ok(sup_grid_refine(g, &grid, 1e-12)?.1)
}

/// `F(s) = e^{−(ū₀/2 − λ₁/2)s} ∫₀^s (1 + τ^{−1/2}) e^{−(λ₁ − ū₀/2)τ} dτ`,
/// evaluated with `τ = σ²` and both exponentials merged so nothing overflows.
pub fn a_profile(s: f64, ubar0: f64, lambda1: f64, rel_tol: f64) -> Result<f64> {
    if s <= 0.0 {
        return Ok(0.0);
    }
    let growth = 0.5 * ubar0 - lambda1;
    let damping = 0.5 * ubar0 - 0.5 * lambda1;
    let r = integrate(
        |sigma| (2.0 * sigma + 2.0) * (growth * sigma * sigma - damping * s).exp(),
        0.0,
        s.sqrt(),
        rel_tol,
        0.0,
    )?;
    Ok(r.value)
}

/// `A(ū₀, λ₁) = sup_{s>0} F(s)`, defined on the branch `λ₁ < ū₀/2`.
pub fn constant_a(ubar0: f64, lambda1: f64) -> Result<f64> {
    constant_a_with(ubar0, lambda1, &SupOptions::default())
}

pub fn constant_a_with(ubar0: f64, lambda1: f64, opts: &SupOptions) -> Result<f64> {
    positive("ubar0", ubar0)?;
    positive("lambda1", lambda1)?;
    if lambda1 >= 0.5 * ubar0 {
        return Err(Error::WrongBranch { lambda1, ubar0 });
    }
    // F(s) decays at least like e^{−λ₁s/2}
    let grid = log_grid(1e-8 / lambda1, 80.0 / lambda1, opts.grid_points);
    let (_, a) = sup_grid_refine(
        |s| a_profile(s, ubar0, lambda1, opts.rel_tol),
        &grid,
        opts.x_tol,
    )?;
    Ok(a)
}

/// `D = ∫₀^∞ (1 + τ^{−2/3}) e^{−μτ} dτ` with `μ = λ₁ − ½ min{λ₁, ū₀/3}`.
pub fn constant_d(ubar0: f64, lambda1: f64) -> Result<f64> {
    positive("ubar0", ubar0)?;
    positive("lambda1", lambda1)?;
    constant_d_for_rate(lambda1 - 0.5 * base_rate(lambda1, ubar0))
}

/// [`constant_d`] as a function of the exponent `μ` directly.
pub fn constant_d_for_rate(mu: f64) -> Result<f64> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Internal(alloc::format!("D needs mu > 0, got {mu}")));
    }
    let split = 1.0 / mu;
    let rel_tol = 1e-12;
    // τ = σ³ removes the τ^{−2/3} singularity on [0, 1/μ]
    let head = integrate(
        |sigma| 3.0 * (sigma * sigma + 1.0) * (-mu * sigma * sigma * sigma).exp(),
        0.0,
        split.cbrt(),
        rel_tol,
        0.0,
    )?;
    // the remaining tail beyond 1/μ + 60/μ is below e^{−61}/μ
    let tail = integrate(
        |x| {
            let tau = split + x;
            (1.0 + tau.powf(-2.0 / 3.0)) * (-mu * tau).exp()
        },
        0.0,
        60.0 / mu,
        rel_tol,
        0.0,
    )?;
    Ok(head.value + tail.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CInputs {
    pub k2: f64,
    pub k3: f64,
    /// `‖∇v(·, t₀)‖_{L^p}`.
    pub grad_v_t0_lp: f64,
    pub ubar0: f64,
    pub w0_inf: f64,
    /// |Ω|.
    pub measure: f64,
    pub p: f64,
    /// `max{A, B}`.
    pub ab: f64,
}

/// `C = 2k₃‖∇v(t₀)‖_p + (3/2) k₂ ū₀ ‖w₀‖_∞ |Ω|^{1/p} max{A, B}`.
pub fn constant_c(x: &CInputs) -> Result<f64> {
    if !(x.p > 2.0) || x.p.is_infinite() {
        return Err(Error::InvalidExponent(x.p));
    }
    positive("k2", x.k2)?;
    positive("k3", x.k3)?;
    positive("measure", x.measure)?;
    nonnegative("grad_v_t0_lp", x.grad_v_t0_lp)?;
    nonnegative("ubar0", x.ubar0)?;
    nonnegative("w0_inf", x.w0_inf)?;
    nonnegative("max{A,B}", x.ab)?;
    Ok(2.0 * x.k3 * x.grad_v_t0_lp
        + 1.5 * x.k2 * x.ubar0 * x.w0_inf * x.measure.powf(1.0 / x.p) * x.ab)
}

/// Which auxiliary constant bounds the ∇v source integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientBranch {
    /// `λ₁ < ū₀/2`.
    A,
    /// `λ₁ ≥ ū₀/2`.
    B,
}

impl GradientBranch {
    pub fn select(lambda1: f64, ubar0: f64) -> Self {
        if lambda1 < 0.5 * ubar0 {
            GradientBranch::A
        } else {
            GradientBranch::B
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GradientBranch::A => "A",
            GradientBranch::B => "B",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeInputs {
    /// `k₁..k₄`.
    pub k: [f64; 4],
    pub lambda1: f64,
    pub ubar0: f64,
    pub vbar0: f64,
    pub wbar0: f64,
    pub w0_inf: f64,
    pub grad_v_t0_lp: f64,
    pub measure: f64,
    pub p: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBounds {
    /// `m₁..m₄` as `u, v, w, z`.
    pub m: PerField<f64>,
    pub t0: f64,
    pub k: [f64; 4],
    pub branch: GradientBranch,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: f64,
    pub d: f64,
}

pub fn envelope_coefficients(x: &EnvelopeInputs) -> Result<EnvelopeBounds> {
    for (i, k) in x.k.iter().enumerate() {
        positive(["k1", "k2", "k3", "k4"][i], *k)?;
    }
    positive("lambda1", x.lambda1)?;
    if !(x.ubar0 > 0.0) {
        return Err(Error::DegenerateData(x.ubar0));
    }
    nonnegative("vbar0", x.vbar0)?;
    nonnegative("wbar0", x.wbar0)?;
    nonnegative("w0_inf", x.w0_inf)?;
    let [k1, k2, k3, k4] = x.k;
    let branch = GradientBranch::select(x.lambda1, x.ubar0);
    let (a, b) = match branch {
        GradientBranch::A => (Some(constant_a(x.ubar0, x.lambda1)?), None),
        GradientBranch::B => (None, Some(constant_b(x.ubar0)?)),
    };
    let ab = a.or(b).unwrap_or(0.0);
    let c = constant_c(&CInputs {
        k2,
        k3,
        grad_v_t0_lp: x.grad_v_t0_lp,
        ubar0: x.ubar0,
        w0_inf: x.w0_inf,
        measure: x.measure,
        p: x.p,
        ab,
    })?;
    let d = constant_d(x.ubar0, x.lambda1)?;
    let base = base_rate(x.lambda1, x.ubar0);
    let m1 = (5.0 * k1 + 1.5 * k4 * c * d) * x.ubar0;
    let m2 = 6.0 * k1 * (x.vbar0 + x.wbar0) + (36.0 * k1 / E + 1.0) * x.w0_inf;
    let m3 = x.w0_inf;
    let m4 = x.ubar0
        * (2.5
            + 2.0 * k1 * (3.0 + (10.0 * k1 + 3.0 * k4 * c * d) / (2.0 * (x.lambda1 + 1.0) - base)));
    Ok(EnvelopeBounds {
        m: PerField::new(m1, m2, m3, m4),
        t0: x.t0,
        k: x.k,
        branch,
        a,
        b,
        c,
        d,
    })
}

/// Norms and verdicts of the small-data conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smallness {
    pub n_effective: usize,
    pub eps: f64,
    /// `‖u₀‖_{L^{n/4}}`.
    pub u_norm: f64,
    /// `‖z₀‖_{L^{n/2}}`.
    pub z_norm: f64,
    /// `‖∇v₀‖_{L^n}`.
    pub grad_v_norm: f64,
    pub u_small: bool,
    pub z_small: bool,
    pub grad_v_small: bool,
}

impl Smallness {
    pub fn all(&self) -> bool {
        self.u_small && self.z_small && self.grad_v_small
    }
}

/// Evaluates the small-data conditions with exponents taken from
/// `n_effective` (which may exceed the grid dimension).
pub fn smallness_check(
    u0: &GridField,
    z0: &GridField,
    v0: &GridField,
    n_effective: usize,
    eps: f64,
) -> Result<Smallness> {
    if n_effective < 4 {
        return Err(Error::OutOfRegime(n_effective));
    }
    positive("eps", eps)?;
    let n = n_effective as f64;
    let u_norm = lp_norm(u0, n / 4.0)?;
    let z_norm = lp_norm(z0, n / 2.0)?;
    let grad_v_norm = grad_lp_norm(v0, n)?;
    Ok(Smallness {
        n_effective,
        eps,
        u_norm,
        z_norm,
        grad_v_norm,
        u_small: u_norm <= eps,
        z_small: z_norm <= eps,
        grad_v_small: grad_v_norm <= eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn rate_examples() {
        let r = theoretical_rates(1.0, 6.0).unwrap();
        assert_eq!(r, PerField::new(0.5, 1.0, 3.0, 0.5));
        let r = theoretical_rates(0.25, 3.0).unwrap();
        assert_eq!(r, PerField::new(0.125, 0.25, 1.5, 0.125));
        let r = theoretical_rates(10.0, 0.3).unwrap();
        assert!(close(r.u, 0.05, 1e-15) && close(r.v, 0.1, 1e-15));
        assert!(close(r.w, 0.15, 1e-15) && close(r.z, 0.05, 1e-15));
        assert!(matches!(theoretical_rates(1.0, 0.0), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn b_decreasing() {
        let b: alloc::vec::Vec<f64> = [1.0, 3.0, 9.0].iter().map(|&u| constant_b(u).unwrap()).collect();
        assert!(b[0] > b[1] && b[1] > b[2]);
        assert!(constant_b(0.0).is_err());
    }

    #[test]
    fn a_branch_guard() {
        assert!(matches!(constant_a(4.0, 2.0), Err(Error::WrongBranch { .. })));
        assert!(constant_a(4.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn a_target_limits() {
        let small = a_profile(1e-8, 4.0, 1.0, 1e-12).unwrap();
        assert!(small < 1e-3);
        // ~2√s near zero
        assert!(close(small, 2e-4, 1e-3));
        let large = a_profile(200.0, 4.0, 1.0, 1e-12).unwrap();
        assert!(large < 1e-30);
    }

    #[test]
    fn d_decreasing_in_mu() {
        let d: alloc::vec::Vec<f64> = [0.25, 0.5, 1.0]
            .iter()
            .map(|&m| constant_d_for_rate(m).unwrap())
            .collect();
        assert!(d[0] > d[1] && d[1] > d[2]);
    }

    #[test]
    fn c_examples() {
        let base = CInputs {
            k2: 1.0,
            k3: 1.0,
            grad_v_t0_lp: 1.0,
            ubar0: 1.0,
            w0_inf: 1.0,
            measure: 1.0,
            p: 3.0,
            ab: 1.0,
        };
        assert!(close(constant_c(&base).unwrap(), 3.5, 1e-15));
        let c2 = constant_c(&CInputs { grad_v_t0_lp: 2.0, ..base }).unwrap();
        assert!(close(c2 - 3.5, 2.0, 1e-15));
        let c0 = constant_c(&CInputs { w0_inf: 0.0, k3: 1.5, ..base }).unwrap();
        assert!(close(c0, 3.0, 1e-15));
        assert!(matches!(
            constant_c(&CInputs { p: 2.0, ..base }),
            Err(Error::InvalidExponent(_))
        ));
    }

    fn inputs() -> EnvelopeInputs {
        EnvelopeInputs {
            k: [1.0; 4],
            lambda1: 1.0,
            ubar0: 6.0,
            vbar0: 0.5,
            wbar0: 0.5,
            w0_inf: 1.0,
            grad_v_t0_lp: 0.3,
            measure: core::f64::consts::PI,
            p: 3.0,
            t0: 0.0,
        }
    }

    #[test]
    fn m2_hand_value() {
        let env = envelope_coefficients(&inputs()).unwrap();
        // 6 + 36/e + 1
        assert!(close(env.m.v, 6.0 + 13.243_659_882_171_924 + 1.0, 1e-12));
        assert!((env.m.v - 20.24).abs() < 5e-3);
        assert_eq!(env.m.w, 1.0);
        assert_eq!(env.branch, GradientBranch::A);
    }

    #[test]
    fn zero_w0() {
        let env = envelope_coefficients(&EnvelopeInputs {
            w0_inf: 0.0,
            ..inputs()
        })
        .unwrap();
        assert_eq!(env.m.w, 0.0);
        assert!(close(env.m.v, 6.0, 1e-15));
        // with no source term C reduces to 2 k3 ‖∇v(t0)‖
        assert!(close(env.c, 0.6, 1e-15));
    }

    #[test]
    fn branch_b_when_lambda_large() {
        let env = envelope_coefficients(&EnvelopeInputs {
            lambda1: 4.0,
            ..inputs()
        })
        .unwrap();
        assert_eq!(env.branch, GradientBranch::B);
        assert!(env.b.is_some() && env.a.is_none());
    }

    #[test]
    fn coefficients_monotone_in_k() {
        let base = envelope_coefficients(&inputs()).unwrap();
        for i in 0..4 {
            let mut x = inputs();
            x.k[i] *= 1.5;
            let bigger = envelope_coefficients(&x).unwrap();
            for f in crate::Field::ALL {
                assert!(bigger.m.get(f) >= base.m.get(f), "k{} field {f}", i + 1);
            }
        }
    }

    #[test]
    fn smallness_examples() {
        let d = Domain::interval(core::f64::consts::PI, 16).unwrap();
        let u = GridField::constant(d, 1e-6);
        let zero = GridField::zeros(d);
        let s = smallness_check(&u, &zero, &zero, 4, 1e-3).unwrap();
        assert!(s.all());
        // n = 4: L^1 norm
        assert!(close(s.u_norm, 1e-6 * core::f64::consts::PI, 1e-12));
        let s10 = smallness_check(&u.scaled(10.0), &zero, &zero, 4, 1e-3).unwrap();
        assert!(close(s10.u_norm, 10.0 * s.u_norm, 1e-12));
        assert!(matches!(
            smallness_check(&u, &zero, &zero, 3, 1.0),
            Err(Error::OutOfRegime(3))
        ));
    }
}
