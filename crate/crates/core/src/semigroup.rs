//! Neumann heat semigroup on the grid and numerical probes of its
//! L^p–L^q smoothing constants.
//!
//! For each estimate kind the probe evaluates
//!
//! ```text
//! ratio(f, t) = LHS(f, t) / [(1 + t^{−power}) e^{−λ₁t} ‖RHS(f)‖]
//! ```
//!
//! over anchor fields and seeded random fields and reports the supremum.
//! That supremum is a lower bound for the true constant on this grid.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::grid::{divergence, gradient_faces, Domain, FaceField, GridField, Spectral};
use crate::quadrature::{integrate, log_grid};
use crate::state::{lp_norm, mean};
use crate::{Error, Result};

/// `e^{tΔ_h}` applied through the cosine eigenbasis.
#[derive(Debug, Clone)]
pub struct HeatSemigroup {
    spectral: Spectral,
}

impl HeatSemigroup {
    pub fn new(domain: Domain) -> Self {
        Self {
            spectral: Spectral::new(domain),
        }
    }

    pub fn domain(&self) -> &Domain {
        self.spectral.domain()
    }

    pub fn propagate(&self, f: &GridField, t: f64) -> Result<GridField> {
        if *f.domain() != *self.domain() {
            return Err(Error::DomainMismatch);
        }
        let coeffs = self.spectral.forward(f);
        self.propagate_coefficients(&coeffs, t)
    }

    /// Propagates a field given by its cosine coefficients.
    pub fn propagate_coefficients(&self, coeffs: &[f64], t: f64) -> Result<GridField> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameters(format!("propagation time {t}")));
        }
        let scaled: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (-self.spectral.eigenvalue(k) * t).exp())
            .collect();
        Ok(self.spectral.inverse(&scaled))
    }

    pub fn coefficients(&self, f: &GridField) -> Vec<f64> {
        self.spectral.forward(f)
    }
}

pub fn heat_propagate(f: &GridField, t: f64) -> Result<GridField> {
    HeatSemigroup::new(*f.domain()).propagate(f, t)
}

/// The four smoothing estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SmoothingKind {
    /// (i) `‖e^{tΔ}f‖_p` from `‖f‖_q`, mean-zero `f`.
    MeanZeroLp,
    /// (ii) `‖∇e^{tΔ}f‖_p` from `‖f‖_q`.
    GradFromLq,
    /// (iii) `‖∇e^{tΔ}f‖_p` from `‖∇f‖_q`.
    GradFromGrad,
    /// (iv) `‖e^{tΔ}∇·f‖_p` from `‖f‖_q`.
    FromDivergence,
}

impl SmoothingKind {
    pub const ALL: [SmoothingKind; 4] = [
        SmoothingKind::MeanZeroLp,
        SmoothingKind::GradFromLq,
        SmoothingKind::GradFromGrad,
        SmoothingKind::FromDivergence,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SmoothingKind::MeanZeroLp => "i",
            SmoothingKind::GradFromLq => "ii",
            SmoothingKind::GradFromGrad => "iii",
            SmoothingKind::FromDivergence => "iv",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    fn index(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for SmoothingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A smoothing estimate with its exponents, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingEstimate {
    kind: SmoothingKind,
    p: f64,
    q: f64,
}

impl SmoothingEstimate {
    pub fn new(kind: SmoothingKind, p: f64, q: f64) -> Result<Self> {
        let ok = match kind {
            SmoothingKind::MeanZeroLp | SmoothingKind::GradFromLq => 1.0 <= q && q <= p,
            SmoothingKind::GradFromGrad => 2.0 <= q && q <= p && p.is_finite(),
            SmoothingKind::FromDivergence => 1.0 < q && q <= p,
        };
        if !ok || p.is_nan() || q.is_nan() {
            return Err(Error::InvalidKind(format!(
                "exponents p = {p}, q = {q} not admissible for kind {kind}"
            )));
        }
        Ok(Self { kind, p, q })
    }

    pub fn kind(&self) -> SmoothingKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// The exponent `power` in `1 + t^{−power}` on an `n`-dimensional domain.
    pub fn time_power(&self, n: usize) -> f64 {
        let gap = 0.5 * n as f64 * (1.0 / self.q - 1.0 / self.p);
        match self.kind {
            SmoothingKind::MeanZeroLp | SmoothingKind::GradFromGrad => gap,
            SmoothingKind::GradFromLq | SmoothingKind::FromDivergence => 0.5 + gap,
        }
    }

    fn needs_vector(&self) -> bool {
        self.kind == SmoothingKind::FromDivergence
    }
}

/// Argument of a smoothing ratio.
#[derive(Debug, Clone, PartialEq)]
pub enum TestField {
    Scalar(GridField),
    Vector(FaceField),
}

/// Precomputed pieces of one test field for repeated evaluation over `t`.
struct Prepared {
    coeffs: Vec<f64>,
    rhs_norm: f64,
}

fn prepare(est: &SmoothingEstimate, sg: &HeatSemigroup, f: &TestField) -> Result<Option<Prepared>> {
    let (propagated, rhs_norm) = match (est.kind, f) {
        (SmoothingKind::MeanZeroLp, TestField::Scalar(g)) => {
            let m = mean(g);
            if m.abs() > 1e-12 * g.max_abs().max(f64::MIN_POSITIVE) {
                return Err(Error::NotMeanZero(m));
            }
            (g.clone(), lp_norm(g, est.q)?)
        }
        (SmoothingKind::GradFromLq, TestField::Scalar(g)) => (g.clone(), lp_norm(g, est.q)?),
        (SmoothingKind::GradFromGrad, TestField::Scalar(g)) => {
            (g.clone(), lp_norm(&gradient_faces(g).cell_magnitude(), est.q)?)
        }
        (SmoothingKind::FromDivergence, TestField::Vector(v)) => {
            (divergence(v), lp_norm(&v.cell_magnitude(), est.q)?)
        }
        _ => {
            return Err(Error::InvalidKind(format!(
                "kind {} takes a {} test field",
                est.kind,
                if est.needs_vector() { "vector" } else { "scalar" }
            )))
        }
    };
    if *propagated.domain() != *sg.domain() {
        return Err(Error::DomainMismatch);
    }
    if !(rhs_norm > 0.0) {
        return Ok(None);
    }
    Ok(Some(Prepared {
        coeffs: sg.coefficients(&propagated),
        rhs_norm,
    }))
}

fn ratio_at(est: &SmoothingEstimate, sg: &HeatSemigroup, lambda1: f64, prep: &Prepared, t: f64) -> Result<f64> {
    let pt = sg.propagate_coefficients(&prep.coeffs, t)?;
    let lhs = match est.kind {
        SmoothingKind::MeanZeroLp | SmoothingKind::FromDivergence => lp_norm(&pt, est.p)?,
        SmoothingKind::GradFromLq | SmoothingKind::GradFromGrad => {
            lp_norm(&gradient_faces(&pt).cell_magnitude(), est.p)?
        }
    };
    let power = est.time_power(sg.domain().dims());
    let weight = (1.0 + t.powf(-power)) * (-lambda1 * t).exp();
    Ok(lhs / (weight * prep.rhs_norm))
}

/// One smoothing ratio at time `t > 0`, using `λ₁ = λ₁_discrete`.
///
/// Returns `None` when the right-hand norm vanishes.
pub fn smoothing_ratio(est: &SmoothingEstimate, f: &TestField, t: f64) -> Result<Option<f64>> {
    let domain = match f {
        TestField::Scalar(g) => *g.domain(),
        TestField::Vector(v) => *v.domain(),
    };
    if !(t > 0.0) {
        return Err(Error::InvalidParameters(format!("ratio time {t} must be positive")));
    }
    let sg = HeatSemigroup::new(domain);
    match prepare(est, &sg, f)? {
        Some(prep) => Ok(Some(ratio_at(est, &sg, domain.lambda1_discrete(), &prep, t)?)),
        None => Ok(None),
    }
}

/// 40 log-spaced times in `[10⁻³/λ₁, 20/λ₁]`.
pub fn default_t_grid(lambda1: f64) -> Vec<f64> {
    log_grid(1e-3 / lambda1, 20.0 / lambda1, 40)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub description: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub estimate: SmoothingEstimate,
    /// Supremum of the observed ratios; a lower bound for the constant.
    pub estimated_constant: f64,
    /// Random samples drawn (anchors come on top).
    pub sample_count: usize,
    pub fields_evaluated: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub worst_case: WorstCase,
}

/// Estimates the smoothing constant of `est` on `domain`.
///
/// Sample `i` is drawn from ChaCha8 seeded with `seed` on stream
/// `(kind << 32) | i`, so runs are reproducible and a larger `samples`
/// extends (never reshuffles) a smaller one.
pub fn estimate_k(
    est: &SmoothingEstimate,
    domain: &Domain,
    samples: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<SmoothingReport> {
    if samples == 0 {
        return Err(Error::InvalidParameters("samples must be at least 1".into()));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameters("t_grid must be nonempty and positive".into()));
    }
    let sg = HeatSemigroup::new(*domain);
    let lambda1 = domain.lambda1_discrete();
    let mut best = (f64::NEG_INFINITY, String::new(), t_grid[0]);
    let mut evaluated = 0;

    let mut consider = |field: TestField, label: String| -> Result<()> {
        let field = match (est.kind, field) {
            (SmoothingKind::MeanZeroLp, TestField::Scalar(g)) => TestField::Scalar(g.mean_removed()),
            (_, f) => f,
        };
        let Some(prep) = prepare(est, &sg, &field)? else {
            return Ok(());
        };
        evaluated += 1;
        for &t in t_grid {
            let r = ratio_at(est, &sg, lambda1, &prep, t)?;
            if !r.is_finite() {
                return Err(Error::Internal(format!("non-finite ratio for {label} at t = {t}")));
            }
            if r > best.0 {
                best = (r, label.clone(), t);
            }
        }
        Ok(())
    };

    for (label, f) in anchors(est, domain) {
        consider(f, label)?;
    }
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((est.kind.index() << 32) | i as u64);
        let (family, f) = random_field(est, domain, &mut rng);
        consider(f, format!("random#{i}:{family}"))?;
    }

    Ok(SmoothingReport {
        estimate: *est,
        estimated_constant: best.0.max(0.0),
        sample_count: samples,
        fields_evaluated: evaluated,
        t_min: t_grid.iter().copied().fold(f64::INFINITY, f64::min),
        t_max: t_grid.iter().copied().fold(0.0, f64::max),
        t_points: t_grid.len(),
        worst_case: WorstCase {
            description: best.1,
            t: best.2,
        },
    })
}

fn point_mass(domain: &Domain, index: usize) -> GridField {
    let mut vals = alloc::vec![0.0; domain.len()];
    vals[index] = 1.0 / domain.cell_volume();
    GridField::from_raw(*domain, vals)
}

fn anchors(est: &SmoothingEstimate, d: &Domain) -> Vec<(String, TestField)> {
    let mut out = Vec::new();
    let (nx, ny) = (d.cells(0), d.cells(1));
    if est.needs_vector() {
        let axis = d.slowest_axis();
        let l = d.length(axis);
        let mut smooth = FaceField::zeros(*d);
        let mut corner = FaceField::zeros(*d);
        let mut centre = FaceField::zeros(*d);
        if axis == 0 {
            for j in 0..ny {
                for i in 1..nx {
                    let x = i as f64 * d.spacing(0);
                    smooth.component_mut(0)[i + (nx + 1) * j] = (PI * x / l).sin();
                }
            }
        } else {
            for j in 1..ny {
                for i in 0..nx {
                    let y = j as f64 * d.spacing(1);
                    smooth.component_mut(1)[i + nx * j] = (PI * y / l).sin();
                }
            }
        }
        corner.component_mut(0)[FaceField::face_of_cell(d, 0, 0, 0, true)] = 1.0;
        centre.component_mut(0)[FaceField::face_of_cell(d, 0, nx / 2 - 1, ny / 2, true)] = 1.0;
        out.push(("anchor:sine-flux".into(), TestField::Vector(smooth)));
        out.push(("anchor:corner-face".into(), TestField::Vector(corner)));
        out.push(("anchor:centre-face".into(), TestField::Vector(centre)));
        return out;
    }
    for axis in 0..d.dims() {
        for k in 1..=2 {
            out.push((
                format!("anchor:mode{k}-axis{axis}"),
                TestField::Scalar(GridField::cosine_mode(*d, axis, k)),
            ));
        }
    }
    out.push(("anchor:corner-point".into(), TestField::Scalar(point_mass(d, 0))));
    out.push((
        "anchor:centre-point".into(),
        TestField::Scalar(point_mass(d, d.index(nx / 2, ny / 2))),
    ));
    out
}

fn random_field(est: &SmoothingEstimate, d: &Domain, rng: &mut ChaCha8Rng) -> (&'static str, TestField) {
    let family = rng.random_range(0..3u32);
    let dims = d.dims();
    let sampler: (&'static str, alloc::boxed::Box<dyn Fn([f64; 2]) -> f64>) = match family {
        0 => {
            let terms: Vec<(usize, usize, f64)> = (0..4)
                .map(|_| {
                    let kx = rng.random_range(0..d.cells(0).min(8));
                    let ky = if dims == 2 { rng.random_range(0..d.cells(1).min(8)) } else { 0 };
                    (kx, ky, rng.random_range(-1.0..1.0))
                })
                .collect();
            let (lx, ly) = (d.length(0), d.length(1));
            (
                "cosines",
                alloc::boxed::Box::new(move |x: [f64; 2]| {
                    terms
                        .iter()
                        .map(|&(kx, ky, a)| {
                            a * (kx as f64 * PI * x[0] / lx).cos() * (ky as f64 * PI * x[1] / ly).cos()
                        })
                        .sum()
                }),
            )
        }
        1 => {
            let mut centre = [0.0; 2];
            let mut width = [1.0; 2];
            for a in 0..dims {
                centre[a] = rng.random_range(0.0..d.length(a));
                width[a] = d.spacing(a) * (0.5 + rng.random_range(0.0..0.25 * d.cells(a) as f64));
            }
            (
                "bump",
                alloc::boxed::Box::new(move |x: [f64; 2]| {
                    let mut e = 0.0;
                    for a in 0..dims {
                        let r = (x[a] - centre[a]) / width[a];
                        e += r * r;
                    }
                    (-0.5 * e).exp()
                }),
            )
        }
        _ => {
            let n = d.len().max(FaceField::face_count(d, 0) + FaceField::face_count(d, 1));
            let noise: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nx = d.cells(0) as f64;
            let (hx, hy) = (d.spacing(0), d.spacing(1));
            (
                "noise",
                alloc::boxed::Box::new(move |x: [f64; 2]| {
                    // deterministic lookup keyed by position on the half-cell lattice
                    let i = (2.0 * x[0] / hx).round();
                    let j = (2.0 * x[1] / hy).round();
                    let key = (i + (2.0 * nx + 1.0) * j) as usize;
                    noise[key % noise.len()]
                }),
            )
        }
    };
    let (name, f) = sampler;
    if est.needs_vector() {
        let (nx, ny) = (d.cells(0), d.cells(1));
        let mut v = FaceField::zeros(*d);
        for j in 0..ny {
            for i in 1..nx {
                let x = [i as f64 * d.spacing(0), (j as f64 + 0.5) * d.spacing(1)];
                v.component_mut(0)[i + (nx + 1) * j] = f(x);
            }
        }
        if dims == 2 {
            for j in 1..ny {
                for i in 0..nx {
                    let x = [(i as f64 + 0.5) * d.spacing(0), j as f64 * d.spacing(1)];
                    v.component_mut(1)[i + nx * j] = f(x);
                }
            }
        }
        (name, TestField::Vector(v))
    } else {
        let vals = (0..d.len())
            .map(|k| {
                let mut c = d.center(k);
                if dims == 1 {
                    c[1] = 0.5;
                }
                f(c)
            })
            .collect();
        (name, TestField::Scalar(GridField::from_raw(*d, vals)))
    }
}

/// Result of [`convolution_bound_ratio`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionBound {
    pub sup_ratio: f64,
    pub argmax_t: f64,
    pub t_points: usize,
}

/// Parameters of the convolution-bound integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ConvolutionParams {
    pub fn validate(&self) -> Result<()> {
        let ConvolutionParams {
            alpha,
            beta,
            gamma,
            delta,
        } = *self;
        let finite = [alpha, beta, gamma, delta].iter().all(|x| x.is_finite());
        if !finite || !(alpha < 1.0) || !(beta < 1.0) || !(gamma > 0.0) || !(delta > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "need alpha < 1, beta < 1, gamma > 0, delta > 0 (got {alpha}, {beta}, {gamma}, {delta})"
            )));
        }
        if gamma == delta {
            return Err(Error::InvalidParameters("gamma must differ from delta".into()));
        }
        Ok(())
    }

    /// `∫₀^t (1 + (t−s)^{−α}) e^{−γ(t−s)} (1 + s^{−β}) e^{−δs} ds`.
    pub fn integral(&self, t: f64, rel_tol: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let ConvolutionParams {
            alpha,
            beta,
            gamma,
            delta,
        } = *self;
        let kernel = |r: f64, s: f64| {
            (1.0 + r.powf(-alpha)) * (-gamma * r).exp() * (1.0 + s.powf(-beta)) * (-delta * s).exp()
        };
        let half = 0.5 * t;
        // s = σ^m near s = 0 and r = t − s = σ^m near s = t, m = 1/(1 − exponent)
        let m_beta = if beta > 0.0 { 1.0 / (1.0 - beta) } else { 1.0 };
        let m_alpha = if alpha > 0.0 { 1.0 / (1.0 - alpha) } else { 1.0 };
        let left = integrate(
            |sigma| {
                let s = sigma.powf(m_beta);
                let jac = m_beta * sigma.powf(m_beta - 1.0);
                if s == 0.0 {
                    return kernel_limit(beta, m_beta, sigma) * (-gamma * t).exp() * (1.0 + t.powf(-alpha));
                }
                kernel(t - s, s) * jac
            },
            0.0,
            half.powf(1.0 / m_beta),
            rel_tol,
            0.0,
        )?;
        let right = integrate(
            |sigma| {
                let r = sigma.powf(m_alpha);
                let jac = m_alpha * sigma.powf(m_alpha - 1.0);
                if r == 0.0 {
                    return kernel_limit(alpha, m_alpha, sigma) * (-delta * t).exp() * (1.0 + t.powf(-beta));
                }
                kernel(r, t - r) * jac
            },
            0.0,
            half.powf(1.0 / m_alpha),
            rel_tol,
            0.0,
        )?;
        Ok(left.value + right.value)
    }
}

/// Limit of `(1 + x^{−e}) m σ^{m−1}` as `σ → 0` with `x = σ^m`.
fn kernel_limit(exponent: f64, m: f64, sigma: f64) -> f64 {
    if exponent > 0.0 {
        // m σ^{m−1} σ^{−m e} = m since m(1 − e) = 1
        m
    } else if exponent == 0.0 {
        2.0
    } else {
        let _ = sigma;
        1.0
    }
}

/// `sup_t I(t) / [(1 + t^{min{0, 1−α−β}}) e^{−min{γ,δ} t}]` over
/// `t_points` log-spaced times in `[10⁻⁴, horizon]`.
pub fn convolution_bound_ratio(
    params: &ConvolutionParams,
    horizon: f64,
    t_points: usize,
    rel_tol: f64,
) -> Result<ConvolutionBound> {
    params.validate()?;
    if !(horizon > 1e-4 && horizon.is_finite()) || t_points < 2 {
        return Err(Error::InvalidParameters(format!(
            "horizon {horizon} / t_points {t_points}"
        )));
    }
    let power = 0.0f64.min(1.0 - params.alpha - params.beta);
    let rate = params.gamma.min(params.delta);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for t in log_grid(1e-4, horizon, t_points) {
        let i = params.integral(t, rel_tol)?;
        let r = i / ((1.0 + t.powf(power)) * (-rate * t).exp());
        if !r.is_finite() {
            return Err(Error::Internal(format!("non-finite ratio at t = {t}")));
        }
        if r > best.0 {
            best = (r, t);
        }
    }
    Ok(ConvolutionBound {
        sup_ratio: best.0,
        argmax_t: best.1,
        t_points,
    })
}

/// Horizon beyond which the sup no longer changes: `20 / min{γ, δ}`.
pub fn default_horizon(params: &ConvolutionParams) -> f64 {
    20.0 / params.gamma.min(params.delta)
}
