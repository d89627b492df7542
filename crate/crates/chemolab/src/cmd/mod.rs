//! The subcommands. Each returns a [`Report`] and an exit code; `main`
//! only prints and exits.

pub mod bounds;
pub mod rates;
pub mod semigroup;
pub mod simulate;
pub mod sweep;

use chemolab_core::grid::Domain;
use chemolab_core::quadrature::log_grid;
use chemolab_core::rates::{compare_rate, fit_exponential_rate_with, series_floor, RateFit, TimeSeries};
use chemolab_core::semigroup::{estimate_k, SmoothingEstimate, SmoothingKind, SmoothingReport};
use chemolab_core::theory::RateBounds;
use chemolab_core::{Error, Field, PerField};
use rayon::prelude::*;

use crate::config::{AuditConfig, TheoryConfig};
use crate::error::{exit, CliError, Result};
use crate::report::Report;

pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
}

/// Worker pool, capped by `CHEMOLAB_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("CHEMOLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config(format!("CHEMOLAB_THREADS must be a positive integer, got '{v}'")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::config(format!("thread pool: {e}")))
}

pub const RATE_FORMULAS: PerField<&str> = PerField {
    u: "1/2 min{lambda1, ubar0/3}",
    v: "min{lambda1, ubar0/3}",
    w: "ubar0/2",
    z: "min{1, lambda1/2, ubar0/6}",
};

pub fn put_rate_bounds(r: &mut Report, bounds: &RateBounds) {
    for f in Field::ALL {
        r.put(format!("rates.{f}.formula"), *RATE_FORMULAS.get(f));
        r.put(format!("rates.{f}.bound"), *bounds.get(f));
    }
}

/// Estimate kind and exponents used for `k₁..k₄`.
pub fn k_estimates(p: f64) -> [SmoothingEstimate; 4] {
    let inf = f64::INFINITY;
    let e = |kind, p, q| SmoothingEstimate::new(kind, p, q).expect("valid default exponents");
    [
        e(SmoothingKind::MeanZeroLp, inf, inf),
        e(SmoothingKind::GradFromLq, p, p),
        e(SmoothingKind::GradFromGrad, p, p),
        e(SmoothingKind::FromDivergence, inf, p),
    ]
}

pub fn t_grid(domain: &Domain, points: usize) -> Vec<f64> {
    let l = domain.lambda1_discrete();
    log_grid(1e-3 / l, 20.0 / l, points)
}

/// `k₁..k₄`: configured values as given, otherwise the estimate times the
/// safety factor. Estimates run in parallel; the result does not depend on
/// scheduling.
pub fn resolve_k(
    domain: &Domain,
    theory: &TheoryConfig,
    seed: u64,
    pool: &rayon::ThreadPool,
    report: &mut Report,
) -> Result<[f64; 4]> {
    let p = theory.p_for(domain);
    let grid = t_grid(domain, theory.t_points);
    let ests = k_estimates(p);
    let reports: Vec<Option<SmoothingReport>> = pool.install(|| {
        ests.par_iter()
            .zip(theory.k.par_iter())
            .map(|(est, fixed)| match fixed {
                Some(_) => Ok(None),
                None => estimate_k(est, domain, theory.samples, &grid, seed).map(Some),
            })
            .collect::<std::result::Result<_, Error>>()
    })?;
    let mut k = [0.0; 4];
    for i in 0..4 {
        let key = format!("k.k{}", i + 1);
        put_estimate(report, &key, &ests[i]);
        match (&theory.k[i], &reports[i]) {
            (Some(v), _) => {
                k[i] = *v;
                report.put(format!("{key}.source"), "config");
            }
            (None, Some(rep)) => {
                k[i] = theory.k_safety * rep.estimated_constant;
                report.put(format!("{key}.source"), format!("estimated x {}", theory.k_safety));
                report.put(format!("{key}.estimate"), rep.estimated_constant);
                report.put(format!("{key}.worst_case"), rep.worst_case.description.clone());
            }
            (None, None) => unreachable!("estimate computed for every unset k"),
        }
        report.put(format!("{key}.value"), k[i]);
    }
    report.put("k.note", "estimated k values are lower bounds of the true constants");
    Ok(k)
}

fn put_estimate(report: &mut Report, key: &str, est: &SmoothingEstimate) {
    report.put(format!("{key}.kind"), est.kind().label());
    report.put(format!("{key}.p"), est.p());
    report.put(format!("{key}.q"), est.q());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateStatus {
    Pass,
    Fail,
    AtEquilibrium,
    Inconclusive,
}

impl RateStatus {
    pub fn label(self) -> &'static str {
        match self {
            RateStatus::Pass => "pass",
            RateStatus::Fail => "fail",
            RateStatus::AtEquilibrium => "at-equilibrium",
            RateStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FieldAudit {
    pub status: RateStatus,
    pub fit: Option<RateFit>,
    pub floor: f64,
}

/// Fits and compares each field's tail rate. A field that never rises above
/// its floor is at equilibrium; one with fewer than three usable samples is
/// inconclusive. Neither counts as a failure.
pub fn audit_rates(
    ts: &TimeSeries,
    eq_values: &PerField<f64>,
    bounds: &RateBounds,
    audit: &AuditConfig,
) -> Result<PerField<FieldAudit>> {
    let one = |f: Field| -> Result<FieldAudit> {
        let values = ts.dist.get(f);
        let floor = audit.floor.unwrap_or_else(|| series_floor(values, *eq_values.get(f)));
        if values.iter().all(|&y| y <= floor) {
            return Ok(FieldAudit {
                status: RateStatus::AtEquilibrium,
                fit: None,
                floor,
            });
        }
        match fit_exponential_rate_with(&ts.times, values, floor, audit.window) {
            Ok(fit) => {
                let v = compare_rate(&fit, *bounds.get(f), audit.slack)?;
                Ok(FieldAudit {
                    status: if v.pass { RateStatus::Pass } else { RateStatus::Fail },
                    fit: Some(fit),
                    floor,
                })
            }
            Err(Error::InsufficientData { .. }) => Ok(FieldAudit {
                status: RateStatus::Inconclusive,
                fit: None,
                floor,
            }),
            Err(e) => Err(e.into()),
        }
    };
    Ok(PerField::new(one(Field::U)?, one(Field::V)?, one(Field::W)?, one(Field::Z)?))
}

pub fn put_rate_audit(r: &mut Report, audits: &PerField<FieldAudit>, bounds: &RateBounds, slack: f64) -> bool {
    let mut ok = true;
    for f in Field::ALL {
        let a = audits.get(f);
        let key = format!("fit.{f}");
        r.put(format!("{key}.status"), a.status.label());
        r.put(format!("{key}.threshold"), (1.0 - slack) * bounds.get(f));
        r.put(format!("{key}.floor"), a.floor);
        if let Some(fit) = &a.fit {
            r.put(format!("{key}.rate"), fit.rate);
            r.put(format!("{key}.r_squared"), fit.r_squared);
            r.put(format!("{key}.window_start"), fit.window.0);
            r.put(format!("{key}.window_end"), fit.window.1);
            r.put(format!("{key}.points"), fit.points_used);
            if !fit.is_exponential() {
                r.put(format!("{key}.warning"), "non-exponential tail");
            }
        }
        ok &= a.status != RateStatus::Fail;
    }
    r.put("fit.pass", ok);
    ok
}

/// Mass drift, sign and `‖w‖_∞` monotonicity (`dist_w = ‖w‖_∞`).
pub fn put_conservation_audit(r: &mut Report, ts: &TimeSeries, drift_tol: f64) -> bool {
    let drift_u = TimeSeries::relative_drift(&ts.mass_u);
    let drift_vw = TimeSeries::relative_drift(&ts.mass_vw);
    let min_all = ts.min_all.iter().copied().fold(f64::INFINITY, f64::min);
    let w_monotone = ts.dist.w.windows(2).all(|p| p[1] <= p[0]);
    let pass = drift_u <= drift_tol && drift_vw <= drift_tol && min_all >= 0.0 && w_monotone;
    r.put("conservation.drift_u", drift_u);
    r.put("conservation.drift_vw", drift_vw);
    r.put("conservation.tolerance", drift_tol);
    r.put("conservation.min_all", min_all);
    r.put("conservation.w_monotone", w_monotone);
    r.put("conservation.pass", pass);
    pass
}

pub fn exit_for(pass: bool) -> i32 {
    if pass {
        exit::SUCCESS
    } else {
        exit::AUDIT_FAILURE
    }
}
