use chemolab_core::grid::Domain;
use chemolab_core::semigroup::{estimate_k, SmoothingEstimate, SmoothingKind};
use rayon::prelude::*;

use super::{t_grid, Outcome};
use crate::error::{exit, Result};
use crate::report::Report;

#[derive(Debug, Clone)]
pub struct SemigroupInputs {
    pub domain: Domain,
    pub estimates: Vec<SmoothingEstimate>,
    pub samples: usize,
    pub t_points: usize,
    pub seed: u64,
}

/// Default exponents per kind: those the envelope constants use, with
/// `P = 3n`.
pub fn default_exponents(kind: SmoothingKind, dims: usize) -> (f64, f64) {
    let p = 3.0 * dims as f64;
    match kind {
        SmoothingKind::MeanZeroLp => (f64::INFINITY, f64::INFINITY),
        SmoothingKind::GradFromLq | SmoothingKind::GradFromGrad => (p, p),
        SmoothingKind::FromDivergence => (f64::INFINITY, p),
    }
}

/// Estimates each requested smoothing constant; fails (exit 5) if any
/// ratio is not finite.
pub fn semigroup_check(x: &SemigroupInputs, pool: &rayon::ThreadPool) -> Result<Outcome> {
    let grid = t_grid(&x.domain, x.t_points);
    let reports = pool.install(|| {
        x.estimates
            .par_iter()
            .map(|e| estimate_k(e, &x.domain, x.samples, &grid, x.seed))
            .collect::<Vec<_>>()
    });
    let mut r = Report::new();
    r.put("report.kind", "semigroup-check");
    r.put("domain.dims", x.domain.dims());
    for a in 0..x.domain.dims() {
        r.put(format!("domain.length{a}"), x.domain.length(a));
        r.put(format!("domain.cells{a}"), x.domain.cells(a));
    }
    r.put("lambda1.discrete", x.domain.lambda1_discrete());
    r.put("seed", x.seed);
    r.put("samples", x.samples);
    let mut all_finite = true;
    for (e, rep) in x.estimates.iter().zip(reports) {
        let key = format!("kind.{}", e.kind().label());
        r.put(format!("{key}.p"), e.p());
        r.put(format!("{key}.q"), e.q());
        r.put(format!("{key}.time_power"), e.time_power(x.domain.dims()));
        match rep {
            Ok(rep) => {
                let finite = rep.estimated_constant.is_finite();
                all_finite &= finite;
                r.put(format!("{key}.estimate"), rep.estimated_constant);
                r.put(format!("{key}.finite"), finite);
                r.put(format!("{key}.fields_evaluated"), rep.fields_evaluated);
                r.put(format!("{key}.t_min"), rep.t_min);
                r.put(format!("{key}.t_max"), rep.t_max);
                r.put(format!("{key}.t_points"), rep.t_points);
                r.put(format!("{key}.worst_case"), rep.worst_case.description);
                r.put(format!("{key}.worst_t"), rep.worst_case.t);
            }
            Err(err) => {
                all_finite = false;
                r.put(format!("{key}.finite"), false);
                r.put(format!("{key}.error"), err.to_string());
            }
        }
    }
    r.put("note", "estimates are lower bounds of the true constants");
    r.put("all_finite", all_finite);
    let exit_code = if all_finite { exit::SUCCESS } else { exit::NUMERICAL };
    Ok(Outcome { report: r, exit_code })
}
