use chemolab_core::grid::lambda1_analytic;
use chemolab_core::solver::{run, RunStatus};
use chemolab_core::state::{grad_lp_norm, mean, InitialData};
use chemolab_core::theory::{envelope_coefficients, smallness_check, theoretical_rates, EnvelopeInputs};
use chemolab_core::rates::{envelope_check, EnvelopeAudit};
use chemolab_core::{Field, PerField};

use super::{audit_rates, exit_for, put_conservation_audit, put_rate_audit, put_rate_bounds, resolve_k, thread_pool, Outcome};
use crate::config::ExperimentConfig;
use crate::error::{exit, Result};
use crate::report::Report;
use crate::series::write_csv;

/// Runs the solver, audits the run and writes CSV, report and JSON mirror.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let outcome = simulate_report(cfg)?;
    outcome.report.write(&cfg.output.report, &cfg.output.json)?;
    Ok(outcome)
}

/// [`simulate`] without writing the report (the CSV is still written).
pub fn simulate_report(cfg: &ExperimentConfig) -> Result<Outcome> {
    let d = &cfg.domain;
    let q0 = cfg.initial_state()?;
    let out = run(&q0, &cfg.solver)?;
    write_csv(&out.series, &cfg.output.csv)?;

    let mut r = Report::new();
    r.put("report.kind", "simulate");
    for (k, v) in cfg.echo() {
        r.put(format!("config.{k}"), v);
    }
    let degenerate = out.initial == InitialData::Degenerate;
    let blown = out.status == RunStatus::BlownUp;
    r.put("status.blown_up", blown);
    r.put("status.degenerate", degenerate);
    r.put("status.final_time", out.final_state.time);
    r.put("status.steps", out.steps);
    r.put("status.samples", out.series.len());

    let e = out.equilibrium;
    for f in Field::ALL {
        r.put(format!("equilibrium.{f}"), e.value(f));
    }
    let lambda1 = d.lambda1_discrete();
    r.put("lambda1.analytic", lambda1_analytic(d));
    r.put("lambda1.discrete", lambda1);
    r.put("criterion.exponent", cfg.solver.criterion_exponent(d));
    r.put("criterion.final", *out.series.criterion_norm.last().unwrap_or(&f64::NAN));

    let smallness = smallness_check(&q0.u, &q0.z, &q0.v, cfg.theory.n_effective, cfg.theory.smallness_eps)?;
    r.put("smallness.n_effective", smallness.n_effective);
    r.put("smallness.eps", smallness.eps);
    r.put("smallness.u_norm", smallness.u_norm);
    r.put("smallness.z_norm", smallness.z_norm);
    r.put("smallness.grad_v_norm", smallness.grad_v_norm);
    r.put("smallness.u_small", smallness.u_small);
    r.put("smallness.z_small", smallness.z_small);
    r.put("smallness.grad_v_small", smallness.grad_v_small);

    let conservation_ok = put_conservation_audit(&mut r, &out.series, cfg.audit.drift_tol);

    r.put("t0.reached", out.t0.is_some());
    if let Some(t0) = out.t0 {
        r.put("t0.time", t0);
    }

    let mut pass = conservation_ok;
    if degenerate {
        r.put("rates.status", "skipped: degenerate, ubar0 = 0, rate bounds vacuous");
        r.put("envelope.status", "skipped: degenerate");
    } else {
        let bounds = theoretical_rates(lambda1, e.u_star)?;
        put_rate_bounds(&mut r, &bounds);
        let eq_values = PerField::from_fn(|f| e.value(f));
        let audits = audit_rates(&out.series, &eq_values, &bounds, &cfg.audit)?;
        pass &= put_rate_audit(&mut r, &audits, &bounds, cfg.audit.slack);

        match (&out.t0, &out.t0_state) {
            (Some(t0), Some(state)) => {
                let pool = thread_pool()?;
                let k = resolve_k(d, &cfg.theory, cfg.seed, &pool, &mut r)?;
                let p = cfg.theory.p_for(d);
                let env = envelope_coefficients(&EnvelopeInputs {
                    k,
                    lambda1,
                    ubar0: e.u_star,
                    vbar0: mean(&q0.v),
                    wbar0: mean(&q0.w),
                    w0_inf: q0.w.max_abs(),
                    grad_v_t0_lp: grad_lp_norm(&state.v, p)?,
                    measure: d.measure(),
                    p,
                    t0: *t0,
                })?;
                put_envelope(&mut r, &env);
                if let EnvelopeAudit::Checked(res) = envelope_check(&out.series, &env, &bounds) {
                    for f in Field::ALL {
                        r.put(format!("envelope.{f}.pass"), *res.pass.get(f));
                        r.put(format!("envelope.{f}.worst_margin"), *res.worst_margin.get(f));
                    }
                    r.put("envelope.samples", res.samples_checked);
                    r.put("envelope.pass", res.all_pass());
                    pass &= res.all_pass();
                }
            }
            _ => r.put("envelope.status", "skipped: t0 not reached"),
        }
    }

    let exit_code = if blown { exit::BLOW_UP } else { exit_for(pass) };
    r.put("audit.pass", pass);
    r.put("exit_code", exit_code as u64);
    Ok(Outcome { report: r, exit_code })
}

pub(crate) fn put_envelope(r: &mut Report, env: &chemolab_core::theory::EnvelopeBounds) {
    r.put("envelope.t0", env.t0);
    r.put("envelope.branch", env.branch.name());
    if let Some(a) = env.a {
        r.put("envelope.A", a);
    }
    if let Some(b) = env.b {
        r.put("envelope.B", b);
    }
    r.put("envelope.C", env.c);
    r.put("envelope.D", env.d);
    for f in Field::ALL {
        r.put(format!("envelope.{f}.m"), *env.m.get(f));
    }
}
