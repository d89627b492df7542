use chemolab_core::solver::{run, RunStatus};
use chemolab_core::state::FieldQuad;
use chemolab_core::theory::{smallness_check, Smallness};
use chemolab_core::Field;
use rayon::prelude::*;

use super::Outcome;
use crate::config::ExperimentConfig;
use crate::error::{exit, CliError, Result};
use crate::report::{format_float, write_file, Report};

/// All four distances below this count as converged.
pub const CONVERGED: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    pub smallness: Option<Smallness>,
    pub max_u_inf: Option<f64>,
    pub time_to_converge: Option<f64>,
    pub blown_up: bool,
    pub error: Option<String>,
}

/// Initial data of one sweep row: `u₀`, `z₀` and the `v₀` perturbation
/// scaled by `s`, `w₀` unchanged.
pub fn scaled_state(cfg: &ExperimentConfig, s: f64) -> Result<FieldQuad> {
    let d = &cfg.domain;
    let u = cfg.init.u.build(d)?.scaled(s);
    let z = cfg.init.z.build(d)?.scaled(s);
    let v = cfg.init.v.scale_perturbation(d, s)?;
    let w = cfg.init.w.build(d)?;
    Ok(FieldQuad::new(u, v, w, z)?)
}

fn row(cfg: &ExperimentConfig, scale: f64) -> SweepRow {
    let mut row = SweepRow {
        scale,
        smallness: None,
        max_u_inf: None,
        time_to_converge: None,
        blown_up: false,
        error: None,
    };
    let result = (|| -> Result<()> {
        let q = scaled_state(cfg, scale)?;
        row.smallness = Some(smallness_check(&q.u, &q.z, &q.v, cfg.theory.n_effective, cfg.theory.smallness_eps)?);
        let out = run(&q, &cfg.solver)?;
        row.blown_up = out.status == RunStatus::BlownUp;
        row.max_u_inf = Some(out.diagnostics.iter().map(|d| d.u_inf).fold(0.0, f64::max));
        row.time_to_converge = out
            .diagnostics
            .iter()
            .find(|d| Field::ALL.iter().all(|&f| *d.dist.get(f) < CONVERGED))
            .map(|d| d.time);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// One run per scale, in parallel; rows keep the order of `scales`.
pub fn sweep(cfg: &ExperimentConfig, scales: &[f64], pool: &rayon::ThreadPool) -> Result<Outcome> {
    if scales.is_empty() {
        return Err(CliError::config("--scales needs at least one value"));
    }
    if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
        return Err(CliError::config(format!("scale {s} must be finite and nonnegative")));
    }
    let rows: Vec<SweepRow> = pool.install(|| scales.par_iter().map(|&s| row(cfg, s)).collect());
    write_file(&cfg.output.sweep, &table(&rows))?;

    let mut r = Report::new();
    r.put("report.kind", "sweep");
    r.put("sweep.table", cfg.output.sweep.display().to_string());
    r.put("sweep.rows", rows.len());
    r.put("sweep.n_effective", cfg.theory.n_effective);
    r.put("sweep.converged_below", CONVERGED);
    for (i, row) in rows.iter().enumerate() {
        let key = format!("row.{i}");
        r.put(format!("{key}.scale"), row.scale);
        if let Some(s) = &row.smallness {
            r.put(format!("{key}.u_small"), s.u_small);
            r.put(format!("{key}.z_small"), s.z_small);
            r.put(format!("{key}.grad_v_small"), s.grad_v_small);
        }
        if let Some(m) = row.max_u_inf {
            r.put(format!("{key}.max_u_inf"), m);
        }
        r.put(
            format!("{key}.time_to_converge"),
            row.time_to_converge.map_or_else(|| "never".to_string(), format_float),
        );
        r.put(format!("{key}.blown_up"), row.blown_up);
        if let Some(e) = &row.error {
            r.put(format!("{key}.error"), e.clone());
        }
    }
    // reported, not enforced
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.max_u_inf.is_some()).collect();
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let monotone = sorted
        .windows(2)
        .all(|p| p[1].max_u_inf.unwrap() >= p[0].max_u_inf.unwrap() * (1.0 - 1e-12));
    r.put("sweep.max_u_inf_nondecreasing", monotone);
    Ok(Outcome {
        report: r,
        exit_code: exit::SUCCESS,
    })
}

pub fn table(rows: &[SweepRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "scale",
        "u_small",
        "z_small",
        "grad_v_small",
        "u_norm",
        "z_norm",
        "grad_v_norm",
        "max_u_inf",
        "time_to_converge",
        "blown_up",
        "error",
    ])
    .expect("in-memory write");
    let opt = |x: Option<f64>| x.map_or_else(String::new, format_float);
    for row in rows {
        let s = row.smallness.as_ref();
        let flag = |f: fn(&Smallness) -> bool| s.map_or_else(String::new, |s| f(s).to_string());
        w.write_record([
            format_float(row.scale),
            flag(|s| s.u_small),
            flag(|s| s.z_small),
            flag(|s| s.grad_v_small),
            opt(s.map(|s| s.u_norm)),
            opt(s.map(|s| s.z_norm)),
            opt(s.map(|s| s.grad_v_norm)),
            opt(row.max_u_inf),
            opt(row.time_to_converge),
            row.blown_up.to_string(),
            row.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}
