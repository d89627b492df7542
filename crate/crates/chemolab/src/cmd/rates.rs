use std::path::Path;

use chemolab_core::state::equilibrium_of;
use chemolab_core::theory::theoretical_rates;
use chemolab_core::{Field, PerField};

use super::{audit_rates, exit_for, put_conservation_audit, put_rate_audit, put_rate_bounds, Outcome};
use crate::config::{AuditConfig, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::series::read_csv;

/// Where the rate bounds of a re-audit come from.
#[derive(Debug, Clone, Default)]
pub struct RatesInputs {
    pub config: Option<ExperimentConfig>,
    pub lambda1: Option<f64>,
    pub ubar0: Option<f64>,
    pub audit: AuditConfig,
}

/// Re-audits an existing time-series CSV: tail rates and conservation.
/// Explicit `lambda1`/`ubar0` take precedence over the config.
pub fn rates(csv: &Path, x: &RatesInputs) -> Result<Outcome> {
    let ts = read_csv(csv)?;
    let (mut lambda1, mut ubar0, mut eq) = (None, None, None);
    if let Some(cfg) = &x.config {
        let e = equilibrium_of(&cfg.initial_state()?);
        lambda1 = Some(cfg.domain.lambda1_discrete());
        ubar0 = Some(e.u_star);
        eq = Some(PerField::from_fn(|f| e.value(f)));
    }
    let lambda1 = x.lambda1.or(lambda1).ok_or_else(|| CliError::config("need --lambda1 or --config"))?;
    let ubar0 = x.ubar0.or(ubar0).ok_or_else(|| CliError::config("need --ubar0 or --config"))?;
    // without a config, u and z sit at ubar0 and w at 0; v's level only moves the floor
    let eq = eq.unwrap_or(PerField::new(ubar0, 1.0, 0.0, ubar0));

    let mut r = Report::new();
    r.put("report.kind", "rates");
    r.put("input.csv", csv.display().to_string());
    r.put("input.lambda1", lambda1);
    r.put("input.ubar0", ubar0);
    r.put("input.samples", ts.len());
    for f in Field::ALL {
        r.put(format!("input.floor_reference.{f}"), *eq.get(f));
    }
    let conservation_ok = put_conservation_audit(&mut r, &ts, x.audit.drift_tol);
    let bounds = theoretical_rates(lambda1, ubar0)?;
    put_rate_bounds(&mut r, &bounds);
    let audits = audit_rates(&ts, &eq, &bounds, &x.audit)?;
    let rates_ok = put_rate_audit(&mut r, &audits, &bounds, x.audit.slack);
    let pass = conservation_ok && rates_ok;
    r.put("audit.pass", pass);
    let exit_code = exit_for(pass);
    r.put("exit_code", exit_code as u64);
    Ok(Outcome { report: r, exit_code })
}
