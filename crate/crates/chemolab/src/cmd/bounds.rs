use chemolab_core::theory::{envelope_coefficients, theoretical_rates, EnvelopeInputs};

use super::simulate::put_envelope;
use super::{put_rate_bounds, Outcome};
use crate::error::{exit, Result};
use crate::report::Report;

/// Inputs of `chemolab bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsInputs {
    pub lambda1: f64,
    pub ubar0: f64,
    pub vbar0: f64,
    pub wbar0: f64,
    pub w0_inf: f64,
    /// `‖∇v(t₀)‖_p`.
    pub grad_v: f64,
    pub measure: f64,
    pub p: f64,
    pub k: [f64; 4],
    pub t0: f64,
}

/// Rate bounds and envelope coefficients for the given inputs.
pub fn bounds(x: &BoundsInputs) -> Result<Outcome> {
    let mut r = Report::new();
    r.put("report.kind", "bounds");
    r.put("input.lambda1", x.lambda1);
    r.put("input.ubar0", x.ubar0);
    r.put("input.vbar0", x.vbar0);
    r.put("input.wbar0", x.wbar0);
    r.put("input.w0_inf", x.w0_inf);
    r.put("input.grad_v_t0_lp", x.grad_v);
    r.put("input.measure", x.measure);
    r.put("input.p", x.p);
    for (i, k) in x.k.iter().enumerate() {
        r.put(format!("input.k{}", i + 1), *k);
    }
    r.put("input.t0", x.t0);

    let rates = theoretical_rates(x.lambda1, x.ubar0)?;
    put_rate_bounds(&mut r, &rates);
    let env = envelope_coefficients(&EnvelopeInputs {
        k: x.k,
        lambda1: x.lambda1,
        ubar0: x.ubar0,
        vbar0: x.vbar0,
        wbar0: x.wbar0,
        w0_inf: x.w0_inf,
        grad_v_t0_lp: x.grad_v,
        measure: x.measure,
        p: x.p,
        t0: x.t0,
    })?;
    r.put(
        "envelope.branch_rule",
        "A when lambda1 < ubar0/2, else B",
    );
    r.put("envelope.A.formula", "sup_s e^{-(ubar0-lambda1)s/2} int_0^s (1+tau^{-1/2}) e^{-(lambda1-ubar0/2)tau} dtau");
    r.put("envelope.B.formula", "sup_s (s + 2 sqrt(s)) e^{-ubar0 s/3}");
    r.put("envelope.C.formula", "2 k3 |grad v(t0)|_p + 3/2 k2 ubar0 |w0|_inf |Omega|^{1/p} max{A,B}");
    r.put("envelope.D.formula", "int_0^inf (1 + tau^{-2/3}) e^{-(lambda1 - min{lambda1, ubar0/3}/2) tau} dtau");
    r.put("envelope.u.formula", "(5 k1 + 3/2 k4 C D) ubar0");
    r.put("envelope.v.formula", "6 k1 (vbar0 + wbar0) + (36 k1/e + 1) |w0|_inf");
    r.put("envelope.w.formula", "|w0|_inf");
    r.put(
        "envelope.z.formula",
        "ubar0 (5/2 + 2 k1 (3 + (10 k1 + 3 k4 C D)/(2(lambda1 + 1) - min{lambda1, ubar0/3})))",
    );
    put_envelope(&mut r, &env);
    Ok(Outcome {
        report: r,
        exit_code: exit::SUCCESS,
    })
}
