//! Empirical decay rates and audits against the theoretical bounds.

use alloc::vec::Vec;


#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::solver::Diagnostics;
use crate::theory::{EnvelopeBounds, RateBounds};
use crate::{Error, Field, PerField, Result};

/// Below this goodness of fit a tail is flagged as non-exponential.
pub const EXPONENTIAL_R2: f64 = 0.99;

/// Default fraction of usable samples (taken from the end) used in a fit.
pub const DEFAULT_WINDOW: f64 = 0.5;

/// Sampled diagnostics over a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub dist: PerField<Vec<f64>>,
    pub mass_u: Vec<f64>,
    pub mass_vw: Vec<f64>,
    pub min_all: Vec<f64>,
    pub criterion_norm: Vec<f64>,
    pub t0: Option<f64>,
}

impl TimeSeries {
    pub fn from_diagnostics(diags: &[Diagnostics], t0: Option<f64>) -> Self {
        let col = |f: &dyn Fn(&Diagnostics) -> f64| diags.iter().map(f).collect::<Vec<_>>();
        Self {
            times: col(&|d| d.time),
            dist: PerField::from_fn(|field| col(&|d| *d.dist.get(field))),
            mass_u: col(&|d| d.mass_u),
            mass_vw: col(&|d| d.mass_vw),
            min_all: col(&|d| d.min_all),
            criterion_norm: col(&|d| d.criterion_norm),
            t0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Checks equal column lengths, strictly increasing times and
    /// nonnegative distances.
    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        let cols = [
            &self.dist.u,
            &self.dist.v,
            &self.dist.w,
            &self.dist.z,
            &self.mass_u,
            &self.mass_vw,
            &self.min_all,
            &self.criterion_norm,
        ];
        if let Some(c) = cols.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: c.len(),
            });
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameters("sample times must increase strictly".into()));
        }
        for (field, d) in self.dist.iter() {
            if d.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::InvalidParameters(alloc::format!(
                    "negative or NaN distance for {field}"
                )));
            }
        }
        Ok(())
    }

    /// Relative drift `max |m(t) − m(0)| / |m(0)|` of a mass column.
    pub fn relative_drift(masses: &[f64]) -> f64 {
        let Some(&m0) = masses.first() else {
            return 0.0;
        };
        let worst = masses.iter().fold(0.0f64, |w, m| w.max((m - m0).abs()));
        if m0 == 0.0 {
            worst
        } else {
            worst / m0.abs()
        }
    }
}

/// Least-squares fit of `log y = intercept − rate·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points_used: usize,
}

impl RateFit {
    pub fn is_exponential(&self) -> bool {
        self.r_squared >= EXPONENTIAL_R2
    }
}

/// Noise floor for a distance series: `1e−10` of its peak, but never below
/// the linear-solve noise around the equilibrium value.
pub fn default_floor(peak_distance: f64, equilibrium_value: f64) -> f64 {
    (1e-10 * peak_distance).max(1e-13 * equilibrium_value.abs().max(1.0))
}

/// [`default_floor`] for a whole series.
pub fn series_floor(values: &[f64], equilibrium_value: f64) -> f64 {
    let peak = values.iter().copied().filter(|y| y.is_finite()).fold(0.0, f64::max);
    default_floor(peak, equilibrium_value)
}

/// [`fit_exponential_rate_with`] over the default window.
pub fn fit_exponential_rate(times: &[f64], values: &[f64], floor: f64) -> Result<RateFit> {
    fit_exponential_rate_with(times, values, floor, DEFAULT_WINDOW)
}

/// Fits the tail of a decaying series.
///
/// Samples are usable from the peak of the series up to the first one at or
/// below `floor` after it; the fit uses the last `window` fraction of the
/// usable samples (at least three). Starting at the peak matters for fields
/// that begin at equilibrium and are only later driven away from it.
pub fn fit_exponential_rate_with(
    times: &[f64],
    values: &[f64],
    floor: f64,
    window: f64,
) -> Result<RateFit> {
    if times.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidParameters(alloc::format!("fit window {window}")));
    }
    let peak = values
        .iter()
        .enumerate()
        .take_while(|(_, y)| y.is_finite())
        .fold((0, f64::NEG_INFINITY), |best, (i, &y)| if y > best.1 { (i, y) } else { best })
        .0;
    let end = values[peak..]
        .iter()
        .position(|&y| !(y > floor && y.is_finite()))
        .map_or(values.len(), |k| peak + k);
    let usable = end - peak;
    if usable < 3 {
        return Err(Error::InsufficientData { usable });
    }
    let take = ((usable as f64 * window).ceil() as usize).clamp(3, usable);
    let start = end - take;
    let ts = &times[start..end];
    let ys: Vec<f64> = values[start..end].iter().map(|y| y.ln()).collect();

    let n = take as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameters("fit window has zero time span".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let ss_res: f64 = ts
        .iter()
        .zip(&ys)
        .map(|(t, y)| {
            let r = y - (intercept + slope * t);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(RateFit {
        rate: -slope,
        intercept,
        r_squared,
        window: (ts[0], ts[take - 1]),
        points_used: take,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateVerdict {
    pub fitted: f64,
    pub bound: f64,
    /// `(1 − slack)·bound`.
    pub threshold: f64,
    pub pass: bool,
    /// r² below [`EXPONENTIAL_R2`]; a warning, never a failure.
    pub non_exponential: bool,
}

/// Passes iff the fitted rate is at least `(1 − slack)` times the bound.
pub fn compare_rate(fit: &RateFit, bound: f64, slack: f64) -> Result<RateVerdict> {
    if !(0.0..0.5).contains(&slack) {
        return Err(Error::InvalidParameters(alloc::format!(
            "slack {slack} outside [0, 0.5)"
        )));
    }
    let threshold = (1.0 - slack) * bound;
    Ok(RateVerdict {
        fitted: fit.rate,
        bound,
        threshold,
        pass: fit.rate >= threshold,
        non_exponential: !fit.is_exponential(),
    })
}

pub fn compare_rates(
    fits: &PerField<RateFit>,
    bounds: &RateBounds,
    slack: f64,
) -> Result<PerField<RateVerdict>> {
    Ok(PerField {
        u: compare_rate(&fits.u, bounds.u, slack)?,
        v: compare_rate(&fits.v, bounds.v, slack)?,
        w: compare_rate(&fits.w, bounds.w, slack)?,
        z: compare_rate(&fits.z, bounds.z, slack)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeResult {
    pub pass: PerField<bool>,
    /// Minimum over checked samples of `(bound − observed)/bound`.
    pub worst_margin: PerField<f64>,
    pub samples_checked: usize,
    pub t0: f64,
}

impl EnvelopeResult {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|(_, p)| *p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeAudit {
    /// The series never reached t₀.
    NotApplicable,
    Checked(EnvelopeResult),
}

/// Checks `dist(t) ≤ m·exp(−rate·(t − t₀))` at every sample with `t ≥ t₀`.
pub fn envelope_check(ts: &TimeSeries, env: &EnvelopeBounds, bounds: &RateBounds) -> EnvelopeAudit {
    let Some(t0) = ts.t0 else {
        return EnvelopeAudit::NotApplicable;
    };
    let mut pass = PerField::from_fn(|_| true);
    let mut worst = PerField::from_fn(|_| f64::INFINITY);
    let mut checked = 0;
    for (k, &t) in ts.times.iter().enumerate() {
        if t < t0 {
            continue;
        }
        checked += 1;
        for field in Field::ALL {
            let bound = env.m.get(field) * (-bounds.get(field) * (t - t0)).exp();
            let observed = ts.dist.get(field)[k];
            let margin = if bound > 0.0 {
                (bound - observed) / bound
            } else if observed <= 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            };
            if observed > bound {
                *pass.get_mut(field) = false;
            }
            let w = worst.get_mut(field);
            *w = w.min(margin);
        }
    }
    EnvelopeAudit::Checked(EnvelopeResult {
        pass,
        worst_margin: worst,
        samples_checked: checked,
        t0,
    })
}
