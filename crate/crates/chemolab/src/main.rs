use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemolab::cmd::bounds::{bounds, BoundsInputs};
use chemolab::cmd::rates::{rates, RatesInputs};
use chemolab::cmd::semigroup::{default_exponents, semigroup_check, SemigroupInputs};
use chemolab::cmd::simulate::simulate;
use chemolab::cmd::sweep::sweep;
use chemolab::cmd::{thread_pool, Outcome};
use chemolab::config::{load_config, parse_number, AuditConfig};
use chemolab::{exit, CliError, Result};
use chemolab_core::grid::Domain;
use chemolab_core::semigroup::{SmoothingEstimate, SmoothingKind};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chemolab", version, about = "Simulate and audit the chemotaxis tumor-invasion system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn number(s: &str) -> std::result::Result<f64, String> {
    parse_number(s).ok_or_else(|| format!("not a number: '{s}'"))
}

#[derive(Subcommand)]
enum Command {
    /// Run a config, write CSV and report, audit rates and envelopes.
    Simulate { config: PathBuf },
    /// Print rate bounds and envelope constants for given inputs.
    Bounds {
        #[arg(long, value_parser = number)]
        lambda1: f64,
        #[arg(long, value_parser = number)]
        ubar0: f64,
        #[arg(long, value_parser = number, default_value = "0")]
        vbar0: f64,
        #[arg(long, value_parser = number, default_value = "0")]
        wbar0: f64,
        /// Defaults to wbar0 (constant w0).
        #[arg(long, value_parser = number)]
        w0_inf: Option<f64>,
        /// ‖∇v(t0)‖_p.
        #[arg(long, value_parser = number, default_value = "0")]
        grad_v: f64,
        /// |Ω|.
        #[arg(long, value_parser = number, default_value = "pi")]
        measure: f64,
        #[arg(long, value_parser = number, default_value = "3")]
        p: f64,
        /// k1,k2,k3,k4.
        #[arg(long, value_parser = number, value_delimiter = ',', default_value = "1,1,1,1")]
        k: Vec<f64>,
        #[arg(long, value_parser = number, default_value = "0")]
        t0: f64,
        /// Also write the JSON mirror here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// One run per scale of the initial perturbation.
    Sweep {
        config: PathBuf,
        #[arg(long, value_parser = number, value_delimiter = ',')]
        scales: Vec<f64>,
    },
    /// Re-audit an existing time-series CSV.
    Rates {
        csv: PathBuf,
        /// Take lambda1, ubar0 and the equilibrium from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = number)]
        lambda1: Option<f64>,
        #[arg(long, value_parser = number)]
        ubar0: Option<f64>,
        #[arg(long, value_parser = number, default_value = "0.1")]
        slack: f64,
        #[arg(long, value_parser = number, default_value = "0.5")]
        window: f64,
        #[arg(long, value_parser = number)]
        floor: Option<f64>,
        #[arg(long, value_parser = number, default_value = "1e-8")]
        drift_tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Estimate the heat-semigroup smoothing constants on a grid.
    SemigroupCheck {
        /// Domain lengths, e.g. `pi` or `pi,pi/2`.
        #[arg(long, value_parser = number, value_delimiter = ',')]
        lengths: Vec<f64>,
        /// Cells per axis, e.g. `64` or `64,32`.
        #[arg(long, value_delimiter = ',')]
        cells: Vec<usize>,
        /// Subset of i,ii,iii,iv.
        #[arg(long, value_delimiter = ',', default_value = "i,ii,iii,iv")]
        kinds: Vec<String>,
        /// Overrides the per-kind default target exponent.
        #[arg(long, value_parser = number)]
        p: Option<f64>,
        /// Overrides the per-kind default source exponent.
        #[arg(long, value_parser = number)]
        q: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        t_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write_json(outcome: &Outcome, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, outcome.report.to_json()).map_err(|e| CliError::io(p, e)),
        None => Ok(()),
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Simulate { config } => simulate(&load_config(&config)?),
        Command::Bounds {
            lambda1,
            ubar0,
            vbar0,
            wbar0,
            w0_inf,
            grad_v,
            measure,
            p,
            k,
            t0,
            json,
        } => {
            let k: [f64; 4] = k
                .try_into()
                .map_err(|_| CliError::config("--k takes exactly four values"))?;
            let out = bounds(&BoundsInputs {
                lambda1,
                ubar0,
                vbar0,
                wbar0,
                w0_inf: w0_inf.unwrap_or(wbar0),
                grad_v,
                measure,
                p,
                k,
                t0,
            })?;
            write_json(&out, json.as_deref())?;
            Ok(out)
        }
        Command::Sweep { config, scales } => sweep(&load_config(&config)?, &scales, &thread_pool()?),
        Command::Rates {
            csv,
            config,
            lambda1,
            ubar0,
            slack,
            window,
            floor,
            drift_tol,
            json,
        } => {
            if !(0.0..0.5).contains(&slack) || !(window > 0.0 && window <= 1.0) {
                return Err(CliError::config("--slack must lie in [0, 0.5) and --window in (0, 1]"));
            }
            let out = rates(
                &csv,
                &RatesInputs {
                    config: config.as_deref().map(load_config).transpose()?,
                    lambda1,
                    ubar0,
                    audit: AuditConfig {
                        slack,
                        floor,
                        window,
                        drift_tol,
                    },
                },
            )?;
            write_json(&out, json.as_deref())?;
            Ok(out)
        }
        Command::SemigroupCheck {
            lengths,
            cells,
            kinds,
            p,
            q,
            samples,
            t_points,
            seed,
            json,
        } => {
            let domain = Domain::new(&lengths, &cells)?;
            let estimates = kinds
                .iter()
                .map(|label| {
                    let kind = SmoothingKind::from_label(label.trim())
                        .ok_or_else(|| CliError::config(format!("unknown kind '{label}' (use i, ii, iii, iv)")))?;
                    let (dp, dq) = default_exponents(kind, domain.dims());
                    Ok(SmoothingEstimate::new(kind, p.unwrap_or(dp), q.unwrap_or(dq))?)
                })
                .collect::<Result<Vec<_>>>()?;
            if samples == 0 || t_points < 2 {
                return Err(CliError::config("--samples must be positive and --t-points at least 2"));
            }
            let out = semigroup_check(
                &SemigroupInputs {
                    domain,
                    estimates,
                    samples,
                    t_points,
                    seed,
                },
                &thread_pool()?,
            )?;
            write_json(&out, json.as_deref())?;
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.report.to_text());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
