//! Line-oriented experiment configuration.
//!
//! ```text
//! # comments run to end of line
//! seed = 7
//! domain.lengths = pi, pi/2
//! domain.cells = 64, 32
//! init.u = cos 1 0.5 1      # c + a·cos(kπx/L) along axis 0
//! init.z = const 1
//! solver.t_end = 30
//! ```
//!
//! Every key is `section.key = value` (plus the bare `seed`). Unknown or
//! repeated keys are errors. Relative paths resolve against the directory
//! of the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use chemolab_core::grid::{Domain, GridField};
use chemolab_core::solver::SolverConfig;
use chemolab_core::state::FieldQuad;
use chemolab_core::{Field, PerField};

use crate::error::{CliError, Result};

/// How one initial field is built.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Constant(f64),
    /// `c + a·cos(kπx_axis/L_axis)`.
    Cosine { c: f64, a: f64, k: usize, axis: usize },
    /// Cell values, x fastest, whitespace or comma separated.
    File(PathBuf),
}

impl InitSpec {
    pub fn build(&self, domain: &Domain) -> Result<GridField> {
        match self {
            InitSpec::Constant(c) => Ok(GridField::constant(*domain, *c)),
            InitSpec::Cosine { c, a, k, axis } => {
                if *axis >= domain.dims() {
                    return Err(CliError::config(format!(
                        "cosine axis {axis} on a {}-dimensional domain",
                        domain.dims()
                    )));
                }
                let mode = GridField::cosine_mode(*domain, *axis, *k);
                Ok(mode.map(|m| c + a * m))
            }
            InitSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let values = parse_values(&text).map_err(|(line, msg)| CliError::Config {
                    line: Some(line),
                    message: format!("{}: {msg}", path.display()),
                })?;
                if values.len() != domain.len() {
                    return Err(CliError::config(format!(
                        "{}: expected {} values, found {}",
                        path.display(),
                        domain.len(),
                        values.len()
                    )));
                }
                Ok(GridField::from_values(*domain, values)?)
            }
        }
    }

    /// The sweep scaling of a perturbation: `c + a·cos` becomes `c + s·a·cos`
    /// and file data `f` becomes `mean + s·(f − mean)`.
    pub fn scale_perturbation(&self, domain: &Domain, s: f64) -> Result<GridField> {
        match self {
            InitSpec::Cosine { c, a, k, axis } => InitSpec::Cosine {
                c: *c,
                a: s * a,
                k: *k,
                axis: *axis,
            }
            .build(domain),
            _ => {
                let f = self.build(domain)?;
                let m = chemolab_core::state::mean(&f);
                Ok(f.map(|x| m + s * (x - m)))
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Constant(c) => write!(f, "const {c}"),
            InitSpec::Cosine { c, a, k, axis } => write!(f, "cos {c} {a} {k} {axis}"),
            InitSpec::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

fn parse_values(text: &str) -> std::result::Result<Vec<f64>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| (i + 1, format!("not a number: '{tok}'")))?;
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    /// Fitted rates pass at `(1 − slack)·bound`.
    pub slack: f64,
    /// Fixed noise floor; per-series default when absent.
    pub floor: Option<f64>,
    pub window: f64,
    /// Allowed relative drift of ∫u and ∫(v + w).
    pub drift_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            slack: 0.1,
            floor: None,
            window: chemolab_core::rates::DEFAULT_WINDOW,
            drift_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryConfig {
    /// Multiplies estimated k values (not explicit overrides).
    pub k_safety: f64,
    /// Exponent P of the k estimates; `3n` when absent.
    pub p: Option<f64>,
    pub n_effective: usize,
    pub samples: usize,
    pub t_points: usize,
    pub k: [Option<f64>; 4],
    pub smallness_eps: f64,
}

impl Default for TheoryConfig {
    fn default() -> Self {
        Self {
            k_safety: 2.0,
            p: None,
            n_effective: 4,
            samples: 200,
            t_points: 40,
            k: [None; 4],
            smallness_eps: 0.1,
        }
    }
}

impl TheoryConfig {
    pub fn p_for(&self, domain: &Domain) -> f64 {
        self.p.unwrap_or(3.0 * domain.dims() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub csv: PathBuf,
    pub report: PathBuf,
    pub json: PathBuf,
    /// Table written by `sweep`.
    pub sweep: PathBuf,
}

impl OutputConfig {
    fn defaults(base: &Path, stem: &str) -> Self {
        Self {
            csv: base.join(format!("{stem}.csv")),
            report: base.join(format!("{stem}.report")),
            json: base.join(format!("{stem}.report.json")),
            sweep: base.join(format!("{stem}.sweep.csv")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub init: PerField<InitSpec>,
    pub solver: SolverConfig,
    pub audit: AuditConfig,
    pub theory: TheoryConfig,
    pub output: OutputConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn initial_state(&self) -> Result<FieldQuad> {
        let f = |field| self.init.get(field).build(&self.domain);
        Ok(FieldQuad::new(f(Field::U)?, f(Field::V)?, f(Field::W)?, f(Field::Z)?)?)
    }

    /// Effective settings as `(key, value)` pairs in a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let d = &self.domain;
        let list = |f: &dyn Fn(usize) -> String| (0..d.dims()).map(f).collect::<Vec<_>>().join(", ");
        let s = &self.solver;
        let mut out = vec![
            ("seed".to_string(), self.seed.to_string()),
            ("domain.dims".into(), d.dims().to_string()),
            ("domain.lengths".into(), list(&|a| format_setting(d.length(a)))),
            ("domain.cells".into(), list(&|a| d.cells(a).to_string())),
        ];
        for field in Field::ALL {
            out.push((format!("init.{field}"), self.init.get(field).to_string()));
        }
        out.extend([
            ("solver.t_end".into(), format_setting(s.t_end)),
            ("solver.dt_max".into(), format_setting(s.dt_max)),
            ("solver.cfl_safety".into(), format_setting(s.cfl_safety)),
            ("solver.tol_lin".into(), format_setting(s.tol_lin)),
            ("solver.sample_every".into(), format_setting(s.sample_every)),
            ("solver.blowup_threshold".into(), format_setting(s.blowup_threshold)),
            ("solver.criterion_epsilon".into(), format_setting(s.criterion_epsilon)),
            ("audit.slack".into(), format_setting(self.audit.slack)),
            (
                "audit.floor".into(),
                self.audit.floor.map_or("auto".into(), format_setting),
            ),
            ("audit.window".into(), format_setting(self.audit.window)),
            ("audit.drift_tol".into(), format_setting(self.audit.drift_tol)),
            ("theory.k_safety".into(), format_setting(self.theory.k_safety)),
            ("theory.p".into(), format_setting(self.theory.p_for(d))),
            ("theory.n_effective".into(), self.theory.n_effective.to_string()),
            ("theory.samples".into(), self.theory.samples.to_string()),
            ("theory.t_points".into(), self.theory.t_points.to_string()),
        ]);
        for (i, k) in self.theory.k.iter().enumerate() {
            out.push((
                format!("theory.k{}", i + 1),
                k.map_or("estimated".into(), format_setting),
            ));
        }
        out.push(("theory.smallness_eps".into(), format_setting(self.theory.smallness_eps)));
        out
    }
}

const KEYS: &[&str] = &[
    "seed",
    "domain.dims",
    "domain.lengths",
    "domain.cells",
    "init.u",
    "init.v",
    "init.w",
    "init.z",
    "solver.t_end",
    "solver.dt_max",
    "solver.cfl_safety",
    "solver.tol_lin",
    "solver.sample_every",
    "solver.blowup_threshold",
    "solver.criterion_epsilon",
    "audit.slack",
    "audit.floor",
    "audit.window",
    "audit.drift_tol",
    "theory.k_safety",
    "theory.p",
    "theory.n_effective",
    "theory.samples",
    "theory.t_points",
    "theory.k1",
    "theory.k2",
    "theory.k3",
    "theory.k4",
    "theory.smallness_eps",
    "output.csv",
    "output.report",
    "output.json",
    "output.sweep",
];

/// Shortest round-trip form, in exponent notation when very small or large.
pub fn format_setting(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parses a number, also accepting `pi`, `pi/x` and `x*pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let pi = std::f64::consts::PI;
    if s == "pi" {
        return Some(pi);
    }
    if let Some(rest) = s.strip_prefix("pi/") {
        return rest.trim().parse::<f64>().ok().map(|d| pi / d);
    }
    if let Some(rest) = s.strip_suffix("*pi") {
        return rest.trim().parse::<f64>().ok().map(|m| m * pi);
    }
    None
}

fn list(value: &str) -> Vec<&str> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        CliError::at_line(self.line, format!("{key}: {msg}"))
    }

    fn number(&self, key: &str) -> Result<f64> {
        parse_number(self.value).ok_or_else(|| self.err(key, format!("expected a number, got '{}'", self.value)))
    }

    fn integer(&self, key: &str) -> Result<u64> {
        self.value
            .parse()
            .map_err(|_| self.err(key, format!("expected a nonnegative integer, got '{}'", self.value)))
    }

    fn init(&self, key: &str, base: &Path) -> Result<InitSpec> {
        let toks = list(self.value);
        let num = |i: usize| -> Result<f64> {
            let t = toks.get(i).ok_or_else(|| self.err(key, "missing argument"))?;
            parse_number(t).ok_or_else(|| self.err(key, format!("expected a number, got '{t}'")))
        };
        let int = |i: usize| -> Result<usize> {
            let t = toks.get(i).ok_or_else(|| self.err(key, "missing argument"))?;
            t.parse().map_err(|_| self.err(key, format!("expected an integer, got '{t}'")))
        };
        match toks.first().copied() {
            Some("const") if toks.len() == 2 => Ok(InitSpec::Constant(num(1)?)),
            Some("cos") if toks.len() == 4 || toks.len() == 5 => Ok(InitSpec::Cosine {
                c: num(1)?,
                a: num(2)?,
                k: int(3)?,
                axis: if toks.len() == 5 { int(4)? } else { 0 },
            }),
            Some("file") => {
                let rest = self.value.trim_start()["file".len()..].trim();
                if rest.is_empty() {
                    return Err(self.err(key, "missing file path"));
                }
                let path = base.join(rest);
                if !path.is_file() {
                    return Err(self.err(key, format!("no such file: {}", path.display())));
                }
                Ok(InitSpec::File(path))
            }
            _ => Err(self.err(
                key,
                format!("expected 'const c', 'cos c a k [axis]' or 'file path', got '{}'", self.value),
            )),
        }
    }
}

/// Parses config text; `base` resolves relative paths and `stem` names the
/// default output files.
pub fn parse_config(text: &str, base: &Path, stem: &str) -> Result<ExperimentConfig> {
    let mut entries: Vec<(&str, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::at_line(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::at_line(line, format!("unknown key '{key}'")));
        }
        if let Some((_, prev)) = entries.iter().find(|(k, _)| *k == key) {
            return Err(CliError::at_line(
                line,
                format!("duplicate key '{key}' (first set on line {})", prev.line),
            ));
        }
        if value.is_empty() {
            return Err(CliError::at_line(line, format!("{key}: missing value")));
        }
        entries.push((key, Entry { line, value }));
    }
    let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, e)| e);
    let required = |key: &str| get(key).ok_or_else(|| CliError::config(format!("missing required key '{key}'")));

    let lengths_entry = required("domain.lengths")?;
    let lengths = list(lengths_entry.value)
        .iter()
        .map(|t| parse_number(t).ok_or_else(|| lengths_entry.err("domain.lengths", format!("expected a number, got '{t}'"))))
        .collect::<Result<Vec<f64>>>()?;
    let cells_entry = required("domain.cells")?;
    let cells = list(cells_entry.value)
        .iter()
        .map(|t| t.parse::<usize>().map_err(|_| cells_entry.err("domain.cells", format!("expected an integer, got '{t}'"))))
        .collect::<Result<Vec<usize>>>()?;
    if let Some(e) = get("domain.dims") {
        let dims = e.integer("domain.dims")? as usize;
        if dims != lengths.len() || dims != cells.len() {
            return Err(e.err(
                "domain.dims",
                format!("{dims} does not match {} lengths and {} cell counts", lengths.len(), cells.len()),
            ));
        }
    }
    let domain = Domain::new(&lengths, &cells).map_err(|e| cells_entry.err("domain", e))?;

    let u = required("init.u")?.init("init.u", base)?;
    let init_or_zero = |key: &str| get(key).map_or(Ok(InitSpec::Constant(0.0)), |e| e.init(key, base));
    let init = PerField::new(u, init_or_zero("init.v")?, init_or_zero("init.w")?, init_or_zero("init.z")?);

    let num_or = |key: &str, default: f64| get(key).map_or(Ok(default), |e| e.number(key));
    let int_or = |key: &str, default: u64| get(key).map_or(Ok(default), |e| e.integer(key));

    let d = SolverConfig::default();
    let solver = SolverConfig {
        t_end: num_or("solver.t_end", d.t_end)?,
        dt_max: num_or("solver.dt_max", d.dt_max)?,
        cfl_safety: num_or("solver.cfl_safety", d.cfl_safety)?,
        tol_lin: num_or("solver.tol_lin", d.tol_lin)?,
        sample_every: num_or("solver.sample_every", d.sample_every)?,
        blowup_threshold: num_or("solver.blowup_threshold", d.blowup_threshold)?,
        criterion_epsilon: num_or("solver.criterion_epsilon", d.criterion_epsilon)?,
    };
    solver.validate(&domain)?;

    let a = AuditConfig::default();
    let audit = AuditConfig {
        slack: num_or("audit.slack", a.slack)?,
        floor: get("audit.floor").map(|e| e.number("audit.floor")).transpose()?,
        window: num_or("audit.window", a.window)?,
        drift_tol: num_or("audit.drift_tol", a.drift_tol)?,
    };
    if !(0.0..0.5).contains(&audit.slack) {
        return Err(get("audit.slack").unwrap().err("audit.slack", "must lie in [0, 0.5)"));
    }
    if !(audit.window > 0.0 && audit.window <= 1.0) {
        return Err(get("audit.window").unwrap().err("audit.window", "must lie in (0, 1]"));
    }

    let t = TheoryConfig::default();
    let mut theory = TheoryConfig {
        k_safety: num_or("theory.k_safety", t.k_safety)?,
        p: get("theory.p").map(|e| e.number("theory.p")).transpose()?,
        n_effective: int_or("theory.n_effective", t.n_effective as u64)? as usize,
        samples: int_or("theory.samples", t.samples as u64)? as usize,
        t_points: int_or("theory.t_points", t.t_points as u64)? as usize,
        k: [None; 4],
        smallness_eps: num_or("theory.smallness_eps", t.smallness_eps)?,
    };
    for i in 0..4 {
        let key = format!("theory.k{}", i + 1);
        if let Some(e) = get(&key) {
            let k = e.number(&key)?;
            if !(k > 0.0 && k.is_finite()) {
                return Err(e.err(&key, "must be positive"));
            }
            theory.k[i] = Some(k);
        }
    }
    if !(theory.k_safety >= 1.0 && theory.k_safety.is_finite()) {
        return Err(CliError::config("theory.k_safety must be at least 1"));
    }
    if theory.p_for(&domain) <= 2.0 {
        return Err(CliError::config("theory.p must exceed 2"));
    }
    if theory.samples == 0 || theory.t_points < 2 {
        return Err(CliError::config("theory.samples must be positive and theory.t_points at least 2"));
    }

    let mut output = OutputConfig::defaults(base, stem);
    if let Some(e) = get("output.csv") {
        output.csv = base.join(e.value);
    }
    if let Some(e) = get("output.report") {
        output.report = base.join(e.value);
        output.json = output.report.with_extension("json");
    }
    if let Some(e) = get("output.json") {
        output.json = base.join(e.value);
    }
    if let Some(e) = get("output.sweep") {
        output.sweep = base.join(e.value);
    }

    let seed = int_or("seed", 0)?;
    Ok(ExperimentConfig {
        domain,
        init,
        solver,
        audit,
        theory,
        output,
        seed,
    })
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("chemolab");
    parse_config(&text, base, stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config(text, Path::new("/tmp"), "t")
    }

    fn line_of(e: CliError) -> Option<usize> {
        match e {
            CliError::Config { line, .. } => line,
            other => panic!("not a config error: {other}"),
        }
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse("domain.lengths = pi\ndomain.cells = 16\ninit.u = const 1\n").unwrap();
        assert_eq!(c.domain.cells(0), 16);
        assert_eq!(c.init.v, InitSpec::Constant(0.0));
        assert_eq!(c.solver, SolverConfig::default());
        assert_eq!(c.theory.p_for(&c.domain), 3.0);
        assert_eq!(c.output.csv, Path::new("/tmp/t.csv"));
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("pi/2"), Some(std::f64::consts::FRAC_PI_2));
        assert_eq!(parse_number("2*pi"), Some(2.0 * std::f64::consts::PI));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("p"), None);
    }

    #[test]
    fn init_forms() {
        let c = parse(
            "domain.lengths = 1, 2\ndomain.cells = 8 8\ninit.u = cos 1 0.5 2 1\ninit.v = const 3 # note\n",
        )
        .unwrap();
        assert_eq!(c.init.u, InitSpec::Cosine { c: 1.0, a: 0.5, k: 2, axis: 1 });
        assert_eq!(c.init.v, InitSpec::Constant(3.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("domain.lengths = pi\n\ndomain.cell = 16\n").unwrap_err();
        assert_eq!(line_of(e), Some(3));
        let e = parse("domain.lengths = pi\ndomain.cells = x\ninit.u = const 1\n").unwrap_err();
        assert_eq!(line_of(e), Some(2));
        let e = parse("domain.lengths = pi\ndomain.cells = 8\ninit.u = const 1\ninit.u = const 2\n").unwrap_err();
        assert_eq!(line_of(e), Some(4));
        let e = parse("domain.lengths = pi\ndomain.cells = 8\ninit.u = linear 1\n").unwrap_err();
        assert_eq!(line_of(e), Some(3));
        let e = parse("domain.lengths = pi\ndomain.cells = 8\n").unwrap_err();
        assert!(e.to_string().contains("init.u"));
    }

    #[test]
    fn rejects_small_grid() {
        let e = parse("domain.lengths = pi\ndomain.cells = 3\ninit.u = const 1\n").unwrap_err();
        assert_eq!(line_of(e), Some(2));
    }

    #[test]
    fn rejects_bad_settings() {
        let base = "domain.lengths = pi\ndomain.cells = 8\ninit.u = const 1\n";
        for extra in ["audit.slack = 0.6", "solver.cfl_safety = 2", "theory.p = 2", "theory.k2 = -1"] {
            assert!(parse(&format!("{base}{extra}\n")).is_err(), "{extra}");
        }
    }
}
