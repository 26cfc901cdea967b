//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! [model]
//! epsilon = 0.1
//! [grid]
//! n = 32
//! ```
//!
//! | section | key | default |
//! |---|---|---|
//! | model | epsilon | required |
//! | model | mu2, gamma2, lambda2, alpha, beta, kappa | 1, 0.5, 1, 1, 0.5, 0 |
//! | model | strict | true |
//! | coupling | mu1_tilde, gamma1_tilde, lambda1_tilde | 1, 1, 1 |
//! | grid | n | required |
//! | grid | dim, length | 3, 2π |
//! | time | dt | from [`stable_dt`](crate::integrate::stable_dt) |
//! | time | t_end, sample_every, dt_max | 1, 1, 0.01 |
//! | init | seed, amplitude, k_cut | 0, 1, 2 |
//! | init | rms | unset (field left as drawn) |
//! | output | dir, energy_csv, relative_csv, snapshot_prefix | "out", "energy.csv", "relative.csv", "snap" |
//! | output | snapshots | true |
//! | diagnostics | energy, apriori | true, true |
//! | diagnostics | gronwall_delta, gronwall_c | 0.1, 1.0 |
//!
//! Strings are double-quoted; booleans are `true` or `false`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::error::Result;
use crate::integrate::stable_dt;
use crate::params::{BaseCoefficients, ModelParams};
use crate::spectral::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("duplicate key `{key}` in [{section}] on lines {first} and {second}")]
    DuplicateKey { section: String, key: String, first: usize, second: usize },
    #[error("missing required key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    InvalidValue { line: usize, key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Str,
}

const SECTIONS: [&str; 7] = ["model", "coupling", "grid", "time", "init", "output", "diagnostics"];

const KEYS: &[(&str, &str, Kind)] = &[
    ("model", "epsilon", Kind::Float),
    ("model", "mu2", Kind::Float),
    ("model", "gamma2", Kind::Float),
    ("model", "lambda2", Kind::Float),
    ("model", "alpha", Kind::Float),
    ("model", "beta", Kind::Float),
    ("model", "kappa", Kind::Float),
    ("model", "strict", Kind::Bool),
    ("coupling", "mu1_tilde", Kind::Float),
    ("coupling", "gamma1_tilde", Kind::Float),
    ("coupling", "lambda1_tilde", Kind::Float),
    ("grid", "n", Kind::Int),
    ("grid", "dim", Kind::Int),
    ("grid", "length", Kind::Float),
    ("time", "dt", Kind::Float),
    ("time", "t_end", Kind::Float),
    ("time", "sample_every", Kind::Int),
    ("time", "dt_max", Kind::Float),
    ("init", "seed", Kind::Int),
    ("init", "amplitude", Kind::Float),
    ("init", "k_cut", Kind::Float),
    ("init", "rms", Kind::Float),
    ("output", "dir", Kind::Str),
    ("output", "energy_csv", Kind::Str),
    ("output", "relative_csv", Kind::Str),
    ("output", "snapshot_prefix", Kind::Str),
    ("output", "snapshots", Kind::Bool),
    ("diagnostics", "energy", Kind::Bool),
    ("diagnostics", "apriori", Kind::Bool),
    ("diagnostics", "gronwall_delta", Kind::Float),
    ("diagnostics", "gronwall_c", Kind::Float),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Str(String),
}

/// Gaussian spectral envelope `amplitude * exp(-|k|² / k_cut²)` of the
/// initial field, optionally rescaled to a target root-mean-square value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpectrum {
    pub amplitude: f64,
    pub k_cut: f64,
    pub rms: Option<f64>,
}

impl InitSpectrum {
    pub fn envelope(&self, k: f64) -> f64 {
        self.amplitude * (-(k * k) / (self.k_cut * self.k_cut)).exp()
    }

    /// Expected root-mean-square value of a field drawn from this spectrum.
    pub fn expected_rms(&self, grid: &Grid) -> f64 {
        if let Some(r) = self.rms {
            return r;
        }
        let mut total = 0.0;
        for_each_active_mode(grid, |k2| {
            let a = self.envelope(k2.sqrt());
            total += a * a;
        });
        total.sqrt()
    }
}

fn for_each_active_mode(grid: &Grid, mut f: impl FnMut(f64)) {
    let d = grid.dim();
    let half: Vec<i64> = grid.modes().iter().map(|&n| n as i64 / 2 - 1).collect();
    let mut m = [0i64; 3];
    let ranges: Vec<i64> = (0..3).map(|j| if j < d { 2 * half[j] + 1 } else { 1 }).collect();
    for a in 0..ranges[0] {
        for b in 0..ranges[1] {
            for c in 0..ranges[2] {
                let raw = [a, b, c];
                for j in 0..d {
                    m[j] = raw[j] - half[j];
                }
                if m == [0, 0, 0] {
                    continue;
                }
                let k = grid.wavevector_of(m);
                f(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub dir: String,
    pub energy_csv: String,
    pub relative_csv: String,
    pub snapshot_prefix: String,
    pub snapshots: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticToggles {
    pub energy: bool,
    pub apriori: bool,
}

/// Everything about a run except the model coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub dt: f64,
    /// True when `dt` came from the stability estimate.
    pub dt_estimated: bool,
    pub dt_max: f64,
    pub t_end: f64,
    pub seed: u64,
    pub init: InitSpectrum,
    pub sample_every: usize,
    pub output: OutputPaths,
    pub diagnostics: DiagnosticToggles,
    pub gronwall_delta: f64,
    pub gronwall_c: f64,
}

impl RunConfig {
    /// Defaults for the given grid; `dt` is `dt_max` until resolved.
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            dt: 0.01,
            dt_estimated: false,
            dt_max: 0.01,
            t_end: 1.0,
            seed: 0,
            init: InitSpectrum { amplitude: 1.0, k_cut: 2.0, rms: None },
            sample_every: 1,
            output: OutputPaths {
                dir: "out".into(),
                energy_csv: "energy.csv".into(),
                relative_csv: "relative.csv".into(),
                snapshot_prefix: "snap".into(),
                snapshots: true,
            },
            diagnostics: DiagnosticToggles { energy: true, apriori: true },
            gronwall_delta: 0.1,
            gronwall_c: 1.0,
        }
    }

    /// Number of steps to reach `t_end`, rounding to the nearest integer.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn check(&self) -> std::result::Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.dt_max > 0.0) {
            return bad(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return bad(format!("t_end ({}) must be at least dt ({})", self.t_end, self.dt));
        }
        if self.sample_every < 1 {
            return bad("sample_every must be at least 1".into());
        }
        if !(self.gronwall_delta > 0.0 && self.gronwall_delta <= 1.0) {
            return bad(format!("gronwall_delta must lie in (0, 1], got {}", self.gronwall_delta));
        }
        if !(self.gronwall_c > 0.0) || !self.gronwall_c.is_finite() {
            return bad(format!("gronwall_c must be positive, got {}", self.gronwall_c));
        }
        if !(self.init.amplitude >= 0.0) || !(self.init.k_cut > 0.0) {
            return bad("init amplitude must be nonnegative and k_cut positive".into());
        }
        if let Some(r) = self.init.rms {
            if !(r >= 0.0) || !r.is_finite() {
                return bad(format!("init rms must be nonnegative, got {r}"));
            }
        }
        Ok(())
    }
}

/// A parsed configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub run: RunConfig,
    pub params: ModelParams,
}

fn parse_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    match kind {
        Kind::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && raw.chars().all(|c| c.is_ascii_digit() || "+-.eE".contains(c)))
            .map(Value::Float)
            .ok_or_else(|| format!("expected a decimal number, got `{raw}`")),
        Kind::Int => raw
            .parse::<u64>()
            .map(Value::Int)
            .map_err(|_| format!("expected a nonnegative integer, got `{raw}`")),
        Kind::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got `{raw}`")),
        },
        Kind::Str => {
            if raw.len() >= 2 && raw.starts_with('"') && raw.ends_with('"') {
                let inner = &raw[1..raw.len() - 1];
                if inner.contains('"') {
                    Err("strings may not contain quotes".into())
                } else {
                    Ok(Value::Str(inner.to_string()))
                }
            } else {
                Err(format!("expected a double-quoted string, got `{raw}`"))
            }
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

type Entries = BTreeMap<(String, String), (Value, usize)>;

fn tokenize(text: &str) -> std::result::Result<Entries, ConfigError> {
    let mut section: Option<String> = None;
    let mut entries = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("unterminated section header `{content}`"),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection { line, name: name.into() });
            }
            section = Some(name.into());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let sec = section.clone().ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("key `{key}` appears before any section header"),
        })?;
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax { line, msg: "empty key or value".into() });
        }
        let kind = KEYS
            .iter()
            .find(|(s, k, _)| *s == sec && *k == key)
            .map(|e| e.2)
            .ok_or_else(|| ConfigError::UnknownKey { line, section: sec.clone(), key: key.into() })?;
        let parsed = parse_value(kind, value)
            .map_err(|msg| ConfigError::InvalidValue { line, key: key.into(), msg })?;
        let slot = (sec.clone(), key.to_string());
        if let Some((_, first)) = entries.get(&slot) {
            return Err(ConfigError::DuplicateKey { section: sec, key: key.into(), first: *first, second: line });
        }
        entries.insert(slot, (parsed, line));
    }
    Ok(entries)
}

struct Reader {
    entries: Entries,
}

impl Reader {
    fn get(&self, s: &str, k: &str) -> Option<&(Value, usize)> {
        self.entries.get(&(s.to_string(), k.to_string()))
    }

    fn float(&self, s: &str, k: &str, default: f64) -> f64 {
        self.opt_float(s, k).unwrap_or(default)
    }

    fn opt_float(&self, s: &str, k: &str) -> Option<f64> {
        match self.get(s, k) {
            Some((Value::Float(v), _)) => Some(*v),
            _ => None,
        }
    }

    fn int(&self, s: &str, k: &str, default: u64) -> u64 {
        match self.get(s, k) {
            Some((Value::Int(v), _)) => *v,
            _ => default,
        }
    }

    fn boolean(&self, s: &str, k: &str, default: bool) -> bool {
        match self.get(s, k) {
            Some((Value::Bool(v), _)) => *v,
            _ => default,
        }
    }

    fn string(&self, s: &str, k: &str, default: &str) -> String {
        match self.get(s, k) {
            Some((Value::Str(v), _)) => v.clone(),
            _ => default.to_string(),
        }
    }

    fn require(&self, s: &str, k: &str) -> std::result::Result<(), ConfigError> {
        if self.get(s, k).is_none() {
            return Err(ConfigError::MissingKey { section: s.into(), key: k.into() });
        }
        Ok(())
    }

    fn line(&self, s: &str, k: &str) -> usize {
        self.get(s, k).map(|e| e.1).unwrap_or(0)
    }
}

/// Parses a configuration document, applies defaults, validates the model
/// coefficients and resolves `dt` from the stability estimate when absent.
pub fn parse_config(text: &str) -> Result<Config> {
    let r = Reader { entries: tokenize(text)? };
    r.require("model", "epsilon")?;
    r.require("grid", "n")?;

    let defaults = BaseCoefficients::default();
    let base = BaseCoefficients {
        mu1_tilde: r.float("coupling", "mu1_tilde", defaults.mu1_tilde),
        gamma1_tilde: r.float("coupling", "gamma1_tilde", defaults.gamma1_tilde),
        lambda1_tilde: r.float("coupling", "lambda1_tilde", defaults.lambda1_tilde),
        mu2: r.float("model", "mu2", defaults.mu2),
        gamma2: r.float("model", "gamma2", defaults.gamma2),
        lambda2: r.float("model", "lambda2", defaults.lambda2),
        alpha: r.float("model", "alpha", defaults.alpha),
        beta: r.float("model", "beta", defaults.beta),
        kappa: r.float("model", "kappa", defaults.kappa),
    };
    let params = ModelParams::new(
        base,
        r.float("model", "epsilon", 0.0),
        r.boolean("model", "strict", true),
    )?;

    let dim = r.int("grid", "dim", 3) as usize;
    let n = r.int("grid", "n", 0) as usize;
    let length = r.float("grid", "length", 2.0 * PI);
    let grid = Grid::cubic(dim, n, length).map_err(|e| ConfigError::InvalidValue {
        line: r.line("grid", "n"),
        key: "n".into(),
        msg: e.to_string(),
    })?;

    let mut run = RunConfig::new(grid);
    run.t_end = r.float("time", "t_end", run.t_end);
    run.sample_every = r.int("time", "sample_every", 1) as usize;
    run.dt_max = r.float("time", "dt_max", run.dt_max);
    run.seed = r.int("init", "seed", 0);
    run.init = InitSpectrum {
        amplitude: r.float("init", "amplitude", run.init.amplitude),
        k_cut: r.float("init", "k_cut", run.init.k_cut),
        rms: r.opt_float("init", "rms"),
    };
    run.output = OutputPaths {
        dir: r.string("output", "dir", &run.output.dir),
        energy_csv: r.string("output", "energy_csv", &run.output.energy_csv),
        relative_csv: r.string("output", "relative_csv", &run.output.relative_csv),
        snapshot_prefix: r.string("output", "snapshot_prefix", &run.output.snapshot_prefix),
        snapshots: r.boolean("output", "snapshots", true),
    };
    run.diagnostics = DiagnosticToggles {
        energy: r.boolean("diagnostics", "energy", true),
        apriori: r.boolean("diagnostics", "apriori", true),
    };
    run.gronwall_delta = r.float("diagnostics", "gronwall_delta", run.gronwall_delta);
    run.gronwall_c = r.float("diagnostics", "gronwall_c", run.gronwall_c);
    match r.opt_float("time", "dt") {
        Some(dt) => run.dt = dt,
        None => {
            run.dt = stable_dt(&grid, &params, 3.0 * run.init.expected_rms(&grid), run.dt_max);
            run.dt_estimated = true;
        }
    }
    run.check()?;
    Ok(Config { run, params })
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

fn quoted(s: &str) -> String {
    format!("\"{s}\"")
}

impl Config {
    /// Re-emits the configuration with every default materialised. Sections
    /// appear in a fixed order and keys are sorted within each section, so
    /// equal configurations give byte-identical output.
    pub fn canonical(&self) -> String {
        let b = &self.params.base;
        let run = &self.run;
        let g = &run.grid;
        let mut values: BTreeMap<(usize, &str), String> = BTreeMap::new();
        let sec = |s: &str| SECTIONS.iter().position(|x| *x == s).unwrap();
        let mut put = |s: &str, k: &'static str, v: String| {
            values.insert((sec(s), k), v);
        };
        put("model", "epsilon", float(self.params.epsilon));
        put("model", "mu2", float(b.mu2));
        put("model", "gamma2", float(b.gamma2));
        put("model", "lambda2", float(b.lambda2));
        put("model", "alpha", float(b.alpha));
        put("model", "beta", float(b.beta));
        put("model", "kappa", float(b.kappa));
        put("model", "strict", self.params.strict.to_string());
        put("coupling", "mu1_tilde", float(b.mu1_tilde));
        put("coupling", "gamma1_tilde", float(b.gamma1_tilde));
        put("coupling", "lambda1_tilde", float(b.lambda1_tilde));
        put("grid", "n", g.modes()[0].to_string());
        put("grid", "dim", g.dim().to_string());
        put("grid", "length", float(g.lengths()[0]));
        put("time", "dt", float(run.dt));
        put("time", "t_end", float(run.t_end));
        put("time", "sample_every", run.sample_every.to_string());
        put("time", "dt_max", float(run.dt_max));
        put("init", "seed", run.seed.to_string());
        put("init", "amplitude", float(run.init.amplitude));
        put("init", "k_cut", float(run.init.k_cut));
        if let Some(rms) = run.init.rms {
            put("init", "rms", float(rms));
        }
        put("output", "dir", quoted(&run.output.dir));
        put("output", "energy_csv", quoted(&run.output.energy_csv));
        put("output", "relative_csv", quoted(&run.output.relative_csv));
        put("output", "snapshot_prefix", quoted(&run.output.snapshot_prefix));
        put("output", "snapshots", run.output.snapshots.to_string());
        put("diagnostics", "energy", run.diagnostics.energy.to_string());
        put("diagnostics", "apriori", run.diagnostics.apriori.to_string());
        put("diagnostics", "gronwall_delta", float(run.gronwall_delta));
        put("diagnostics", "gronwall_c", float(run.gronwall_c));

        let mut out = String::new();
        let mut current = usize::MAX;
        for ((s, k), v) in &values {
            if *s != current {
                if current != usize::MAX {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{}]", SECTIONS[*s]);
                current = *s;
            }
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const MINIMAL: &str = "[model]\nepsilon = 0.1\n[grid]\nn = 32\n";

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.params.epsilon, 0.1);
        assert_eq!(c.params.base, BaseCoefficients::default());
        assert!(c.params.strict);
        assert_eq!(c.run.grid, Grid::periodic(3, 32).unwrap());
        assert_eq!(c.run.t_end, 1.0);
        assert!(c.run.dt_estimated);
        assert_eq!(c.run.gronwall_delta, 0.1);
        assert_eq!(c.run.gronwall_c, 1.0);
    }

    #[test]
    fn omitted_dt_matches_stability_estimate() {
        let c = parse_config(MINIMAL).unwrap();
        let expect = stable_dt(&c.run.grid, &c.params, 3.0 * c.run.init.expected_rms(&c.run.grid), 0.01);
        assert_eq!(c.run.dt, expect);
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let text = "[model]\nepsilon = 0.1\n# note\nepsilon = 0.2\n[grid]\nn = 8\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(
            err,
            Error::Config(ConfigError::DuplicateKey { section: "model".into(), key: "epsilon".into(), first: 2, second: 4 })
        );
        assert!(err.to_string().contains("lines 2 and 4"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let unknown = parse_config("[model]\nepsilon = 0.1\nfoo = 1\n[grid]\nn = 8\n").unwrap_err();
        assert!(matches!(unknown, Error::Config(ConfigError::UnknownKey { line: 3, .. })));
        let missing = parse_config("[grid]\nn = 8\n").unwrap_err();
        assert!(matches!(missing, Error::Config(ConfigError::MissingKey { .. })));
        let section = parse_config("[modle]\n").unwrap_err();
        assert!(matches!(section, Error::Config(ConfigError::UnknownSection { line: 1, .. })));
        let syntax = parse_config("[model]\nepsilon 0.1\n").unwrap_err();
        assert!(matches!(syntax, Error::Config(ConfigError::Syntax { line: 2, .. })));
        let value = parse_config("[model]\nepsilon = abc\n").unwrap_err();
        assert!(matches!(value, Error::Config(ConfigError::InvalidValue { line: 2, .. })));
    }

    #[test]
    fn model_validation_is_applied() {
        let err = parse_config("[model]\nepsilon = 0.1\nalpha = 0\n[grid]\nn = 8\n").unwrap_err();
        assert_eq!(err, Error::PositivityViolation("alpha"));
        let err = parse_config("[model]\nepsilon = 0.1\nkappa = 0.3\n[grid]\nn = 8\n").unwrap_err();
        assert_eq!(err, Error::StrictModeKappaNonzero(0.3));
    }

    #[test]
    fn canonical_dump_round_trips() {
        let text = "[grid]\nn = 16 # cells\ndim = 2\n[model]\nepsilon = 1e-2\ngamma2 = -1\n[output]\ndir = \"runs/a#1\"\n";
        let c = parse_config(text).unwrap();
        let dump = c.canonical();
        assert_eq!(c.run.output.dir, "runs/a#1");
        let again = parse_config(&dump).unwrap();
        assert_eq!(again.run, RunConfig { dt_estimated: false, ..c.run.clone() });
        assert_eq!(again.params, c.params);
        assert_eq!(again.canonical(), dump);
        assert!(dump.starts_with("[model]\nalpha = 1.0\n"));
    }
}
