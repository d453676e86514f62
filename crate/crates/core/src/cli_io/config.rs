//! Run configuration in a flat `key = value` dialect.
//!
//! ```text
//! # comment
//! potential.family = sep_modified
//! potential.alpha  = 10000
//! solver.domain    = [-3, 2.5]      # or `auto`
//! analysis.sweep   = [1, 2, 5, 10]
//! output.format    = "csv"
//! ```
//!
//! Keys are dotted `section.name`; values are numbers, booleans, bare or
//! double-quoted strings, or bracketed comma-separated lists of those.
//! Every key may appear at most once.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discretization::DomainOptions;
use crate::error::{Error, Result};
use crate::observables::{DEFAULT_MOMENT_MAX, MAX_MOMENT_ORDER};
use crate::potentials::{Family, PotentialSpec};
use crate::semiclassics::WkbConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::config(format!("unknown output format `{other}` (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainChoice {
    Auto,
    Fixed { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Auto,
    Spacing(f64),
    Points(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub hbar: f64,
    pub mass: f64,
    pub k_states: usize,
    pub tol: f64,
    pub domain: DomainChoice,
    pub resolution: Resolution,
    /// Energy the automatic domain is sized for; defaults to the barrier top
    /// or, for power laws, a little above the highest requested level.
    pub e_cap: Option<f64>,
    pub domain_options: DomainOptions,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            hbar: 1.0,
            mass: 1.0,
            k_states: 60,
            tol: crate::eigensolver::DEFAULT_TOL,
            domain: DomainChoice::Auto,
            resolution: Resolution::Auto,
            e_cap: None,
            domain_options: DomainOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub moment_max: usize,
    /// Amplitudes for `gs-sweep`, `states` and `wkb`.
    pub sweep: Vec<f64>,
    /// Exponents for `powerlaw` and `wkb`.
    pub betas: Vec<f64>,
    /// State indices whose profiles `states` writes.
    pub states: Vec<usize>,
    pub wkb_levels: usize,
    pub wkb: WkbConfig,
    pub period_energies: Vec<f64>,
    pub period_samples: usize,
    pub period_e_max: Option<f64>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            moment_max: DEFAULT_MOMENT_MAX,
            sweep: Vec::new(),
            betas: Vec::new(),
            states: Vec::new(),
            wkb_levels: 20,
            wkb: WkbConfig::default(),
            period_energies: Vec::new(),
            period_samples: 20,
            period_e_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub format: Format,
    /// Significant digits, 6 to 17.
    pub precision: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            directory: PathBuf::from("out"),
            format: Format::Csv,
            precision: 17,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub solver: SolverSettings,
    pub analysis: AnalysisSettings,
    pub output: OutputSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PotentialSpec::sep_modified(1.0),
            solver: SolverSettings::default(),
            analysis: AnalysisSettings::default(),
            output: OutputSettings::default(),
        }
    }
}

impl RunConfig {
    /// Canonical serialization, the input of the provenance hash. The
    /// output directory is left out since it does not affect any table.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.output.directory = PathBuf::new();
        serde_json::to_string(&c).expect("configuration serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    List(Vec<Value>),
}

impl Value {
    fn describe(&self) -> &'static str {
        match self {
            Value::Num(_) => "a number",
            Value::Bool(_) => "a boolean",
            Value::Str(_) => "a string",
            Value::List(_) => "a list",
        }
    }
}

struct Entry {
    value: Value,
    line: usize,
}

fn parse_scalar(text: &str) -> std::result::Result<Value, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("missing value".into());
    }
    if let Some(rest) = t.strip_prefix('"') {
        return match rest.strip_suffix('"') {
            Some(inner) if !inner.contains('"') => Ok(Value::Str(inner.to_string())),
            _ => Err(format!("malformed quoted string {t}")),
        };
    }
    match t {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if let Ok(x) = t.parse::<f64>() {
        return Ok(Value::Num(x));
    }
    if t.chars().all(|c| c.is_ascii_alphanumeric() || "_-./".contains(c)) {
        Ok(Value::Str(t.to_string()))
    } else {
        Err(format!("cannot parse value `{t}`"))
    }
}

fn parse_value(text: &str) -> std::result::Result<Value, String> {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix('[') {
        let inner = rest.strip_suffix(']').ok_or_else(|| format!("unterminated list {t}"))?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        return inner.split(',').map(parse_scalar).collect::<std::result::Result<_, _>>().map(Value::List);
    }
    parse_scalar(t)
}

/// Drops a `#` comment unless it sits inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse {
                key: content.to_string(),
                line,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim().to_string();
        let valid_key = key.contains('.')
            && key.split('.').all(|part| {
                !part.is_empty() && part.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
            });
        if !valid_key {
            return Err(Error::Parse {
                key,
                line,
                message: "keys are dotted lowercase names such as `potential.alpha`".into(),
            });
        }
        let value = parse_value(value).map_err(|message| Error::Parse {
            key: key.clone(),
            line,
            message,
        })?;
        if let Some(previous) = entries.get(&key) {
            let previous: &Entry = previous;
            return Err(Error::Parse {
                key,
                line,
                message: format!("duplicate key, first set on line {}", previous.line),
            });
        }
        entries.insert(key, Entry { value, line });
    }
    Ok(entries)
}

const KNOWN_KEYS: &[&str] = &[
    "potential.family",
    "potential.alpha",
    "potential.delta",
    "potential.beta",
    "potential.energy_cap",
    "solver.hbar",
    "solver.mass",
    "solver.k_states",
    "solver.tol",
    "solver.domain",
    "solver.h",
    "solver.n_points",
    "solver.e_cap",
    "solver.safety",
    "solver.points_per_wavelength",
    "solver.delta_e_floor",
    "solver.max_points",
    "analysis.moment_max",
    "analysis.sweep",
    "analysis.betas",
    "analysis.states",
    "analysis.wkb_levels",
    "analysis.maslov_offset",
    "analysis.quad_points",
    "analysis.root_tol",
    "analysis.period_energies",
    "analysis.period_samples",
    "analysis.period_e_max",
    "output.directory",
    "output.format",
    "output.precision",
];

/// Typed access that reports the offending key and line.
struct Reader {
    entries: BTreeMap<String, Entry>,
}

impl Reader {
    fn error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            key: key.to_string(),
            line: self.entries.get(key).map_or(0, |e| e.line),
            message: message.into(),
        }
    }

    fn type_error(&self, key: &str, expected: &str, found: &Value) -> Error {
        self.error(key, format!("expected {expected}, found {}", found.describe()))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::Num(x)) => Ok(Some(*x)),
            Some(other) => Err(self.type_error(key, "a number", other)),
        }
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.number(key)? {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(self.error(key, format!("must be positive, got {x}"))),
            other => Ok(other),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.number(key)? {
            None => Ok(None),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x < 1e15 => Ok(Some(x as usize)),
            Some(x) => Err(self.error(key, format!("expected a non-negative integer, got {x}"))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.entries.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s.clone())),
            Some(other) => Err(self.type_error(key, "a string", other)),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key).map(|e| &e.value) {
            None => Ok(None),
            Some(Value::List(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Num(x) => Ok(*x),
                    other => Err(self.type_error(key, "a list of numbers", other)),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(other) => Err(self.type_error(key, "a list", other)),
        }
    }

    fn counts(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.numbers(key)? {
            None => Ok(None),
            Some(xs) => xs
                .into_iter()
                .map(|x| {
                    if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
                        Ok(x as usize)
                    } else {
                        Err(self.error(key, format!("expected non-negative integers, got {x}")))
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

/// Parses and validates a configuration document, applying defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    for (key, entry) in &entries {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                key: key.clone(),
                line: entry.line,
                message: "unknown key".into(),
            });
        }
    }
    let r = Reader { entries };
    let mut cfg = RunConfig::default();

    // potential
    let family = match r.string("potential.family")? {
        Some(name) => name.parse::<Family>().map_err(|e| r.error("potential.family", e.to_string()))?,
        None => Family::SepModified,
    };
    let mut spec = PotentialSpec::new(family, r.number("potential.alpha")?.unwrap_or(1.0));
    if let Some(delta) = r.number("potential.delta")? {
        spec.delta = delta;
    }
    match (family, r.number("potential.beta")?) {
        (Family::PowerLaw, None) => {
            return Err(Error::Parse {
                key: "potential.beta".into(),
                line: r.entries.get("potential.family").map_or(0, |e| e.line),
                message: "required when potential.family = power_law".into(),
            })
        }
        (Family::PowerLaw, Some(beta)) => spec.beta = beta,
        (_, Some(_)) => return Err(r.error("potential.beta", "only valid for the power_law family")),
        (_, None) => {}
    }
    if let Some(cap) = r.positive("potential.energy_cap")? {
        spec.energy_cap = cap;
    }
    spec.validate().map_err(|e| {
        let key = match &e {
            Error::Config(msg) if msg.contains("beta") => "potential.beta",
            Error::Config(msg) if msg.contains("delta") => "potential.delta",
            Error::Config(msg) if msg.contains("energy_cap") => "potential.energy_cap",
            _ => "potential.alpha",
        };
        r.error(key, e.to_string())
    })?;
    cfg.potential = spec;

    // solver
    let s = &mut cfg.solver;
    if let Some(x) = r.positive("solver.hbar")? {
        s.hbar = x;
    }
    if let Some(x) = r.positive("solver.mass")? {
        s.mass = x;
    }
    if let Some(k) = r.count("solver.k_states")? {
        if k == 0 {
            return Err(r.error("solver.k_states", "must be at least 1"));
        }
        s.k_states = k;
    }
    if let Some(x) = r.positive("solver.tol")? {
        s.tol = x;
    }
    match r.entries.get("solver.domain").map(|e| &e.value) {
        None => {}
        Some(Value::Str(s_auto)) if s_auto == "auto" => {}
        Some(Value::List(items)) => match items.as_slice() {
            [Value::Num(lo), Value::Num(hi)] if lo < hi && lo.is_finite() && hi.is_finite() => {
                s.domain = DomainChoice::Fixed { lo: *lo, hi: *hi }
            }
            _ => return Err(r.error("solver.domain", "expected `auto` or [lo, hi] with lo < hi")),
        },
        Some(_) => return Err(r.error("solver.domain", "expected `auto` or [lo, hi] with lo < hi")),
    }
    match (r.positive("solver.h")?, r.count("solver.n_points")?) {
        (Some(_), Some(_)) => return Err(r.error("solver.n_points", "conflicts with solver.h; set only one")),
        (Some(h), None) => s.resolution = Resolution::Spacing(h),
        (None, Some(n)) => {
            if n < crate::discretization::STENCIL_ORDER + 1 {
                return Err(r.error("solver.n_points", "must be at least 9"));
            }
            s.resolution = Resolution::Points(n)
        }
        (None, None) => {}
    }
    s.e_cap = r.positive("solver.e_cap")?;
    if let Some(x) = r.positive("solver.safety")? {
        s.domain_options.safety = x;
    }
    if let Some(x) = r.positive("solver.points_per_wavelength")? {
        s.domain_options.points_per_wavelength = x;
    }
    if let Some(x) = r.positive("solver.delta_e_floor")? {
        s.domain_options.delta_e_floor = x;
    }
    if let Some(n) = r.count("solver.max_points")? {
        s.domain_options.max_points = n;
    }

    // analysis
    let a = &mut cfg.analysis;
    if let Some(m) = r.count("analysis.moment_max")? {
        if m > MAX_MOMENT_ORDER {
            return Err(r.error("analysis.moment_max", format!("must not exceed {MAX_MOMENT_ORDER}")));
        }
        a.moment_max = m;
    }
    if let Some(sweep) = r.numbers("analysis.sweep")? {
        if let Some(bad) = sweep.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(r.error("analysis.sweep", format!("amplitudes must be positive, got {bad}")));
        }
        a.sweep = sweep;
    }
    if let Some(betas) = r.numbers("analysis.betas")? {
        if let Some(bad) = betas.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(r.error("analysis.betas", format!("exponents must be positive, got {bad}")));
        }
        a.betas = betas;
    }
    if let Some(states) = r.counts("analysis.states")? {
        a.states = states;
    }
    if let Some(n) = r.count("analysis.wkb_levels")? {
        a.wkb_levels = n;
    }
    if let Some(x) = r.number("analysis.maslov_offset")? {
        a.wkb.maslov_offset = x;
    }
    if let Some(n) = r.count("analysis.quad_points")? {
        a.wkb.quad_points = n;
    }
    if let Some(x) = r.number("analysis.root_tol")? {
        a.wkb.root_tol = x;
    }
    a.wkb.hbar = cfg.solver.hbar;
    a.wkb.validate().map_err(|e| {
        let key = match &e {
            Error::Config(msg) if msg.contains("quad_points") => "analysis.quad_points",
            Error::Config(msg) if msg.contains("root_tol") => "analysis.root_tol",
            _ => "analysis.maslov_offset",
        };
        r.error(key, e.to_string())
    })?;
    if let Some(es) = r.numbers("analysis.period_energies")? {
        a.period_energies = es;
    }
    if let Some(n) = r.count("analysis.period_samples")? {
        if n == 0 {
            return Err(r.error("analysis.period_samples", "must be at least 1"));
        }
        a.period_samples = n;
    }
    a.period_e_max = r.positive("analysis.period_e_max")?;

    // output
    if let Some(dir) = r.string("output.directory")? {
        cfg.output.directory = PathBuf::from(dir);
    }
    if let Some(fmt) = r.string("output.format")? {
        cfg.output.format = fmt.parse().map_err(|e: Error| r.error("output.format", e.to_string()))?;
    }
    if let Some(p) = r.count("output.precision")? {
        if !(6..=17).contains(&p) {
            return Err(r.error("output.precision", format!("must lie in [6, 17], got {p}")));
        }
        cfg.output.precision = p;
    }
    Ok(cfg)
}
