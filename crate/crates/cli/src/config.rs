//! Run configuration: a flat `key = value` file merged with command-line
//! flags, flags winning.
//!
//! Recognized keys: `problem`, `phi`, `operator`, `scheme`, `schemes`, `h`,
//! `mu`, `dt`, `horizon`, `method`, `tol`, `max_iters`, `seed`, `x0`,
//! `reference`, `override_admissibility`, `csv`, `json`, `out_dir`,
//! `record_every`. Dashes and underscores in keys are interchangeable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use fbsplit::flows::Integrator;
use fbsplit::splitters::Scheme;
use fbsplit::{Error, Result};

use crate::inline::parse_list;

pub type KeyValues = BTreeMap<String, String>;

const KEYS: &[&str] = &[
    "problem",
    "phi",
    "operator",
    "scheme",
    "schemes",
    "h",
    "mu",
    "dt",
    "horizon",
    "method",
    "tol",
    "max_iters",
    "seed",
    "x0",
    "reference",
    "override_admissibility",
    "csv",
    "json",
    "out_dir",
    "record_every",
];

pub fn normalize_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<KeyValues> {
    let mut out = KeyValues::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("line {}: expected `key = value`", n + 1)))?;
        let k = normalize_key(k);
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::InvalidInput(format!("line {}: unknown key '{k}'", n + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

pub fn load_config_file(path: &Path) -> Result<KeyValues> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    parse_key_values(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Splitter(Scheme),
    NewtonFlow,
    SemigroupFlow,
    ProxGradFlow,
}

impl RunKind {
    pub const ALL: [RunKind; 6] = [
        RunKind::Splitter(Scheme::Fbn),
        RunKind::Splitter(Scheme::FbClassical),
        RunKind::Splitter(Scheme::FbRelaxed),
        RunKind::NewtonFlow,
        RunKind::SemigroupFlow,
        RunKind::ProxGradFlow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RunKind::Splitter(s) => s.as_str(),
            RunKind::NewtonFlow => "newton-flow",
            RunKind::SemigroupFlow => "semigroup-flow",
            RunKind::ProxGradFlow => "proxgrad-flow",
        }
    }

    pub fn is_flow(self) -> bool {
        !matches!(self, RunKind::Splitter(_))
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Gallery(String),
    Inline { phi: String, operator: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub h: Option<f64>,
    pub mu: Option<f64>,
    pub dt: Option<f64>,
    pub horizon: f64,
    pub method: Integrator,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: Option<u64>,
    pub override_admissibility: bool,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub schemes: Vec<RunKind>,
    pub params: Params,
    pub x0: Option<Vec<f64>>,
    pub reference: Option<Vec<f64>>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

fn num<T: FromStr>(kv: &KeyValues, key: &str) -> Result<Option<T>> {
    kv.get(key)
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidInput(format!("invalid value for {key}: '{s}'")))
        })
        .transpose()
}

fn flag(kv: &KeyValues, key: &str) -> Result<bool> {
    match kv.get(key).map(|s| s.trim().to_ascii_lowercase()) {
        None => Ok(false),
        Some(s) if ["1", "true", "yes", "on"].contains(&s.as_str()) => Ok(true),
        Some(s) if ["0", "false", "no", "off"].contains(&s.as_str()) => Ok(false),
        Some(s) => Err(Error::InvalidInput(format!("invalid value for {key}: '{s}'"))),
    }
}

impl RunConfig {
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let problem = match (kv.get("problem"), kv.get("phi"), kv.get("operator")) {
            (Some(name), None, None) => ProblemSpec::Gallery(name.trim().to_string()),
            (None, Some(phi), Some(op)) => ProblemSpec::Inline {
                phi: phi.clone(),
                operator: op.clone(),
            },
            (None, None, None) => return Err(Error::InvalidInput("no problem given".into())),
            _ => {
                return Err(Error::InvalidInput(
                    "give either a gallery `problem` or both `phi` and `operator`".into(),
                ))
            }
        };
        let schemes = match (kv.get("schemes"), kv.get("scheme")) {
            (Some(list), _) => list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(RunKind::from_str)
                .collect::<Result<Vec<_>>>()?,
            (None, Some(s)) => vec![s.parse()?],
            (None, None) => vec![RunKind::Splitter(Scheme::Fbn)],
        };
        let method = match kv.get("method").map(|s| s.trim()) {
            None | Some("rk4") => Integrator::Rk4,
            Some("euler") | Some("explicit-euler") => Integrator::ExplicitEuler,
            Some(m) => return Err(Error::InvalidInput(format!("unknown integrator '{m}'"))),
        };
        let params = Params {
            h: num(kv, "h")?,
            mu: num(kv, "mu")?,
            dt: num(kv, "dt")?,
            horizon: num(kv, "horizon")?.unwrap_or(50.0),
            method,
            tol: num(kv, "tol")?.unwrap_or(1e-10),
            max_iters: num(kv, "max_iters")?.unwrap_or(100_000),
            seed: num(kv, "seed")?,
            override_admissibility: flag(kv, "override_admissibility")?,
            record_every: num(kv, "record_every")?.unwrap_or(1).max(1),
        };
        Ok(Self {
            problem,
            schemes,
            params,
            x0: kv.get("x0").map(|s| parse_list(s)).transpose()?,
            reference: kv.get("reference").map(|s| parse_list(s)).transpose()?,
            csv: kv.get("csv").map(PathBuf::from),
            json: kv.get("json").map(PathBuf::from),
            out_dir: kv.get("out_dir").map(PathBuf::from),
        })
    }

    /// Loads `config` (if any) and lets `overrides` take precedence.
    pub fn resolve(config: Option<&Path>, overrides: KeyValues) -> Result<Self> {
        let mut kv = match config {
            Some(p) => load_config_file(p)?,
            None => KeyValues::new(),
        };
        if overrides.contains_key("phi") || overrides.contains_key("operator") {
            kv.remove("problem");
        }
        if overrides.contains_key("problem") {
            kv.remove("phi");
            kv.remove("operator");
        }
        if overrides.contains_key("scheme") {
            kv.remove("schemes");
        }
        kv.extend(overrides);
        Self::from_key_values(&kv)
    }
}
