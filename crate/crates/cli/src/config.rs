//! Flat `key = value` scenario files.
//!
//! ```text
//! # all-ones scenario
//! d1 = 1
//! d2 = 1
//! ...
//! branch = +
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abelprop::model::{ModelParams, State};
use abelprop::scalar::parse_decimal;
use abelprop::series::{Branch, DEFAULT_ORDER};
use num_rational::BigRational;
use thiserror::Error;

pub const KEYS: [&str; 20] = [
    "d1", "d2", "d3", "b1", "b2", "k1", "k2", "N", "x1_0", "x2_0", "x3_0", "t0", "horizon", "step",
    "order", "C", "branch", "tol_hard", "tol_diag", "out_dir",
];

const REQUIRED: [&str; 10] = [
    "d1", "d2", "d3", "b1", "b2", "k1", "k2", "x1_0", "x2_0", "x3_0",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {value:?} ({reason})")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub initial: State,
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
    pub order: usize,
    pub c: f64,
    pub branch: Branch,
    pub tol_hard: f64,
    pub tol_diag: f64,
    pub out_dir: PathBuf,
    raw: BTreeMap<String, String>,
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: idx + 1 })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: idx + 1 });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            if raw.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey(key.to_string()));
            }
        }
        for key in REQUIRED {
            if !raw.contains_key(key) {
                return Err(ConfigError::MissingKey(key.to_string()));
            }
        }

        let num = |key: &str, default: f64| -> Result<f64, ConfigError> {
            match raw.get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|_| invalid(key, v, "not a number"))
                    .and_then(|x| {
                        if x.is_nan() {
                            Err(invalid(key, v, "NaN"))
                        } else {
                            Ok(x)
                        }
                    }),
            }
        };
        let finite = |key: &str, default: f64| -> Result<f64, ConfigError> {
            let x = num(key, default)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(invalid(key, &raw[key], "must be finite"))
            }
        };

        let initial = State::new(
            finite("x1_0", 0.0)?,
            finite("x2_0", 0.0)?,
            finite("x3_0", 0.0)?,
        );
        for (key, v) in [
            ("x1_0", initial.x1),
            ("x2_0", initial.x2),
            ("x3_0", initial.x3),
        ] {
            if v < 0.0 {
                return Err(invalid(
                    key,
                    &raw[key],
                    "initial state must be non-negative",
                ));
            }
        }
        let n = finite("N", initial.total())?;
        let params = ModelParams {
            d1: finite("d1", 0.0)?,
            d2: finite("d2", 0.0)?,
            d3: finite("d3", 0.0)?,
            b1: finite("b1", 0.0)?,
            b2: finite("b2", 0.0)?,
            k1: finite("k1", 0.0)?,
            k2: finite("k2", 0.0)?,
            n,
        };
        for (key, v) in params.named() {
            if *v <= 0.0 {
                let shown = raw.get(key).cloned().unwrap_or_else(|| v.to_string());
                return Err(invalid(key, &shown, "must be strictly positive"));
            }
        }

        let horizon = finite("horizon", 1.0)?;
        if horizon <= 0.0 {
            return Err(invalid("horizon", &raw["horizon"], "must be positive"));
        }
        let step = finite("step", 1e-3)?;
        if step <= 0.0 {
            return Err(invalid("step", &raw["step"], "must be positive"));
        }
        let order = match raw.get("order") {
            None => DEFAULT_ORDER,
            Some(v) => match v.parse::<usize>() {
                Ok(o) if o >= 1 => o,
                _ => return Err(invalid("order", v, "must be a positive integer")),
            },
        };
        let c = finite("C", 1.0)?;
        if c == 0.0 {
            return Err(invalid("C", &raw["C"], "must be nonzero"));
        }
        let branch = match raw.get("branch") {
            None => Branch::Plus,
            Some(v) => {
                Branch::from_symbol(v).ok_or_else(|| invalid("branch", v, "expected + or -"))?
            }
        };
        let tol_hard = num("tol_hard", 1e-9)?;
        let tol_diag = num("tol_diag", 1e-6)?;
        for (key, tol) in [("tol_hard", tol_hard), ("tol_diag", tol_diag)] {
            if tol < 0.0 {
                return Err(invalid(key, &raw[key], "must be non-negative"));
            }
        }
        let out_dir = PathBuf::from(raw.get("out_dir").map(String::as_str).unwrap_or("."));

        Ok(ScenarioConfig {
            params,
            initial,
            t0: finite("t0", 0.0)?,
            horizon,
            step,
            order,
            c,
            branch,
            tol_hard,
            tol_diag,
            out_dir,
            raw,
        })
    }

    /// Exact value of a numeric key as written in the file.
    pub fn exact(&self, key: &str) -> Option<BigRational> {
        self.raw.get(key).and_then(|v| parse_decimal(v))
    }

    /// Exact parameters, when every rate (and N, or the initial state it
    /// defaults from) is a plain decimal.
    pub fn exact_params(&self) -> Option<ModelParams<BigRational>> {
        let n = match self.exact("N") {
            Some(n) => n,
            None => self.exact("x1_0")? + self.exact("x2_0")? + self.exact("x3_0")?,
        };
        Some(ModelParams {
            d1: self.exact("d1")?,
            d2: self.exact("d2")?,
            d3: self.exact("d3")?,
            b1: self.exact("b1")?,
            b2: self.exact("b2")?,
            k1: self.exact("k1")?,
            k2: self.exact("k2")?,
            n,
        })
    }

    pub fn exact_c(&self) -> Option<BigRational> {
        match self.raw.get("C") {
            None => Some(BigRational::from_integer(1.into())),
            Some(_) => self.exact("C"),
        }
    }
}
