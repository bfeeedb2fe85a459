//! Experiment configuration in a flat `key = value` text format.
//!
//! ```text
//! # ERKN3 at desk scale
//! scheme_name  = ERKN3
//! epsilon_inv  = 70
//! h            = 0.01
//! t_end        = 1000
//! sample_every = 100
//! lambda       = 1, 1.4142135623730951, 2
//! output_path  = erkn3.csv
//! mu_list      = I1+I3: 1, 0, 2; I2: 0, 1.4142135623730951, 0
//! ```
//!
//! `mu_list` is optional and defaults to the two weightings above. Optional
//! keys `dims`, `potential_coeffs`, `q0` and `p0` override the benchmark's
//! block dimensions, quartic linear form and initial state.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{ErknError, Result};
use crate::harness::benchmark::{
    benchmark_mu_list, BENCH_DIMS, BENCH_H, BENCH_LAMBDA, BENCH_OMEGA, BENCH_POTENTIAL_COEFFS,
    DEFAULT_SAMPLE_EVERY, DESK_T_END,
};

const REQUIRED: [&str; 7] = [
    "scheme_name",
    "epsilon_inv",
    "h",
    "t_end",
    "sample_every",
    "output_path",
    "lambda",
];
const OPTIONAL: [&str; 5] = ["mu_list", "dims", "potential_coeffs", "q0", "p0"];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scheme_name: String,
    /// `omega = 1 / eps`.
    pub epsilon_inv: f64,
    pub h: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub mu_list: Vec<(String, Vec<f64>)>,
    pub output_path: PathBuf,
    pub lambda: Vec<f64>,
    pub dims: Vec<usize>,
    pub potential_coeffs: Vec<f64>,
    /// Initial state; `None` selects the benchmark's `eps`-scaled data.
    pub q0: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// Desk-scale benchmark run (`t_end = 1000`) for `scheme`.
    pub fn desk(scheme: &str, output_path: impl Into<PathBuf>) -> Self {
        Self {
            scheme_name: scheme.to_string(),
            epsilon_inv: BENCH_OMEGA,
            h: BENCH_H,
            t_end: DESK_T_END,
            sample_every: DEFAULT_SAMPLE_EVERY,
            mu_list: benchmark_mu_list(),
            output_path: output_path.into(),
            lambda: BENCH_LAMBDA.to_vec(),
            dims: BENCH_DIMS.to_vec(),
            potential_coeffs: BENCH_POTENTIAL_COEFFS.to_vec(),
            q0: None,
            p0: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ErknError::Io(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(ErknError::Config(format!(
                "h must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_end >= self.h) {
            return Err(ErknError::Config(format!(
                "t_end = {} must be at least h = {}",
                self.t_end, self.h
            )));
        }
        if self.sample_every == 0 {
            return Err(ErknError::Config("sample_every must be at least 1".into()));
        }
        if !(self.epsilon_inv > 0.0) {
            return Err(ErknError::Config(format!(
                "epsilon_inv must be positive, got {}",
                self.epsilon_inv
            )));
        }
        for (label, mu) in &self.mu_list {
            if mu.len() != self.lambda.len() {
                return Err(ErknError::Config(format!(
                    "mu `{label}` has {} entries for {} frequencies",
                    mu.len(),
                    self.lambda.len()
                )));
            }
        }
        self.n_steps().map(|_| ())
    }

    /// `t_end / h`, which must be (numerically) an integer.
    pub fn n_steps(&self) -> Result<usize> {
        let ratio = self.t_end / self.h;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 * n.max(1.0) {
            return Err(ErknError::Config(format!(
                "t_end = {} is not an integer multiple of h = {}",
                self.t_end, self.h
            )));
        }
        Ok(n as usize)
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ErknError;

    fn from_str(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ErknError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
                return Err(ErknError::Config(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if kv
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(ErknError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        let get = |k: &str| -> Result<&str> {
            kv.get(k)
                .map(String::as_str)
                .ok_or_else(|| ErknError::Config(format!("missing required key `{k}`")))
        };

        let lambda = parse_vec(get("lambda")?, "lambda")?;
        let dims = match kv.get("dims") {
            Some(v) => parse_list(v, "dims", |s| s.parse::<usize>().ok())?,
            None if lambda.len() == BENCH_LAMBDA.len() => BENCH_DIMS.to_vec(),
            None => {
                return Err(ErknError::Config(
                    "`dims` is required when lambda does not have 3 entries".into(),
                ))
            }
        };
        let potential_coeffs = match kv.get("potential_coeffs") {
            Some(v) => parse_vec(v, "potential_coeffs")?,
            None => BENCH_POTENTIAL_COEFFS.to_vec(),
        };
        let cfg = ExperimentConfig {
            scheme_name: get("scheme_name")?.to_string(),
            epsilon_inv: parse_scalar(get("epsilon_inv")?, "epsilon_inv")?,
            h: parse_scalar(get("h")?, "h")?,
            t_end: parse_scalar(get("t_end")?, "t_end")?,
            sample_every: get("sample_every")?
                .parse()
                .map_err(|_| ErknError::Config("sample_every must be a positive integer".into()))?,
            mu_list: match kv.get("mu_list") {
                Some(v) => parse_mu_list(v)?,
                None => benchmark_mu_list(),
            },
            output_path: PathBuf::from(get("output_path")?),
            lambda,
            dims,
            potential_coeffs,
            q0: kv.get("q0").map(|v| parse_vec(v, "q0")).transpose()?,
            p0: kv.get("p0").map(|v| parse_vec(v, "p0")).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_scalar(s: &str, key: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| ErknError::Config(format!("`{key}`: cannot parse `{s}` as a number")))
}

fn parse_list<T>(s: &str, key: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            f(x.trim())
                .ok_or_else(|| ErknError::Config(format!("`{key}`: bad entry `{}`", x.trim())))
        })
        .collect()
}

fn parse_vec(s: &str, key: &str) -> Result<Vec<f64>> {
    parse_list(s, key, |x| x.parse().ok())
}

/// `label: a, b, c; label2: d, e, f`
fn parse_mu_list(s: &str) -> Result<Vec<(String, Vec<f64>)>> {
    s.split(';')
        .filter(|e| !e.trim().is_empty())
        .map(|entry| {
            let (label, values) = entry.split_once(':').ok_or_else(|| {
                ErknError::Config(format!("mu_list entry `{}` lacks `label:`", entry.trim()))
            })?;
            let label = label.trim();
            if label.is_empty() || label.contains(',') {
                return Err(ErknError::Config(format!("invalid mu label `{label}`")));
            }
            Ok((label.to_string(), parse_vec(values, "mu_list")?))
        })
        .collect()
}
