//! Flat `key = value` sweep configuration.
//!
//! One assignment per line, `#` starts a comment, list values are
//! comma-separated. Keys left out keep the reference-experiment defaults.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use swarmcharge::{ParamError, Policy, SweepError, SweepPlan};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for `{key}`: {reason}")]
    BadValue {
        line: usize,
        key: &'static str,
        value: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    InvalidDefaults(String),
}

const KEYS: &[(&str, &[&str])] = &[
    ("qty", &[]),
    ("bc_sd", &["sd"]),
    ("bg", &[]),
    ("lw", &[]),
    ("up", &[]),
    ("memory_m", &["m"]),
    ("predictors_k", &["k"]),
    ("max_ticks", &["ticks"]),
    ("bc_levels", &["bc"]),
    ("b_levels", &["b"]),
    ("policies", &["policy"]),
    ("reps", &[]),
    ("master_seed", &["seed"]),
];

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(name, aliases)| *name == key || aliases.contains(&key))
        .map(|(name, _)| *name)
}

pub fn parse_config(path: &Path) -> Result<SweepPlan, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

fn scalar<T: FromStr>(key: &'static str, value: &str, line: usize) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        line,
        key,
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn list<T: FromStr>(key: &'static str, value: &str, line: usize) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|item| scalar(key, item.trim(), line)).collect()
}

pub fn parse_config_str(text: &str) -> Result<SweepPlan, ConfigError> {
    let mut plan = SweepPlan::reference(1);
    let mut lines: HashMap<&'static str, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        let name = canonical(key).ok_or_else(|| ConfigError::UnknownKey {
            line,
            key: key.to_string(),
        })?;
        if value.is_empty() {
            return Err(ConfigError::BadValue {
                line,
                key: name,
                value: String::new(),
                reason: "empty value".into(),
            });
        }
        let base = &mut plan.base;
        match name {
            "qty" => base.qty = scalar(name, value, line)?,
            "bc_sd" => base.bc_sd = scalar(name, value, line)?,
            "bg" => base.bg = scalar(name, value, line)?,
            "lw" => base.lw = scalar(name, value, line)?,
            "up" => base.up = scalar(name, value, line)?,
            "memory_m" => base.memory_m = scalar(name, value, line)?,
            "predictors_k" => base.predictors_k = scalar(name, value, line)?,
            "max_ticks" => base.max_ticks = scalar(name, value, line)?,
            "bc_levels" => plan.bc_levels = list(name, value, line)?,
            "b_levels" => plan.b_levels = list(name, value, line)?,
            "policies" => plan.policies = list::<Policy>(name, value, line)?,
            "reps" => plan.reps = scalar(name, value, line)?,
            "master_seed" => plan.master_seed = scalar(name, value, line)?,
            _ => unreachable!("every canonical key is handled"),
        }
        lines.insert(name, line);
    }

    plan.validate().map_err(|e| {
        let keys = blamed_keys(&e);
        match keys.iter().filter_map(|k| lines.get(k)).max() {
            Some(&line) => ConfigError::Invalid {
                line,
                message: e.to_string(),
            },
            None => ConfigError::InvalidDefaults(e.to_string()),
        }
    })?;
    Ok(plan)
}

/// Keys whose values can cause `e`.
fn blamed_keys(e: &SweepError) -> Vec<&'static str> {
    match e {
        SweepError::NoReps => vec!["reps"],
        SweepError::EmptyFactor(name) => vec![*name],
        SweepError::InvalidCell { source, .. } => match source {
            ParamError::EmptySwarm => vec!["qty"],
            ParamError::NoTicks => vec!["max_ticks"],
            ParamError::NoMemory => vec!["memory_m"],
            ParamError::NoPredictors => vec!["predictors_k"],
            ParamError::NegativeLower(_) => vec!["lw"],
            ParamError::ThresholdOrder { .. } => vec!["lw", "up"],
            ParamError::UpperAboveFull(_) => vec!["up"],
            ParamError::CapacityRange(_) => vec!["b_levels"],
            ParamError::NegativeConsumption(_) => vec!["bc_levels"],
            ParamError::NegativeSpread(_) => vec!["bc_sd"],
            ParamError::GainRange(_) => vec!["bg"],
        },
        _ => Vec::new(),
    }
}
