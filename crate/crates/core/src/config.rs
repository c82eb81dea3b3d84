//! Flat `key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored; anything after a `#`
//! on a value line is a comment. Keys not present keep their defaults from
//! [`SimParams::default`]. Each key may appear once.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::channel::PathLossMode;
use crate::error::SimError;
use crate::geometry::Region;
use crate::params::{Association, SimParams, DEFAULT_LAMBDA_RATIO};

pub const KEYS: &[&str] = &[
    "lambda_s",
    "lambda_m",
    "lambda_ratio",
    "beta",
    "p_m_dbm",
    "p_s_dbm",
    "eta",
    "n0_dbm",
    "theta_t_db",
    "p_eps_dbm",
    "alpha_near",
    "alpha_far",
    "d_c_m",
    "pathloss_mode",
    "clamp_gain",
    "region_radius_m",
    "n_trials",
    "seed",
    "association",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: duplicate key `{key}` (first set on line {first})")]
    DuplicateKey { line: usize, key: String, first: usize },

    #[error("line {line}: bad value for `{key}`: {message}")]
    Value { line: usize, key: String, message: String },

    #[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        line: Option<usize>,
        key: String,
        message: String,
    },
}

struct Entry {
    line: usize,
    value: String,
}

pub fn parse_config(path: &Path) -> Result<SimParams, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<SimParams, ConfigError> {
    apply_config_str(SimParams::default(), text)
}

/// Applies `text` on top of `base`. Used for `--set` overrides.
pub fn apply_config_str(base: SimParams, text: &str) -> Result<SimParams, ConfigError> {
    let entries = collect(text)?;
    resolve(base, &entries)
}

fn collect(text: &str) -> Result<HashMap<&'static str, Entry>, ConfigError> {
    let mut entries: HashMap<&'static str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if value.is_empty() {
            return Err(ConfigError::Value {
                line,
                key: key.to_string(),
                message: "empty value".into(),
            });
        }
        if let Some(first) = entries.get(known) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
                first: first.line,
            });
        }
        entries.insert(
            known,
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(entries)
}

fn value<T: std::str::FromStr>(entries: &HashMap<&'static str, Entry>, key: &'static str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    entries
        .get(key)
        .map(|e| {
            e.value.parse::<T>().map_err(|err| ConfigError::Value {
                line: e.line,
                key: key.to_string(),
                message: err.to_string(),
            })
        })
        .transpose()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

fn resolve(base: SimParams, entries: &HashMap<&'static str, Entry>) -> Result<SimParams, ConfigError> {
    let mut p = base;
    let line_of = |key: &str| entries.get(key).map(|e| e.line);

    macro_rules! set {
        ($field:expr, $key:literal) => {
            if let Some(v) = value(entries, $key)? {
                $field = v;
            }
        };
    }

    set!(p.lambda_s, "lambda_s");
    set!(p.beta, "beta");
    set!(p.p_m_dbm, "p_m_dbm");
    set!(p.p_s_dbm, "p_s_dbm");
    set!(p.eta, "eta");
    set!(p.n0_dbm, "n0_dbm");
    set!(p.theta_t_db, "theta_t_db");
    set!(p.p_eps_dbm, "p_eps_dbm");
    set!(p.path_loss.critical_distance_m, "d_c_m");
    set!(p.n_trials, "n_trials");
    set!(p.seed, "seed");

    let lambda_m: Option<f64> = value(entries, "lambda_m")?;
    let ratio: Option<f64> = value(entries, "lambda_ratio")?;
    match (lambda_m, ratio) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::Invalid {
                line: line_of("lambda_ratio"),
                key: "lambda_ratio".into(),
                message: "set either lambda_m or lambda_ratio, not both".into(),
            })
        }
        (Some(m), None) => p.lambda_m = m,
        (None, Some(r)) => {
            if !(r.is_finite() && r > 0.0) {
                return Err(ConfigError::Invalid {
                    line: line_of("lambda_ratio"),
                    key: "lambda_ratio".into(),
                    message: format!("must be > 0, got {r}"),
                });
            }
            p.lambda_m = p.lambda_s / r;
        }
        // keep the coupling when only lambda_s changes
        (None, None) if entries.contains_key("lambda_s") => p.lambda_m = p.lambda_s / DEFAULT_LAMBDA_RATIO,
        (None, None) => {}
    }

    if let Some(r) = value::<f64>(entries, "region_radius_m")? {
        p.region = Region::new(r).map_err(|e| invalid(e, &line_of))?;
    }
    if let Some(a) = value::<Association>(entries, "association")? {
        p.association = a;
    }
    if let Some(c) = entries.get("clamp_gain") {
        p.path_loss.clamp_gain = parse_bool(&c.value).map_err(|message| ConfigError::Value {
            line: c.line,
            key: "clamp_gain".into(),
            message,
        })?;
    }

    let mode: Option<PathLossMode> = value(entries, "pathloss_mode")?;
    let near: Option<f64> = value(entries, "alpha_near")?;
    let far: Option<f64> = value(entries, "alpha_far")?;
    if let Some(m) = mode {
        p.path_loss.mode = m;
    }
    if let Some(a) = far {
        p.path_loss.alpha_far = a;
    }
    if let Some(a) = near {
        p.path_loss.alpha_near = a;
    }
    // A single-slope model given only one exponent (or none) uses it everywhere.
    if p.path_loss.mode == PathLossMode::Single {
        match (near, far) {
            (Some(a), None) => p.path_loss.alpha_far = a,
            (None, _) => p.path_loss.alpha_near = p.path_loss.alpha_far,
            (Some(_), Some(_)) => {}
        }
    }

    p.validate().map_err(|e| invalid(e, &line_of))?;
    Ok(p)
}

fn invalid(e: SimError, line_of: &dyn Fn(&str) -> Option<usize>) -> ConfigError {
    match e {
        SimError::Parameter { name, reason } => ConfigError::Invalid {
            line: line_of(name),
            key: name.to_string(),
            message: reason,
        },
        other => ConfigError::Invalid {
            line: None,
            key: "config".into(),
            message: other.to_string(),
        },
    }
}

/// Renders `params` as a config file that parses back to the same values.
pub fn render_config(p: &SimParams) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String, note: &str| {
        if note.is_empty() {
            let _ = writeln!(out, "{key}={value}");
        } else {
            let _ = writeln!(out, "{key}={value}  # {note}");
        }
    };
    kv("lambda_s", p.lambda_s.to_string(), "SBS intensity, per m^2");
    kv("lambda_m", p.lambda_m.to_string(), "macro intensity, per m^2 (default lambda_s/50)");
    kv("beta", p.beta.to_string(), "fraction of on-grid SBSs");
    kv("p_m_dbm", p.p_m_dbm.to_string(), "macro transmit power");
    kv("p_s_dbm", p.p_s_dbm.to_string(), "SBS grid power and battery cap");
    kv("eta", p.eta.to_string(), "RF-to-DC conversion efficiency");
    kv("n0_dbm", p.n0_dbm.to_string(), "noise power");
    kv("theta_t_db", p.theta_t_db.to_string(), "target SINR");
    kv("p_eps_dbm", p.p_eps_dbm.to_string(), "static power of the serving SBS");
    kv("alpha_near", p.path_loss.alpha_near.to_string(), "exponent for d <= d_c");
    kv("alpha_far", p.path_loss.alpha_far.to_string(), "exponent for d > d_c");
    kv("d_c_m", p.path_loss.critical_distance_m.to_string(), "critical distance");
    kv("pathloss_mode", p.path_loss.mode.as_str().to_string(), "dual | single");
    kv("clamp_gain", p.path_loss.clamp_gain.to_string(), "bound path gain at 1");
    kv("region_radius_m", p.region.radius_m().to_string(), "simulation disc radius");
    kv("n_trials", p.n_trials.to_string(), "");
    kv("seed", p.seed.to_string(), "");
    kv("association", p.association.as_str().to_string(), "nearest_any | offgrid_only");
    out
}
