//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys before the first header belong to the unnamed section. `#` starts a
//! comment. Every error names the offending line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// A configuration problem, anchored to a line when one is to blame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

/// Keys accepted in each section.
const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["mode"]),
    ("problem", &["kind", "kappa", "p", "finest_n", "levels", "coarsest_n", "target", "q1", "q2"]),
    (
        "solver",
        &[
            "alpha", "mu", "smoother", "omega", "m", "m1", "m2", "m3", "m4", "tol", "max_iter", "preconditioning", "cycle",
            "restriction",
        ],
    ),
    ("output", &["matrix_market", "vector", "mesh_listing", "plots"]),
    (
        "lfa",
        &[
            "t", "samples", "smoother", "omega", "mu0", "mu1", "mu2", "restriction", "middle", "kappa", "h", "a", "b", "measure",
        ],
    ),
    ("stability", &["p", "coarse_n", "trials"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<(String, String), Entry>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(Some(line), "unterminated section header"))?.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) || name.is_empty() {
                    return Err(err(Some(line), format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| err(Some(line), format!("expected key = value, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let keys = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !keys.contains(&key) {
                let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                return Err(err(Some(line), format!("unknown key `{key}` in {place}")));
            }
            if value.is_empty() {
                return Err(err(Some(line), format!("empty value for `{key}`")));
            }
            let slot = (section.clone(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                let prev: &Entry = prev;
                return Err(err(Some(line), format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            entries.insert(slot, Entry { value: value.to_string(), line });
        }
        Ok(Self { entries })
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.entry(section, key).is_some()
    }

    pub fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.entry(section, key).map(|e| e.line)
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    /// Parsed value, or `None` when the key is absent.
    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| err(Some(e.line), format!("cannot parse `{}` as the value of `{key}`", e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T, ConfigError> {
        self.get(section, key)?.ok_or_else(|| {
            let place = if section.is_empty() { String::new() } else { format!(" in [{section}]") };
            err(None, format!("missing required key `{key}`{place}"))
        })
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        match self.entry(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| {
                    s.trim().parse().map_err(|_| err(Some(e.line), format!("cannot parse `{}` in the list `{key}`", s.trim())))
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// One of the given words.
    pub fn choice<'a>(&self, section: &str, key: &str, options: &[&'a str], default: &'a str) -> Result<&'a str, ConfigError> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => options.iter().copied().find(|o| *o == e.value).ok_or_else(|| {
                err(Some(e.line), format!("`{key}` must be one of {}, got `{}`", options.join(", "), e.value))
            }),
        }
    }

    /// An error anchored at `key`, or unanchored when it is absent.
    pub fn invalid(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        err(self.line(section, key), message)
    }
}
