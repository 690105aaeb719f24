//! Plain-text `key = value` files shared by surface definitions and run
//! configs.
//!
//! One entry per line. `#` starts a comment that runs to the end of the
//! line, blank lines are ignored, keys are case-sensitive and may not repeat.
//! Whitespace around keys and values is trimmed.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    MissingEquals { line: usize },
    #[error("line {line}: empty key")]
    EmptyKey { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}` on line {line}")]
    UnknownKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("line {line}: bad value for `{key}`: {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    entries: BTreeMap<String, Entry>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<KvFile, KvError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or(KvError::MissingEquals { line })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(KvError::EmptyKey { line });
            }
            let entry = Entry {
                value: v.trim().to_string(),
                line,
            };
            if entries.insert(key.to_string(), entry).is_some() {
                return Err(KvError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(KvFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn require(&self, key: &str) -> Result<&Entry, KvError> {
        self.get(key).ok_or_else(|| KvError::Missing(key.to_string()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key not in `allowed`.
    pub fn restrict_to(&self, allowed: &[&str]) -> Result<(), KvError> {
        for (k, e) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(KvError::UnknownKey {
                    line: e.line,
                    key: k.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, KvError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err: T::Err| KvError::BadValue {
                line: e.line,
                key: key.to_string(),
                message: err.to_string(),
            }),
        }
    }

    /// Whitespace-separated floats, exactly `n` of them.
    pub fn floats(&self, key: &str, n: usize) -> Result<Option<Vec<f64>>, KvError> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        let bad = |message: String| KvError::BadValue {
            line: e.line,
            key: key.to_string(),
            message,
        };
        let vals = e
            .value
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|err| bad(format!("`{t}`: {err}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != n {
            return Err(bad(format!("expected {n} numbers, found {}", vals.len())));
        }
        Ok(Some(vals))
    }
}
