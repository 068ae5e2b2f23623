//! `key = value` experiment configuration files. Blank lines and text after
//! `#` are ignored; list values are comma separated.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{MeshError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, (usize, String)>,
    label: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| MeshError::Parse {
                path: label.to_string(),
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(parse_err(format!("invalid key `{key}`")));
            }
            if entries.insert(key.to_string(), (line_no, value.trim().to_string())).is_some() {
                return Err(parse_err(format!("duplicate key `{key}`")));
            }
        }
        Ok(ExperimentConfig {
            entries,
            label: label.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MeshError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Rejects keys outside `allowed` so typos do not silently fall back to
    /// defaults.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(MeshError::Config(format!(
                "{}: unknown key `{k}` (expected one of: {})",
                self.label,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn invalid(&self, key: &str, expected: &str) -> MeshError {
        let (line, value) = &self.entries[key];
        MeshError::Config(format!(
            "{}:{line}: `{key}` must be {expected}, got `{value}`",
            self.label
        ))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((_, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.invalid(key, "a finite number")),
        }
    }

    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.f64_or(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else if self.entries.contains_key(key) {
            Err(self.invalid(key, "positive"))
        } else {
            Err(MeshError::Config(format!("`{key}` must be positive, got {v}")))
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some((_, v)) => v.parse().map_err(|_| self.invalid(key, "a non-negative integer")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    /// Comma-separated list of positive numbers.
    pub fn positive_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some((_, v)) => v
                .split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .filter(|l| !l.is_empty())
                .ok_or_else(|| self.invalid(key, "a list of positive numbers")),
        }
    }

    /// Comma-separated list of non-negative integers.
    pub fn count_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some((_, v)) => v
                .split(',')
                .map(|s| s.trim().parse::<usize>().ok())
                .collect::<Option<Vec<usize>>>()
                .filter(|l| !l.is_empty())
                .ok_or_else(|| self.invalid(key, "a list of non-negative integers")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# sweep\nseed = 4\n\nold_edge_lengths = 0.5, 0.25 # trailing\nt_end=60\n",
            "cfg",
        )
        .unwrap();
        assert_eq!(cfg.u64_or("seed", 0).unwrap(), 4);
        assert_eq!(cfg.positive_list_or("old_edge_lengths", &[]).unwrap(), vec![0.5, 0.25]);
        assert_eq!(cfg.f64_or("t_end", 1.0).unwrap(), 60.0);
        assert_eq!(cfg.f64_or("missing", 2.5).unwrap(), 2.5);
        cfg.check_keys(&["seed", "old_edge_lengths", "t_end"]).unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let err = ExperimentConfig::parse("a = 1\nnot a pair\n", "cfg").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 2, .. }));
        assert!(ExperimentConfig::parse("a = 1\na = 2\n", "cfg").is_err());

        let cfg = ExperimentConfig::parse("h = -0.1\nlist = 0.1, x\nseed = 1.5\n", "cfg").unwrap();
        assert!(matches!(cfg.positive_or("h", 1.0), Err(MeshError::Config(_))));
        assert!(cfg.positive_list_or("list", &[]).is_err());
        assert!(cfg.u64_or("seed", 0).is_err());
        assert!(cfg.check_keys(&["h", "list"]).is_err());
    }
}
