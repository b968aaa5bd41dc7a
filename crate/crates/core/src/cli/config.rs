//! Line-based `key=value` config with `[section]` headers. Several
//! assignments may share a line; `#` starts a comment. Keys before the
//! first header are global and also answer section lookups.

use super::CliError;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Every key the commands understand, as `section.key`.
pub const KNOWN_KEYS: &[&str] = &[
    "run.name",
    "run.seed",
    "domain.shape",
    "domain.file",
    "domain.n",
    "domain.lo",
    "domain.hi",
    "domain.r",
    "domain.center",
    "domain.rect",
    "domain.corner",
    "domain.a",
    "domain.slit",
    "domain.amplitude",
    "domain.centers",
    "domain.radii",
    "spectrum.m",
    "spectrum.tol",
    "objective.family",
    "objective.index",
    "objective.coeffs",
    "objective.subset",
    "objective.beta",
    "objective.n",
    "optimizer.p",
    "optimizer.schedule",
    "optimizer.s",
    "optimizer.dt0",
    "optimizer.max_steps",
    "optimizer.conv_tol",
    "optimizer.patience",
    "optimizer.reinit_every",
    "optimizer.smooth_cells",
    "optimizer.quad_nodes",
    "diagnose.domain",
    "diagnose.spectrum",
    "diagnose.xi",
    "diagnose.weiss_points",
    "diagnose.torsion",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    /// `section.key` or bare `key` for globals, lower-cased
    entries: BTreeMap<String, String>,
    /// directory relative paths resolve against
    base: PathBuf,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Config(format!("line {}: unterminated section header", n + 1)))?;
                section = name.trim().to_ascii_lowercase();
                continue;
            }
            for tok in tighten(line).split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| CliError::Config(format!("line {}: expected key=value, got `{tok}`", n + 1)))?;
                let k = k.trim().to_ascii_lowercase();
                if k.is_empty() {
                    return Err(CliError::Config(format!("line {}: empty key", n + 1)));
                }
                let full = if section.is_empty() { k } else { format!("{section}.{k}") };
                entries.insert(full, v.trim().to_string());
            }
        }
        let cfg = Self {
            entries,
            base: PathBuf::new(),
        };
        cfg.check_known()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    fn check_known(&self) -> Result<(), CliError> {
        for k in self.entries.keys() {
            let ok = if k.contains('.') {
                KNOWN_KEYS.contains(&k.as_str())
            } else {
                KNOWN_KEYS.iter().any(|full| full.split('.').nth(1) == Some(k.as_str()))
            };
            if !ok {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_ascii_lowercase(), value.into());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// `section.key`, falling back to a global `key`.
    pub fn raw(&self, key: &str) -> Option<&str> {
        if let Some(v) = self.entries.get(key) {
            return Some(v);
        }
        let bare = key.split_once('.').map_or(key, |(_, b)| b);
        self.entries.get(bare).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("`{key}` has invalid value `{v}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse())
                .collect::<Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|_| CliError::Config(format!("`{key}` has invalid list `{v}`"))),
        }
    }

    /// A path that must exist, resolved against the config's directory.
    pub fn path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let p = Path::new(v);
        let p = if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) };
        if !p.exists() {
            return Err(CliError::MissingFile(p));
        }
        Ok(Some(p))
    }

    /// Canonical `key=value` lines, sorted.
    pub fn echo(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// Drops whitespace around `=` so `key = value` reads as one token.
fn tighten(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut skip_ws = false;
    for c in line.chars() {
        if c == '=' {
            out.truncate(out.trim_end().len());
            out.push(c);
            skip_ws = true;
        } else if skip_ws && c.is_whitespace() {
            continue;
        } else {
            skip_ws = false;
            out.push(c);
        }
    }
    out
}
