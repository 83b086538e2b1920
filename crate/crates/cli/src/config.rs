//! `key = value` configuration files whose keys mirror the long flags.
//!
//! ```text
//! # kitaev.conf
//! min = 0.3
//! max = 0.7
//! step = 0.002
//! link = x
//! out = kitaev.csv
//! ```
//!
//! Blank lines and `#` comments are ignored. Command-line flags win over
//! file values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cic_core::Error;

pub const KNOWN_KEYS: &[&str] = &[
    "out", "svg", "json", "threads", "min", "max", "step", "link", "line", "tol", "file", "direction", "starts",
    "seed", "suite", "samples", "z-threshold",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key '{key}'", n + 1)));
            }
            let value = value.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", n + 1)));
            }
        }
        Ok(Self { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("cannot parse '{v}' for key '{key}'"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.values.get(key).map(PathBuf::from)
    }

    /// Flag value if given, else the file value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Error> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_quotes() {
        let c = ConfigFile::parse("# scan\nmin = -2\nmax=3 # upper\nline = \"jx=jy=(1-jz)/2\"\n\n").unwrap();
        assert_eq!(c.get::<f64>("min").unwrap(), Some(-2.0));
        assert_eq!(c.get::<f64>("max").unwrap(), Some(3.0));
        assert_eq!(c.get::<String>("line").unwrap().as_deref(), Some("jx=jy=(1-jz)/2"));
        assert_eq!(c.get::<f64>("step").unwrap(), None);
        assert_eq!(c.pick(Some(1.0), "min").unwrap(), Some(1.0));
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("min -2").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("min = 1\nmin = 2").is_err());
        assert!(ConfigFile::parse("min = abc").unwrap().get::<f64>("min").is_err());
    }
}
