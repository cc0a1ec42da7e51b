//! Flat sectioned key=value configuration (INI-style).
//!
//! Frequencies accept unit suffixes `hz`, `khz`, `mhz`, `ghz` (converted to
//! angular rad/s with an explicit ×2π) and `rad_s` (taken as-is). Keys are
//! namespaced by their section: `[noise] sigma = 2 rad_s` parses to
//! `noise.sigma`. Later assignments override earlier ones, and `--set`
//! overrides the file.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Parsed configuration: ordered map from dotted keys to raw string values.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Config(format!(
                        "line {}: malformed section header '{line}'",
                        lineno + 1
                    )));
                }
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value, got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            values.insert(full, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply a `key=value` override (dotted key).
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::Config(format!(
                "override '{assignment}' is not key=value"
            )));
        };
        self.values
            .insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Angular frequency in rad/s: `<number> [hz|khz|mhz|ghz|rad_s]`.
    /// A bare number is rad/s.
    pub fn frequency(&self, key: &str, default: f64) -> Result<f64> {
        match self.get_raw(key) {
            None => Ok(default),
            Some(raw) => parse_frequency(raw)
                .ok_or_else(|| Error::Config(format!("key '{key}': bad frequency '{raw}'"))),
        }
    }

    pub fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.get_raw(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{key}': bad number '{raw}'"))),
        }
    }

    pub fn integer(&self, key: &str, default: u64) -> Result<u64> {
        match self.get_raw(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("key '{key}': bad integer '{raw}'"))),
        }
    }
}

/// Parse a frequency with optional unit suffix into rad/s.
pub fn parse_frequency(raw: &str) -> Option<f64> {
    let raw = raw.trim();
    let (num, factor) = match raw.rsplit_once(char::is_whitespace) {
        Some((n, unit)) => (n, unit_factor(unit)?),
        None => {
            // Allow glued suffixes like "23mhz".
            let lower = raw.to_ascii_lowercase();
            let mut split = None;
            for unit in ["rad_s", "ghz", "mhz", "khz", "hz"] {
                if let Some(stripped) = lower.strip_suffix(unit) {
                    split = Some((stripped.len(), unit_factor(unit)?));
                    break;
                }
            }
            match split {
                Some((at, f)) => (&raw[..at], f),
                None => (raw, 1.0),
            }
        }
    };
    num.trim().parse::<f64>().ok().map(|v| v * factor)
}

fn unit_factor(unit: &str) -> Option<f64> {
    match unit.to_ascii_lowercase().as_str() {
        "rad_s" => Some(1.0),
        "hz" => Some(TAU),
        "khz" => Some(TAU * 1e3),
        "mhz" => Some(TAU * 1e6),
        "ghz" => Some(TAU * 1e9),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_sections_units_and_comments() {
        let text = "\
# header comment
scale_factor = 1.0
[drive]
omega1 = 42 khz   ; inline comment
omega  = 1 ghz
[noise]
sigma = 2.5 rad_s
tau_c = 0.1
seed = 7
";
        let cfg = Config::parse(text).unwrap();
        assert_abs_diff_eq!(
            cfg.frequency("drive.omega1", 0.0).unwrap(),
            TAU * 42.0e3,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            cfg.frequency("drive.omega", 0.0).unwrap(),
            TAU * 1.0e9,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            cfg.frequency("noise.sigma", 0.0).unwrap(),
            2.5,
            epsilon = 0.0
        );
        assert_eq!(cfg.integer("noise.seed", 0).unwrap(), 7);
        assert_abs_diff_eq!(cfg.number("scale_factor", 0.0).unwrap(), 1.0, epsilon = 0.0);
    }

    #[test]
    fn overrides_win() {
        let mut cfg = Config::parse("[a]\nx = 1\n").unwrap();
        cfg.set_override("a.x=3").unwrap();
        assert_abs_diff_eq!(cfg.number("a.x", 0.0).unwrap(), 3.0, epsilon = 0.0);
        assert!(cfg.set_override("nonsense").is_err());
    }

    #[test]
    fn glued_unit_suffixes() {
        assert_abs_diff_eq!(parse_frequency("23mhz").unwrap(), TAU * 23e6, epsilon = 1.0);
        assert_abs_diff_eq!(parse_frequency("1.5 rad_s").unwrap(), 1.5, epsilon = 0.0);
        assert!(parse_frequency("abc hz").is_none());
    }

    #[test]
    fn malformed_input_is_config_error() {
        assert!(Config::parse("[broken\nx=1").is_err());
        assert!(Config::parse("just a line\n").is_err());
        assert!(Config::parse("= 3\n").is_err());
    }

    #[test]
    fn defaults_pass_through() {
        let cfg = Config::parse("").unwrap();
        assert_abs_diff_eq!(cfg.frequency("missing", 17.0).unwrap(), 17.0, epsilon = 0.0);
        assert_eq!(cfg.integer("missing", 3).unwrap(), 3);
    }
}
