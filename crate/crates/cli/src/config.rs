//! Optional `key = value` config file support.
//!
//! Precedence: CLI flags override config entries, which override built-in
//! defaults. Keys use the long flag names without the leading dashes.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct Config {
    entries: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("config {}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(CliError::Usage(format!(
                    "config {}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(
                line[..eq].trim().to_string(),
                line[eq + 1..].trim().to_string(),
            );
        }
        Ok(Self { entries })
    }

    /// CLI value if present, else config value, else the default.
    pub fn resolve<T: FromStr + Clone>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.entries.get(key) {
            Some(raw) => raw.parse::<T>().map_err(|_| {
                CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
            None => Ok(default),
        }
    }

    /// CLI value if present, else config value; `None` when neither is set.
    pub fn resolve_opt<T: FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.entries.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))),
            None => Ok(None),
        }
    }
}
