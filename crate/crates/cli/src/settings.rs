//! Plain key=value defaults file. Keys are the long flag names without the
//! leading dashes (`nbar-min=0.1`); `#` starts a comment. Command-line flags
//! always win over file entries.

use crate::CliError;
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct ConfigFile(HashMap<String, String>);

impl ConfigFile {
    pub fn load_opt(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected key=value, got '{raw}'", lineno + 1));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }
}

/// Flag value if given, else the config entry, else the built-in default.
pub fn resolve<T: FromStr>(
    flag: Option<T>,
    config: &ConfigFile,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(value) = flag {
        return Ok(value);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| CliError::Usage(format!("config value {key}={raw}: {e}"))),
        None => Ok(default),
    }
}
