use std::path::Path;

use serde::Deserialize;

/// Search bounds, read from an optional `key = value` file.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub q_max: u64,
    pub p_max: u64,
    pub factor_bound: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { q_max: 10_000, p_max: 101, factor_bound: 1_000_000 }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: Option<&Path>) -> Result<Config, String> {
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                Config::parse(&text).map_err(|e| format!("{}: {e}", p.display()))
            }
        }
    }
}
