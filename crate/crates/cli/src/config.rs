//! Tracker configuration files (TOML). Absent keys take their defaults.

use std::path::Path;

use mono3dt_core::association::AssociationError;
use mono3dt_core::TrackerConfig;

/// Alternative spellings accepted for top-level keys.
const ALIASES: [(&str, &str); 4] = [
    ("w_DEEP", "w_deep"),
    ("w_2D", "w_2d"),
    ("w_3D", "w_3d"),
    ("max_age", "max_lost_age"),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config value {field} = {value} is out of range")]
    OutOfRange { field: String, value: f64 },
}

impl From<AssociationError> for ConfigError {
    fn from(e: AssociationError) -> Self {
        match e {
            AssociationError::OutOfRange { field, value } => ConfigError::OutOfRange {
                field: field.into(),
                value,
            },
            other => ConfigError::Parse(other.to_string()),
        }
    }
}

fn unknown_keys(given: &toml::Table, known: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (key, value) in given {
        let canonical = if prefix.is_empty() {
            ALIASES
                .iter()
                .find(|(a, _)| a == key)
                .map_or(key.as_str(), |(_, c)| c)
        } else {
            key
        };
        match (known.get(canonical), value) {
            (None, _) => out.push(format!("{prefix}{key}")),
            (Some(toml::Value::Table(k)), toml::Value::Table(g)) => {
                unknown_keys(g, k, &format!("{prefix}{key}."), out)
            }
            _ => {}
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<TrackerConfig, ConfigError> {
    let given: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let known = toml::Table::try_from(TrackerConfig::default()).expect("default config serializes");
    let mut unknown = Vec::new();
    unknown_keys(&given, &known, "", &mut unknown);
    if let Some(key) = unknown.into_iter().next() {
        return Err(ConfigError::UnknownKey(key));
    }
    let config: TrackerConfig = given
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<TrackerConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
