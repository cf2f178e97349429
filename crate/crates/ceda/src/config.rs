//! Protocol configuration in `key = value` form. Keys are the field names
//! of [`ProtocolConfig`]; command-line flags use the same names with dashes.

use std::collections::BTreeMap;
use std::path::Path;

use ceda_core::{BinScheme, ProtocolConfig};

use crate::error::{CliError, Result};

pub const KEYS: &[&str] = &[
    "scheme",
    "bins",
    "response_bins",
    "k_max",
    "replicates",
    "z",
    "min_cell",
    "min_gain",
    "shortlist_cap",
    "max_depth",
    "reliability",
    "beam_width",
    "budget",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value `{value}` for `{key}`")))
}

pub fn set(cfg: &mut ProtocolConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "scheme" => cfg.scheme = value.parse::<BinScheme>()?,
        "bins" => cfg.bins = parse(key, value)?,
        "response_bins" => cfg.response_bins = parse(key, value)?,
        "k_max" => cfg.k_max = parse(key, value)?,
        "replicates" => cfg.replicates = parse(key, value)?,
        "z" => cfg.z = parse(key, value)?,
        "min_cell" => cfg.min_cell = parse(key, value)?,
        "min_gain" => cfg.min_gain = parse(key, value)?,
        "shortlist_cap" => cfg.shortlist_cap = parse(key, value)?,
        "max_depth" => cfg.max_depth = parse(key, value)?,
        "reliability" => cfg.reliability = parse(key, value)?,
        "beam_width" => cfg.beam_width = parse(key, value)?,
        "budget" => cfg.budget = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        _ => return Err(CliError::Config(format!("unknown config key `{key}`"))),
    }
    Ok(())
}

pub fn get(cfg: &ProtocolConfig, key: &str) -> String {
    match key {
        "scheme" => match cfg.scheme {
            BinScheme::EqualFrequency => "equal_frequency".into(),
            BinScheme::EqualWidth => "equal_width".into(),
        },
        "bins" => cfg.bins.to_string(),
        "response_bins" => cfg.response_bins.to_string(),
        "k_max" => cfg.k_max.to_string(),
        "replicates" => cfg.replicates.to_string(),
        "z" => cfg.z.to_string(),
        "min_cell" => cfg.min_cell.to_string(),
        "min_gain" => cfg.min_gain.to_string(),
        "shortlist_cap" => cfg.shortlist_cap.to_string(),
        "max_depth" => cfg.max_depth.to_string(),
        "reliability" => cfg.reliability.to_string(),
        "beam_width" => cfg.beam_width.to_string(),
        "budget" => cfg.budget.to_string(),
        "seed" => cfg.seed.to_string(),
        _ => String::new(),
    }
}

/// Config text that reproduces `cfg` when read back.
pub fn to_text(cfg: &ProtocolConfig) -> String {
    KEYS.iter().map(|k| format!("{k} = {}\n", get(cfg, k))).collect()
}

/// Settings read from a file, and which keys it set.
pub struct FileConfig {
    pub config: ProtocolConfig,
    pub keys: BTreeMap<String, String>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let mut config = ProtocolConfig::default();
    let keys = match path {
        Some(p) => crate::keyvalue::read(p)?,
        None => BTreeMap::new(),
    };
    for (k, v) in &keys {
        set(&mut config, k, v)?;
    }
    Ok(FileConfig { config, keys })
}

impl FileConfig {
    /// Apply a command-line value; a flag beats the file, with a notice.
    pub fn flag(&mut self, key: &str, value: Option<String>) -> Result<()> {
        let Some(v) = value else { return Ok(()) };
        if let Some(old) = self.keys.get(key) {
            if *old != v {
                log::warn!(
                    "flag --{} = {v} overrides config file value {old}",
                    key.replace('_', "-")
                );
            }
        }
        set(&mut self.config, key, &v)?;
        self.keys.insert(key.into(), v);
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.keys.contains_key(key)
    }
}
