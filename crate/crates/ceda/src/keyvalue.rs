//! `key = value` text files: one pair per line, `#` starts a comment,
//! blank lines are ignored, later keys override earlier ones.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn parse(text: &str, path: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Syntax {
                path: path.into(),
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(CliError::Syntax {
                path: path.into(),
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, path)
}
