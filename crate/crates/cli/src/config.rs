//! Optional JSON config file. Every key mirrors a command-line flag; flags
//! given explicitly take precedence over values read from the file.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

/// A config value that may be written either as a JSON number or a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    pub fn into_text(self) -> String {
        match self {
            // `{}` on f64 prints the shortest string that parses back exactly
            NumOrText::Num(v) => format!("{v}"),
            NumOrText::Text(s) => s,
        }
    }
}

/// A point written as `[x, y, z]` or `"x,y,z"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Triple {
    Array([f64; 3]),
    Text(String),
}

impl Triple {
    pub fn into_text(self) -> String {
        match self {
            Triple::Array([x, y, z]) => format!("{x},{y},{z}"),
            Triple::Text(s) => s,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "A")]
    pub a: Option<NumOrText>,
    #[serde(rename = "B")]
    pub b: Option<NumOrText>,
    pub alpha: Option<NumOrText>,
    pub beta: Option<NumOrText>,
    pub w: Option<Triple>,
    pub max_steps: Option<usize>,
    pub epsilon: Option<f64>,
    pub normalize: Option<bool>,
    pub degrees: Option<bool>,
    pub lower: Option<Triple>,
    pub upper: Option<Triple>,
    pub n: Option<usize>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub format: Option<String>,
    pub out: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn load_optional(path: Option<&Path>) -> Result<Self, CliError> {
        path.map(Self::load).transpose().map(Option::unwrap_or_default)
    }
}
