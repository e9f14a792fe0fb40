use std::fmt;

use circmetric::expr::ExprError;
use circmetric::GeometryError;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DOMAIN: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unparseable numbers or expressions, unreadable files.
    Usage(String),
    /// Well-formed input outside the mathematical domain.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match &e {
            GeometryError::Config(_) => CliError::Usage(e.to_string()),
            GeometryError::Expr(ExprError::Lex { .. } | ExprError::Parse { .. }) => CliError::Usage(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}
