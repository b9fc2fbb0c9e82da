use serde_json::json;
use thiserror::Error;

/// Run failure, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{failed} of {total} points failed; first: {first}")]
    Numerical { failed: usize, total: usize, first: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Config error from a core validation failure inside `section`.
    pub fn from_core(section: &str, err: ionpa_core::Error) -> Self {
        let field = match &err {
            ionpa_core::Error::InvalidParameter { name, .. } => format!("{section}.{name}"),
            _ => section.to_string(),
        };
        CliError::Config {
            field,
            message: err.to_string(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn field(&self) -> Option<&str> {
        match self {
            CliError::Config { field, .. } => Some(field),
            _ => None,
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let kind = match self {
            CliError::Config { .. } => "config",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
        };
        json!({
            "error": kind,
            "exit_code": self.exit_code(),
            "field": self.field(),
            "message": self.to_string(),
        })
        .to_string()
    }
}
