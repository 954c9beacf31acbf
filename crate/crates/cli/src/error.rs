use std::path::PathBuf;

use icc_core::IccError;
use serde_json::json;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{message}")]
    Config { message: String, line: Option<usize> },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: u64,
        reason: String,
    },

    #[error(transparent)]
    Core(#[from] IccError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::Config {
            message: message.into(),
            line: None,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Config { .. } => "config",
            Self::Io { .. } => "io",
            Self::Parse { .. } => "parse",
            Self::Core(_) => "computation",
        }
    }

    /// Bad invocations exit 2, everything else 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Config { .. } => 2,
            _ => 1,
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            Self::Config { line: Some(l), .. } => err["line"] = json!(l),
            Self::Parse { source_name, line, .. } => {
                err["source"] = json!(source_name);
                err["line"] = json!(line);
            }
            Self::Io { path, .. } => err["path"] = json!(path.display().to_string()),
            _ => {}
        }
        json!({ "schema_version": SCHEMA_VERSION, "error": err }).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_single_line_json() {
        let e = CliError::Parse {
            source_name: "x.csv".into(),
            line: 4,
            reason: "ragged".into(),
        };
        let rec = e.record();
        assert!(!rec.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&rec).unwrap();
        assert_eq!(v["error"]["kind"], "parse");
        assert_eq!(v["error"]["line"], 4);
        assert_eq!(e.exit_code(), 1);
        assert_eq!(CliError::config("bad").exit_code(), 2);
    }
}
