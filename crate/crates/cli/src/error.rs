use serde::Serialize;
use thiserror::Error;

use crate::format::to_json;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gkdv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} scenarios failed")]
    ReproFailed { failed: usize, total: usize },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Malformed input text counts as a usage error; every other core
    /// failure is a domain or hypothesis error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                gkdv::Error::Syntax { .. }
                | gkdv::Error::UnknownIdentifier { .. }
                | gkdv::Error::InvalidArgument(_) => 2,
                _ => 3,
            },
            CliError::Io { .. } | CliError::ReproFailed { .. } => 1,
        }
    }

    /// A closed stdout (e.g. piping into `head`) is not worth reporting.
    pub fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "IoError",
            CliError::ReproFailed { .. } => "ReproFailed",
        }
    }

    /// Structured form written to stderr.
    pub fn to_json(&self) -> String {
        to_json(&ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Core(gkdv::Error::ForbiddenExponent(0.0)).exit_code(), 3);
        assert_eq!(
            CliError::Core(gkdv::Error::HypothesisViolated {
                w: 1.0,
                reason: "x".into()
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::Core(gkdv::Error::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::ReproFailed { failed: 1, total: 2 }.exit_code(), 1);
    }

    #[test]
    fn json_shape() {
        let e = CliError::Core(gkdv::Error::ForbiddenExponent(0.0));
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "ForbiddenExponent");
        assert_eq!(v["exit_code"], 3);
    }
}
