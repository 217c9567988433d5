//! Command-line front end for the `isoent` library.
//!
//! Exit codes: 0 success, 2 invalid configuration or parameters, 3 invalid
//! input data, 4 non-convergence.

pub mod commands;
pub mod config;

use isoent::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    /// Maps a library error raised while handling parameters.
    pub fn from_params(e: Error) -> Self {
        Self {
            code: exit_code(&e, 2),
            message: e.to_string(),
        }
    }

    /// Maps a library error raised while handling input data.
    pub fn from_input(e: Error) -> Self {
        Self {
            code: exit_code(&e, 3),
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn exit_code(e: &Error, data_default: i32) -> i32 {
    match e {
        Error::NonConvergence { .. } => 4,
        Error::SingularConstraint { .. }
        | Error::PhaseInfeasible { .. }
        | Error::EpsilonOutOfRange(_)
        | Error::InvalidParameter(_) => 2,
        _ => data_default,
    }
}

/// Writes `contents` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial artifact.
pub fn write_atomic(path: &std::path::Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => std::path::Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}
