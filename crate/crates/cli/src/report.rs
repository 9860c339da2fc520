use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mrk_core::matrix::{ComplexMatrix, Seed};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::Cli;

/// Version of the [`RunReport`] layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("invalid input: {0}")]
    Input(mrk_core::Error),

    #[error("numerical failure: {0}")]
    Numerical(mrk_core::Error),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Write { .. } => 4,
        }
    }
}

impl From<mrk_core::Error> for CliError {
    fn from(e: mrk_core::Error) -> Self {
        use mrk_core::Error::*;
        match e {
            Dimension(_) | NotSquare { .. } | NonFinite | InvalidArgument(_) | NotNormal(_) => CliError::Input(e),
            _ => CliError::Numerical(e),
        }
    }
}

/// Result of a command before it is rendered.
pub struct Outcome {
    pub code: u8,
    pub inputs: Value,
    pub results: Value,
    pub text: String,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub tool: &'static str,
    pub format: u32,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub seed: Seed,
    pub versions: Versions,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

pub fn emit(outcome: Outcome, cli: &Cli, elapsed: Duration) {
    if cli.json {
        let report = RunReport {
            command: cli.command_name(),
            inputs: outcome.inputs,
            results: outcome.results,
            seed: cli.seed,
            versions: Versions {
                tool: env!("CARGO_PKG_VERSION"),
                format: FORMAT_VERSION,
            },
            elapsed: elapsed.as_secs_f64(),
        };
        let body = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write_stdout(&body);
    } else {
        write_stdout(&outcome.text);
    }
}

/// A closed pipe downstream is not an error for this process.
fn write_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(mrk_core::Error::NonFinite).code(), 2);
        assert_eq!(CliError::from(mrk_core::Error::Dimension("x".into())).code(), 2);
        assert_eq!(CliError::from(mrk_core::Error::NoConvergence("sdp")).code(), 3);
        let io = || std::io::Error::other("x");
        assert_eq!(CliError::Read { path: "a".into(), source: io() }.code(), 2);
        assert_eq!(CliError::Write { path: "a".into(), source: io() }.code(), 4);
    }
}
