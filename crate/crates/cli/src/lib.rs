//! Command implementations behind the `cskct` binary.
//!
//! Every command returns its CSV body as a string; the binary prepends the
//! `#` comment header from [`comment_header`] and writes the result.

pub mod commands;
pub mod config;

pub use commands::{SweepParam, SweepPoint};
pub use config::Config;

use std::io;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<cskct::Error> for CliError {
    fn from(e: cskct::Error) -> Self {
        match e {
            cskct::Error::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            cskct::Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// `# cskct <command>`, the config echo, any extra lines, and an optional
/// wall-clock line (the only non-deterministic part of an output file).
pub fn comment_header(command: &str, cfg: &Config, extra: &[String], timestamp: bool) -> String {
    let mut out = format!("# cskct {command} {}\n", env!("CARGO_PKG_VERSION"));
    out += &cfg.echo();
    for line in extra {
        out += &format!("# {line}\n");
    }
    if timestamp {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        out += &format!("# generated_unix={secs}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        let inf: CliError = cskct::Error::Infeasible {
            index: 0,
            lower: 2.0,
            upper: 1.0,
        }
        .into();
        assert_eq!(inf.exit_code(), 3);
        let num: CliError = cskct::Error::Numerical("x".into()).into();
        assert_eq!(num.exit_code(), 4);
        let dom: CliError = cskct::Error::Domain("x".into()).into();
        assert_eq!(dom.exit_code(), 2);
    }

    #[test]
    fn header_timestamp_is_optional() {
        let cfg = Config::default();
        let a = comment_header("design", &cfg, &["note=1".into()], false);
        assert!(a.lines().all(|l| l.starts_with('#')));
        assert!(a.contains("# note=1"));
        assert!(!a.contains("generated_unix"));
        assert!(comment_header("design", &cfg, &[], true).contains("# generated_unix="));
    }
}
