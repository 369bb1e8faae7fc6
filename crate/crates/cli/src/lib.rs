//! Command-line front end for `delaylab`.
//!
//! Exit codes: 0 success, 1 invalid arguments, 2 numerical failure (guard
//! trip, root finder did not converge), 3 a theorem invariant was violated.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod modes;
pub mod output;

use std::path::PathBuf;

use clap::Parser;
use delaylab::Error;

use config::{Mode, Settings};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_INVARIANT: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "delaylab", version, about = "Simulate and analyze y[n+1] = 1 + p y[n-m] / y[n]^2", allow_negative_numbers = true)]
pub struct Cli {
    /// What to run; may instead come from the config file
    #[arg(value_enum)]
    pub mode: Option<Mode>,
    /// JSON config file with `"schema": 1`; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { .. } | Error::Incomplete(_) | Error::SingularSystem | Error::NotConverging) => {
            EXIT_NUMERICAL
        }
        _ => EXIT_INVALID,
    }
}

/// Run one invocation, printing diagnostics to stderr.
pub fn execute(cli: Cli) -> u8 {
    let file = match &cli.config {
        Some(path) => match config::load_file(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_INVALID;
            }
        },
        None => Settings::default(),
    };
    let flags = Settings { mode: cli.mode, ..cli.settings };
    let cfg = match config::resolve(file.overlay(flags)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_INVALID;
        }
    };
    let artifact = match modes::run_mode(&cfg) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = output::write_out(&cfg.out, &artifact.body) {
        eprintln!("error: {e:#}");
        return EXIT_INVALID;
    }
    for v in &artifact.violations {
        eprintln!("invariant violated: {v}");
    }
    if let Some(note) = &artifact.numerical {
        eprintln!("numerical failure: {note}");
    }
    artifact_exit_code(&artifact)
}

/// An invariant violation outranks a partial run.
pub fn artifact_exit_code(artifact: &modes::Artifact) -> u8 {
    if !artifact.violations.is_empty() {
        EXIT_INVARIANT
    } else if artifact.numerical.is_some() {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use modes::Artifact;

    #[test]
    fn exit_code_precedence() {
        let a = |numerical: Option<&str>, violations: &[&str]| Artifact {
            body: String::new(),
            numerical: numerical.map(String::from),
            violations: violations.iter().map(|s| s.to_string()).collect(),
        };
        assert_eq!(artifact_exit_code(&a(None, &[])), EXIT_OK);
        assert_eq!(artifact_exit_code(&a(Some("overflow"), &[])), EXIT_NUMERICAL);
        assert_eq!(artifact_exit_code(&a(Some("overflow"), &["envelope"])), EXIT_INVARIANT);
        assert_eq!(artifact_exit_code(&a(None, &["envelope"])), EXIT_INVARIANT);
    }

    #[test]
    fn library_errors_map_to_codes() {
        let code = |e: Error| exit_code_for(&anyhow::Error::from(e));
        assert_eq!(code(Error::NonConvergence { iterations: 1000, residual: 1.0 }), EXIT_NUMERICAL);
        assert_eq!(code(Error::SingularSystem), EXIT_NUMERICAL);
        assert_eq!(code(Error::InvalidParameter("p".into())), EXIT_INVALID);
    }
}
