//! Command-line front end for the `surfgl` library: configuration, runs,
//! output files and the acceptance suite.

pub mod check;
pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

/// Exit codes: 0 success, 2 regime or precondition error, 3 convergence
/// failure, 4 acceptance failure, 1 anything else (I/O).
pub mod exit {
    pub const OTHER: u8 = 1;
    pub const PRECONDITION: u8 = 2;
    pub const CONVERGENCE: u8 = 3;
    pub const ACCEPTANCE: u8 = 4;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(exit::PRECONDITION, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<surfgl::Error> for Failure {
    fn from(e: surfgl::Error) -> Self {
        let code = if e.is_regime_or_precondition() {
            exit::PRECONDITION
        } else if e.is_convergence() {
            exit::CONVERGENCE
        } else {
            exit::OTHER
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(exit::OTHER, e.to_string())
    }
}
