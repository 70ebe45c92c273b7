// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// A command failure carrying its exit code.
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(field: impl fmt::Display, message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: format!("{field}: {message}"),
        }
    }
}

impl From<bbq::Error> for Failure {
    fn from(e: bbq::Error) -> Self {
        let code = if e.is_configuration() {
            EXIT_CONFIG
        } else {
            EXIT_NUMERICAL
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
