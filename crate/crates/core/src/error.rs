// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants split into configuration problems (bad input, reported by the CLI
/// with exit status 2) and numerical/calibration failures (exit status 3);
/// see [`Error::is_configuration`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("ambiguous labeling of state {label}: best overlap {overlap:.4} is below 0.5")]
    AmbiguousLabel { label: String, overlap: f64 },

    #[error("resonance: {0}")]
    Resonance(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("range error at sample {index}: {message}")]
    Range { index: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("fit failed after {iterations} iterations (best residual norm {residual_norm:.6e}, parameters {best:?})")]
    FitFailure {
        iterations: usize,
        residual_norm: f64,
        best: Vec<f64>,
    },

    #[error(
        "integration accuracy: unitarity deviation {deviation:.3e} exceeds 1e-6; reduce step_dt"
    )]
    IntegrationAccuracy { deviation: f64 },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("readout correction error: {0}")]
    Correction(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by invalid input rather than numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Dimension(_) | Error::Domain(_) | Error::Resolution(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
