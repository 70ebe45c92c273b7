// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Decay fitting, error-per-Clifford conversions, and readout correction.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{levenberg_marquardt, LmConfig};

/// Asymptote used to initialize fits (fully mixed two-qubit state).
pub const B_INIT: f64 = 0.25;

/// Fit of `A·pᵐ + B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    /// Standard errors of `(A, p, B)`; `None` where not identifiable.
    pub std_errors: [Option<f64>; 3],
    /// Set when the covariance is singular, e.g. for data without decay.
    pub covariance_flagged: bool,
}

/// Least-squares fit of `A·pᵐ + B` with `0 < p ≤ 1` and `A, B ∈ [0, 1]`.
///
/// Data that do not decay at all (equal survival at every depth) return
/// `p = 1` with `B` at its initial value and a flagged covariance.
pub fn fit_decay(depths: &[usize], survival: &[f64]) -> Result<DecayFit> {
    if depths.len() != survival.len() {
        return Err(Error::Dimension(format!(
            "{} depths but {} survival values",
            depths.len(),
            survival.len()
        )));
    }
    let mut distinct = depths.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::config(
            "depths",
            "at least three distinct depths are needed",
        ));
    }
    if let Some(k) = survival.iter().position(|y| !y.is_finite()) {
        return Err(Error::config(format!("survival[{k}]"), "non-finite value"));
    }
    let (lo, hi) = survival
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| {
            (a.min(y), b.max(y))
        });
    if hi - lo <= 1e-12 {
        let mean = survival.iter().sum::<f64>() / survival.len() as f64;
        return Ok(DecayFit {
            a: (mean - B_INIT).clamp(0.0, 1.0),
            p: 1.0,
            b: B_INIT,
            std_errors: [None, Some(0.0), None],
            covariance_flagged: true,
        });
    }

    // order by depth for the two-point initial guess
    let mut pts: Vec<(f64, f64)> = depths
        .iter()
        .map(|&m| m as f64)
        .zip(survival.iter().copied())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (m0, y0) = pts[0];
    let (m1, y1) = pts[pts.len() - 1];
    let a0 = y0 - B_INIT;
    let ratio = (y1 - B_INIT) / a0;
    let p0 = if ratio > 0.0 && ratio.is_finite() {
        ratio.powf(1.0 / (m1 - m0)).clamp(1e-3, 1.0 - 1e-9)
    } else {
        0.9
    };
    let x0 = [a0.clamp(0.0, 1.0), p0, B_INIT];
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        Ok(pts
            .iter()
            .map(|&(m, y)| x[0] * x[1].powf(m) + x[2] - y)
            .collect())
    };
    let cfg = LmConfig {
        lower: Some(vec![0.0, 1e-12, 0.0]),
        upper: Some(vec![1.0, 1.0, 1.0]),
        ..LmConfig::default()
    };
    let out = levenberg_marquardt(residual, &x0, &cfg)?;
    let se = out.standard_errors();
    let flagged = se.iter().any(|s| s.is_none());
    Ok(DecayFit {
        a: out.params[0],
        p: out.params[1],
        b: out.params[2],
        std_errors: [se[0], se[1], se[2]],
        covariance_flagged: flagged,
    })
}

/// Error per Clifford, `(3/4)(1 − p)` for two qubits.
pub fn epc_from_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config("p", format!("must lie in (0, 1], got {p}")));
    }
    Ok(0.75 * (1.0 - p))
}

/// Upper bound on the CZ error from the error per Clifford.
pub fn epg_bound(epc: f64, avg_cz: f64) -> Result<f64> {
    if !(avg_cz > 0.0) {
        return Err(Error::config("avg_cz", "must be positive"));
    }
    Ok(epc / avg_cz)
}

/// Interleaved error per gate, `(3/4)(1 − p_int / p_ref)`.
pub fn interleaved_epg(p_ref: f64, p_int: f64) -> f64 {
    0.75 * (1.0 - p_int / p_ref)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCorrection {
    /// Corrected outcome probabilities for `00, 01, 10, 11`.
    pub probabilities: [f64; 4],
    /// L1 distance between the raw inverse and the clipped, renormalized result.
    pub residual: f64,
}

/// Inverts the confusion matrix (`confusion[(measured, prepared)]`, columns
/// summing to one), then clips negatives and renormalizes.
pub fn readout_correction(raw: [f64; 4], confusion: &Matrix4<f64>) -> Result<ReadoutCorrection> {
    for c in 0..4 {
        let col = confusion.column(c);
        if col.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::config(
                format!("confusion[:, {c}]"),
                "entries must be finite and non-negative",
            ));
        }
        if (col.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                format!("confusion[:, {c}]"),
                "column must sum to 1",
            ));
        }
    }
    let lu = confusion.lu();
    if lu.determinant().abs() < 1e-12 {
        return Err(Error::Correction("confusion matrix is singular".into()));
    }
    let x = lu
        .solve(&Vector4::from(raw))
        .ok_or_else(|| Error::Correction("confusion matrix is singular".into()))?;
    let clipped = x.map(|v| v.max(0.0));
    let total = clipped.sum();
    if !(total > 0.0) {
        return Err(Error::Correction(
            "corrected distribution has no positive mass".into(),
        ));
    }
    let out = clipped / total;
    Ok(ReadoutCorrection {
        probabilities: [out[0], out[1], out[2], out[3]],
        residual: (x - out).abs().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_decay() {
        let depths: Vec<usize> = vec![1, 10, 30, 60, 100, 200, 400];
        let y: Vec<f64> = depths
            .iter()
            .map(|&m| 0.75 * 0.99f64.powi(m as i32) + 0.25)
            .collect();
        let f = fit_decay(&depths, &y).unwrap();
        assert!((f.a - 0.75).abs() < 1e-6);
        assert!((f.p - 0.99).abs() < 1e-6);
        assert!((f.b - 0.25).abs() < 1e-6);
    }

    #[test]
    fn no_decay_flagged() {
        let f = fit_decay(&[1, 5, 10, 20], &[1.0; 4]).unwrap();
        assert_eq!(f.p, 1.0);
        assert!(f.covariance_flagged);
    }

    #[test]
    fn too_few_depths() {
        assert!(fit_decay(&[1, 1, 5], &[0.9, 0.9, 0.8]).is_err());
    }

    #[test]
    fn epc_bound_arithmetic() {
        assert_eq!(epc_from_p(1.0).unwrap(), 0.0);
        assert!((epg_bound(0.0029, 1.5).unwrap() - 0.001_933).abs() < 1e-6);
        assert!((epg_bound(0.0039, 1.5).unwrap() - 0.0026).abs() < 1e-12);
        assert!(epc_from_p(0.0).is_err());
    }

    #[test]
    fn readout_identity_and_inverse() {
        let raw = [0.7, 0.1, 0.15, 0.05];
        let r = readout_correction(raw, &Matrix4::identity()).unwrap();
        assert_eq!(r.probabilities, raw);
        let conf = Matrix4::new(
            0.95, 0.03, 0.04, 0.00, //
            0.02, 0.94, 0.00, 0.05, //
            0.03, 0.00, 0.93, 0.04, //
            0.00, 0.03, 0.03, 0.91,
        );
        let truth = Vector4::new(0.55, 0.2, 0.15, 0.1);
        let raw = conf * truth;
        let r = readout_correction([raw[0], raw[1], raw[2], raw[3]], &conf).unwrap();
        for k in 0..4 {
            assert!((r.probabilities[k] - truth[k]).abs() < 1e-10);
        }
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn singular_confusion() {
        let conf = Matrix4::new(
            0.5, 0.5, 0.0, 0.0, //
            0.5, 0.5, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        );
        assert!(matches!(
            readout_correction([0.25; 4], &conf),
            Err(Error::Correction(_))
        ));
    }
}
