// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Coupling extraction from measured ZZ-vs-flux curves.

use serde::{Deserialize, Serialize};

use super::{compute_zz, flux_to_frequency, SquidSpec};
use crate::error::{Error, Result};
use crate::hilbert::{DeviceSpec, ModeLabel};
use crate::optim::{levenberg_marquardt, LmConfig};

/// Residual weighting of the least-squares objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weighting {
    /// Plain `Σ (ZZ_model − ZZ_data)²`.
    #[default]
    Uniform,
    /// Residuals divided by `max(|ZZ_data|, floor_mhz)`, for data whose
    /// noise scales with the signal.
    Relative { floor_mhz: f64 },
}

/// Which SQUID parameters float alongside the three couplings, and how
/// residuals are weighted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    #[serde(default)]
    pub fit_f_max: bool,
    #[serde(default)]
    pub fit_flux_offset: bool,
    #[serde(default)]
    pub weighting: Weighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit {
    pub g_q1_bus_ghz: f64,
    pub g_q2_bus_ghz: f64,
    pub g_q1_q2_ghz: f64,
    pub squid: SquidSpec<f64>,
    /// Root of the summed squared ZZ residuals, MHz.
    pub residual_norm_mhz: f64,
    /// Standard errors in parameter order `[g_q1_bus, g_q2_bus, g_q1_q2, f_max?, flux_offset?]`;
    /// `None` where the covariance is singular.
    pub standard_errors: Vec<Option<f64>>,
    pub iterations: usize,
}

impl CouplingFit {
    /// Returns `initial` with the fitted parameters written in.
    pub fn apply_to(&self, initial: &DeviceSpec<f64>) -> DeviceSpec<f64> {
        let mut d = initial.clone();
        d.set_coupling(ModeLabel::Q1, ModeLabel::Bus, self.g_q1_bus_ghz);
        d.set_coupling(ModeLabel::Q2, ModeLabel::Bus, self.g_q2_bus_ghz);
        d.set_coupling(ModeLabel::Q1, ModeLabel::Q2, self.g_q1_q2_ghz);
        d.squid = Some(self.squid);
        d
    }
}

/// Minimum number of `(Φ, ZZ)` points accepted.
pub const MIN_FIT_POINTS: usize = 8;

fn unpack(initial: &DeviceSpec<f64>, x: &[f64], opts: FitOptions) -> DeviceSpec<f64> {
    let mut d = initial.clone();
    d.set_coupling(ModeLabel::Q1, ModeLabel::Bus, x[0]);
    d.set_coupling(ModeLabel::Q2, ModeLabel::Bus, x[1]);
    d.set_coupling(ModeLabel::Q1, ModeLabel::Q2, x[2]);
    let mut squid = initial.squid.expect("checked by caller");
    let mut k = 3;
    if opts.fit_f_max {
        squid.f_max_ghz = x[k];
        k += 1;
    }
    if opts.fit_flux_offset {
        squid.flux_offset = x[k];
    }
    d.squid = Some(squid);
    d
}

/// Model ZZ (MHz) of `spec` at each flux point.
pub fn model_curve(spec: &DeviceSpec<f64>, flux: &[f64]) -> Result<Vec<f64>> {
    let squid = spec
        .squid
        .ok_or_else(|| Error::config("device.squid", "flux model requires a SQUID description"))?;
    flux.iter()
        .map(|&phi| compute_zz(spec, flux_to_frequency(&squid, phi)))
        .collect()
}

/// Least-squares fit of `(g_Q1,bus, g_Q2,bus, g_Q1,Q2)` (and optionally SQUID
/// parameters) to measured `(Φ/Φ₀, ZZ in MHz)` pairs, starting from `initial`.
pub fn fit_coupling_params(
    measured: &[(f64, f64)],
    initial: &DeviceSpec<f64>,
    opts: FitOptions,
) -> Result<CouplingFit> {
    if measured.len() < MIN_FIT_POINTS {
        return Err(Error::config(
            "measured",
            format!(
                "at least {MIN_FIT_POINTS} points required, got {}",
                measured.len()
            ),
        ));
    }
    if let Some(k) = measured
        .iter()
        .position(|(p, z)| !p.is_finite() || !z.is_finite())
    {
        return Err(Error::config(format!("measured[{k}]"), "non-finite value"));
    }
    let squid = initial
        .squid
        .ok_or_else(|| Error::config("device.squid", "fit requires a SQUID description"))?;
    let flux: Vec<f64> = measured.iter().map(|m| m.0).collect();
    let data: Vec<f64> = measured.iter().map(|m| m.1).collect();
    let weights: Vec<f64> = match opts.weighting {
        Weighting::Uniform => vec![1.0; data.len()],
        Weighting::Relative { floor_mhz } => {
            if !(floor_mhz > 0.0) || !floor_mhz.is_finite() {
                return Err(Error::config(
                    "weighting.floor_mhz",
                    "must be positive and finite",
                ));
            }
            data.iter().map(|y| 1.0 / y.abs().max(floor_mhz)).collect()
        }
    };

    let mut x0 = vec![
        initial.coupling(ModeLabel::Q1, ModeLabel::Bus),
        initial.coupling(ModeLabel::Q2, ModeLabel::Bus),
        initial.coupling(ModeLabel::Q1, ModeLabel::Q2),
    ];
    if opts.fit_f_max {
        x0.push(squid.f_max_ghz);
    }
    if opts.fit_flux_offset {
        x0.push(squid.flux_offset);
    }
    let residual = |x: &[f64]| -> Result<Vec<f64>> {
        let d = unpack(initial, x, opts);
        let model = model_curve(&d, &flux)?;
        Ok(model
            .iter()
            .zip(&data)
            .zip(&weights)
            .map(|((m, y), w)| w * (m - y))
            .collect())
    };
    let out = levenberg_marquardt(residual, &x0, &LmConfig::default())?;
    let fitted = unpack(initial, &out.params, opts);
    let model = model_curve(&fitted, &flux)?;
    let residual_norm_mhz = model
        .iter()
        .zip(&data)
        .map(|(m, y)| (m - y).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(CouplingFit {
        g_q1_bus_ghz: out.params[0],
        g_q2_bus_ghz: out.params[1],
        g_q1_q2_ghz: out.params[2],
        squid: fitted.squid.expect("set by unpack"),
        residual_norm_mhz,
        standard_errors: out.standard_errors(),
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn too_few_points() {
        let d = presets::pair1_like();
        let pts = vec![(0.1, 0.0); 5];
        assert!(matches!(
            fit_coupling_params(&pts, &d, FitOptions::default()),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn needs_squid() {
        let d = presets::bbq_model();
        let pts = vec![(0.1, 0.0); 10];
        assert!(fit_coupling_params(&pts, &d, FitOptions::default()).is_err());
    }
}
