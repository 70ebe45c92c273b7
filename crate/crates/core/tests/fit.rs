// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use bbq::hilbert::ModeLabel;
use bbq::presets;
use bbq::spectrum::fit::{fit_coupling_params, model_curve, FitOptions, Weighting};

fn synthetic() -> Vec<(f64, f64)> {
    let flux: Vec<f64> = (0..26).map(|k| 0.02 * k as f64).collect();
    let zz = model_curve(&presets::pair1_like(), &flux).unwrap();
    flux.into_iter().zip(zz).collect()
}

fn start() -> bbq::DeviceSpec {
    let mut d = presets::pair1_like();
    d.set_coupling(ModeLabel::Q1, ModeLabel::Bus, 0.118);
    d.set_coupling(ModeLabel::Q2, ModeLabel::Bus, 0.131);
    d.set_coupling(ModeLabel::Q1, ModeLabel::Q2, -0.0035);
    d
}

fn assert_recovered(opts: FitOptions) {
    let fit = fit_coupling_params(&synthetic(), &start(), opts).unwrap();
    for (got, want) in [
        (fit.g_q1_bus_ghz, 0.130),
        (fit.g_q2_bus_ghz, 0.120),
        (fit.g_q1_q2_ghz, -0.004),
    ] {
        assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
    }
    assert!(fit.residual_norm_mhz < 1e-3);
}

#[test]
fn noiseless_data_recovered_uniform() {
    assert_recovered(FitOptions::default());
}

#[test]
fn noiseless_data_recovered_relative() {
    assert_recovered(FitOptions {
        weighting: Weighting::Relative { floor_mhz: 1e-3 },
        ..Default::default()
    });
}

#[test]
fn fitted_values_write_back() {
    let fit = fit_coupling_params(&synthetic(), &start(), FitOptions::default()).unwrap();
    let d = fit.apply_to(&start());
    assert_eq!(d.coupling(ModeLabel::Q2, ModeLabel::Q1), fit.g_q1_q2_ghz);
    assert_eq!(d.squid, Some(fit.squid));
}

#[test]
fn relative_floor_must_be_positive() {
    let opts = FitOptions {
        weighting: Weighting::Relative { floor_mhz: 0.0 },
        ..Default::default()
    };
    let err = fit_coupling_params(&synthetic(), &start(), opts).unwrap_err();
    assert!(err.is_configuration());
}

#[test]
fn weighting_parses_from_json() {
    let o: FitOptions =
        serde_json::from_str(r#"{"weighting": {"kind": "relative", "floor_mhz": 0.01}}"#).unwrap();
    assert_eq!(o.weighting, Weighting::Relative { floor_mhz: 0.01 });
    assert!(serde_json::from_str::<FitOptions>(r#"{"weights": 1}"#).is_err());
}
