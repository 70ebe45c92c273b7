// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use bbq::pulse::{adiabatic_shape, quantization_angle, sample_pulse};
use bbq::PulseParams;
use proptest::prelude::*;

fn theta(p: &PulseParams, t: f64) -> f64 {
    quantization_angle(adiabatic_shape(p, t).unwrap(), p.g_eff_ghz)
}

fn params() -> impl Strategy<Value = PulseParams> {
    (
        0.5f64..3.0,
        0.05f64..0.9,
        0.05f64..0.2,
        0.05f64..1.0,
        5.0f64..40.0,
    )
        .prop_filter_map("Δ₂ below Δ₁", |(d1, frac, g, a, l)| {
            PulseParams::new(d1, d1 * frac, g, a, l, 0.1).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angle_rate_follows_arctan(p in params()) {
        let l = p.half_length_ns;
        let a = p.turn_rate_per_ns;
        let h = 1e-4 * l;
        let ts: Vec<f64> = (1..200).map(|k| -l + 2.0 * l * k as f64 / 200.0).filter(|t| t.abs() > 4.0 * h).collect();
        let rate: Vec<f64> = ts.iter().map(|&t| (theta(&p, t + h) - theta(&p, t - h)) / (2.0 * h)).collect();
        let shape: Vec<f64> = ts.iter().map(|&t| (a * t).atan()).collect();
        // least-squares proportionality constant
        let c = rate.iter().zip(&shape).map(|(r, s)| r * s).sum::<f64>() / shape.iter().map(|s| s * s).sum::<f64>();
        for (k, (r, s)) in rate.iter().zip(&shape).enumerate() {
            let rel = (r - c * s).abs() / (c * s).abs();
            prop_assert!(rel < 1e-3, "t = {}: relative deviation {rel}", ts[k]);
        }
    }

    #[test]
    fn angle_even_and_shape_monotone(p in params()) {
        let l = p.half_length_ns;
        let n = 400;
        let mut prev = adiabatic_shape(&p, -l).unwrap();
        for k in 1..=n {
            let t = -l + l * k as f64 / n as f64;
            let v = adiabatic_shape(&p, t).unwrap();
            prop_assert!(v <= prev + 1e-12);
            prop_assert!((theta(&p, t) - theta(&p, -t)).abs() < 1e-12);
            prev = v;
        }
        for k in 1..=n {
            let t = (l * k as f64 / n as f64).min(l);
            let v = adiabatic_shape(&p, t).unwrap();
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn endpoints_are_exact(p in params()) {
        let l = p.half_length_ns;
        prop_assert_eq!(adiabatic_shape(&p, l).unwrap(), p.delta1_ghz);
        prop_assert_eq!(adiabatic_shape(&p, -l).unwrap(), p.delta1_ghz);
        prop_assert_eq!(adiabatic_shape(&p, 0.0).unwrap(), p.delta2_ghz);
        let wf = sample_pulse(&p).unwrap();
        prop_assert_eq!(wf.values[0], p.delta1_ghz);
        prop_assert_eq!(*wf.values.last().unwrap(), p.delta1_ghz);
    }
}

#[test]
fn outside_window_is_domain_error() {
    let p = PulseParams::new(2.0, 0.4, 0.1, 0.3, 20.0, 0.1).unwrap();
    assert!(matches!(
        adiabatic_shape(&p, 20.5),
        Err(bbq::Error::Domain(_))
    ));
}
