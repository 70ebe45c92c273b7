// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sets used throughout the docs, tests, and CLI examples.

use crate::hilbert::{CouplingSpec, DeviceSpec, ModeLabel, ModeSpec, DEFAULT_LEVELS};
use crate::pulse::PulseParams;
use crate::spectrum::SquidSpec;

pub const QUBIT_ANHARMONICITY_GHZ: f64 = -0.240;
pub const BUS_ANHARMONICITY_GHZ: f64 = -0.140;
pub const Q1_FREQUENCY_GHZ: f64 = 5.0;

fn device(
    q2_ghz: f64,
    bus_ghz: f64,
    g1: f64,
    g2: f64,
    g12: f64,
    squid: Option<SquidSpec<f64>>,
) -> DeviceSpec<f64> {
    DeviceSpec::new(
        vec![
            ModeSpec::new(
                ModeLabel::Q1,
                Q1_FREQUENCY_GHZ,
                QUBIT_ANHARMONICITY_GHZ,
                DEFAULT_LEVELS,
            ),
            ModeSpec::new(
                ModeLabel::Q2,
                q2_ghz,
                QUBIT_ANHARMONICITY_GHZ,
                DEFAULT_LEVELS,
            ),
            ModeSpec::new(
                ModeLabel::Bus,
                bus_ghz,
                BUS_ANHARMONICITY_GHZ,
                DEFAULT_LEVELS,
            ),
        ],
        vec![
            CouplingSpec::new(ModeLabel::Q1, ModeLabel::Bus, g1),
            CouplingSpec::new(ModeLabel::Q2, ModeLabel::Bus, g2),
            CouplingSpec::new(ModeLabel::Q1, ModeLabel::Q2, g12),
        ],
        squid,
    )
    .expect("preset parameters are valid")
}

/// Model landscape parameters: Q1 at 5 GHz, 110 MHz bus couplings, and the
/// given direct coupling (+6 MHz bus-above, −6 MHz bus-below).
pub fn paper_model(q2_ghz: f64, g12_ghz: f64) -> DeviceSpec<f64> {
    let bus = if g12_ghz > 0.0 { 7.0 } else { 3.0 };
    device(q2_ghz, bus, 0.110, 0.110, g12_ghz, None)
}

/// Bus-below-qubits parameters at 90 MHz qubit detuning.
pub fn bbq_model() -> DeviceSpec<f64> {
    paper_model(4.91, -0.006)
}

/// Bus-above-qubits mirror of [`bbq_model`].
pub fn baq_model() -> DeviceSpec<f64> {
    paper_model(4.91, 0.006)
}

/// SQUID for the pair-1-like device: idle near the lower sweet spot region,
/// gate excursions toward the upper sweet spot.
pub fn pair1_squid() -> SquidSpec<f64> {
    SquidSpec {
        f_max_ghz: 4.55,
        asymmetry: 0.2,
        flux_offset: 0.0,
    }
}

/// Pair-1-like device: 351 MHz qubit detuning with fitted-scale couplings
/// (130 / 120 / −4 MHz). Bus starts at its idle (minimum-|ZZ|) region.
pub fn pair1_like() -> DeviceSpec<f64> {
    device(5.0 - 0.351, 2.2, 0.130, 0.120, -0.004, Some(pair1_squid()))
}

/// Near-degenerate pair (9 MHz detuning, 80 MHz bus couplings).
pub fn pair8_like() -> DeviceSpec<f64> {
    device(5.0 - 0.009, 3.0, 0.080, 0.080, -0.003, None)
}

/// Pulse for [`pair1_like`]: idle at 2.8 GHz detuning, 56 ns total, shaping
/// coupling 1.2 × g_Q1,bus. The amplitude is near, not at, the CZ point.
pub fn pair1_pulse() -> PulseParams<f64> {
    PulseParams::new(2.8, 0.53, 0.156, 0.3, 28.0, 0.1).expect("preset parameters are valid")
}

/// Single pulse for [`pair8_like`] whose back-to-back double gives a nearly
/// complete swap.
pub fn pair8_pulse() -> PulseParams<f64> {
    PulseParams::new(2.0, 0.36, 0.096, 0.3, 23.0, 0.1).expect("preset parameters are valid")
}
