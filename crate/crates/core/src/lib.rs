// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation and calibration toolkit for a three-mode tunable-coupler
//! architecture (two fixed-frequency transmons and a flux-tunable bus).
//!
//! * [`hilbert`] builds the truncated Duffing Hamiltonian.
//! * [`spectrum`] diagonalizes it, labels dressed states, and computes ZZ
//!   landscapes, zero-ZZ idle points, and coupling fits.
//! * [`pulse`] generates adiabatic bus-detuning pulses.
//! * [`dynamics`] propagates the Schrödinger equation under a pulse and
//!   calibrates CZ gates.
//! * [`rb`] provides the two-qubit Clifford group and randomized benchmarking.
//!
//! Real-arithmetic modules are generic over [`Scalar`] (`f32` or `f64`);
//! the aliases below fix the scalar to `f64`, which is what propagation,
//! fitting, and benchmarking use.

// Argument checks use negated comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod optim;
pub mod presets;
pub mod pulse;
pub mod rb;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Real = f64;
pub type ModeSpec = hilbert::ModeSpec<f64>;
pub type CouplingSpec = hilbert::CouplingSpec<f64>;
pub type DeviceSpec = hilbert::DeviceSpec<f64>;
pub type SquidSpec = spectrum::SquidSpec<f64>;
pub type SpectrumResult = spectrum::SpectrumResult<f64>;
pub type ZZMap = spectrum::sweep::ZZMap<f64>;
pub type SweepAxis = spectrum::sweep::SweepAxis<f64>;
pub type PulseParams = pulse::PulseParams<f64>;
pub type PulseWaveform = pulse::PulseWaveform<f64>;

pub type DeviceSpecF32 = hilbert::DeviceSpec<f32>;
pub type PulseParamsF32 = pulse::PulseParams<f32>;
