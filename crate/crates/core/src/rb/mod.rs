// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-qubit randomized benchmarking: Clifford compilation, noisy
//! simulation, and decay fitting.

pub mod clifford;
pub mod fit;
pub mod sim;

pub use clifford::{
    clifford_group, decomposition_stats, single_qubit_cliffords, CliffordElement, CliffordGroup,
    DecompositionStats, Gate, GateSeq, Qubit, ZAngle,
};
pub use fit::{
    epc_from_p, epg_bound, fit_decay, interleaved_epg, readout_correction, DecayFit,
    ReadoutCorrection,
};
pub use sim::{simulate_irb, simulate_rb, IrbResult, NoiseModel, RbConfig, RbResult};
