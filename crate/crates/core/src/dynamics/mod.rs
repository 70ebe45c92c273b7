// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain propagation of the three-mode Hamiltonian under a bus
//! detuning waveform, and gate characterization in the dressed idle frame.
//!
//! The default integrator treats the Hamiltonian as constant over each step
//! (evaluated at the step midpoint of the linearly interpolated waveform) and
//! applies the exact step exponential, so every accepted propagator is
//! unitary to rounding. RK4 is available for cross-checks.

mod calibrate;
mod report;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DeviceSpec, ModeLabel, SplitHamiltonian};
use crate::pulse::{PulseWaveform, WaveformKind};
use crate::spectrum::{label_hamiltonian, BareLabel, COMPUTATIONAL};

pub use calibrate::{
    amplitude_scan, calibrate_amplitude, calibrate_cz, calibrate_delay, delay_scan, unwrap_phases,
    AmplitudePoint, CzCalibration, DelayCalibration, DelayPoint, DoublePulse, ScaleSearch,
};
pub use report::{report_from_projection, wrap_angle, GateReport, Operator4};

/// Largest tolerated deviation of `U†U` from the identity.
pub const UNITARITY_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    PiecewiseExponential,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    /// Integration step (ns); defaults to the waveform sample spacing and
    /// may not exceed it.
    #[serde(default)]
    pub step_dt_ns: Option<f64>,
    #[serde(default)]
    pub method: Method,
}

impl PropagationConfig {
    pub fn with_step(step_dt_ns: f64) -> Self {
        Self {
            step_dt_ns: Some(step_dt_ns),
            method: Method::PiecewiseExponential,
        }
    }

    fn substeps(&self, sample_dt: f64) -> Result<usize> {
        match self.step_dt_ns {
            None => Ok(1),
            Some(h) if !(h > 0.0) || !h.is_finite() => Err(Error::config(
                "propagation.step_dt_ns",
                "must be positive and finite",
            )),
            Some(h) if h > sample_dt * (1.0 + 1e-9) => Err(Error::config(
                "propagation.step_dt_ns",
                format!("step {h} ns exceeds the waveform sample spacing {sample_dt} ns"),
            )),
            Some(h) => Ok(((sample_dt / h) - 1e-9).ceil().max(1.0) as usize),
        }
    }
}

/// Complex `dim × k` block stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBlock {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl ComplexBlock {
    pub fn real(re: DMatrix<f64>) -> Self {
        let im = DMatrix::zeros(re.nrows(), re.ncols());
        Self { re, im }
    }

    pub fn identity(dim: usize) -> Self {
        Self::real(DMatrix::identity(dim, dim))
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.re.nrows(), self.re.ncols(), |r, c| {
            Complex64::new(self.re[(r, c)], self.im[(r, c)])
        })
    }

    /// `Aᵀ · self` for real `A`.
    pub fn left_tr_mul(&self, a: &DMatrix<f64>) -> Self {
        Self {
            re: a.tr_mul(&self.re),
            im: a.tr_mul(&self.im),
        }
    }

    /// `A · self` for real `A`.
    pub fn left_mul(&self, a: &DMatrix<f64>) -> Self {
        Self {
            re: a * &self.re,
            im: a * &self.im,
        }
    }

    /// `self · B` for complex `B`.
    pub fn mul(&self, b: &ComplexBlock) -> Self {
        Self {
            re: &self.re * &b.re - &self.im * &b.im,
            im: &self.re * &b.im + &self.im * &b.re,
        }
    }

    /// Multiplies row `r` by `exp(−i θ_r)`.
    pub fn rotate_rows(&mut self, theta: &[f64]) {
        for (r, &th) in theta.iter().enumerate() {
            let (s, c) = th.sin_cos();
            for col in 0..self.re.ncols() {
                let (a, b) = (self.re[(r, col)], self.im[(r, col)]);
                self.re[(r, col)] = c * a + s * b;
                self.im[(r, col)] = c * b - s * a;
            }
        }
    }

    /// Largest entry of `|self†self − I|`.
    pub fn isometry_deviation(&self) -> f64 {
        let re = self.re.tr_mul(&self.re) + self.im.tr_mul(&self.im);
        let im = self.re.tr_mul(&self.im) - self.im.tr_mul(&self.re);
        let mut dev: f64 = 0.0;
        for r in 0..re.nrows() {
            for c in 0..re.ncols() {
                let target = if r == c { 1.0 } else { 0.0 };
                dev = dev.max(Complex64::new(re[(r, c)] - target, im[(r, c)]).norm());
            }
        }
        dev
    }
}

/// Real-symmetric Hamiltonian (rad/ns) as a function of the bus detuning.
#[derive(Debug, Clone)]
pub struct Propagator {
    split: SplitHamiltonian<f64>,
    q1_ghz: f64,
}

impl Propagator {
    pub fn new(spec: &DeviceSpec<f64>) -> Result<Self> {
        Ok(Self {
            split: SplitHamiltonian::new(spec)?,
            q1_ghz: spec.mode(ModeLabel::Q1).frequency_ghz,
        })
    }

    pub fn dimension(&self) -> usize {
        self.split.static_part.nrows()
    }

    /// Bus frequency for a detuning `Δ = ω_Q1 − ω_bus`.
    pub fn bus_ghz(&self, detuning_ghz: f64) -> f64 {
        self.q1_ghz - detuning_ghz
    }

    pub fn hamiltonian(&self, detuning_ghz: f64) -> DMatrix<f64> {
        self.split.at_bus_frequency(self.bus_ghz(detuning_ghz))
    }

    /// Applies `exp(−i H(Δ) τ)` to `state`.
    pub fn apply_constant(
        &self,
        detuning_ghz: f64,
        tau_ns: f64,
        state: &ComplexBlock,
    ) -> ComplexBlock {
        let eig = self.hamiltonian(detuning_ghz).symmetric_eigen();
        let theta: Vec<f64> = eig.eigenvalues.iter().map(|e| e * tau_ns).collect();
        let mut w = state.left_tr_mul(&eig.eigenvectors);
        w.rotate_rows(&theta);
        w.left_mul(&eig.eigenvectors)
    }

    /// Evolves `state` through the waveform.
    pub fn evolve(
        &self,
        wf: &PulseWaveform<f64>,
        cfg: &PropagationConfig,
        state: ComplexBlock,
    ) -> Result<ComplexBlock> {
        check_waveform(wf)?;
        if state.re.nrows() != self.dimension() {
            return Err(Error::Dimension(format!(
                "state has {} rows, Hamiltonian dimension is {}",
                state.re.nrows(),
                self.dimension()
            )));
        }
        let n_sub = cfg.substeps(wf.dt_ns)?;
        let h = wf.dt_ns / n_sub as f64;
        let mut s = state;
        for w in wf.values.windows(2) {
            let (v0, v1) = (w[0], w[1]);
            let at = |frac: f64| v0 + (v1 - v0) * frac;
            for j in 0..n_sub {
                let f0 = j as f64 / n_sub as f64;
                let f1 = (j + 1) as f64 / n_sub as f64;
                s = match cfg.method {
                    Method::PiecewiseExponential => self.apply_constant(at(0.5 * (f0 + f1)), h, &s),
                    Method::Rk4 => self.rk4_step(at(f0), at(0.5 * (f0 + f1)), at(f1), h, &s),
                };
            }
        }
        let dev = s.isometry_deviation();
        if dev > UNITARITY_LIMIT {
            return Err(Error::IntegrationAccuracy { deviation: dev });
        }
        Ok(s)
    }

    fn rk4_step(&self, d0: f64, dm: f64, d1: f64, h: f64, s: &ComplexBlock) -> ComplexBlock {
        // dψ/dt = −iHψ  ⇒  d(re)/dt = H·im, d(im)/dt = −H·re
        let deriv = |ham: &DMatrix<f64>, x: &ComplexBlock| ComplexBlock {
            re: ham * &x.im,
            im: -(ham * &x.re),
        };
        let axpy = |x: &ComplexBlock, k: &ComplexBlock, a: f64| ComplexBlock {
            re: &x.re + &k.re * a,
            im: &x.im + &k.im * a,
        };
        let (h0, hm, h1) = (
            self.hamiltonian(d0),
            self.hamiltonian(dm),
            self.hamiltonian(d1),
        );
        let k1 = deriv(&h0, s);
        let k2 = deriv(&hm, &axpy(s, &k1, 0.5 * h));
        let k3 = deriv(&hm, &axpy(s, &k2, 0.5 * h));
        let k4 = deriv(&h1, &axpy(s, &k3, h));
        ComplexBlock {
            re: &s.re + (&k1.re + &k2.re * 2.0 + &k3.re * 2.0 + &k4.re) * (h / 6.0),
            im: &s.im + (&k1.im + &k2.im * 2.0 + &k3.im * 2.0 + &k4.im) * (h / 6.0),
        }
    }
}

fn check_waveform(wf: &PulseWaveform<f64>) -> Result<()> {
    if wf.kind != WaveformKind::Detuning {
        return Err(Error::config(
            "waveform.kind",
            "propagation needs a detuning waveform; convert flux waveforms first",
        ));
    }
    if wf.values.is_empty() || wf.values.len() != wf.times_ns.len() {
        return Err(Error::Dimension(
            "waveform times and values must be non-empty and equal in length".into(),
        ));
    }
    if !(wf.dt_ns > 0.0) {
        return Err(Error::config(
            "waveform.dt_ns",
            "sample spacing must be positive",
        ));
    }
    if let Some(k) = wf.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Range {
            index: k,
            message: "non-finite detuning".into(),
        });
    }
    Ok(())
}

/// Full propagator of a waveform.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub unitary: DMatrix<Complex64>,
    pub unitarity_deviation: f64,
    pub duration_ns: f64,
}

/// Propagator `U(T)` over the full truncated Hilbert space.
pub fn propagate(
    spec: &DeviceSpec<f64>,
    wf: &PulseWaveform<f64>,
    cfg: &PropagationConfig,
) -> Result<Propagation> {
    let prop = Propagator::new(spec)?;
    let u = prop.evolve(wf, cfg, ComplexBlock::identity(prop.dimension()))?;
    Ok(Propagation {
        unitarity_deviation: u.isometry_deviation(),
        unitary: u.to_complex(),
        duration_ns: wf.duration_ns(),
    })
}

/// Dressed computational states at the idle point and the frame they define.
#[derive(Debug, Clone)]
pub struct IdleFrame {
    pub detuning_ghz: f64,
    /// Columns are the dressed `00, 01, 10, 11` states.
    pub vectors: DMatrix<f64>,
    /// Dressed energies of `00, 01, 10, 11` (GHz).
    pub energies_ghz: [f64; 4],
    /// Non-interacting reference energies `E00, E01, E10, E01 + E10 − E00` (GHz).
    pub frame_ghz: [f64; 4],
    /// Full idle eigensystem (rad/ns), for exact flat segments.
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl IdleFrame {
    pub fn new(spec: &DeviceSpec<f64>, idle_detuning_ghz: f64) -> Result<Self> {
        spec.require_levels(3)?;
        let prop = Propagator::new(spec)?;
        let h = prop.hamiltonian(idle_detuning_ghz);
        let labeled = label_hamiltonian(spec, h.clone(), &crate::spectrum::REQUIRED)?;
        let dim = prop.dimension();
        let mut vectors = DMatrix::zeros(dim, 4);
        let mut energies = [0.0; 4];
        for (k, label) in COMPUTATIONAL.iter().enumerate() {
            let col = labeled.assignment[label];
            let mut v = labeled.eigenvectors.column(col).into_owned();
            // fix the sign so the bare component is positive
            let bare = spec.basis_index(label.q1, label.q2, label.bus);
            if v[bare] < 0.0 {
                v = -v;
            }
            vectors.set_column(k, &v);
            energies[k] = labeled.energies_ghz[col];
        }
        let frame = [
            energies[0],
            energies[1],
            energies[2],
            energies[1] + energies[2] - energies[0],
        ];
        let eig = h.symmetric_eigen();
        Ok(Self {
            detuning_ghz: idle_detuning_ghz,
            vectors,
            energies_ghz: energies,
            frame_ghz: frame,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// Static ZZ at the idle point (MHz).
    pub fn zz_mhz(&self) -> f64 {
        (self.energies_ghz[3] - self.frame_ghz[3]) * 1e3
    }

    /// Dressed splitting `E10 − E01` (GHz).
    pub fn qubit_splitting_ghz(&self) -> f64 {
        self.energies_ghz[2] - self.energies_ghz[1]
    }

    pub fn initial_block(&self) -> ComplexBlock {
        ComplexBlock::real(self.vectors.clone())
    }

    /// Exact free evolution at the idle point for `tau_ns`.
    pub fn idle_evolution(&self, tau_ns: f64, state: &ComplexBlock) -> ComplexBlock {
        let theta: Vec<f64> = self.eigenvalues.iter().map(|e| e * tau_ns).collect();
        let mut w = state.left_tr_mul(&self.eigenvectors);
        w.rotate_rows(&theta);
        w.left_mul(&self.eigenvectors)
    }

    /// Projects an evolved block (columns = evolved dressed inputs) onto the
    /// dressed computational states and removes the frame rotation for a
    /// gate of duration `duration_ns`.
    pub fn project(&self, evolved: &ComplexBlock, duration_ns: f64) -> Matrix4<Complex64> {
        let p = evolved.left_tr_mul(&self.vectors);
        let two_pi = std::f64::consts::TAU;
        Matrix4::from_fn(|r, c| {
            let phase = Complex64::from_polar(1.0, two_pi * self.frame_ghz[r] * duration_ns);
            Complex64::new(p.re[(r, c)], p.im[(r, c)]) * phase
        })
    }
}

/// Dressed-label order used in [`GateReport`] operators.
pub const GATE_BASIS: [BareLabel; 4] = COMPUTATIONAL;

/// Characterizes the gate produced by `wf`, taking the first sample as the
/// idle point.
pub fn gate_report(
    spec: &DeviceSpec<f64>,
    wf: &PulseWaveform<f64>,
    cfg: &PropagationConfig,
) -> Result<GateReport> {
    check_waveform(wf)?;
    let frame = IdleFrame::new(spec, wf.values[0])?;
    let prop = Propagator::new(spec)?;
    let evolved = prop.evolve(wf, cfg, frame.initial_block())?;
    let duration = wf.duration_ns();
    Ok(report_from_projection(
        &frame.project(&evolved, duration),
        duration,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::pulse::{sample_pulse, PulseParams};

    fn flat(detuning: f64, duration: f64, dt: f64) -> PulseWaveform<f64> {
        let n = (duration / dt).round() as usize;
        PulseWaveform {
            kind: WaveformKind::Detuning,
            times_ns: (0..=n).map(|k| k as f64 * dt).collect(),
            values: vec![detuning; n + 1],
            dt_ns: dt,
            half_length_ns: duration / 2.0,
            delay_ns: None,
        }
    }

    fn pair1_pulse() -> PulseParams<f64> {
        PulseParams::new(2.8, 0.5, 0.156, 0.3, 23.0, 0.1).unwrap()
    }

    #[test]
    fn zero_duration_is_identity() {
        let d = presets::pair1_like();
        let r = gate_report(&d, &flat(2.8, 0.0, 0.1), &PropagationConfig::default()).unwrap();
        assert!(r.cz_angle.abs() < 1e-12);
        assert!(r.iswap_angle < 1e-12);
        assert!(r.leakage.abs() < 1e-12);
        // (|Tr U_CZ|² + 4) / 20 with Tr U_CZ = 2
        assert!((r.fidelity - 0.4).abs() < 1e-12);
    }

    #[test]
    fn idle_accumulates_static_zz() {
        let d = presets::pair1_like();
        let frame = IdleFrame::new(&d, 2.8).unwrap();
        let t = 40.0;
        let r = gate_report(&d, &flat(2.8, t, 0.5), &PropagationConfig::default()).unwrap();
        let expected = wrap_angle(-std::f64::consts::TAU * frame.zz_mhz() * 1e-3 * t);
        assert!(
            (r.cz_angle - expected).abs() < 1e-9,
            "{} vs {}",
            r.cz_angle,
            expected
        );
        assert!(r.leakage.abs() < 1e-10);
        assert!(r.iswap_angle < 1e-6);
    }

    #[test]
    fn constant_hamiltonian_is_diagonal_in_eigenbasis() {
        let d = presets::bbq_model();
        let prop = Propagator::new(&d).unwrap();
        let wf = flat(1.5, 3.0, 0.1);
        let u = prop
            .evolve(
                &wf,
                &PropagationConfig::default(),
                ComplexBlock::identity(prop.dimension()),
            )
            .unwrap();
        let (e, v) = crate::spectrum::sorted_eigh(prop.hamiltonian(1.5));
        let ud = u.left_tr_mul(&v).mul(&ComplexBlock::real(v.clone()));
        for r in 0..e.len() {
            for c in 0..e.len() {
                let z = Complex64::new(ud.re[(r, c)], ud.im[(r, c)]);
                let want = if r == c {
                    Complex64::from_polar(1.0, -e[r] * 3.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((z - want).norm() < 1e-9);
            }
        }
        // energy is conserved: <H> of an evolved state equals the initial one
        let h = prop.hamiltonian(1.5);
        let psi0 = ComplexBlock::real(DMatrix::from_fn(prop.dimension(), 1, |r, _| {
            if r == 1 || r == 17 {
                0.5f64.sqrt()
            } else {
                0.0
            }
        }));
        let psi = prop
            .evolve(&wf, &PropagationConfig::default(), psi0.clone())
            .unwrap();
        let energy =
            |s: &ComplexBlock| (s.re.tr_mul(&(&h * &s.re)) + s.im.tr_mul(&(&h * &s.im)))[(0, 0)];
        assert!((energy(&psi) - energy(&psi0)).abs() / std::f64::consts::TAU < 1e-9);
    }

    #[test]
    fn pulse_propagator_is_unitary() {
        let d = presets::pair1_like();
        let wf = sample_pulse(&pair1_pulse()).unwrap();
        let p = propagate(&d, &wf, &PropagationConfig::default()).unwrap();
        assert!(p.unitarity_deviation < 1e-8);
        let det = p.unitary.clone().determinant();
        assert!((det.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rk4_agrees_with_exponential() {
        let d = presets::pair1_like();
        let p = PulseParams::new(2.8, 1.2, 0.156, 0.5, 4.0, 0.05).unwrap();
        let wf = sample_pulse(&p).unwrap();
        let a = gate_report(&d, &wf, &PropagationConfig::with_step(0.001)).unwrap();
        // RK4 is fourth order in a stiff problem; it needs a much finer step
        let rk = PropagationConfig {
            step_dt_ns: Some(0.00025),
            method: Method::Rk4,
        };
        let b = gate_report(&d, &wf, &rk).unwrap();
        assert!(
            (a.cz_angle - b.cz_angle).abs() < 1e-6,
            "{} {} {} {}",
            a.cz_angle,
            b.cz_angle,
            a.leakage,
            b.leakage
        );
        assert!((a.leakage - b.leakage).abs() < 1e-8);
    }

    #[test]
    fn step_larger_than_samples_rejected() {
        let d = presets::pair1_like();
        let wf = flat(2.8, 2.0, 0.1);
        assert!(matches!(
            gate_report(&d, &wf, &PropagationConfig::with_step(0.2)),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn flux_waveform_rejected() {
        let d = presets::pair1_like();
        let mut wf = flat(2.8, 2.0, 0.1);
        wf.kind = WaveformKind::Flux;
        assert!(gate_report(&d, &wf, &PropagationConfig::default()).is_err());
    }
}
