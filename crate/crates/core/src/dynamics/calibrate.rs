// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Amplitude and delay calibration.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{report_from_projection, wrap_angle, GateReport};
use super::{gate_report, ComplexBlock, IdleFrame, PropagationConfig, Propagator};
use crate::error::{Error, Result};
use crate::hilbert::DeviceSpec;
use crate::optim::{brent_root, golden_section_min, RootTolerance};
use crate::pulse::{sample_pulse, PulseParams};

/// Conditional-phase tolerance of a successful calibration (rad).
pub const CZ_TOLERANCE: f64 = 1e-4;
/// Largest accepted iSWAP angle after delay calibration (rad).
pub const ISWAP_TOLERANCE: f64 = 0.01;
/// Largest amplitude scale accepted by scans.
pub const MAX_AMPLITUDE_SCALE: f64 = 1.5;
const MIN_SCALE_STEP: f64 = 1e-4;

/// Removes `2π` jumps between consecutive phases.
pub fn unwrap_phases(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut offset = 0.0;
    for (k, &x) in xs.iter().enumerate() {
        if k > 0 {
            let d = x - xs[k - 1];
            offset -= (d / (2.0 * PI)).round() * 2.0 * PI;
        }
        out.push(x + offset);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePoint {
    pub scale: f64,
    /// Phase of Q2 with Q1 in |0⟩, `φ01 − φ00` (rad).
    pub phase_control0: Option<f64>,
    /// Phase of Q2 with Q1 in |1⟩, `φ11 − φ10` (rad).
    pub phase_control1: Option<f64>,
    pub cz_angle: Option<f64>,
    pub error: Option<String>,
}

/// Conditional phases of Q2 for each amplitude scale on `Δ₁ − Δ₂`. Phases
/// are unwrapped along the scan; failed points are recorded and skipped.
pub fn amplitude_scan(
    spec: &DeviceSpec<f64>,
    base: &PulseParams<f64>,
    scales: &[f64],
    cfg: &PropagationConfig,
) -> Result<Vec<AmplitudePoint>> {
    base.validate()?;
    let raw: Vec<Result<GateReport>> = scales
        .par_iter()
        .map(|&s| {
            if !(0.0..=MAX_AMPLITUDE_SCALE).contains(&s) {
                return Err(Error::config(
                    "amplitudes",
                    format!("scale {s} outside [0, {MAX_AMPLITUDE_SCALE}]"),
                ));
            }
            let p = base.with_amplitude_scale(s)?;
            gate_report(spec, &sample_pulse(&p)?, cfg)
        })
        .collect();
    let ok: Vec<&GateReport> = raw.iter().filter_map(|r| r.as_ref().ok()).collect();
    let c0 = unwrap_phases(
        &ok.iter()
            .map(|r| r.diagonal_phases[1] - r.diagonal_phases[0])
            .collect::<Vec<_>>(),
    );
    let c1 = unwrap_phases(
        &ok.iter()
            .map(|r| r.diagonal_phases[3] - r.diagonal_phases[2])
            .collect::<Vec<_>>(),
    );
    let mut k = 0;
    Ok(scales
        .iter()
        .zip(raw)
        .map(|(&scale, r)| match r {
            Ok(rep) => {
                let pt = AmplitudePoint {
                    scale,
                    phase_control0: Some(c0[k]),
                    phase_control1: Some(c1[k]),
                    cz_angle: Some(rep.cz_angle),
                    error: None,
                };
                k += 1;
                pt
            }
            Err(e) => AmplitudePoint {
                scale,
                phase_control0: None,
                phase_control1: None,
                cz_angle: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// Coarse scan settings for bracketing a conditional phase of π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSearch {
    /// Initial scan step in amplitude scale.
    pub step: f64,
    pub max_scale: f64,
}

impl Default for ScaleSearch {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_scale: MAX_AMPLITUDE_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzCalibration {
    pub params: PulseParams<f64>,
    /// Calibrated amplitude relative to the input pulse.
    pub scale: f64,
    pub report: GateReport,
}

/// Finds the amplitude scale on `Δ₁ − Δ₂` at which `eval` yields a
/// conditional phase of π.
///
/// The phase is followed continuously from zero amplitude upward until its
/// magnitude passes π; the crossing is then polished with Brent's method.
pub fn calibrate_amplitude<F>(
    base: &PulseParams<f64>,
    search: ScaleSearch,
    mut eval: F,
) -> Result<CzCalibration>
where
    F: FnMut(&PulseParams<f64>) -> Result<GateReport>,
{
    base.validate()?;
    let amp = base.amplitude_ghz();
    if amp == 0.0 {
        return Err(Error::config(
            "pulse.delta2_ghz",
            "pulse has zero amplitude; nothing to scale",
        ));
    }
    // largest scale that keeps Δ₂ on the same side of zero as Δ₁
    let s_limit = (base.delta1_ghz / amp).min(search.max_scale);
    let mut cz_at = |s: f64| -> Result<f64> { Ok(eval(&base.with_amplitude_scale(s)?)?.cz_angle) };

    let mut s_prev = 0.0;
    let mut raw_prev = cz_at(0.0)?;
    let mut u_prev = raw_prev;
    let mut d_prev = 0.0;
    let mut step = search.step;
    let bracket = loop {
        let s = (s_prev + step).min(s_limit * (1.0 - 1e-9));
        if s <= s_prev {
            return Err(Error::Calibration(format!(
                "conditional phase reaches only {u_prev:.4} rad before the amplitude limit {s_limit:.4}"
            )));
        }
        let raw = cz_at(s)?;
        let d = wrap_angle(raw - raw_prev);
        // a large increment, or one reversing direction, may hide a 2π wrap
        let reversed = d * d_prev < 0.0 && d.abs() > 1e-3;
        if (d.abs() > 0.25 * PI || reversed) && step > MIN_SCALE_STEP {
            step *= 0.5;
            continue;
        }
        let u = u_prev + d;
        if u.abs() >= PI {
            break (s_prev, u_prev, raw_prev, s, u);
        }
        if d.abs() < PI / 16.0 {
            step = (2.0 * step).min(search.step);
        }
        s_prev = s;
        raw_prev = raw;
        u_prev = u;
        d_prev = d;
    };
    let (sa, _ua, raw_a, sb, ub) = bracket;
    let target = PI * ub.signum();
    let u_a = wrap_angle(raw_a - target);
    let f = |s: f64| -> Result<f64> {
        // continuous near the bracket: measured relative to the lower end
        let raw = cz_at(s)?;
        Ok(u_a + wrap_angle(raw - raw_a))
    };
    let tol = RootTolerance {
        x_tol: 1e-10,
        f_tol: 1e-9,
        max_iter: 100,
    };
    let scale =
        brent_root(f, sa, sb, tol).map_err(|e| Error::Calibration(format!("phase root: {e}")))?;
    let params = base.with_amplitude_scale(scale)?;
    let report = eval(&params)?;
    if wrap_angle(report.cz_angle - PI).abs() > CZ_TOLERANCE {
        return Err(Error::Calibration(format!(
            "conditional phase {:.6} rad after calibration misses π",
            report.cz_angle
        )));
    }
    Ok(CzCalibration {
        params,
        scale,
        report,
    })
}

/// Calibrates a single adiabatic pulse to a CZ.
pub fn calibrate_cz(
    spec: &DeviceSpec<f64>,
    base: &PulseParams<f64>,
    cfg: &PropagationConfig,
) -> Result<CzCalibration> {
    calibrate_amplitude(base, ScaleSearch::default(), |p| {
        gate_report(spec, &sample_pulse(p)?, cfg)
    })
}

/// Two copies of a pulse separated by a variable flat segment at `Δ₁`.
///
/// The pulse propagator is computed once; the flat segment is applied as an
/// exact idle evolution, so the delay is continuous.
#[derive(Debug, Clone)]
pub struct DoublePulse {
    frame: IdleFrame,
    pulse: ComplexBlock,
    after_first: ComplexBlock,
    pulse_duration_ns: f64,
}

impl DoublePulse {
    pub fn new(
        spec: &DeviceSpec<f64>,
        single: &PulseParams<f64>,
        cfg: &PropagationConfig,
    ) -> Result<Self> {
        let wf = sample_pulse(single)?;
        let frame = IdleFrame::new(spec, single.delta1_ghz)?;
        let prop = Propagator::new(spec)?;
        let pulse = prop.evolve(&wf, cfg, ComplexBlock::identity(prop.dimension()))?;
        let after_first = pulse.mul(&frame.initial_block());
        Ok(Self {
            frame,
            pulse,
            after_first,
            pulse_duration_ns: wf.duration_ns(),
        })
    }

    pub fn frame(&self) -> &IdleFrame {
        &self.frame
    }

    pub fn duration_ns(&self, delay_ns: f64) -> f64 {
        2.0 * self.pulse_duration_ns + delay_ns
    }

    /// Projected operator for the given delay.
    pub fn projection(&self, delay_ns: f64) -> Result<Matrix4<Complex64>> {
        if !(delay_ns >= 0.0) || !delay_ns.is_finite() {
            return Err(Error::config(
                "delay_ns",
                format!("must be finite and non-negative, got {delay_ns}"),
            ));
        }
        let mid = self.frame.idle_evolution(delay_ns, &self.after_first);
        let out = self.pulse.mul(&mid);
        Ok(self.frame.project(&out, self.duration_ns(delay_ns)))
    }

    pub fn report(&self, delay_ns: f64) -> Result<GateReport> {
        Ok(report_from_projection(
            &self.projection(delay_ns)?,
            self.duration_ns(delay_ns),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayPoint {
    pub delay_ns: f64,
    /// Probability of finding Q1 excited for inputs `00, 01, 10, 11`.
    pub p_q1_excited: Option<[f64; 4]>,
    /// `|⟨10|U|01⟩|²`
    pub swap_01_to_10: Option<f64>,
    /// `|⟨01|U|10⟩|²`
    pub swap_10_to_01: Option<f64>,
    pub cz_angle: Option<f64>,
    pub iswap_angle: Option<f64>,
    pub leakage: Option<f64>,
    pub error: Option<String>,
}

impl DelayPoint {
    fn from_projection(delay_ns: f64, m: &Matrix4<Complex64>, r: &GateReport) -> Self {
        let pop = |row: usize, col: usize| m[(row, col)].norm_sqr();
        let mut p = [0.0; 4];
        for (col, slot) in p.iter_mut().enumerate() {
            *slot = pop(2, col) + pop(3, col);
        }
        Self {
            delay_ns,
            p_q1_excited: Some(p),
            swap_01_to_10: Some(pop(2, 1)),
            swap_10_to_01: Some(pop(1, 2)),
            cz_angle: Some(r.cz_angle),
            iswap_angle: Some(r.iswap_angle),
            leakage: Some(r.leakage),
            error: None,
        }
    }

    fn failed(delay_ns: f64, e: Error) -> Self {
        Self {
            delay_ns,
            p_q1_excited: None,
            swap_01_to_10: None,
            swap_10_to_01: None,
            cz_angle: None,
            iswap_angle: None,
            leakage: None,
            error: Some(e.to_string()),
        }
    }
}

/// Double-pulse response versus inter-pulse delay.
pub fn delay_scan(
    spec: &DeviceSpec<f64>,
    single: &PulseParams<f64>,
    delays: &[f64],
    cfg: &PropagationConfig,
) -> Result<Vec<DelayPoint>> {
    let dp = DoublePulse::new(spec, single, cfg)?;
    Ok(delays
        .par_iter()
        .map(|&d| match dp.projection(d) {
            Ok(m) => {
                DelayPoint::from_projection(d, &m, &report_from_projection(&m, dp.duration_ns(d)))
            }
            Err(e) => DelayPoint::failed(d, e),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayCalibration {
    pub delay_ns: f64,
    pub params: PulseParams<f64>,
    pub report: GateReport,
    pub rounds: usize,
}

/// Grid points used to locate the iSWAP minimum before refinement.
const DELAY_GRID: usize = 121;
const DELAY_ROUNDS: usize = 4;

fn minimize_iswap(dp: &DoublePulse, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let grid: Vec<f64> = (0..DELAY_GRID)
        .map(|k| lo + (hi - lo) * k as f64 / (DELAY_GRID - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&d| dp.report(d).map(|r| r.iswap_angle))
        .collect::<Result<_>>()?;
    let k = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty grid");
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(DELAY_GRID - 1)];
    golden_section_min(|d| Ok(dp.report(d)?.iswap_angle), a, b, 1e-7, 200)
}

/// Finds the delay in `bracket` that nulls the iSWAP angle of the double
/// pulse, re-trimming the amplitude for a π conditional phase after each
/// delay update.
pub fn calibrate_delay(
    spec: &DeviceSpec<f64>,
    single: &PulseParams<f64>,
    bracket: (f64, f64),
    cfg: &PropagationConfig,
) -> Result<DelayCalibration> {
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::config(
            "bracket",
            format!("need 0 <= lo < hi, got ({lo}, {hi})"),
        ));
    }
    let mut params = *single;
    let mut last = None;
    for round in 1..=DELAY_ROUNDS {
        let dp = DoublePulse::new(spec, &params, cfg)?;
        let (delay, iswap) = minimize_iswap(&dp, lo, hi)?;
        if round == 1 && iswap > ISWAP_TOLERANCE {
            return Err(Error::Calibration(format!(
                "smallest iSWAP angle in [{lo}, {hi}] ns is {iswap:.4} rad at {delay:.3} ns"
            )));
        }
        let cal = calibrate_amplitude(&params, ScaleSearch::default(), |p| {
            DoublePulse::new(spec, p, cfg)?.report(delay)
        })?;
        params = cal.params;
        let report = cal.report;
        let done = report.iswap_angle < ISWAP_TOLERANCE
            && wrap_angle(report.cz_angle - PI).abs() < CZ_TOLERANCE;
        last = Some(DelayCalibration {
            delay_ns: delay,
            params,
            report,
            rounds: round,
        });
        if done {
            break;
        }
    }
    let out = last.expect("at least one round");
    if out.report.iswap_angle >= ISWAP_TOLERANCE {
        return Err(Error::Calibration(format!(
            "iSWAP angle {:.4} rad remains after {} rounds",
            out.report.iswap_angle, out.rounds
        )));
    }
    Ok(out)
}
