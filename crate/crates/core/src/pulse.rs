// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Adiabatic bus-detuning pulses.
//!
//! The pulse is defined through the quantization angle
//! `θ = atan(Δ_bus / 2g)` of the qubit-bus avoided crossing. Its time
//! derivative follows `dθ/dt ∝ atan(a t)` on `[−l, l]`, so the angle (and
//! hence the detuning) moves slowly at the start, end, and midpoint of the
//! pulse. Integrating gives
//!
//! ```text
//! θ(t) = θ₂ + (θ₁ − θ₂) F(t) / F(l),   F(t) = t·atan(a t) − ln(1 + a²t²) / 2a
//! Δ_bus(t) = 2g tan θ(t)
//! ```
//!
//! with `θ₁ = atan(Δ₁/2g)` at `t = ±l` and `θ₂ = atan(Δ₂/2g)` at `t = 0`.
//! Detuning is `Δ_bus = ω_Q1 − ω_bus` in GHz.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_sig;
use crate::scalar::{lit, to_f64, to_usize, Scalar};
use crate::spectrum::{inverse_flux, FluxBranch, SquidSpec};

/// Default ratio of the shaping coupling to the physical qubit-bus coupling.
pub const DEFAULT_G_EFF_RATIO: f64 = 1.2;

/// Fewest samples a waveform may have.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams<T> {
    /// Start and end detuning `Δ₁` (GHz), normally the idle point.
    pub delta1_ghz: T,
    /// Detuning at the pulse midpoint, `Δ₂` (GHz).
    pub delta2_ghz: T,
    /// Shaping coupling `g` (GHz).
    pub g_eff_ghz: T,
    /// Turn rate `a` (1/ns).
    pub turn_rate_per_ns: T,
    /// Half length `l` (ns); the pulse spans `[−l, l]`.
    pub half_length_ns: T,
    pub sample_dt_ns: T,
}

impl<T: Scalar> PulseParams<T> {
    pub fn new(
        delta1: T,
        delta2: T,
        g_eff: T,
        turn_rate: T,
        half_length: T,
        sample_dt: T,
    ) -> Result<Self> {
        let p = Self {
            delta1_ghz: delta1,
            delta2_ghz: delta2,
            g_eff_ghz: g_eff,
            turn_rate_per_ns: turn_rate,
            half_length_ns: half_length,
            sample_dt_ns: sample_dt,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: T, field: &str| {
            if x > T::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    format!("pulse.{field}"),
                    format!("must be positive and finite, got {x}"),
                ))
            }
        };
        positive(self.half_length_ns, "half_length_ns")?;
        positive(self.sample_dt_ns, "sample_dt_ns")?;
        positive(self.g_eff_ghz, "g_eff_ghz")?;
        positive(self.turn_rate_per_ns, "turn_rate_per_ns")?;
        let (d1, d2) = (self.delta1_ghz, self.delta2_ghz);
        if !d1.is_finite() || !d2.is_finite() {
            return Err(Error::config(
                "pulse.delta1_ghz",
                "detunings must be finite",
            ));
        }
        if d1 == T::zero() {
            return Err(Error::config(
                "pulse.delta1_ghz",
                "idle detuning must be nonzero",
            ));
        }
        if d2 != d1 && (d1.signum() != d2.signum() || d2.abs() > d1.abs()) {
            return Err(Error::config(
                "pulse.delta2_ghz",
                format!("must share the sign of delta1_ghz and not exceed it in magnitude (delta1 = {d1}, delta2 = {d2})"),
            ));
        }
        Ok(())
    }

    /// Total duration `2l` (ns).
    pub fn duration_ns(&self) -> T {
        lit::<T>(2.0) * self.half_length_ns
    }

    /// Pulse amplitude `Δ₁ − Δ₂` (GHz).
    pub fn amplitude_ghz(&self) -> T {
        self.delta1_ghz - self.delta2_ghz
    }

    /// Same pulse with the amplitude `Δ₁ − Δ₂` multiplied by `scale`.
    pub fn with_amplitude_scale(&self, scale: T) -> Result<Self> {
        let mut p = *self;
        p.delta2_ghz = self.delta1_ghz - scale * self.amplitude_ghz();
        p.validate()?;
        Ok(p)
    }

    /// Same shape stretched or compressed in time by `factor`; the turn rate
    /// scales inversely so that `a·l` is preserved.
    pub fn time_scaled(&self, factor: T) -> Result<Self> {
        let mut p = *self;
        p.half_length_ns = self.half_length_ns * factor;
        p.turn_rate_per_ns = self.turn_rate_per_ns / factor;
        p.validate()?;
        Ok(p)
    }

    pub fn cast<U: Scalar>(&self) -> PulseParams<U> {
        let c = |x: T| lit::<U>(to_f64(x));
        PulseParams {
            delta1_ghz: c(self.delta1_ghz),
            delta2_ghz: c(self.delta2_ghz),
            g_eff_ghz: c(self.g_eff_ghz),
            turn_rate_per_ns: c(self.turn_rate_per_ns),
            half_length_ns: c(self.half_length_ns),
            sample_dt_ns: c(self.sample_dt_ns),
        }
    }
}

/// `θ = atan(Δ / 2g)`.
pub fn quantization_angle<T: Scalar>(delta_ghz: T, g_eff_ghz: T) -> T {
    (delta_ghz / (lit::<T>(2.0) * g_eff_ghz)).atan()
}

/// Antiderivative of `atan(a t)` vanishing at `t = 0`.
fn angle_profile<T: Scalar>(a: T, t: T) -> T {
    let at = a * t;
    t * at.atan() - (T::one() + at * at).ln() / (lit::<T>(2.0) * a)
}

/// Bus detuning (GHz) at time `t ∈ [−l, l]`.
pub fn adiabatic_shape<T: Scalar>(p: &PulseParams<T>, t: T) -> Result<T> {
    let l = p.half_length_ns;
    if !(t.abs() <= l) {
        return Err(Error::Domain(format!("t = {t} ns outside [-{l}, {l}] ns")));
    }
    if t.abs() == l || p.delta1_ghz == p.delta2_ghz {
        return Ok(p.delta1_ghz);
    }
    if t == T::zero() {
        return Ok(p.delta2_ghz);
    }
    let g = p.g_eff_ghz;
    let th1 = quantization_angle(p.delta1_ghz, g);
    let th2 = quantization_angle(p.delta2_ghz, g);
    let a = p.turn_rate_per_ns;
    let theta = th2 + (th1 - th2) * angle_profile(a, t) / angle_profile(a, l);
    Ok(lit::<T>(2.0) * g * theta.tan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformKind {
    /// Bus detuning `ω_Q1 − ω_bus` in GHz.
    Detuning,
    /// Bus flux in Φ₀.
    Flux,
}

impl WaveformKind {
    pub fn unit(self) -> &'static str {
        match self {
            WaveformKind::Detuning => "GHz",
            WaveformKind::Flux => "Phi0",
        }
    }
}

/// Uniformly sampled waveform. `times[0]` is the start of the gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseWaveform<T> {
    pub kind: WaveformKind,
    pub times_ns: Vec<T>,
    pub values: Vec<T>,
    /// Sample spacing (ns).
    pub dt_ns: T,
    /// Half length actually used after rounding to the sample grid.
    pub half_length_ns: T,
    /// Flat inter-pulse delay for double pulses, after rounding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_ns: Option<T>,
}

impl<T: Scalar> PulseWaveform<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn duration_ns(&self) -> T {
        match (self.times_ns.first(), self.times_ns.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Trapezoid-rule integral of `values − reference` over the waveform (value·ns).
    pub fn integral_relative_to(&self, reference: T) -> T {
        let half = lit::<T>(0.5);
        self.values.windows(2).fold(T::zero(), |acc, w| {
            acc + half * self.dt_ns * (w[0] + w[1] - reference - reference)
        })
    }

    /// Checks the uniform-grid and finiteness invariants.
    pub fn validate(&self) -> Result<()> {
        if self.times_ns.len() != self.values.len() {
            return Err(Error::Dimension(format!(
                "{} times but {} values",
                self.times_ns.len(),
                self.values.len()
            )));
        }
        if self.values.len() < 2 {
            return Err(Error::Resolution(
                "waveform needs at least two samples".into(),
            ));
        }
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Range {
                index: k,
                message: "non-finite waveform value".into(),
            });
        }
        let tol = lit::<T>(1e-9) * self.dt_ns.max(self.duration_ns() * lit::<T>(1e-3));
        for (k, w) in self.times_ns.windows(2).enumerate() {
            if ((w[1] - w[0]) - self.dt_ns).abs() > tol {
                return Err(Error::Range {
                    index: k + 1,
                    message: "time grid is not uniform".into(),
                });
            }
        }
        Ok(())
    }

    /// CSV with a `# kind=..., unit=...` line followed by `t_ns,value` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# kind={},unit={}\nt_ns,value\n",
            self.kind_name(),
            self.kind.unit()
        );
        for (t, v) in self.times_ns.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{}", fmt_sig(to_f64(*t)), fmt_sig(to_f64(*v)));
        }
        out
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            WaveformKind::Detuning => "detuning",
            WaveformKind::Flux => "flux",
        }
    }
}

/// Number of sample intervals covering `span`, rounding up unless `span`
/// is already a multiple of `dt` to within float noise.
fn intervals<T: Scalar>(span: T, dt: T) -> usize {
    let r = span / dt;
    let nearest = r.round();
    let n = if (r - nearest).abs() <= lit::<T>(1e-9) * nearest.max(T::one()) {
        nearest
    } else {
        r.ceil()
    };
    to_usize(n)
}

/// Samples the pulse on a grid symmetric about its midpoint, starting at
/// `t = 0`. If `2l` is not a multiple of `dt`, `l` is rounded up to the
/// next half sample.
pub fn sample_pulse<T: Scalar>(p: &PulseParams<T>) -> Result<PulseWaveform<T>> {
    p.validate()?;
    let dt = p.sample_dt_ns;
    let n = intervals(p.duration_ns(), dt);
    if n + 1 < MIN_SAMPLES {
        return Err(Error::Resolution(format!(
            "pulse of {} ns at dt = {dt} ns has {} samples, need at least {MIN_SAMPLES}",
            p.duration_ns(),
            n + 1
        )));
    }
    let half = lit::<T>(0.5);
    let mut q = *p;
    q.half_length_ns = lit::<T>(n as f64) * dt * half;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..=n {
        // centred time computed from the integer offset keeps the grid exactly even
        let tc = lit::<T>((2 * k) as f64 - n as f64) * dt * half;
        times.push(lit::<T>(k as f64) * dt);
        values.push(adiabatic_shape(&q, tc)?);
    }
    // enforce exact mirror symmetry against last-ulp differences
    for k in 0..n / 2 {
        values[n - k] = values[k];
    }
    Ok(PulseWaveform {
        kind: WaveformKind::Detuning,
        times_ns: times,
        values,
        dt_ns: dt,
        half_length_ns: q.half_length_ns,
        delay_ns: None,
    })
}

/// Two copies of the sampled pulse separated by a flat segment at `Δ₁`.
/// The delay is rounded to the nearest whole number of samples.
pub fn compose_double_pulse<T: Scalar>(
    single: &PulseParams<T>,
    delay_ns: T,
) -> Result<PulseWaveform<T>> {
    if !(delay_ns >= T::zero()) || !delay_ns.is_finite() {
        return Err(Error::config(
            "delay_ns",
            format!("must be finite and non-negative, got {delay_ns}"),
        ));
    }
    let one = sample_pulse(single)?;
    let dt = one.dt_ns;
    let m = to_usize((delay_ns / dt).round());
    let n = one.len() - 1;
    let total = 2 * n + m;
    let mut values = Vec::with_capacity(total + 1);
    values.extend_from_slice(&one.values);
    values.extend(std::iter::repeat_n(single.delta1_ghz, m));
    values.extend_from_slice(&one.values[1..]);
    let times = (0..=total).map(|k| lit::<T>(k as f64) * dt).collect();
    Ok(PulseWaveform {
        kind: WaveformKind::Detuning,
        times_ns: times,
        values,
        dt_ns: dt,
        half_length_ns: one.half_length_ns,
        delay_ns: Some(lit::<T>(m as f64) * dt),
    })
}

/// Converts a detuning waveform to bus flux, with `ω_bus = anchor − Δ_bus`.
pub fn to_flux_waveform<T: Scalar>(
    wf: &PulseWaveform<T>,
    anchor_qubit_frequency_ghz: T,
    squid: &SquidSpec<T>,
    branch: FluxBranch,
) -> Result<PulseWaveform<T>> {
    if wf.kind != WaveformKind::Detuning {
        return Err(Error::config(
            "waveform.kind",
            "flux conversion needs a detuning waveform",
        ));
    }
    squid.validate()?;
    let values = wf
        .values
        .iter()
        .enumerate()
        .map(|(k, &d)| {
            inverse_flux(squid, anchor_qubit_frequency_ghz - d, branch).map_err(|e| match e {
                Error::Range { message, .. } => Error::Range { index: k, message },
                other => other,
            })
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(PulseWaveform {
        kind: WaveformKind::Flux,
        values,
        ..wf.clone()
    })
}
