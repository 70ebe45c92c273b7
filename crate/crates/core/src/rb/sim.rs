// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Density-matrix simulation of standard and interleaved RB.
//!
//! Single-qubit gates are ideal; errors enter only through the CZ.
//! Population lost by a non-unitary CZ operator stays lost, which acts as an
//! absorbing sink outside the computational space.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clifford::{clifford_group, cz, CliffordGroup, Unitary};
use super::fit::{epc_from_p, epg_bound, fit_decay, interleaved_epg, DecayFit};
use crate::dynamics::Operator4;
use crate::error::{Error, Result};

type C = Complex64;
type Density = Matrix4<C>;

/// How each physical CZ acts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum NoiseModel {
    Ideal,
    /// Ideal CZ followed by two-qubit depolarizing noise with average gate
    /// infidelity `epsilon`.
    DepolarizingAfterCz {
        epsilon: f64,
    },
    /// The CZ is replaced by this projected operator.
    CustomCz {
        operator: Operator4,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Ideal => Ok(()),
            NoiseModel::DepolarizingAfterCz { epsilon } => {
                if !(0.0..=0.75).contains(epsilon) {
                    return Err(Error::config(
                        "noise.epsilon",
                        format!("must lie in [0, 0.75], got {epsilon}"),
                    ));
                }
                Ok(())
            }
            NoiseModel::CustomCz { operator } => {
                let m = operator.to_matrix();
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::config("noise.operator", "non-finite entry"));
                }
                // a physical operator cannot create population
                let sv = m.svd(false, false).singular_values;
                if sv.max() > 1.0 + 1e-6 {
                    return Err(Error::config("noise.operator", "operator norm exceeds 1"));
                }
                Ok(())
            }
        }
    }

    /// Depolarizing strength `λ` in `ρ → (1−λ)ρ + λ·tr(ρ)·I/4`.
    pub fn depolarizing_lambda(epsilon: f64) -> f64 {
        4.0 * epsilon / 3.0
    }

    fn prepare(&self) -> CzChannel {
        match self {
            NoiseModel::Ideal => CzChannel::Unitary(cz()),
            NoiseModel::DepolarizingAfterCz { epsilon } => {
                CzChannel::Depolarizing(Self::depolarizing_lambda(*epsilon))
            }
            NoiseModel::CustomCz { operator } => CzChannel::Unitary(operator.to_matrix()),
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum CzChannel {
    Unitary(Matrix4<C>),
    Depolarizing(f64),
}

impl CzChannel {
    fn apply(&self, rho: &Density) -> Density {
        match self {
            CzChannel::Unitary(m) => m * rho * m.adjoint(),
            CzChannel::Depolarizing(lambda) => {
                let u = cz();
                let r = u * rho * u;
                let tr = r.trace();
                r * C::new(1.0 - lambda, 0.0) + Density::identity() * (tr * (lambda / 4.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbConfig {
    pub depths: Vec<usize>,
    pub sequences_per_depth: usize,
    pub seed: u64,
}

impl RbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depths.is_empty() {
            return Err(Error::config("depths", "must not be empty"));
        }
        if self.sequences_per_depth == 0 {
            return Err(Error::config("sequences_per_depth", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbResult {
    pub depths: Vec<usize>,
    /// Mean `P(00)` per depth.
    pub survival: Vec<f64>,
    /// Standard error of the mean per depth.
    pub std_err: Vec<f64>,
    pub fit: DecayFit,
    pub epc: f64,
    /// `epc / avg_cz`, an upper bound on the CZ error.
    pub epg_bound: f64,
    pub sequences_per_depth: usize,
    pub seed: u64,
}

impl RbResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,survival,std_err\n");
        for k in 0..self.depths.len() {
            s.push_str(&format!(
                "{},{},{}\n",
                self.depths[k],
                crate::io::fmt_sig(self.survival[k]),
                crate::io::fmt_sig(self.std_err[k])
            ));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrbResult {
    pub reference: RbResult,
    pub interleaved: RbResult,
    /// `(3/4)(1 − p_int/p_ref)`.
    pub epg: f64,
    /// Propagated from the fit standard errors, when available.
    pub epg_std_err: Option<f64>,
    /// Set when `p_int` exceeds `p_ref` by more than its standard error.
    pub unphysical: bool,
}

impl IrbResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("depth,survival_ref,std_err_ref,survival_int,std_err_int\n");
        let (r, i) = (&self.reference, &self.interleaved);
        for k in 0..r.depths.len() {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.depths[k],
                crate::io::fmt_sig(r.survival[k]),
                crate::io::fmt_sig(r.std_err[k]),
                crate::io::fmt_sig(i.survival[k]),
                crate::io::fmt_sig(i.std_err[k])
            ));
        }
        s
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one sequence, so results do not depend on
/// scheduling.
fn sequence_rng(seed: u64, depth_index: usize, sequence: usize) -> ChaCha8Rng {
    let s = splitmix64(seed ^ splitmix64((depth_index as u64) << 32 | sequence as u64));
    ChaCha8Rng::seed_from_u64(s)
}

/// Draws `depth` uniformly random Clifford indices.
pub fn draw_sequence(
    group: &CliffordGroup,
    seed: u64,
    depth_index: usize,
    sequence: usize,
    depth: usize,
) -> Vec<usize> {
    let mut rng = sequence_rng(seed, depth_index, sequence);
    (0..depth)
        .map(|_| rng.random_range(0..group.len()))
        .collect()
}

fn apply_unitary(u: &Unitary, rho: &Density) -> Density {
    u * rho * u.adjoint()
}

fn apply_clifford(group: &CliffordGroup, k: usize, channel: &CzChannel, rho: Density) -> Density {
    let segs = &group.get(k).segments;
    let mut r = apply_unitary(&segs[0], &rho);
    for s in &segs[1..] {
        r = channel.apply(&r);
        r = apply_unitary(s, &r);
    }
    r
}

/// `P(00)` after the sequence, its (optional) interleaved CZs, and the
/// recovery Clifford.
pub fn sequence_survival(
    group: &CliffordGroup,
    cliffords: &[usize],
    interleave: bool,
    noise: &NoiseModel,
) -> Result<f64> {
    let channel = noise.prepare();
    let czu = cz();
    let mut net = Unitary::identity();
    let mut rho = Density::zeros();
    rho[(0, 0)] = C::new(1.0, 0.0);
    for &k in cliffords {
        net = group.get(k).unitary * net;
        rho = apply_clifford(group, k, &channel, rho);
        if interleave {
            net = czu * net;
            rho = channel.apply(&rho);
        }
    }
    let recovery = group
        .inverse_of(&net)
        .ok_or_else(|| Error::Domain("sequence product left the Clifford group".into()))?;
    rho = apply_clifford(group, recovery, &channel, rho);
    Ok(rho[(0, 0)].re)
}

fn mean_and_sem(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run(cfg: &RbConfig, noise: &NoiseModel, interleave: bool) -> Result<RbResult> {
    cfg.validate()?;
    noise.validate()?;
    let group = clifford_group();
    let jobs: Vec<(usize, usize)> = (0..cfg.depths.len())
        .flat_map(|d| (0..cfg.sequences_per_depth).map(move |s| (d, s)))
        .collect();
    // collect preserves job order, so the result is independent of threads
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(d, s)| {
            let seq = draw_sequence(group, cfg.seed, d, s, cfg.depths[d]);
            sequence_survival(group, &seq, interleave, noise)
        })
        .collect::<Result<_>>()?;
    let mut survival = Vec::with_capacity(cfg.depths.len());
    let mut std_err = Vec::with_capacity(cfg.depths.len());
    for chunk in values.chunks(cfg.sequences_per_depth) {
        let (m, e) = mean_and_sem(chunk);
        survival.push(m);
        std_err.push(e);
    }
    let fit = fit_decay(&cfg.depths, &survival)?;
    let epc = epc_from_p(fit.p)?;
    let avg_cz = super::clifford::decomposition_stats().avg_cz;
    Ok(RbResult {
        depths: cfg.depths.clone(),
        survival,
        std_err,
        epc,
        epg_bound: epg_bound(epc, avg_cz)?,
        fit,
        sequences_per_depth: cfg.sequences_per_depth,
        seed: cfg.seed,
    })
}

/// Standard two-qubit RB.
pub fn simulate_rb(cfg: &RbConfig, noise: &NoiseModel) -> Result<RbResult> {
    run(cfg, noise, false)
}

/// Reference and CZ-interleaved RB. Both arms use the same random Clifford
/// draws.
pub fn simulate_irb(cfg: &RbConfig, noise: &NoiseModel) -> Result<IrbResult> {
    let reference = run(cfg, noise, false)?;
    let interleaved = run(cfg, noise, true)?;
    let (pr, pi) = (reference.fit.p, interleaved.fit.p);
    let epg = interleaved_epg(pr, pi);
    let epg_std_err = match (reference.fit.std_errors[1], interleaved.fit.std_errors[1]) {
        (Some(sr), Some(si))
            if !reference.fit.covariance_flagged && !interleaved.fit.covariance_flagged =>
        {
            Some(0.75 * (pi / pr) * ((sr / pr).powi(2) + (si / pi).powi(2)).sqrt())
        }
        _ => None,
    };
    let tol = interleaved.fit.std_errors[1].unwrap_or(0.0);
    let unphysical = pi > pr + tol;
    Ok(IrbResult {
        reference,
        interleaved,
        epg,
        epg_std_err,
        unphysical,
    })
}
