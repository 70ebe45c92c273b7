// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Dressed spectrum, state labeling, and the static ZZ interaction.
//!
//! ZZ is `E(11;0) − E(01;0) − E(10;0) + E(00;0)` over dressed eigenstates,
//! each identified with the bare product state it overlaps most. Labeling is
//! greedy in descending overlap with a 0.5 acceptance floor; below the floor
//! the state is hybridized beyond recognition and the point is reported as
//! ambiguous instead of interpolated.

pub mod fit;
pub mod squid;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{total_hamiltonian, DeviceSpec, ModeLabel};
use crate::optim::{brent_root, golden_section_min, RootTolerance};
use crate::scalar::{lit, two_pi, Scalar};

pub use squid::{flux_to_frequency, inverse_flux, FluxBranch, SquidSpec};

/// Minimum squared overlap accepted when identifying a dressed state.
pub const LABEL_OVERLAP_FLOOR: f64 = 0.5;

/// Root tolerance on ZZ for zero searches, in MHz (1 kHz).
pub const ZZ_ROOT_TOL_MHZ: f64 = 1e-3;

/// Bare product-state label `|n m; l⟩` (Q1, Q2; bus).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BareLabel {
    pub q1: usize,
    pub q2: usize,
    pub bus: usize,
}

impl BareLabel {
    pub const fn new(q1: usize, q2: usize, bus: usize) -> Self {
        Self { q1, q2, bus }
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{};{}", self.q1, self.q2, self.bus)
    }
}

/// Computational states in `|00⟩, |01⟩, |10⟩, |11⟩` order (bus empty).
pub const COMPUTATIONAL: [BareLabel; 4] = [
    BareLabel::new(0, 0, 0),
    BareLabel::new(0, 1, 0),
    BareLabel::new(1, 0, 0),
    BareLabel::new(1, 1, 0),
];

/// Labels that must be identified for a spectrum to be usable.
pub const REQUIRED: [BareLabel; 6] = [
    BareLabel::new(0, 0, 0),
    BareLabel::new(0, 1, 0),
    BareLabel::new(1, 0, 0),
    BareLabel::new(1, 1, 0),
    BareLabel::new(0, 0, 1),
    BareLabel::new(0, 0, 2),
];

/// Dressed eigensystem with bare-state labels.
#[derive(Debug, Clone)]
pub struct SpectrumResult<T: Scalar> {
    /// Ascending eigenvalues in GHz.
    pub energies_ghz: Vec<T>,
    /// Eigenvectors as columns, ordered like `energies_ghz`.
    pub eigenvectors: DMatrix<T>,
    pub assignment: BTreeMap<BareLabel, usize>,
    pub overlap_quality: BTreeMap<BareLabel, T>,
}

impl<T: Scalar> SpectrumResult<T> {
    /// Energy (GHz) of the dressed state carrying `label`.
    pub fn energy(&self, label: BareLabel) -> Option<T> {
        self.assignment.get(&label).map(|&k| self.energies_ghz[k])
    }

    pub fn eigenvector(&self, label: BareLabel) -> Option<DVector<T>> {
        self.assignment
            .get(&label)
            .map(|&k| self.eigenvectors.column(k).into_owned())
    }

    /// `E(11;0) − E(01;0) − E(10;0) + E(00;0)` in MHz.
    pub fn zz_mhz(&self) -> Result<T> {
        let e = |l: BareLabel| {
            self.energy(l).ok_or_else(|| Error::AmbiguousLabel {
                label: l.to_string(),
                overlap: 0.0,
            })
        };
        let [l00, l01, l10, l11] = COMPUTATIONAL;
        Ok((e(l11)? - e(l01)? - e(l10)? + e(l00)?) * lit::<T>(1e3))
    }
}

/// Sorted eigen-decomposition of a real symmetric matrix.
pub fn sorted_eigh<T: Scalar>(h: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Greedy maximal-overlap assignment of bare labels to eigenvector columns.
///
/// At each round the (label, eigenvector) pair with the largest squared
/// overlap among unassigned labels and unused eigenvectors is fixed. Ties are
/// broken towards the lower eigenvalue, so the result does not depend on the
/// column order of `eigenvectors`.
pub fn assign_labels<T: Scalar>(
    spec: &DeviceSpec<T>,
    eigenvectors: &DMatrix<T>,
    energies: &[T],
    labels: &[BareLabel],
) -> Result<(BTreeMap<BareLabel, usize>, BTreeMap<BareLabel, T>)> {
    let levels = spec.levels();
    let floor = lit::<T>(LABEL_OVERLAP_FLOOR);
    let mut used = vec![false; eigenvectors.ncols()];
    let mut remaining: Vec<BareLabel> = labels.to_vec();
    let mut assignment = BTreeMap::new();
    let mut quality = BTreeMap::new();

    while !remaining.is_empty() {
        let mut best: Option<(usize, usize, T)> = None;
        for (ri, label) in remaining.iter().enumerate() {
            if label.q1 >= levels[0] || label.q2 >= levels[1] || label.bus >= levels[2] {
                return Err(Error::Dimension(format!(
                    "label {label} needs more levels than {levels:?}"
                )));
            }
            let row = spec.basis_index(label.q1, label.q2, label.bus);
            for (col, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                let v = eigenvectors[(row, col)];
                let ov = v * v;
                let better = match best {
                    None => true,
                    Some((_, bc, bo)) => ov > bo || (ov == bo && energies[col] < energies[bc]),
                };
                if better {
                    best = Some((ri, col, ov));
                }
            }
        }
        let (ri, col, ov) = best.expect("eigenvectors available for every label");
        let label = remaining.remove(ri);
        if ov < floor {
            return Err(Error::AmbiguousLabel {
                label: label.to_string(),
                overlap: crate::scalar::to_f64(ov),
            });
        }
        used[col] = true;
        assignment.insert(label, col);
        quality.insert(label, ov);
    }
    Ok((assignment, quality))
}

/// Diagonalizes `H` at the given bus frequency and labels the required states.
pub fn diagonalize_and_label<T: Scalar>(
    spec: &DeviceSpec<T>,
    bus_frequency_ghz: T,
) -> Result<SpectrumResult<T>> {
    spec.require_levels(3)?;
    let h = total_hamiltonian(spec, Some(bus_frequency_ghz))?;
    label_hamiltonian(spec, h, &REQUIRED)
}

/// Labels an already assembled Hamiltonian (angular units).
pub fn label_hamiltonian<T: Scalar>(
    spec: &DeviceSpec<T>,
    h: DMatrix<T>,
    labels: &[BareLabel],
) -> Result<SpectrumResult<T>> {
    let (values, vectors) = sorted_eigh(h);
    let w = two_pi::<T>();
    let energies_ghz: Vec<T> = values.into_iter().map(|e| e / w).collect();
    let (assignment, overlap_quality) = assign_labels(spec, &vectors, &energies_ghz, labels)?;
    Ok(SpectrumResult {
        energies_ghz,
        eigenvectors: vectors,
        assignment,
        overlap_quality,
    })
}

/// Static ZZ in MHz at the given bus frequency.
pub fn compute_zz<T: Scalar>(spec: &DeviceSpec<T>, bus_frequency_ghz: T) -> Result<T> {
    diagonalize_and_label(spec, bus_frequency_ghz)?.zz_mhz()
}

/// Dispersive estimate `J_tot = g₁g₂(1/Δ₁ + 1/Δ₂) + g₁₂` in MHz.
pub fn perturbative_j<T: Scalar>(spec: &DeviceSpec<T>, bus_frequency_ghz: T) -> Result<T> {
    let d1 = spec.mode(ModeLabel::Q1).frequency_ghz - bus_frequency_ghz;
    let d2 = spec.mode(ModeLabel::Q2).frequency_ghz - bus_frequency_ghz;
    if d1 == T::zero() || d2 == T::zero() {
        return Err(Error::Resonance(format!(
            "bus at {bus_frequency_ghz} GHz is resonant with a qubit"
        )));
    }
    let g1 = spec.coupling(ModeLabel::Q1, ModeLabel::Bus);
    let g2 = spec.coupling(ModeLabel::Q2, ModeLabel::Bus);
    let g12 = spec.coupling(ModeLabel::Q1, ModeLabel::Q2);
    let inv = T::one() / d1 + T::one() / d2;
    if !inv.is_finite() {
        return Err(Error::Resonance("effective detuning diverges".into()));
    }
    Ok((g1 * g2 * inv + g12) * lit::<T>(1e3))
}

/// Number of sub-intervals used to locate sign changes before refining.
pub const ZERO_SCAN_INTERVALS: usize = 128;

/// All ZZ zeros (sign changes) of ZZ vs bus frequency inside `bracket`,
/// ascending in frequency.
///
/// The bracket is first sampled on [`ZERO_SCAN_INTERVALS`] sub-intervals
/// (ZZ can cross zero twice between far-detuned endpoints), then each sign
/// change is polished with Brent's method to `|ZZ| < 1 kHz`. Samples where
/// labeling fails split the bracket; a Brent evaluation that lands on an
/// ambiguous point narrows its sub-bracket and retries before giving up.
pub fn find_zz_zeros<T: Scalar>(spec: &DeviceSpec<T>, bracket: (T, T)) -> Result<Vec<T>> {
    let (lo, hi) = ordered(bracket)?;
    let n = ZERO_SCAN_INTERVALS;
    let grid: Vec<T> = (0..=n)
        .map(|k| lo + (hi - lo) * lit::<T>(k as f64 / n as f64))
        .collect();
    let values: Vec<Option<T>> = grid.iter().map(|&b| compute_zz(spec, b).ok()).collect();
    let tol = RootTolerance {
        x_tol: lit::<T>(1e-12),
        f_tol: lit::<T>(ZZ_ROOT_TOL_MHZ * 0.1),
        max_iter: 200,
    };
    let mut roots = Vec::new();
    for k in 0..n {
        let (Some(fa), Some(fb)) = (values[k], values[k + 1]) else {
            continue;
        };
        if fa == T::zero() {
            roots.push(grid[k]);
            continue;
        }
        if (fa > T::zero()) == (fb > T::zero()) {
            continue;
        }
        roots.push(refine_root(spec, grid[k], grid[k + 1], tol)?);
    }
    if let Some(fl) = values[n] {
        if fl == T::zero() {
            roots.push(grid[n]);
        }
    }
    if roots.is_empty() {
        return Err(Error::Bracket(format!(
            "ZZ does not change sign between {lo} and {hi} GHz"
        )));
    }
    Ok(roots)
}

fn refine_root<T: Scalar>(spec: &DeviceSpec<T>, a: T, b: T, tol: RootTolerance<T>) -> Result<T> {
    let (mut a, mut b) = (a, b);
    let mut last_err = None;
    for _ in 0..4 {
        match brent_root(|x| compute_zz(spec, x), a, b, tol) {
            Ok(r) => return Ok(r),
            Err(e @ Error::AmbiguousLabel { .. }) => {
                last_err = Some(e);
                let shrink = (b - a) * lit::<T>(0.1);
                a += shrink;
                b -= shrink;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("loop ran at least once"))
}

/// First ZZ zero in ascending bus frequency; see [`find_zz_zeros`].
pub fn find_zz_zero<T: Scalar>(spec: &DeviceSpec<T>, bracket: (T, T)) -> Result<T> {
    Ok(find_zz_zeros(spec, bracket)?[0])
}

/// Bus frequency minimizing `|ZZ|` inside `bracket`, with the ZZ there (MHz).
///
/// Outside the straddling regime ZZ touches a shallow extremum near zero
/// without changing sign; this locates that idle point.
pub fn find_zz_minimum<T: Scalar>(spec: &DeviceSpec<T>, bracket: (T, T)) -> Result<(T, T)> {
    let (lo, hi) = ordered(bracket)?;
    let n = ZERO_SCAN_INTERVALS;
    let step = (hi - lo) / lit::<T>(n as f64);
    let mut best: Option<(usize, T)> = None;
    for k in 0..=n {
        let b = lo + step * lit::<T>(k as f64);
        if let Ok(z) = compute_zz(spec, b) {
            if best.is_none_or(|(_, bz)| z.abs() < bz) {
                best = Some((k, z.abs()));
            }
        }
    }
    let (k, _) = best
        .ok_or_else(|| Error::Bracket(format!("labeling fails everywhere on [{lo}, {hi}] GHz")))?;
    let a = lo + step * lit::<T>(k.saturating_sub(1) as f64);
    let b = lo + step * lit::<T>((k + 1).min(n) as f64);
    let (x, _) = golden_section_min(
        |x| compute_zz(spec, x).map(|z| z.abs()),
        a,
        b,
        lit::<T>(1e-9),
        200,
    )?;
    Ok((x, compute_zz(spec, x)?))
}

fn ordered<T: Scalar>(bracket: (T, T)) -> Result<(T, T)> {
    let (a, b) = bracket;
    if !a.is_finite() || !b.is_finite() || a == b {
        return Err(Error::config(
            "bracket",
            format!("invalid bracket ({a}, {b})"),
        ));
    }
    Ok(if a < b { (a, b) } else { (b, a) })
}

/// ZZ (MHz) along a flux grid, mapped through the device's SQUID.
///
/// Points where labeling fails carry the error instead of a value.
pub fn zz_vs_flux<T: Scalar>(spec: &DeviceSpec<T>, flux: &[T]) -> Result<Vec<(T, Result<T>)>> {
    let squid = spec
        .squid
        .ok_or_else(|| Error::config("device.squid", "flux sweeps need a SQUID description"))?;
    Ok(flux
        .iter()
        .map(|&phi| (phi, compute_zz(spec, flux_to_frequency(&squid, phi))))
        .collect())
}
