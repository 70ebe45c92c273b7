// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated bosonic operators and the three-mode Duffing Hamiltonian.
//!
//! Configuration is in linear frequency (GHz); every matrix returned here is
//! in angular units (rad/ns, ħ = 1), i.e. already multiplied by 2π. The basis
//! is the product `Q1 ⊗ Q2 ⊗ BUS` with row-major index composition, so bare
//! state `|n m; l⟩` sits at `(n·L₂ + m)·L₃ + l`.

use std::fmt;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, two_pi, Scalar};
use crate::spectrum::squid::SquidSpec;

/// Default truncation per mode.
pub const DEFAULT_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeLabel {
    #[serde(rename = "Q1")]
    Q1,
    #[serde(rename = "Q2")]
    Q2,
    #[serde(rename = "BUS")]
    Bus,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 3] = [ModeLabel::Q1, ModeLabel::Q2, ModeLabel::Bus];

    /// Position of the mode in the tensor product.
    pub fn index(self) -> usize {
        match self {
            ModeLabel::Q1 => 0,
            ModeLabel::Q2 => 1,
            ModeLabel::Bus => 2,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeLabel::Q1 => "Q1",
            ModeLabel::Q2 => "Q2",
            ModeLabel::Bus => "BUS",
        })
    }
}

/// One transmon mode: frequency and anharmonicity in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec<T> {
    pub label: ModeLabel,
    pub frequency_ghz: T,
    pub anharmonicity_ghz: T,
    pub levels: usize,
}

impl<T: Scalar> ModeSpec<T> {
    pub fn new(label: ModeLabel, frequency_ghz: T, anharmonicity_ghz: T, levels: usize) -> Self {
        Self {
            label,
            frequency_ghz,
            anharmonicity_ghz,
            levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 {
            return Err(Error::Dimension(format!(
                "mode {} has {} levels; at least 2 required",
                self.label, self.levels
            )));
        }
        if !self.frequency_ghz.is_finite() || !self.anharmonicity_ghz.is_finite() {
            return Err(Error::config(
                format!("modes.{}", self.label),
                "frequency and anharmonicity must be finite",
            ));
        }
        if self.anharmonicity_ghz > T::zero() {
            return Err(Error::config(
                format!("modes.{}.anharmonicity_ghz", self.label),
                "transmon anharmonicity must be negative (or zero for a harmonic mode)",
            ));
        }
        Ok(())
    }
}

/// Exchange coupling `g/2π` in GHz between two distinct modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec<T> {
    pub pair: (ModeLabel, ModeLabel),
    pub strength_ghz: T,
}

impl<T> CouplingSpec<T> {
    pub fn new(a: ModeLabel, b: ModeLabel, strength_ghz: T) -> Self {
        Self {
            pair: (a, b),
            strength_ghz,
        }
    }

    fn involves(&self, a: ModeLabel, b: ModeLabel) -> bool {
        self.pair == (a, b) || self.pair == (b, a)
    }
}

/// Full three-mode device description.
///
/// Modes are stored in tensor order (Q1, Q2, BUS) regardless of input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(deserialize = "T: Deserialize<'de> + num_traits::Zero")
)]
pub struct DeviceSpec<T> {
    pub modes: Vec<ModeSpec<T>>,
    #[serde(default)]
    pub couplings: Vec<CouplingSpec<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squid: Option<SquidSpec<T>>,
}

impl<T: Scalar> DeviceSpec<T> {
    /// Builds and validates a device. `modes` may be in any order.
    pub fn new(
        modes: Vec<ModeSpec<T>>,
        couplings: Vec<CouplingSpec<T>>,
        squid: Option<SquidSpec<T>>,
    ) -> Result<Self> {
        let mut spec = Self {
            modes,
            couplings,
            squid,
        };
        spec.normalize()?;
        Ok(spec)
    }

    /// Sorts modes into tensor order and checks every invariant.
    pub fn normalize(&mut self) -> Result<()> {
        if self.modes.len() != 3 {
            return Err(Error::config(
                "modes",
                format!(
                    "exactly three modes (Q1, Q2, BUS) required, got {}",
                    self.modes.len()
                ),
            ));
        }
        for label in ModeLabel::ALL {
            let count = self.modes.iter().filter(|m| m.label == label).count();
            if count != 1 {
                return Err(Error::config(
                    "modes",
                    format!("mode {label} must appear exactly once, found {count}"),
                ));
            }
        }
        self.modes.sort_by_key(|m| m.label.index());
        for m in &self.modes {
            m.validate()?;
        }
        for (k, c) in self.couplings.iter().enumerate() {
            if c.pair.0 == c.pair.1 {
                return Err(Error::config(
                    format!("couplings[{k}].pair"),
                    format!(
                        "coupling must join two distinct modes, got {}-{}",
                        c.pair.0, c.pair.1
                    ),
                ));
            }
            if !c.strength_ghz.is_finite() {
                return Err(Error::config(
                    format!("couplings[{k}].strength_ghz"),
                    "coupling strength must be finite",
                ));
            }
            if self.couplings[..k]
                .iter()
                .any(|other| other.involves(c.pair.0, c.pair.1))
            {
                return Err(Error::config(
                    format!("couplings[{k}].pair"),
                    format!("duplicate coupling entry for {}-{}", c.pair.0, c.pair.1),
                ));
            }
        }
        if let Some(squid) = &self.squid {
            squid.validate()?;
        }
        Ok(())
    }

    pub fn mode(&self, label: ModeLabel) -> &ModeSpec<T> {
        &self.modes[label.index()]
    }

    pub fn mode_mut(&mut self, label: ModeLabel) -> &mut ModeSpec<T> {
        &mut self.modes[label.index()]
    }

    /// Coupling strength in GHz; zero when the pair is absent.
    pub fn coupling(&self, a: ModeLabel, b: ModeLabel) -> T {
        self.couplings
            .iter()
            .find(|c| c.involves(a, b))
            .map_or(T::zero(), |c| c.strength_ghz)
    }

    /// Sets (or inserts) the coupling for an unordered pair.
    pub fn set_coupling(&mut self, a: ModeLabel, b: ModeLabel, strength_ghz: T) {
        match self.couplings.iter_mut().find(|c| c.involves(a, b)) {
            Some(c) => c.strength_ghz = strength_ghz,
            None => self.couplings.push(CouplingSpec::new(a, b, strength_ghz)),
        }
    }

    /// Truncation per mode in tensor order.
    pub fn levels(&self) -> [usize; 3] {
        [
            self.modes[0].levels,
            self.modes[1].levels,
            self.modes[2].levels,
        ]
    }

    pub fn dimension(&self) -> usize {
        self.levels().iter().product()
    }

    /// Row-major index of bare state `|n m; l⟩`.
    pub fn basis_index(&self, n: usize, m: usize, l: usize) -> usize {
        let [_, l2, l3] = self.levels();
        (n * l2 + m) * l3 + l
    }

    /// Inverse of [`DeviceSpec::basis_index`].
    pub fn basis_label(&self, index: usize) -> (usize, usize, usize) {
        let [_, l2, l3] = self.levels();
        (index / (l2 * l3), (index / l3) % l2, index % l3)
    }

    pub fn with_bus_frequency(&self, bus_ghz: T) -> Self {
        let mut out = self.clone();
        out.mode_mut(ModeLabel::Bus).frequency_ghz = bus_ghz;
        out
    }

    pub fn with_levels(&self, levels: [usize; 3]) -> Self {
        let mut out = self.clone();
        for (m, l) in out.modes.iter_mut().zip(levels) {
            m.levels = l;
        }
        out
    }

    /// Exchanges the roles of Q1 and Q2, including their bus couplings.
    pub fn swapped_qubits(&self) -> Self {
        let mut out = self.clone();
        let q1 = *self.mode(ModeLabel::Q1);
        let q2 = *self.mode(ModeLabel::Q2);
        out.modes[0] = ModeSpec {
            label: ModeLabel::Q1,
            ..q2
        };
        out.modes[1] = ModeSpec {
            label: ModeLabel::Q2,
            ..q1
        };
        let g1 = self.coupling(ModeLabel::Q1, ModeLabel::Bus);
        let g2 = self.coupling(ModeLabel::Q2, ModeLabel::Bus);
        out.set_coupling(ModeLabel::Q1, ModeLabel::Bus, g2);
        out.set_coupling(ModeLabel::Q2, ModeLabel::Bus, g1);
        out
    }

    /// Requires at least `min` levels on every mode.
    pub fn require_levels(&self, min: usize) -> Result<()> {
        match self.modes.iter().find(|m| m.levels < min) {
            Some(m) => Err(Error::Dimension(format!(
                "mode {} has {} levels; {} required here",
                m.label, m.levels, min
            ))),
            None => Ok(()),
        }
    }

    pub fn cast<U: Scalar>(&self) -> DeviceSpec<U> {
        let c = |x: T| lit::<U>(crate::scalar::to_f64(x));
        DeviceSpec {
            modes: self
                .modes
                .iter()
                .map(|m| {
                    ModeSpec::new(
                        m.label,
                        c(m.frequency_ghz),
                        c(m.anharmonicity_ghz),
                        m.levels,
                    )
                })
                .collect(),
            couplings: self
                .couplings
                .iter()
                .map(|k| CouplingSpec::new(k.pair.0, k.pair.1, c(k.strength_ghz)))
                .collect(),
            squid: self.squid.as_ref().map(|s| s.cast()),
        }
    }
}

/// Lowering, raising, and number operators of a truncated oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderOperators<T: Scalar> {
    pub lowering: DMatrix<T>,
    pub raising: DMatrix<T>,
    pub number: DMatrix<T>,
}

pub fn ladder_operators<T: Scalar>(levels: usize) -> Result<LadderOperators<T>> {
    if levels < 2 {
        return Err(Error::Dimension(format!(
            "ladder operators need at least 2 levels, got {levels}"
        )));
    }
    let lowering = lowering_in::<T>(levels);
    let raising = lowering.transpose();
    let number = DMatrix::from_fn(levels, levels, |r, c| {
        if r == c {
            lit::<T>(r as f64)
        } else {
            T::zero()
        }
    });
    Ok(LadderOperators {
        lowering,
        raising,
        number,
    })
}

fn lowering_in<F: ComplexField>(levels: usize) -> DMatrix<F> {
    DMatrix::from_fn(levels, levels, |r, c| {
        if c == r + 1 {
            F::from_subset(&(c as f64).sqrt())
        } else {
            F::zero()
        }
    })
}

/// Diagonal of a single Duffing mode in GHz (not yet multiplied by 2π).
pub fn mode_energies_ghz<T: Scalar>(mode: &ModeSpec<T>) -> Vec<T> {
    let half = lit::<T>(0.5);
    (0..mode.levels)
        .map(|n| {
            let n = lit::<T>(n as f64);
            mode.frequency_ghz * n + half * mode.anharmonicity_ghz * n * (n - T::one())
        })
        .collect()
}

/// `2π·(ν n + (δ/2) n(n−1))` on the diagonal.
pub fn mode_hamiltonian<T: Scalar>(mode: &ModeSpec<T>) -> Result<DMatrix<T>> {
    mode.validate()?;
    let energies = mode_energies_ghz(mode);
    let w = two_pi::<T>();
    Ok(DMatrix::from_fn(mode.levels, mode.levels, |r, c| {
        if r == c {
            w * energies[r]
        } else {
            T::zero()
        }
    }))
}

/// Kronecker product `a ⊗ b`.
pub fn kron<F: ComplexField + Copy>(a: &DMatrix<F>, b: &DMatrix<F>) -> DMatrix<F> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Places a single-mode operator at position `slot` of the three-mode product.
pub fn embed<F: ComplexField + Copy>(
    op: &DMatrix<F>,
    slot: usize,
    levels: [usize; 3],
) -> DMatrix<F> {
    let factor = |k: usize| {
        if k == slot {
            op.clone()
        } else {
            DMatrix::identity(levels[k], levels[k])
        }
    };
    kron(&kron(&factor(0), &factor(1)), &factor(2))
}

fn assemble<T, F>(spec: &DeviceSpec<T>, bus_frequency_override: Option<T>) -> Result<DMatrix<F>>
where
    T: Scalar,
    F: ComplexField<RealField = T> + Copy,
{
    let mut spec = spec.clone();
    spec.normalize()?;
    if let Some(f) = bus_frequency_override {
        if !f.is_finite() {
            return Err(Error::config(
                "bus_frequency_ghz",
                "override must be finite",
            ));
        }
        spec.mode_mut(ModeLabel::Bus).frequency_ghz = f;
    }
    let levels = spec.levels();
    let dim = spec.dimension();
    let w = two_pi::<T>();

    let mut h = DMatrix::<F>::zeros(dim, dim);
    for idx in 0..dim {
        let (n, m, l) = spec.basis_label(idx);
        let e = [n, m, l]
            .iter()
            .zip(&spec.modes)
            .map(|(&k, mode)| mode_energies_ghz(mode)[k])
            .fold(T::zero(), |acc, x| acc + x);
        h[(idx, idx)] = F::from_real(w * e);
    }

    let quadrature: Vec<DMatrix<F>> = (0..3)
        .map(|k| {
            let a = lowering_in::<F>(levels[k]);
            let x = &a + a.adjoint();
            embed(&x, k, levels)
        })
        .collect();
    let pairs = [
        (ModeLabel::Q1, ModeLabel::Q2),
        (ModeLabel::Q1, ModeLabel::Bus),
        (ModeLabel::Q2, ModeLabel::Bus),
    ];
    for (a, b) in pairs {
        let g = spec.coupling(a, b);
        if g != T::zero() {
            let term = &quadrature[a.index()] * &quadrature[b.index()];
            h += term * F::from_real(w * g);
        }
    }
    Ok(h)
}

/// Real-symmetric total Hamiltonian `Σ H_i + Σ_{pairs} 2π g (a†+a)(b†+b)`.
pub fn total_hamiltonian<T: Scalar>(
    spec: &DeviceSpec<T>,
    bus_frequency_override: Option<T>,
) -> Result<DMatrix<T>> {
    assemble::<T, T>(spec, bus_frequency_override)
}

/// Same operator assembled with complex entries.
pub fn total_hamiltonian_complex<T: Scalar>(
    spec: &DeviceSpec<T>,
    bus_frequency_override: Option<T>,
) -> Result<DMatrix<Complex<T>>> {
    assemble::<T, Complex<T>>(spec, bus_frequency_override)
}

/// Hamiltonian split as `H(ω_bus) = static + 2π ω_bus · N_bus`.
///
/// Used by time-domain propagation, which rebuilds `H` at every step.
#[derive(Debug, Clone)]
pub struct SplitHamiltonian<T: Scalar> {
    pub static_part: DMatrix<T>,
    pub bus_number: DMatrix<T>,
}

impl<T: Scalar> SplitHamiltonian<T> {
    pub fn new(spec: &DeviceSpec<T>) -> Result<Self> {
        let static_part = total_hamiltonian(spec, Some(T::zero()))?;
        let levels = spec.levels();
        let n = ladder_operators::<T>(levels[2])?.number;
        let bus_number = embed(&n, 2, levels);
        Ok(Self {
            static_part,
            bus_number,
        })
    }

    pub fn at_bus_frequency(&self, bus_ghz: T) -> DMatrix<T> {
        &self.static_part + &self.bus_number * (two_pi::<T>() * bus_ghz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn device(g: f64) -> DeviceSpec<f64> {
        DeviceSpec::new(
            vec![
                ModeSpec::new(ModeLabel::Bus, 3.0, -0.14, 3),
                ModeSpec::new(ModeLabel::Q1, 5.0, -0.24, 3),
                ModeSpec::new(ModeLabel::Q2, 4.91, -0.24, 3),
            ],
            vec![
                CouplingSpec::new(ModeLabel::Q1, ModeLabel::Bus, g),
                CouplingSpec::new(ModeLabel::Q2, ModeLabel::Bus, g),
                CouplingSpec::new(ModeLabel::Q1, ModeLabel::Q2, -0.006),
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn qubit_ladder() {
        let ops = ladder_operators::<f64>(2).unwrap();
        assert_eq!(
            ops.lowering,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])
        );
        assert_eq!(ops.raising, ops.lowering.transpose());
        assert_eq!(ops.number[(1, 1)], 1.0);
    }

    #[test]
    fn three_level_matrix_element() {
        let ops = ladder_operators::<f64>(3).unwrap();
        assert_abs_diff_eq!(ops.lowering[(1, 2)], std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn truncated_commutator() {
        let ops = ladder_operators::<f64>(4).unwrap();
        let comm = &ops.lowering * &ops.raising - &ops.raising * &ops.lowering;
        let mut expected = DMatrix::<f64>::identity(4, 4);
        expected[(3, 3)] = -3.0;
        assert_abs_diff_eq!(comm, expected, epsilon = 1e-12);
    }

    #[test]
    fn too_few_levels() {
        assert!(matches!(
            ladder_operators::<f64>(1),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn duffing_diagonals() {
        let cases = [
            (5.0, -0.240, 3, vec![0.0, 5.0, 9.76]),
            (5.0, 0.0, 3, vec![0.0, 5.0, 10.0]),
            (4.0, -0.140, 4, vec![0.0, 4.0, 7.86, 11.58]),
        ];
        for (nu, delta, levels, expected) in cases {
            let h = mode_hamiltonian(&ModeSpec::new(ModeLabel::Q1, nu, delta, levels)).unwrap();
            for (k, e) in expected.iter().enumerate() {
                assert_abs_diff_eq!(h[(k, k)] / std::f64::consts::TAU, *e, epsilon = 1e-12);
            }
            assert_eq!(h.clone(), DMatrix::from_diagonal(&h.diagonal()));
        }
    }

    #[test]
    fn uncoupled_is_diagonal() {
        let h = total_hamiltonian(&device(0.0).with_coupling_zeroed(), None).unwrap();
        assert_eq!(h.clone(), DMatrix::from_diagonal(&h.diagonal()));
    }

    #[test]
    fn hermitian_to_machine_precision() {
        let h = total_hamiltonian(&device(0.11), None).unwrap();
        let dev = (&h - h.transpose()).abs().max() / std::f64::consts::TAU;
        assert!(dev < 1e-12);
        let hc = total_hamiltonian_complex(&device(0.11), None).unwrap();
        assert!((&hc - hc.adjoint()).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn modes_sorted_into_tensor_order() {
        let d = device(0.11);
        assert_eq!(d.modes[0].label, ModeLabel::Q1);
        assert_eq!(d.modes[2].label, ModeLabel::Bus);
        assert_eq!(d.basis_index(1, 0, 2), 11);
        assert_eq!(d.basis_label(11), (1, 0, 2));
    }

    #[test]
    fn rejects_bad_configs() {
        let q = |l| ModeSpec::new(l, 5.0, -0.2, 3);
        let dup = DeviceSpec::new(
            vec![q(ModeLabel::Q1), q(ModeLabel::Q1), q(ModeLabel::Bus)],
            vec![],
            None,
        );
        assert!(matches!(dup, Err(Error::Config { .. })));
        let selfpair = DeviceSpec::new(
            vec![q(ModeLabel::Q1), q(ModeLabel::Q2), q(ModeLabel::Bus)],
            vec![CouplingSpec::new(ModeLabel::Q1, ModeLabel::Q1, 0.1)],
            None,
        );
        assert!(matches!(selfpair, Err(Error::Config { .. })));
        let twice = DeviceSpec::new(
            vec![q(ModeLabel::Q1), q(ModeLabel::Q2), q(ModeLabel::Bus)],
            vec![
                CouplingSpec::new(ModeLabel::Q1, ModeLabel::Bus, 0.1),
                CouplingSpec::new(ModeLabel::Bus, ModeLabel::Q1, 0.1),
            ],
            None,
        );
        assert!(matches!(twice, Err(Error::Config { .. })));
    }

    #[test]
    fn split_matches_direct_assembly() {
        let d = device(0.11);
        let split = SplitHamiltonian::new(&d).unwrap();
        let direct = total_hamiltonian(&d, Some(3.7)).unwrap();
        assert_abs_diff_eq!(split.at_bus_frequency(3.7), direct, epsilon = 1e-9);
    }

    impl DeviceSpec<f64> {
        fn with_coupling_zeroed(mut self) -> Self {
            self.couplings.clear();
            self
        }
    }
}
