// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Gate figures of merit in the dressed idle frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// `φ11 − φ10 − φ01 + φ00` wrapped to `(−π, π]` (rad).
    pub cz_angle: f64,
    /// `asin` of the mean `|⟨01|U|10⟩|`, `|⟨10|U|01⟩|` (rad).
    pub iswap_angle: f64,
    /// Mean population leaving the computational subspace.
    pub leakage: f64,
    /// Software Z rotations applied after the gate, `[Q1, Q2]` (rad).
    pub virtual_z: [f64; 2],
    /// Average gate fidelity against CZ after the virtual-Z correction.
    pub fidelity: f64,
    /// Diagonal phases `arg U_kk` of `00, 01, 10, 11` before correction (rad).
    pub diagonal_phases: [f64; 4],
    pub duration_ns: f64,
    /// Projected operator after the virtual-Z correction.
    pub operator: Operator4,
}

/// 4×4 complex operator in `00, 01, 10, 11` order, split for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Operator4 {
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl Operator4 {
    pub fn from_matrix(m: &Matrix4<Complex64>) -> Self {
        let mut re = [[0.0; 4]; 4];
        let mut im = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                re[r][c] = m[(r, c)].re;
                im[r][c] = m[(r, c)].im;
            }
        }
        Self { re, im }
    }

    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        Matrix4::from_fn(|r, c| Complex64::new(self.re[r][c], self.im[r][c]))
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Builds a report from the projected operator `m` (rows: outputs, columns:
/// inputs, both in `00, 01, 10, 11` order).
pub fn report_from_projection(m: &Matrix4<Complex64>, duration_ns: f64) -> GateReport {
    let phase = |k: usize| {
        let z = m[(k, k)];
        if z.norm() > 0.0 {
            z.arg()
        } else {
            0.0
        }
    };
    let phi = [phase(0), phase(1), phase(2), phase(3)];
    let cz = wrap_angle(phi[3] - phi[2] - phi[1] + phi[0]);
    let swap = 0.5 * (m[(1, 2)].norm() + m[(2, 1)].norm());
    let iswap = swap.clamp(0.0, 1.0).asin();
    let leakage = (1.0 - m.norm_squared() / 4.0).clamp(0.0, 1.0);

    // local phases that zero the 01 and 10 diagonal phases relative to 00
    let z_q2 = wrap_angle(-(phi[1] - phi[0]));
    let z_q1 = wrap_angle(-(phi[2] - phi[0]));
    let correction = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        Complex64::from_polar(1.0, -phi[0]),
        Complex64::from_polar(1.0, -phi[0] + z_q2),
        Complex64::from_polar(1.0, -phi[0] + z_q1),
        Complex64::from_polar(1.0, -phi[0] + z_q1 + z_q2),
    ));
    let corrected = correction * m;
    let ucz = Matrix4::from_diagonal(&nalgebra::Vector4::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ));
    let overlap = (corrected.adjoint() * ucz).trace().norm_sqr();
    let norm = (corrected.adjoint() * corrected).trace().re;
    let fidelity = ((overlap + norm) / 20.0).clamp(0.0, 1.0);

    GateReport {
        cz_angle: cz,
        iswap_angle: iswap,
        leakage,
        virtual_z: [z_q1, z_q2],
        fidelity,
        diagonal_phases: phi,
        duration_ns,
        operator: Operator4::from_matrix(&corrected),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(p: [f64; 4]) -> Matrix4<Complex64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(
            Complex64::from_polar(1.0, p[0]),
            Complex64::from_polar(1.0, p[1]),
            Complex64::from_polar(1.0, p[2]),
            Complex64::from_polar(1.0, p[3]),
        ))
    }

    #[test]
    fn ideal_cz() {
        let r = report_from_projection(&diag([0.0, 0.0, 0.0, PI]), 50.0);
        assert!((r.cz_angle - PI).abs() < 1e-12);
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!(r.leakage < 1e-12);
    }

    #[test]
    fn virtual_z_removes_local_phases() {
        let (a, b, g) = (0.7, -1.9, 0.3);
        let m = diag([g, g + a, g + b, g + a + b + PI]);
        let r = report_from_projection(&m, 0.0);
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!((r.cz_angle - PI).abs() < 1e-12);
        assert!((wrap_angle(r.virtual_z[1] + a)).abs() < 1e-12);
        assert!((wrap_angle(r.virtual_z[0] + b)).abs() < 1e-12);
    }

    #[test]
    fn gauge_invariance() {
        let m0 = diag([0.1, 0.4, -0.2, 2.0]);
        let mut m = m0;
        m[(1, 2)] = Complex64::new(0.05, 0.02);
        m[(2, 1)] = Complex64::new(-0.03, 0.04);
        let base = report_from_projection(&m, 0.0);
        for (a, b) in [(0.3, 1.1), (-2.0, 0.5), (3.0, -3.0)] {
            let z = diag([0.0, a, b, a + b]);
            for mm in [z * m, m * z] {
                let r = report_from_projection(&mm, 0.0);
                assert!((wrap_angle(r.cz_angle - base.cz_angle)).abs() < 1e-6);
                assert!((r.iswap_angle - base.iswap_angle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn leakage_from_norm() {
        let mut m = diag([0.0; 4]);
        m[(3, 3)] *= 0.9f64.sqrt();
        let r = report_from_projection(&m, 0.0);
        assert!((r.leakage - 0.025).abs() < 1e-12);
    }
}
