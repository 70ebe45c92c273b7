// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar root finding, 1-D minimization, and damped Gauss–Newton fitting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Termination controls for [`brent_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootTolerance<T> {
    /// Stop when the bracket is narrower than this.
    pub x_tol: T,
    /// Stop when `|f(x)|` drops below this.
    pub f_tol: T,
    pub max_iter: usize,
}

/// Brent's bracketed root finder (inverse quadratic interpolation with
/// bisection fallback). `f` may fail; the error is propagated unchanged.
pub fn brent_root<T, F>(mut f: F, lo: T, hi: T, tol: RootTolerance<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {fa}, f(hi) = {fb}"
        )));
    }
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let half = lit::<T>(0.5);
    let eps = <T as Scalar>::epsilon();

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * eps * b.abs() + half * tol.x_tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol.f_tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b)?;
    }
    Err(Error::Bracket(format!(
        "root not converged within {} iterations (last x = {b}, f = {fb})",
        tol.max_iter
    )))
}

/// Golden-section minimization of `f` on `[lo, hi]`. Returns `(x, f(x))`.
pub fn golden_section_min<T, F>(mut f: F, lo: T, hi: T, x_tol: T, max_iter: usize) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = lit::<T>(0.618_033_988_749_894_9);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Settings for [`levenberg_marquardt`].
#[derive(Debug, Clone)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Relative finite-difference step for the numerical Jacobian.
    pub rel_step: f64,
    /// Converged when the relative drop in cost falls below this.
    pub cost_tol: f64,
    /// Converged when the relative parameter step falls below this.
    pub step_tol: f64,
    pub initial_damping: f64,
    /// Optional box constraints; steps are projected back inside.
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rel_step: 1e-6,
            cost_tol: 1e-12,
            step_tol: 1e-10,
            initial_damping: 1e-3,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Jacobian at the solution (rows: residuals, columns: parameters).
    pub jacobian: DMatrix<f64>,
}

impl LmOutcome {
    /// Standard errors from `s² (JᵀJ)⁻¹` with `s² = RSS / (n − p)`.
    /// `None` entries mark parameters whose covariance is singular.
    pub fn standard_errors(&self) -> Vec<Option<f64>> {
        let n = self.residuals.len();
        let p = self.params.len();
        let dof = n.saturating_sub(p).max(1) as f64;
        let s2 = self.residual_norm.powi(2) / dof;
        let jtj = self.jacobian.transpose() * &self.jacobian;
        match jtj.clone().try_inverse() {
            Some(cov) if cov.iter().all(|v| v.is_finite()) => (0..p)
                .map(|k| {
                    let v = cov[(k, k)] * s2;
                    (v >= 0.0 && v.is_finite()).then(|| v.sqrt())
                })
                .collect(),
            _ => vec![None; p],
        }
    }
}

fn project(x: &mut [f64], cfg: &LmConfig) {
    if let Some(lo) = &cfg.lower {
        for (v, l) in x.iter_mut().zip(lo) {
            *v = v.max(*l);
        }
    }
    if let Some(hi) = &cfg.upper {
        for (v, h) in x.iter_mut().zip(hi) {
            *v = v.min(*h);
        }
    }
}

/// Forward-difference Jacobian of `residual` at `x`.
pub fn numerical_jacobian<F>(
    residual: &mut F,
    x: &[f64],
    r0: &[f64],
    cfg: &LmConfig,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(r0.len(), x.len());
    let mut xp = x.to_vec();
    for k in 0..x.len() {
        let mut h = cfg.rel_step * x[k].abs().max(1e-8);
        // step away from an active upper bound
        if let Some(hi) = &cfg.upper {
            if x[k] + h > hi[k] {
                h = -h;
            }
        }
        xp[k] = x[k] + h;
        let rp = residual(&xp)?;
        xp[k] = x[k];
        for (row, (a, b)) in rp.iter().zip(r0).enumerate() {
            jac[(row, k)] = (a - b) / h;
        }
    }
    Ok(jac)
}

/// Damped Gauss–Newton (Levenberg–Marquardt) least squares on `residual`.
///
/// Uses Marquardt's diagonal scaling of the damping term. On hitting the
/// iteration cap without meeting a convergence test it returns
/// [`Error::FitFailure`] carrying the best parameters seen.
pub fn levenberg_marquardt<F>(mut residual: F, x0: &[f64], cfg: &LmConfig) -> Result<LmOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = x0.to_vec();
    project(&mut x, cfg);
    let mut r = residual(&x)?;
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = cfg.initial_damping;
    let p = x.len();

    for iter in 0..cfg.max_iter {
        let jac = numerical_jacobian(&mut residual, &x, &r, cfg)?;
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        let mut small_step = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..p {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial, cfg);
            let rt = match residual(&trial) {
                Ok(rt) => rt,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let ct: f64 = rt.iter().map(|v| v * v).sum();
            if ct.is_finite() && ct <= cost {
                let rel_drop = (cost - ct) / cost.max(f64::MIN_POSITIVE);
                let rel_step = x
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
                    .fold(0.0, f64::max);
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                small_step = rel_drop < cfg.cost_tol || rel_step < cfg.step_tol;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || small_step || cost == 0.0 {
            let jacobian = numerical_jacobian(&mut residual, &x, &r, cfg)?;
            return Ok(LmOutcome {
                residual_norm: cost.sqrt(),
                residuals: r,
                params: x,
                iterations: iter + 1,
                jacobian,
            });
        }
    }
    Err(Error::FitFailure {
        iterations: cfg.max_iter,
        residual_norm: cost.sqrt(),
        best: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> RootTolerance<f64> {
        RootTolerance {
            x_tol: 1e-14,
            f_tol: 0.0,
            max_iter: 100,
        }
    }

    #[test]
    fn brent_cubic() {
        let r = brent_root(|x: f64| Ok(x * x * x - 2.0 * x - 5.0), 2.0, 3.0, tol()).unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-12);
    }

    #[test]
    fn brent_no_sign_change() {
        let r = brent_root(|x: f64| Ok(x * x + 1.0), -1.0, 1.0, tol());
        assert!(matches!(r, Err(Error::Bracket(_))));
    }

    #[test]
    fn brent_f32() {
        let t = RootTolerance {
            x_tol: 1e-6f32,
            f_tol: 0.0,
            max_iter: 100,
        };
        let r = brent_root(|x: f32| Ok(x.cos() - x), 0.0, 1.0, t).unwrap();
        assert!((r - 0.739_085_1).abs() < 1e-5);
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) =
            golden_section_min(|x: f64| Ok((x - 0.3).powi(2) + 1.0), -2.0, 2.0, 1e-9, 200).unwrap();
        // a quadratic only resolves the minimiser to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lm_exponential() {
        let ts: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 * (-0.3 * t).exp() + 0.5).collect();
        let out = levenberg_marquardt(
            |p: &[f64]| {
                Ok(ts
                    .iter()
                    .zip(&ys)
                    .map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y)
                    .collect())
            },
            &[1.0, 0.1, 0.0],
            &LmConfig::default(),
        )
        .unwrap();
        assert!((out.params[0] - 2.0).abs() < 1e-6);
        assert!((out.params[1] - 0.3).abs() < 1e-6);
        assert!((out.params[2] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn lm_reports_failure_at_cap() {
        let cfg = LmConfig {
            max_iter: 1,
            cost_tol: 0.0,
            step_tol: 0.0,
            ..LmConfig::default()
        };
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(vec![p[0] - 3.0, (p[0] - 3.0) * 0.1]),
            &[0.0],
            &cfg,
        );
        assert!(matches!(out, Err(Error::FitFailure { .. })));
    }
}
