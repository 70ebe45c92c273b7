// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by the Hamiltonian, spectrum, and pulse code.
//!
//! Everything that only needs real arithmetic and a symmetric eigensolver is
//! written against [`Scalar`], so the same code runs in `f32` (cheap sweeps)
//! and `f64` (calibration, propagation). Method calls go through
//! `nalgebra::RealField`; `num_traits` supplies the primitive conversions.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Real floating-point scalar usable throughout the model.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Machine epsilon of the underlying type.
    fn epsilon() -> Self;
}

impl Scalar for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts `T` to `f64`.
#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}

/// 2π in `T`.
#[inline]
pub fn two_pi<T: Scalar>() -> T {
    T::two_pi()
}

/// `f64` → `usize` conversion for a non-negative integer-valued count.
#[inline]
pub fn to_usize<T: Scalar>(x: T) -> usize {
    x.to_usize().expect("non-negative count")
}
