// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Asymmetric-SQUID flux dispersion of the tunable bus.
//!
//! `f(Φ) = f_max · (d² + (1 − d²) cos²(π(Φ − Φ_off)))^{1/4}` with flux in units
//! of Φ₀. The upper sweet spot sits at `Φ_off`, the lower one at `Φ_off ± ½`
//! where `f = f_max √d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(deserialize = "T: Deserialize<'de> + num_traits::Zero")
)]
pub struct SquidSpec<T> {
    pub f_max_ghz: T,
    /// Junction asymmetry `d ∈ [0, 1]`.
    pub asymmetry: T,
    /// Flux offset in units of Φ₀.
    #[serde(default = "zero_offset")]
    pub flux_offset: T,
}

fn zero_offset<T: num_traits::Zero>() -> T {
    T::zero()
}

/// Which monotone half-period the inverse maps onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxBranch {
    /// `Φ − Φ_off ∈ [0, ½]`
    #[default]
    Positive,
    /// `Φ − Φ_off ∈ [−½, 0]`
    Negative,
}

impl<T: Scalar> SquidSpec<T> {
    pub fn new(f_max_ghz: T, asymmetry: T, flux_offset: T) -> Result<Self> {
        let s = Self {
            f_max_ghz,
            asymmetry,
            flux_offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_max_ghz > T::zero()) || !self.f_max_ghz.is_finite() {
            return Err(Error::config(
                "squid.f_max_ghz",
                "must be positive and finite",
            ));
        }
        if !(self.asymmetry >= T::zero() && self.asymmetry <= T::one()) {
            return Err(Error::config("squid.asymmetry", "must lie in [0, 1]"));
        }
        if !self.flux_offset.is_finite() {
            return Err(Error::config("squid.flux_offset", "must be finite"));
        }
        Ok(())
    }

    /// Lowest reachable frequency, `f_max √d`.
    pub fn f_min_ghz(&self) -> T {
        self.f_max_ghz * self.asymmetry.sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> SquidSpec<U> {
        let c = |x: T| lit::<U>(crate::scalar::to_f64(x));
        SquidSpec {
            f_max_ghz: c(self.f_max_ghz),
            asymmetry: c(self.asymmetry),
            flux_offset: c(self.flux_offset),
        }
    }
}

/// Bus frequency (GHz) at flux `Φ/Φ₀`.
pub fn flux_to_frequency<T: Scalar>(squid: &SquidSpec<T>, flux: T) -> T {
    let d2 = squid.asymmetry * squid.asymmetry;
    let c = (T::pi() * (flux - squid.flux_offset)).cos();
    squid.f_max_ghz * (d2 + (T::one() - d2) * c * c).sqrt().sqrt()
}

/// Flux on the requested monotone branch that yields `frequency_ghz`.
pub fn inverse_flux<T: Scalar>(
    squid: &SquidSpec<T>,
    frequency_ghz: T,
    branch: FluxBranch,
) -> Result<T> {
    let lo = squid.f_min_ghz();
    let hi = squid.f_max_ghz;
    // a few ulps of slack so that round trips through `flux_to_frequency` stay in range
    let slack = lit::<T>(8.0) * <T as Scalar>::epsilon() * hi;
    if !frequency_ghz.is_finite() || frequency_ghz < lo - slack || frequency_ghz > hi + slack {
        return Err(Error::Range {
            index: 0,
            message: format!(
                "frequency {frequency_ghz} GHz outside tunable range [{lo}, {hi}] GHz"
            ),
        });
    }
    let d2 = squid.asymmetry * squid.asymmetry;
    let span = T::one() - d2;
    let x = if span <= T::zero() {
        // d = 1: frequency is flux independent; only f_max is reachable
        T::zero()
    } else {
        let r = frequency_ghz / hi;
        let r4 = r * r * r * r;
        let cos2 = ((r4 - d2) / span).max(T::zero()).min(T::one());
        let half = lit::<T>(0.5);
        // pick the better-conditioned inverse trig function
        if cos2 > half {
            let sin2 = ((T::one() - r4) / span).max(T::zero()).min(T::one());
            sin2.sqrt().asin() / T::pi()
        } else {
            cos2.sqrt().acos() / T::pi()
        }
    };
    Ok(match branch {
        FluxBranch::Positive => squid.flux_offset + x,
        FluxBranch::Negative => squid.flux_offset - x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn squid() -> SquidSpec<f64> {
        SquidSpec::new(4.6, 0.4, 0.1).unwrap()
    }

    #[test]
    fn sweet_spots() {
        let s = squid();
        assert!((flux_to_frequency(&s, 0.1) - 4.6).abs() < 1e-14);
        assert!((flux_to_frequency(&s, 0.6) - 4.6 * 0.4f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_squid_is_untunable() {
        let s: SquidSpec<f64> = SquidSpec::new(5.0, 1.0, 0.0).unwrap();
        for phi in [-0.7, 0.0, 0.25, 0.5, 1.3] {
            assert!((flux_to_frequency(&s, phi) - 5.0).abs() < 1e-12);
        }
        assert_eq!(inverse_flux(&s, 5.0, FluxBranch::Positive).unwrap(), 0.0);
        assert!(matches!(
            inverse_flux(&s, 4.9, FluxBranch::Positive),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn out_of_range() {
        let s = squid();
        assert!(inverse_flux(&s, 4.7, FluxBranch::Positive).is_err());
        assert!(inverse_flux(&s, 2.0, FluxBranch::Positive).is_err());
    }

    #[test]
    fn rejects_bad_asymmetry() {
        assert!(SquidSpec::new(5.0, 1.5, 0.0).is_err());
        assert!(SquidSpec::new(-1.0, 0.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn frequency_round_trip(u in 0.0f64..=1.0, neg in any::<bool>()) {
            let s = squid();
            let f = s.f_min_ghz() + u * (s.f_max_ghz - s.f_min_ghz());
            let branch = if neg { FluxBranch::Negative } else { FluxBranch::Positive };
            let phi = inverse_flux(&s, f, branch).unwrap();
            prop_assert!((flux_to_frequency(&s, phi) - f).abs() < 1e-9);
        }

        #[test]
        fn flux_round_trip(x in 1e-3f64..0.499) {
            let s = squid();
            let phi = s.flux_offset + x;
            let back = inverse_flux(&s, flux_to_frequency(&s, phi), FluxBranch::Positive).unwrap();
            prop_assert!((back - phi).abs() < 1e-9);
        }

        #[test]
        fn periodic_and_even(x in -2.0f64..2.0) {
            let s = squid();
            let f = flux_to_frequency(&s, s.flux_offset + x);
            prop_assert!((f - flux_to_frequency(&s, s.flux_offset + x + 1.0)).abs() < 1e-12);
            prop_assert!((f - flux_to_frequency(&s, s.flux_offset - x)).abs() < 1e-12);
        }
    }
}
