//! Rate parameters of the jump process, their derived quantities and the
//! physical constants used by the design layer.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative half-width of the band around `gamma == rabi` classified as critical.
pub const CRITICAL_BAND: f64 = 1e-9;

/// Jump half-rate `gamma` and Rabi angular frequency of the driving field.
///
/// The battery returns an electron from the lower to the upper level with
/// probability density `2 * gamma`. Both values are in the same (arbitrary)
/// inverse time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateParams {
    gamma: f64,
    rabi: f64,
}

/// Quantities derived from a [`RateParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    /// `2 gamma^2 / rabi^2`
    pub a: f64,
    /// `sqrt(gamma^2 - rabi^2)`, purely imaginary when underdamped.
    pub alpha: Complex64,
    pub regime: DampingRegime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingRegime {
    /// `gamma > rabi`: the lower-state amplitude is a sum of two decaying exponentials.
    Overdamped,
    /// `gamma == rabi` within [`CRITICAL_BAND`].
    Critical,
    /// `gamma < rabi`: damped Rabi oscillation.
    Underdamped,
}

impl DampingRegime {
    /// Classifies a (gamma, rabi) pair. Accepts zeros so that the undamped and
    /// undriven limits used by [`crate::dynamics`] classify consistently.
    pub fn classify(gamma: f64, rabi: f64) -> Self {
        let rabi2 = rabi * rabi;
        let diff = gamma * gamma - rabi2;
        if diff.abs() <= CRITICAL_BAND * rabi2 {
            DampingRegime::Critical
        } else if diff > 0.0 {
            DampingRegime::Overdamped
        } else {
            DampingRegime::Underdamped
        }
    }
}

impl RateParams {
    pub fn new(gamma: f64, rabi: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "gamma must be finite and > 0, got {gamma}"
            )));
        }
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rabi must be finite and > 0, got {rabi}"
            )));
        }
        Ok(RateParams { gamma, rabi })
    }

    /// Builds parameters from `gamma` and the dimensionless `a = 2 gamma^2 / rabi^2`.
    pub fn from_gamma_and_a(gamma: f64, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "a must be finite and > 0, got {a}"
            )));
        }
        RateParams::new(gamma, gamma * (2.0 / a).sqrt())
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    #[inline]
    pub fn a(&self) -> f64 {
        2.0 * self.gamma * self.gamma / (self.rabi * self.rabi)
    }

    /// `gamma^2 - rabi^2`
    #[inline]
    pub fn alpha_squared(&self) -> f64 {
        (self.gamma - self.rabi) * (self.gamma + self.rabi)
    }

    pub fn alpha(&self) -> Complex64 {
        let a2 = self.alpha_squared();
        if a2 >= 0.0 {
            Complex64::new(a2.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-a2).sqrt())
        }
    }

    pub fn regime(&self) -> DampingRegime {
        DampingRegime::classify(self.gamma, self.rabi)
    }

    pub fn derive(&self) -> Derived {
        Derived {
            a: self.a(),
            alpha: self.alpha(),
            regime: self.regime(),
        }
    }

    /// Average jump rate `R = gamma / (1 + a)`.
    #[inline]
    pub fn mean_rate(&self) -> f64 {
        self.gamma / (1.0 + self.a())
    }

    /// Slowest exponential decay rate of the waiting-time density.
    pub fn slowest_decay_rate(&self) -> f64 {
        match self.regime() {
            // gamma - alpha, written without cancellation
            DampingRegime::Overdamped => {
                let alpha = self.alpha_squared().sqrt();
                self.rabi * self.rabi / (self.gamma + alpha)
            }
            DampingRegime::Critical | DampingRegime::Underdamped => self.gamma,
        }
    }
}

/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant [J s]
    pub hbar: f64,
    /// Elementary charge [C]
    pub electron_charge: f64,
    /// Electron mass [kg]
    pub electron_mass: f64,
    /// Vacuum permittivity [F/m]
    pub vacuum_permittivity: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 recommended values.
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        electron_charge: 1.602_176_634e-19,
        electron_mass: 9.109_383_701_5e-31,
        vacuum_permittivity: 8.854_187_812_8e-12,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn derive_underdamped_example() {
        let p = RateParams::new(1.0, 2f64.sqrt()).unwrap();
        let d = p.derive();
        assert_relative_eq!(d.a, 1.0, epsilon = 1e-15);
        assert_relative_eq!((d.alpha * d.alpha).re, -1.0, epsilon = 1e-15);
        assert_eq!(d.regime, DampingRegime::Underdamped);
    }

    #[test]
    fn derive_overdamped_example() {
        let d = RateParams::new(2.0, 1.0).unwrap().derive();
        assert_eq!(d.a, 8.0);
        assert_relative_eq!(d.alpha.re, 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(d.alpha.im, 0.0);
        assert_eq!(d.regime, DampingRegime::Overdamped);
    }

    #[test]
    fn derive_critical_example() {
        let d = RateParams::new(1.0, 1.0).unwrap().derive();
        assert_eq!(d.a, 2.0);
        assert_eq!(d.alpha, Complex64::new(0.0, 0.0));
        assert_eq!(d.regime, DampingRegime::Critical);
    }

    #[test]
    fn critical_band_edges() {
        let inside = (1.0 + 0.4e-9f64).sqrt();
        let outside = (1.0 + 2e-9f64).sqrt();
        assert_eq!(
            DampingRegime::classify(inside, 1.0),
            DampingRegime::Critical
        );
        assert_eq!(
            DampingRegime::classify(outside, 1.0),
            DampingRegime::Overdamped
        );
        assert_eq!(
            DampingRegime::classify(1.0, outside),
            DampingRegime::Underdamped
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        for (g, r) in [
            (0.0, 1.0),
            (1.0, 0.0),
            (-1.0, 1.0),
            (f64::NAN, 1.0),
            (1.0, f64::INFINITY),
        ] {
            assert!(matches!(
                RateParams::new(g, r),
                Err(Error::ParameterDomain(_))
            ));
        }
    }

    #[test]
    fn constants_reproduce_codata() {
        let c = PhysicalConstants::CODATA_2018;
        assert_eq!(c.electron_charge, 1.602176634e-19);
        assert_eq!(c.hbar, 1.054571817e-34);
    }

    proptest! {
        #[test]
        fn a_times_rabi_squared(g in 1e-3f64..1e3, r in 1e-3f64..1e3) {
            let p = RateParams::new(g, r).unwrap();
            let lhs = p.a() * r * r;
            let rhs = 2.0 * g * g;
            prop_assert!(((lhs - rhs) / rhs).abs() <= 1e-14);
        }

        #[test]
        fn regime_swaps_with_arguments(g in 1e-3f64..1e3, r in 1e-3f64..1e3) {
            let fwd = DampingRegime::classify(g, r);
            let back = DampingRegime::classify(r, g);
            prop_assume!(fwd != DampingRegime::Critical && back != DampingRegime::Critical);
            prop_assert_ne!(fwd, back);
        }

        #[test]
        fn alpha_squares_back(g in 1e-3f64..1e3, r in 1e-3f64..1e3) {
            let p = RateParams::new(g, r).unwrap();
            let a2 = p.alpha() * p.alpha();
            let scale = g * g + r * r;
            prop_assert!((a2.re - p.alpha_squared()).abs() <= 1e-15 * scale);
            prop_assert!(a2.im.abs() <= 1e-15 * scale);
        }
    }
}
