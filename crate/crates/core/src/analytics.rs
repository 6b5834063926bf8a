//! Closed-form statistics of the jump process.
//!
//! After each jump the electron restarts in the upper level, so the jumps
//! form an ordinary renewal process fully described by the waiting-time
//! density `w(t) = 2 gamma |C1(t)|^2`. From it follow the mean rate, the
//! Laplace transforms of `w` and of the event correlation, and the
//! double-sided spectral density of the jump-rate fluctuation. The
//! closed-loop functions describe the detected rate once the resonator
//! energy is allowed to fluctuate, at zero Fourier frequency only.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::TwoLevelSystem;
use crate::error::{Error, Result};
use crate::params::RateParams;

/// Below this value of `(gamma + rabi) t` the CDF is summed from its Taylor series.
const SERIES_LIMIT: f64 = 1.0;
const SERIES_TERMS: usize = 24;

/// Waiting-time law with the regime-dependent constants precomputed.
#[derive(Debug, Clone, Copy)]
pub struct WaitingTimeLaw {
    params: RateParams,
    system: TwoLevelSystem,
}

impl WaitingTimeLaw {
    pub fn new(params: RateParams) -> Self {
        WaitingTimeLaw {
            params,
            system: TwoLevelSystem::from(params),
        }
    }

    pub fn params(&self) -> &RateParams {
        &self.params
    }

    /// `w(t)` for `t >= 0`.
    #[inline]
    pub fn density(&self, t: f64) -> f64 {
        let (y1, _) = self.system.real_amplitudes(t);
        2.0 * self.params.gamma() * y1 * y1
    }

    /// Probability that no jump occurred in `[0, t]`: `|C1|^2 + |C2|^2`.
    #[inline]
    pub fn survival(&self, t: f64) -> f64 {
        if self.small_t(t) {
            return 1.0 - self.cdf_series(t);
        }
        let (y1, y2) = self.system.real_amplitudes(t);
        y1 * y1 + y2 * y2
    }

    /// `W(t) = 1 - survival(t)`; accurate to full relative precision at small `t`.
    #[inline]
    pub fn cdf(&self, t: f64) -> f64 {
        if self.small_t(t) {
            return self.cdf_series(t);
        }
        let (y1, y2) = self.system.real_amplitudes(t);
        1.0 - (y1 * y1 + y2 * y2)
    }

    #[inline]
    fn small_t(&self, t: f64) -> bool {
        (self.params.gamma() + self.params.rabi()) * t <= SERIES_LIMIT
    }

    /// `2 gamma * integral_0^t y1^2`, with `y1` expanded in powers of `t`.
    fn cdf_series(&self, t: f64) -> f64 {
        let g = self.params.gamma();
        let h = 0.5 * self.params.rabi();
        // scaled Taylor coefficients y1_n t^n, y2_n t^n
        let mut y1 = [0.0; SERIES_TERMS];
        let mut y2 = [0.0; SERIES_TERMS];
        y2[0] = 1.0;
        for n in 0..SERIES_TERMS - 1 {
            let k = t / (n as f64 + 1.0);
            y1[n + 1] = (h * y2[n] - g * y1[n]) * k;
            y2[n + 1] = -h * y1[n] * k;
        }
        let mut acc = 0.0;
        for n in (0..SERIES_TERMS).rev() {
            let conv: f64 = (0..=n).map(|i| y1[i] * y1[n - i]).sum();
            acc += conv / (n as f64 + 1.0);
        }
        2.0 * g * acc * t
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )))
    }
}

/// Waiting-time probability density `w(t)`.
pub fn waiting_time_density(params: &RateParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(WaitingTimeLaw::new(*params).density(t))
}

/// Cumulative distribution `W(t) = integral_0^t w`.
pub fn waiting_time_cdf(params: &RateParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(WaitingTimeLaw::new(*params).cdf(t))
}

pub fn waiting_time_survival(params: &RateParams, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(WaitingTimeLaw::new(*params).survival(t))
}

fn pole_error(p: Complex64) -> Error {
    Error::Pole { re: p.re, im: p.im }
}

/// Laplace transform `gamma rabi^2 / (p^3 + 3 gamma p^2 + (2 gamma^2 + rabi^2) p + gamma rabi^2)`.
pub fn waiting_time_laplace(params: &RateParams, p: Complex64) -> Result<Complex64> {
    let g = params.gamma();
    let r2 = params.rabi() * params.rabi();
    let c1 = 2.0 * g * g + r2;
    let c0 = g * r2;
    let den = ((p + 3.0 * g) * p + c1) * p + c0;
    let m = p.norm();
    let size = ((m + 3.0 * g) * m + c1) * m + c0;
    if !p.is_finite() {
        return Err(Error::Domain("p must be finite".into()));
    }
    if den.norm() <= 1e-13 * size {
        return Err(pole_error(p));
    }
    Ok(c0 / den)
}

/// Average inter-event time `(1 + a) / gamma`.
pub fn mean_waiting_time(params: &RateParams) -> f64 {
    (1.0 + params.a()) / params.gamma()
}

/// Laplace transform of the event correlation, `w~/(1 - w~)`.
///
/// Evaluated as `gamma rabi^2 / (p (p^2 + 3 gamma p + 2 gamma^2 + rabi^2))`,
/// which is the same rational function with the `1 - w~` cancellation removed.
/// Simple pole at `p = 0` with residue equal to the mean rate.
pub fn event_correlation_laplace(params: &RateParams, p: Complex64) -> Result<Complex64> {
    if !p.is_finite() {
        return Err(Error::Domain("p must be finite".into()));
    }
    let g = params.gamma();
    let r2 = params.rabi() * params.rabi();
    let c1 = 2.0 * g * g + r2;
    let quad = (p + 3.0 * g) * p + c1;
    let m = p.norm();
    if m == 0.0 || quad.norm() <= 1e-13 * ((m + 3.0 * g) * m + c1) {
        return Err(pole_error(p));
    }
    Ok(g * r2 / (p * quad))
}

/// `S_r(Omega)/R` as a function of `a` and `x = Omega / gamma`.
pub fn jump_spectral_density_for_a(a: f64, x: f64) -> f64 {
    let x2 = x * x;
    let den = (1.0 + a) * (1.0 + a) + a * (1.25 * a - 1.0) * x2 + 0.25 * a * a * x2 * x2;
    1.0 - 3.0 * a / den
}

/// Double-sided spectral density of the jump-rate fluctuation over the mean rate,
/// `S_r(Omega)/R`. Even in `Omega`; the `2 pi R delta(Omega)` term of the full
/// event spectrum is excluded.
pub fn jump_spectral_density(params: &RateParams, omega: f64) -> f64 {
    jump_spectral_density_for_a(params.a(), omega / params.gamma())
}

pub fn zero_frequency_fano_for_a(a: f64) -> f64 {
    jump_spectral_density_for_a(a, 0.0)
}

/// `S_r(0)/R = 1 - 3a/(1+a)^2`, the long-window Fano factor of the jumps.
pub fn zero_frequency_fano(params: &RateParams) -> f64 {
    zero_frequency_fano_for_a(params.a())
}

/// `A = (mu/R) dR/dmu = a/(1+a)`, using `rabi^2` proportional to `mu`.
pub fn pump_feedback_gain_for_a(a: f64) -> f64 {
    a / (1.0 + a)
}

pub fn pump_feedback_gain(params: &RateParams) -> f64 {
    pump_feedback_gain_for_a(params.a())
}

/// Detected-noise level `S_dD / D = 2a^2 - a + 1`. Defined for `a >= 0`.
pub fn detected_noise_level_for_a(a: f64) -> f64 {
    (2.0 * a - 1.0) * a + 1.0
}

pub fn detected_noise_level(params: &RateParams) -> f64 {
    detected_noise_level_for_a(params.a())
}

/// Zero-frequency closed-loop noise budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedLoopNoise {
    pub a: f64,
    /// `A = a/(1+a)`
    pub feedback_gain: f64,
    /// `S_r(0)/R` of the open-loop jumps
    pub jump_level: f64,
    /// `S_d/D`, white detector noise at the shot level
    pub detector_level: f64,
    /// `(S_r/R + A^2 S_d/D) / (1 - A)^2`
    pub detected_level: f64,
}

impl ClosedLoopNoise {
    /// Assembles the detected level from its two independent sources.
    pub fn for_a(a: f64) -> Self {
        let gain = pump_feedback_gain_for_a(a);
        let jump_level = zero_frequency_fano_for_a(a);
        let detector_level = 1.0;
        let detected_level =
            (jump_level + gain * gain * detector_level) / ((1.0 - gain) * (1.0 - gain));
        ClosedLoopNoise {
            a,
            feedback_gain: gain,
            jump_level,
            detector_level,
            detected_level,
        }
    }

    pub fn new(params: &RateParams) -> Self {
        ClosedLoopNoise::for_a(params.a())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub a_opt: f64,
    pub level: f64,
}

/// Minimizes the detected-noise level over `a > 0`.
///
/// Bisection on the sign of a central-difference derivative; for a smooth
/// convex objective this locates the minimizer to near machine precision,
/// which a bracketing search on function values cannot.
pub fn optimal_operating_point() -> OperatingPoint {
    minimize_convex(detected_noise_level_for_a, 1e-6, 10.0)
}

pub(crate) fn minimize_convex<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> OperatingPoint {
    let slope = |x: f64| {
        let h = 1e-3 * x.abs().max(1e-3);
        f(x + h) - f(x - h)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let a_opt = 0.5 * (lo + hi);
    OperatingPoint {
        a_opt,
        level: f(a_opt),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    AnalyticJump,
    EstimatedJump,
    DetectedLoop,
}

/// Sampled `S/R` values on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCurve {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard error per point, for estimated curves.
    pub stderr: Option<Vec<f64>>,
    pub kind: SpectralKind,
}

impl SpectralCurve {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Root-mean-square relative deviation from `reference` sampled on the same grid.
    pub fn rms_relative_deviation(&self, reference: &SpectralCurve) -> Result<f64> {
        if reference.omega != self.omega {
            return Err(Error::Domain(
                "curves are sampled on different grids".into(),
            ));
        }
        if self.is_empty() {
            return Err(Error::Domain("empty curve".into()));
        }
        let ss: f64 = self
            .values
            .iter()
            .zip(&reference.values)
            .map(|(v, r)| ((v - r) / r).powi(2))
            .sum();
        Ok((ss / self.len() as f64).sqrt())
    }
}

/// Closed-form `S_r(Omega)/R` on `omega`.
pub fn analytic_spectrum(params: &RateParams, omega: &[f64]) -> Result<SpectralCurve> {
    if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Domain("frequencies must be finite and >= 0".into()));
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(SpectralCurve {
        omega: omega.to_vec(),
        values: omega
            .iter()
            .map(|&w| jump_spectral_density(params, w))
            .collect(),
        stderr: None,
        kind: SpectralKind::AnalyticJump,
    })
}
