//! Two-level amplitude dynamics under a resonant field in the rotating-wave
//! approximation, with an optional jump half-rate `gamma` draining the lower level:
//!
//! ```text
//! dC1/dt = i (rabi/2) C2 - gamma C1
//! dC2/dt = i (rabi/2) C1
//! ```
//!
//! starting from `C2(0) = 1, C1(0) = 0`. The closed-form solution is evaluated
//! in a regime-split real form; [`integrate_amplitudes`] solves the same
//! system with an adaptive Dormand–Prince 5(4) scheme and serves as an
//! independent check.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{DampingRegime, RateParams};

/// Parameters of the amplitude equations. Unlike [`RateParams`], zero
/// `gamma` (pure Rabi oscillation) and zero `rabi` (no drive) are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSystem {
    gamma: f64,
    rabi: f64,
    regime: DampingRegime,
    // alpha when overdamped, beta = sqrt(rabi^2 - gamma^2) when underdamped
    root: f64,
}

impl TwoLevelSystem {
    pub fn new(gamma: f64, rabi: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0 && rabi.is_finite() && rabi >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "gamma and rabi must be finite and >= 0, got ({gamma}, {rabi})"
            )));
        }
        let regime = DampingRegime::classify(gamma, rabi);
        let diff = (gamma - rabi) * (gamma + rabi);
        let root = match regime {
            DampingRegime::Critical => 0.0,
            DampingRegime::Overdamped => diff.sqrt(),
            DampingRegime::Underdamped => (-diff).sqrt(),
        };
        Ok(TwoLevelSystem {
            gamma,
            rabi,
            regime,
            root,
        })
    }

    /// Undamped Rabi problem (`gamma = 0`).
    pub fn undamped(rabi: f64) -> Result<Self> {
        TwoLevelSystem::new(0.0, rabi)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn regime(&self) -> DampingRegime {
        self.regime
    }

    /// `(s, c)` with `C1 = i rabi s` and `C2 = c + gamma s`.
    ///
    /// Overdamped: `s = e^{-gamma t/2} sinh(alpha t/2)/alpha`, `c = e^{-gamma t/2} cosh(alpha t/2)`,
    /// both assembled from `e^{(alpha-gamma)t/2}` and `expm1` so nothing overflows or cancels.
    #[inline]
    pub(crate) fn lobe(&self, t: f64) -> (f64, f64) {
        match self.regime {
            DampingRegime::Overdamped => {
                let slow = ((self.root - self.gamma) * 0.5 * t).exp();
                let fast = (-self.root * t).exp();
                let s = slow * (-(-self.root * t).exp_m1()) / (2.0 * self.root);
                (s, slow * 0.5 * (1.0 + fast))
            }
            DampingRegime::Underdamped => {
                let env = (-0.5 * self.gamma * t).exp();
                let (sin, cos) = (0.5 * self.root * t).sin_cos();
                (env * sin / self.root, env * cos)
            }
            DampingRegime::Critical => {
                let env = (-0.5 * self.gamma * t).exp();
                (env * 0.5 * t, env)
            }
        }
    }

    /// Real amplitudes `(y1, y2)` with `C1 = i y1`, `C2 = y2`. Requires `t >= 0`.
    #[inline]
    pub(crate) fn real_amplitudes(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.lobe(t);
        (self.rabi * s, c + self.gamma * s)
    }

    /// Closed-form `(C1(t), C2(t))`.
    pub fn amplitudes(&self, t: f64) -> Result<(Complex64, Complex64)> {
        check_time(t)?;
        let (y1, y2) = self.real_amplitudes(t);
        Ok((Complex64::new(0.0, y1), Complex64::new(y2, 0.0)))
    }

    fn derivative(&self, y: &[f64; 4]) -> [f64; 4] {
        let h = 0.5 * self.rabi;
        let g = self.gamma;
        // y = [Re C1, Im C1, Re C2, Im C2]
        [
            -h * y[3] - g * y[0],
            h * y[2] - g * y[1],
            -h * y[1],
            h * y[0],
        ]
    }
}

impl From<RateParams> for TwoLevelSystem {
    fn from(p: RateParams) -> Self {
        TwoLevelSystem::new(p.gamma(), p.rabi()).expect("RateParams are always valid here")
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

/// Lower-state probability `sin^2(rabi t / 2)` of the undamped problem.
pub fn rabi_probability(rabi: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    if !(rabi.is_finite() && rabi >= 0.0) {
        return Err(Error::ParameterDomain(format!(
            "rabi must be >= 0, got {rabi}"
        )));
    }
    Ok((0.5 * rabi * t).sin().powi(2))
}

/// Lower-state amplitude `C1(t)` of the damped problem.
pub fn damped_amplitude(params: &RateParams, t: f64) -> Result<Complex64> {
    TwoLevelSystem::from(*params)
        .amplitudes(t)
        .map(|(c1, _)| c1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeState {
    pub t: f64,
    #[serde(serialize_with = "ser_complex")]
    pub c1: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub c2: Complex64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl AmplitudeState {
    /// Probability that no jump has happened yet, `|C1|^2 + |C2|^2`.
    pub fn norm(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    fn from_vec(t: f64, y: &[f64; 4]) -> Self {
        AmplitudeState {
            t,
            c1: Complex64::new(y[0], y[1]),
            c2: Complex64::new(y[2], y[3]),
        }
    }
}

/// Numerical solution of the amplitude equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTrajectory {
    states: Vec<AmplitudeState>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl AmplitudeTrajectory {
    pub fn states(&self) -> &[AmplitudeState] {
        &self.states
    }

    pub fn last(&self) -> &AmplitudeState {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

/// Integrates from `t = 0` to `t_end`, recording every accepted step.
/// `tol` bounds the accumulated error over the whole run.
pub fn integrate_amplitudes(
    system: &TwoLevelSystem,
    t_end: f64,
    tol: f64,
) -> Result<AmplitudeTrajectory> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be > 0, got {t_end}")));
    }
    dormand_prince(system, &[t_end], tol, true)
}

/// Integrates from `t = 0` and reports the state exactly at each of `times`
/// (nondecreasing, `>= 0`); steps are shortened to land on them.
pub fn integrate_amplitudes_at(
    system: &TwoLevelSystem,
    times: &[f64],
    tol: f64,
) -> Result<AmplitudeTrajectory> {
    for &t in times {
        check_time(t)?;
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("sample times must be nondecreasing".into()));
    }
    dormand_prince(system, times, tol, false)
}

// The system is autonomous, so the node offsets c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dormand_prince(
    sys: &TwoLevelSystem,
    targets: &[f64],
    tol: f64,
    record_steps: bool,
) -> Result<AmplitudeTrajectory> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::Domain(format!(
            "tol must lie in [1e-12, 1e-4], got {tol}"
        )));
    }
    let mut t = 0.0;
    let mut y = [0.0, 0.0, 1.0, 0.0];
    let mut states = Vec::new();
    if record_steps {
        states.push(AmplitudeState::from_vec(t, &y));
    }
    // error per unit step: local errors summed over the whole span stay
    // within `tol`, so `tol` bounds the global error, not just each step's
    let span = targets
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(f64::MIN_POSITIVE);
    let scale = sys.gamma + sys.rabi;
    let mut h = if scale > 0.0 { 0.01 / scale } else { 0.01 };
    let mut k = [[0.0; 4]; 7];
    k[0] = sys.derivative(&y);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    for &target in targets {
        while t < target {
            let mut step = h.min(target - t);
            // avoid leaving a sliver behind
            if target - (t + step) < 1e-3 * step {
                step = target - t;
            }
            if step <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t });
            }
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        for i in 0..4 {
                            ys[i] += step * a * kj[i];
                        }
                    }
                }
                k[s] = sys.derivative(&ys);
            }
            // stage 7 was evaluated at the fifth-order solution (FSAL)
            let mut y_new = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                for i in 0..4 {
                    y_new[i] += step * A[6][j] * kj[i];
                }
            }
            let mut err = 0.0;
            for i in 0..4 {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                let sc = tol * (step / span) * (1.0 + y[i].abs().max(y_new[i].abs()));
                err += (step * e / sc).powi(2);
            }
            let err = (err / 4.0).sqrt();
            if !err.is_finite() {
                return Err(Error::Numeric("non-finite error estimate".into()));
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.25)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                y = y_new;
                k[0] = k[6];
                accepted += 1;
                if record_steps {
                    states.push(AmplitudeState::from_vec(t, &y));
                }
                h = step * factor;
            } else {
                rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        if !record_steps {
            states.push(AmplitudeState::from_vec(t, &y));
        }
    }
    Ok(AmplitudeTrajectory {
        states,
        steps_accepted: accepted,
        steps_rejected: rejected,
    })
}
