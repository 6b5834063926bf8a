//! Physical design layer, SI units throughout.
//!
//! The electron lives in an infinite square well of width `d` between two
//! grids forming a capacitance of volume `V = A d`. The well's lowest two
//! levels set the optical angular frequency, the dipole element sets the
//! coupling, and `rabi^2 = b mu / V` ties the Rabi frequency to the reduced
//! resonator energy `mu = E / (hbar omega)`. In steady state the injection
//! rate `J`, the jump rate `R` and the detection rate `D = mu / tau_p` agree.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytics::{detected_noise_level_for_a, optimal_operating_point};
use crate::error::{Error, Result};
use crate::params::{PhysicalConstants, RateParams};

const K: PhysicalConstants = PhysicalConstants::CODATA_2018;

/// Discriminants smaller than this are treated as a double root.
const DOUBLE_ROOT_BAND: f64 = 1e-12;

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::ParameterDomain(format!(
            "{name} must be finite and > 0, got {x}"
        )))
    }
}

fn non_negative(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::ParameterDomain(format!(
            "{name} must be finite and >= 0, got {x}"
        )))
    }
}

/// Angular frequency `3 pi^2 hbar / (2 m d^2)` of the 1 -> 2 transition [rad/s].
pub fn transition_frequency(d: f64) -> Result<f64> {
    let d = positive("well width", d)?;
    Ok(3.0 * PI * PI * K.hbar / (2.0 * K.electron_mass * d * d))
}

/// Well width [m] whose 1 -> 2 transition is at angular frequency `omega`.
pub fn well_width(omega: f64) -> Result<f64> {
    let omega = positive("angular frequency", omega)?;
    Ok((3.0 * PI * PI * K.hbar / (2.0 * K.electron_mass * omega)).sqrt())
}

/// Energy `pi^2 hbar^2 n^2 / (2 m d^2)` [J] of level `n` (1 or 2).
pub fn energy_level(d: f64, n: u32) -> Result<f64> {
    let d = positive("well width", d)?;
    if !(1..=2).contains(&n) {
        return Err(Error::Domain(format!(
            "two-level model has n = 1 or 2, got {n}"
        )));
    }
    let n = n as f64;
    Ok(PI * PI * K.hbar * K.hbar * n * n / (2.0 * K.electron_mass * d * d))
}

/// Dipole matrix element `x12 = 16 d / (9 pi^2)` [m].
pub fn dipole_element(d: f64) -> Result<f64> {
    Ok(16.0 * non_negative("well width", d)? / (9.0 * PI * PI))
}

/// Rabi frequency `(16 / 9 pi^2) e v / hbar` [rad/s] for a peak grid potential `v` [V].
pub fn rabi_from_potential(v: f64) -> Result<f64> {
    let v = non_negative("potential", v)?;
    Ok(16.0 / (9.0 * PI * PI) * K.electron_charge * v / K.hbar)
}

/// `b = (1024 / 27 pi) e^2 / (4 pi eps0 m)` [m^3/s^2].
pub fn coupling_constant() -> f64 {
    coupling_constant_with(&K)
}

pub fn coupling_constant_with(c: &PhysicalConstants) -> f64 {
    1024.0 / (27.0 * PI) * c.electron_charge * c.electron_charge
        / (4.0 * PI * c.vacuum_permittivity * c.electron_mass)
}

/// `rabi = sqrt(b mu / V)` [rad/s].
pub fn rabi_from_energy(mu: f64, volume: f64) -> Result<f64> {
    let mu = positive("mu", mu)?;
    let volume = positive("volume", volume)?;
    Ok((coupling_constant() * mu / volume).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyRoot {
    /// Jump half-rate [1/s]
    pub gamma: f64,
    pub a: f64,
    /// Detected-noise level over the shot level at this root.
    pub detected_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub pump_rate: f64,
    pub tau_p: f64,
    pub volume: f64,
    pub mu: f64,
    pub rabi: f64,
    /// Increasing in `gamma`. One entry for a double root, otherwise two.
    pub roots: Vec<SteadyRoot>,
}

/// Solves `J = gamma / (1 + 2 gamma^2 / rabi^2)` for `gamma`.
///
/// Both roots of the quadratic are returned; nothing in the model selects
/// one of them.
pub fn steady_state_roots(pump_rate: f64, rabi: f64) -> Result<Vec<SteadyRoot>> {
    let j = positive("pump rate", pump_rate)?;
    let rabi = positive("rabi", rabi)?;
    let r2 = rabi * rabi;
    let disc = 1.0 - 8.0 * j * j / r2;
    let root = |gamma: f64| {
        let a = 2.0 * gamma * gamma / r2;
        SteadyRoot {
            gamma,
            a,
            detected_level: detected_noise_level_for_a(a),
        }
    };
    if disc < -DOUBLE_ROOT_BAND {
        return Err(Error::NoSteadyState {
            rabi,
            threshold: 2.0 * 2f64.sqrt() * j,
        });
    }
    if disc.abs() <= DOUBLE_ROOT_BAND {
        return Ok(vec![root(r2 / (4.0 * j))]);
    }
    let high = (1.0 + disc.sqrt()) * r2 / (4.0 * j);
    // product of the roots is rabi^2 / 2
    let low = 0.5 * r2 / high;
    Ok(vec![root(low), root(high)])
}

/// Steady state from injection rate `J` [1/s], photon lifetime `tau_p` [s]
/// and capacitance volume `V` [m^3].
pub fn steady_state_solve(pump_rate: f64, tau_p: f64, volume: f64) -> Result<SteadyState> {
    let j = positive("pump rate", pump_rate)?;
    let tau_p = positive("tau_p", tau_p)?;
    let volume = positive("volume", volume)?;
    let mu = j * tau_p;
    let rabi = rabi_from_energy(mu, volume)?;
    let roots = steady_state_roots(j, rabi)?;
    Ok(SteadyState {
        pump_rate: j,
        tau_p,
        volume,
        mu,
        rabi,
        roots,
    })
}

/// A fully specified single-electron maser/laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CavityDesign {
    /// Well width / grid spacing [m]
    pub d: f64,
    /// Transition frequency [Hz]
    pub nu: f64,
    /// Capacitance volume [m^3]
    pub volume: f64,
    /// Photon lifetime [s]
    pub tau_p: f64,
    /// Injection rate J [1/s]
    pub pump_rate: f64,
    /// Reduced resonator energy E / (hbar omega)
    pub mu: f64,
    /// Jump half-rate [1/s]
    pub gamma: f64,
    /// Rabi angular frequency [rad/s]
    pub rabi: f64,
    pub a: f64,
}

impl CavityDesign {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.nu
    }

    /// Grid area `A = V / d` [m^2].
    pub fn plate_area(&self) -> f64 {
        self.volume / self.d
    }

    /// Side of a square grid, `sqrt(A)` [m].
    pub fn plate_side(&self) -> f64 {
        self.plate_area().sqrt()
    }

    /// `C = eps0 A / d` [F].
    pub fn capacitance(&self) -> f64 {
        K.vacuum_permittivity * self.plate_area() / self.d
    }

    /// `L = 1 / (C omega^2)` [H].
    pub fn inductance(&self) -> f64 {
        1.0 / (self.capacitance() * self.omega() * self.omega())
    }

    pub fn rate_params(&self) -> Result<RateParams> {
        RateParams::new(self.gamma, self.rabi)
    }

    pub fn detected_level(&self) -> f64 {
        detected_noise_level_for_a(self.a)
    }

    /// Largest relative residual among the relations linking the fields.
    pub fn closure_residual(&self) -> f64 {
        let rel = |x: f64, y: f64| ((x - y) / y).abs();
        let omega_from_d = 3.0 * PI * PI * K.hbar / (2.0 * K.electron_mass * self.d * self.d);
        [
            rel(omega_from_d, self.omega()),
            rel(self.pump_rate * self.tau_p, self.mu),
            rel(
                coupling_constant() * self.mu / self.volume,
                self.rabi * self.rabi,
            ),
            rel(
                2.0 * self.gamma * self.gamma / (self.rabi * self.rabi),
                self.a,
            ),
            rel(self.gamma / (1.0 + self.a), self.pump_rate),
            rel(self.plate_area() * self.d, self.volume),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Named SI quantities with unit strings, for reporting.
    pub fn quantities(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("d", self.d, "m"),
            ("nu", self.nu, "Hz"),
            ("omega", self.omega(), "rad/s"),
            ("volume", self.volume, "m^3"),
            (
                "volume_over_tau_p_sq",
                self.volume / (self.tau_p * self.tau_p),
                "m^3/s^2",
            ),
            ("tau_p", self.tau_p, "s"),
            ("pump_rate", self.pump_rate, "1/s"),
            ("mu", self.mu, "1"),
            ("gamma", self.gamma, "1/s"),
            ("rabi", self.rabi, "rad/s"),
            ("a", self.a, "1"),
            ("plate_area", self.plate_area(), "m^2"),
            ("sqrt_area", self.plate_side(), "m"),
            ("capacitance", self.capacitance(), "F"),
            ("inductance", self.inductance(), "H"),
            ("detected_level", self.detected_level(), "1"),
        ]
    }
}

/// Design that runs at operating point `a` with reduced energy `mu`.
///
/// `J = mu / tau_p`, `gamma = (1 + a) J`, `rabi^2 = 2 gamma^2 / a`,
/// `V = b mu / rabi^2`, and the well width follows from `nu`.
pub fn design_for_operating_point(nu: f64, tau_p: f64, mu: f64, a: f64) -> Result<CavityDesign> {
    let nu = positive("nu", nu)?;
    let tau_p = positive("tau_p", tau_p)?;
    let mu = positive("mu", mu)?;
    let a = positive("a", a)?;
    let pump_rate = mu / tau_p;
    let gamma = (1.0 + a) * pump_rate;
    let rabi2 = 2.0 * gamma * gamma / a;
    Ok(CavityDesign {
        d: well_width(2.0 * PI * nu)?,
        nu,
        volume: coupling_constant() * mu / rabi2,
        tau_p,
        pump_rate,
        mu,
        gamma,
        rabi: rabi2.sqrt(),
        a,
    })
}

/// Minimum-noise design holding one photon's worth of energy (`mu = 1`).
pub fn reference_design(tau_p: f64, nu: f64) -> Result<CavityDesign> {
    design_for_operating_point(nu, tau_p, 1.0, optimal_operating_point().a_opt)
}

/// One design per steady-state root for given `J`, `tau_p`, `V`.
pub fn designs_from_steady_state(
    nu: f64,
    pump_rate: f64,
    tau_p: f64,
    volume: f64,
) -> Result<Vec<CavityDesign>> {
    let nu = positive("nu", nu)?;
    let d = well_width(2.0 * PI * nu)?;
    let ss = steady_state_solve(pump_rate, tau_p, volume)?;
    Ok(ss
        .roots
        .iter()
        .map(|r| CavityDesign {
            d,
            nu,
            volume,
            tau_p,
            pump_rate: ss.pump_rate,
            mu: ss.mu,
            gamma: r.gamma,
            rabi: ss.rabi,
            a: r.a,
        })
        .collect())
}
