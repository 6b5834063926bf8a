//! Monte Carlo simulation of the jump renewal process and the estimators
//! used to check the closed-form statistics against it.
//!
//! Each trajectory owns a ChaCha8 stream seeded from `(master_seed, index)`,
//! so an ensemble is bit-identical whatever the number of worker threads.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{mean_waiting_time, SpectralCurve, SpectralKind, WaitingTimeLaw};
use crate::error::{Error, Result};
use crate::params::RateParams;

const MAX_ROOT_ITERATIONS: usize = 200;
pub const MIN_WINDOWS: usize = 30;
/// Lowest admissible periodogram frequency is `GUARD_CYCLES * 2 pi / segment_length`.
pub const GUARD_CYCLES: f64 = 10.0;

/// Draws waiting times from `w(t)` by inverting its closed-form CDF.
#[derive(Debug, Clone, Copy)]
pub struct WaitingTimeSampler {
    law: WaitingTimeLaw,
    mean: f64,
}

impl WaitingTimeSampler {
    pub fn new(params: RateParams) -> Self {
        WaitingTimeSampler {
            law: WaitingTimeLaw::new(params),
            mean: mean_waiting_time(&params),
        }
    }

    /// Solves `W(t) = u` for `u` in the open interval (0, 1).
    ///
    /// The bracket `[0, t_hi]` is grown by doubling, then refined by Newton
    /// steps that fall back to bisection whenever they leave the bracket.
    /// For `u > 1/2` the equivalent equation `S(t) = 1 - u` on the survival
    /// function is solved so that tail quantiles keep full precision.
    pub fn sample(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
        }
        let upper = u > 0.5;
        let tail = 1.0 - u;
        // increasing in t, zero at the root
        let excess = |t: f64| {
            if upper {
                tail - self.law.survival(t)
            } else {
                self.law.cdf(t) - u
            }
        };

        // the CDF starts as gamma * rabi^2 * t^3 / 6, which puts deep lower
        // quantiles many decades below the mean
        let p = self.law.params();
        let start = if upper {
            self.mean
        } else {
            (6.0 * u / (p.gamma() * p.rabi() * p.rabi()))
                .cbrt()
                .min(self.mean)
        };
        let mut lo = 0.0;
        let mut hi = start;
        let mut steps = 0;
        while excess(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 1100 || !hi.is_finite() {
                return Err(Error::Numeric(format!("could not bracket quantile {u}")));
            }
        }
        if lo == 0.0 {
            lo = 0.5 * hi;
            while lo > 0.0 && excess(lo) > 0.0 {
                hi = lo;
                lo *= 0.5;
                steps += 1;
                if steps > 1100 {
                    return Err(Error::Numeric(format!("could not bracket quantile {u}")));
                }
            }
        }

        let mut t = 0.5 * (lo + hi);
        for _ in 0..MAX_ROOT_ITERATIONS {
            let f = excess(t);
            if f == 0.0 {
                return Ok(t);
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
            let slope = self.law.density(t);
            let newton = t - f / slope;
            let next = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - t).abs() <= 1e-15 * t {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::Numeric(format!(
            "quantile {u} did not converge in {MAX_ROOT_ITERATIONS} iterations"
        )))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.sample(u).expect("valid sampler and u in (0,1)")
    }
}

/// Inverse-CDF draw for a single `u`.
pub fn sample_waiting_time(params: &RateParams, u: f64) -> Result<f64> {
    WaitingTimeSampler::new(*params).sample(u)
}

/// Inter-event law of a simulated point process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EventLaw {
    /// Jumps of the two-level electron.
    Jump(RateParams),
    /// Exponential gaps at a fixed rate (shot-noise control).
    Poisson { rate: f64 },
}

impl EventLaw {
    pub fn poisson(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "rate must be > 0, got {rate}"
            )));
        }
        Ok(EventLaw::Poisson { rate })
    }

    pub fn mean_rate(&self) -> f64 {
        match self {
            EventLaw::Jump(p) => p.mean_rate(),
            EventLaw::Poisson { rate } => *rate,
        }
    }
}

/// Jump times on `[0, horizon]`. A jump is implied at `t = 0` and not listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTrajectory {
    pub events: Vec<f64>,
    pub horizon: f64,
    pub seed: u64,
}

impl EventTrajectory {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Stream seed of trajectory `index` under `master_seed` (SplitMix64 mixing).
pub fn derive_stream_seed(master_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master_seed).wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Warning text when the horizon is too short for stationary estimates.
pub fn short_horizon_warning(law: &EventLaw, horizon: f64) -> Option<String> {
    let mean_gap = 1.0 / law.mean_rate();
    (horizon < 100.0 * mean_gap).then(|| {
        format!(
            "horizon {horizon} is below 100 mean waiting times ({})",
            100.0 * mean_gap
        )
    })
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon.is_finite() && horizon > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "horizon must be finite and > 0, got {horizon}"
        )))
    }
}

pub fn generate_law_trajectory(law: &EventLaw, horizon: f64, seed: u64) -> Result<EventTrajectory> {
    check_horizon(horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let capacity = (1.1 * horizon * law.mean_rate()) as usize + 16;
    let mut events = Vec::with_capacity(capacity);
    let mut t = 0.0;
    match law {
        EventLaw::Jump(params) => {
            let sampler = WaitingTimeSampler::new(*params);
            loop {
                t += sampler.draw(&mut rng);
                if t > horizon {
                    break;
                }
                events.push(t);
            }
        }
        EventLaw::Poisson { rate } => loop {
            let u: f64 = rng.sample(Open01);
            t += -u.ln() / rate;
            if t > horizon {
                break;
            }
            events.push(t);
        },
    }
    Ok(EventTrajectory {
        events,
        horizon,
        seed,
    })
}

/// One jump trajectory on `[0, horizon]`, fully determined by `seed`.
pub fn generate_trajectory(
    params: &RateParams,
    horizon: f64,
    seed: u64,
) -> Result<EventTrajectory> {
    generate_law_trajectory(&EventLaw::Jump(*params), horizon, seed)
}

/// `count` independent trajectories, generated in parallel.
pub fn generate_ensemble(
    law: &EventLaw,
    horizon: f64,
    count: usize,
    master_seed: u64,
) -> Result<Vec<EventTrajectory>> {
    check_horizon(horizon)?;
    if count == 0 {
        return Err(Error::Domain(
            "ensemble needs at least one trajectory".into(),
        ));
    }
    (0..count as u64)
        .into_par_iter()
        .map(|i| generate_law_trajectory(law, horizon, derive_stream_seed(master_seed, i)))
        .collect()
}

/// Windowed count statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FanoEstimate {
    pub window: f64,
    pub mean_count: f64,
    pub variance: f64,
    pub fano: f64,
    pub stderr: f64,
    pub n_windows: usize,
}

/// Variance-to-mean ratio of event counts in non-overlapping windows.
///
/// Windows are pooled across trajectories; the first window of each
/// trajectory is discarded because trajectories start right after a jump.
pub fn fano_factor(trajectories: &[EventTrajectory], window: f64) -> Result<FanoEstimate> {
    if !(window.is_finite() && window > 0.0) {
        return Err(Error::Domain(format!("window must be > 0, got {window}")));
    }
    let mut counts: Vec<f64> = Vec::new();
    for traj in trajectories {
        let n_win = (traj.horizon / window).floor() as usize;
        if n_win < 2 {
            continue;
        }
        let mut per = vec![0u64; n_win];
        for &t in &traj.events {
            let k = (t / window) as usize;
            if k < n_win {
                per[k] += 1;
            }
        }
        counts.extend(per[1..].iter().map(|&c| c as f64));
    }
    let n = counts.len();
    if n < MIN_WINDOWS {
        return Err(Error::InsufficientData {
            available: n,
            required: MIN_WINDOWS,
        });
    }
    let nf = n as f64;
    let mean = counts.iter().sum::<f64>() / nf;
    if mean <= 0.0 {
        return Err(Error::Numeric("no events in any window".into()));
    }
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &c in &counts {
        let d = c - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let fano = variance / mean;
    // delta method for s^2 / mean
    let var_s2 = (m4 - m2 * m2) / nf;
    let var_mean = m2 / nf;
    let cov = m3 / nf;
    let var_f = var_s2 / (mean * mean) + variance * variance * var_mean / mean.powi(4)
        - 2.0 * variance * cov / mean.powi(3);
    let stderr = var_f.max(0.0).sqrt().max(f64::MIN_POSITIVE);
    Ok(FanoEstimate {
        window,
        mean_count: mean,
        variance,
        fano,
        stderr,
        n_windows: n,
    })
}

fn check_omega_grid(omega: &[f64]) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    if omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Domain(
            "periodogram frequencies must be finite and > 0".into(),
        ));
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn shortest_horizon(trajectories: &[EventTrajectory]) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::Domain("no trajectories".into()));
    }
    Ok(trajectories
        .iter()
        .map(|t| t.horizon)
        .fold(f64::INFINITY, f64::min))
}

/// Largest Bartlett segment count that keeps `min(omega)` above the guard.
pub fn max_segments(horizon: f64, omega_min: f64) -> usize {
    let cycles = horizon * omega_min / (2.0 * std::f64::consts::PI * GUARD_CYCLES);
    (cycles.floor() as usize).max(1)
}

/// Bartlett estimate of `S_r(Omega)/R` with the automatic segment count.
pub fn periodogram(trajectories: &[EventTrajectory], omega: &[f64]) -> Result<SpectralCurve> {
    check_omega_grid(omega)?;
    let horizon = shortest_horizon(trajectories)?;
    periodogram_with_segments(trajectories, omega, max_segments(horizon, omega[0]))
}

/// Bartlett point-process periodogram.
///
/// Every trajectory is cut into `segments` equal pieces of length `L`. For
/// each piece the event sum `X = sum_k exp(-i Omega t_k)` is compared with
/// its mean `R I`, `I = integral_0^L exp(-i Omega t) dt`, and
/// `|X - R I|^2 / (R L)` is averaged over all pieces. `R` is the pooled
/// event rate of the ensemble.
pub fn periodogram_with_segments(
    trajectories: &[EventTrajectory],
    omega: &[f64],
    segments: usize,
) -> Result<SpectralCurve> {
    check_omega_grid(omega)?;
    let horizon = shortest_horizon(trajectories)?;
    if segments == 0 {
        return Err(Error::Domain("segments must be >= 1".into()));
    }
    let seg_len = horizon / segments as f64;
    let guard = GUARD_CYCLES * 2.0 * std::f64::consts::PI / seg_len;
    if omega[0] < guard * (1.0 - 1e-12) {
        return Err(Error::Domain(format!(
            "lowest frequency {} is below the guard {guard} for segment length {seg_len}",
            omega[0]
        )));
    }
    let total_events: usize = trajectories
        .iter()
        .map(|t| {
            t.events
                .iter()
                .take_while(|&&e| e < seg_len * segments as f64)
                .count()
        })
        .sum();
    let total_time = seg_len * segments as f64 * trajectories.len() as f64;
    let rate = total_events as f64 / total_time;
    if rate <= 0.0 {
        return Err(Error::Numeric("ensemble contains no events".into()));
    }

    // mean lobe per frequency: (1 - e^{-i w L}) / (i w)
    let lobes: Vec<(f64, f64)> = omega
        .iter()
        .map(|&w| {
            let (s, c) = (w * seg_len).sin_cos();
            // (1 - c + i s) / (i w) = s/w + i (c - 1)/w
            (rate * s / w, rate * (c - 1.0) / w)
        })
        .collect();
    let norm = 1.0 / (rate * seg_len);

    // per-trajectory partial sums, reduced in order for thread-count independence
    let partials: Vec<Vec<(f64, f64)>> = trajectories
        .par_iter()
        .map(|traj| {
            let mut acc = vec![(0.0, 0.0); omega.len()];
            let mut start = 0usize;
            for k in 0..segments {
                let t0 = k as f64 * seg_len;
                let t1 = t0 + seg_len;
                let end = start + traj.events[start..].iter().take_while(|&&e| e < t1).count();
                let seg = &traj.events[start..end];
                for (j, &w) in omega.iter().enumerate() {
                    let (mut re, mut im) = (0.0, 0.0);
                    for &t in seg {
                        let (s, c) = (w * (t - t0)).sin_cos();
                        re += c;
                        im -= s;
                    }
                    let dr = re - lobes[j].0;
                    let di = im - lobes[j].1;
                    let v = (dr * dr + di * di) * norm;
                    acc[j].0 += v;
                    acc[j].1 += v * v;
                }
                start = end;
            }
            acc
        })
        .collect();

    let n = (segments * trajectories.len()) as f64;
    let mut values = Vec::with_capacity(omega.len());
    let mut stderr = Vec::with_capacity(omega.len());
    for j in 0..omega.len() {
        let (s1, s2) = partials
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[j].0, b + p[j].1));
        let mean = s1 / n;
        let var = if n > 1.0 {
            ((s2 - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        values.push(mean);
        stderr.push((var / n).sqrt());
    }
    Ok(SpectralCurve {
        omega: omega.to_vec(),
        values,
        stderr: Some(stderr),
        kind: SpectralKind::EstimatedJump,
    })
}
