//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used as an independent check on the closed-form moments, transforms and
//! cumulative distribution of the waiting-time law. Nothing in the evaluation
//! path of [`crate::analytics`] depends on it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// published 30-digit values, kept verbatim
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate is below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, abs_tol: f64) -> Result<Quadrature> {
    integrate_with_limit(f, lo, hi, abs_tol, 20_000)
}

pub fn integrate_with_limit<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::Domain(format!(
            "bad integration interval [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(gk15(&f, lo, hi));
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::Numeric("non-finite integrand".into()));
        }
        if error <= abs_tol {
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= max_intervals {
            return Err(Error::Numeric(format!(
                "quadrature did not reach {abs_tol:e} (estimate {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval can no longer be split; accept what we have
            heap.push(worst);
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            return Ok(Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        heap.push(gk15(&f, worst.lo, mid));
        heap.push(gk15(&f, mid, worst.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-13).unwrap();
        assert!((q.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let q = integrate(|x: f64| (-x).exp() * x.powi(4), 0.0, 60.0, 1e-12).unwrap();
        assert!((q.value - 24.0).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn oscillatory_integrand() {
        let q = integrate(|x: f64| x.sin(), 0.0, 10.0 * std::f64::consts::PI, 1e-12).unwrap();
        assert!(q.value.abs() < 1e-12);
    }

    #[test]
    fn bad_interval() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9).is_err());
    }
}
