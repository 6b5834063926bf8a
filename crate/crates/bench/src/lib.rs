//! Shared fixtures for the benchmarks under `benches/`.

use quietlaser_core::renewal::generate_ensemble;
use quietlaser_core::{EventLaw, EventTrajectory, RateParams};

/// Minimum-noise operating point, `a = 1/4`, unit mean waiting time.
pub fn quarter_point() -> RateParams {
    RateParams::new(1.25, 12.5f64.sqrt()).expect("valid parameters")
}

/// One representative per damping regime, labelled.
pub fn regimes() -> [(&'static str, RateParams); 3] {
    [
        (
            "overdamped",
            RateParams::new(2.0, 1.0).expect("valid parameters"),
        ),
        (
            "critical",
            RateParams::new(1.0, 1.0).expect("valid parameters"),
        ),
        ("underdamped", quarter_point()),
    ]
}

pub fn quarter_ensemble(count: usize, horizon: f64) -> Vec<EventTrajectory> {
    generate_ensemble(&EventLaw::Jump(quarter_point()), horizon, count, 17).expect("valid ensemble")
}
