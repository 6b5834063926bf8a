use std::process::ExitCode;

use serde_json::{json, Value};

use quietlaser_core::analytics::{analytic_spectrum, mean_waiting_time, ClosedLoopNoise};
use quietlaser_core::design::{designs_from_steady_state, reference_design, steady_state_solve};
use quietlaser_core::renewal::{
    fano_factor, generate_ensemble, periodogram, short_horizon_warning,
};
use quietlaser_core::validation::{self, ValidationOptions};
use quietlaser_core::{Error, EventLaw, FrequencyGrid, RateParams};

use crate::output::{human, spectrum_csv, with_unit, write_json, write_text, RunHeader};
use crate::{exit, AnalyticArgs, DesignArgs, SimulateArgs, ValidateArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    NoSteadyState(String),
    Validation(String),
    Runtime(String),
}

impl Failure {
    pub fn report(self) -> ExitCode {
        let (msg, code) = match self {
            Failure::Usage(m) => (m, exit::USAGE),
            Failure::NoSteadyState(m) => (m, exit::NO_STEADY_STATE),
            Failure::Validation(m) => (m, exit::VALIDATION_FAILED),
            // I/O and numerical breakdowns share the generic failure code
            Failure::Runtime(m) => (m, exit::VALIDATION_FAILED),
        };
        eprintln!("error: {msg}");
        ExitCode::from(code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoSteadyState { .. } => Failure::NoSteadyState(e.to_string()),
            Error::Numeric(_) | Error::StepUnderflow { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Applies QUIETLASER_THREADS to the global pool; returns the value to echo.
pub fn configure_threads() -> Result<String, Failure> {
    let Ok(raw) = std::env::var("QUIETLASER_THREADS") else {
        return Ok("auto".into());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Usage(format!(
            "QUIETLASER_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(n.to_string())
}

fn grid_or(
    grid: Option<FrequencyGrid>,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<FrequencyGrid, Failure> {
    match grid {
        Some(g) => Ok(g),
        None => Ok(FrequencyGrid::log(lo, hi, count)?),
    }
}

pub fn analytic(args: AnalyticArgs, threads: String) -> Result<(), Failure> {
    let params = RateParams::new(args.gamma, args.rabi)?;
    let grid = grid_or(args.omega_grid, 0.01 * args.gamma, 100.0 * args.gamma, 200)?;
    let mut header = RunHeader::new("analytic", threads);
    header.set("gamma", args.gamma);
    header.set("rabi", args.rabi);
    header.set("omega_grid", grid);

    let curve = analytic_spectrum(&params, &grid.points())?;
    let noise = ClosedLoopNoise::new(&params);
    let summary = json!({
        "regime": params.regime(),
        "a": params.a(),
        "mean_tau": mean_waiting_time(&params),
        "fano0": noise.jump_level,
        "A": noise.feedback_gain,
        "detected_level": noise.detected_level,
    });
    write_text(
        &args.out_dir,
        "spectrum.csv",
        &spectrum_csv(&header, &curve),
    )?;
    write_json(&args.out_dir, "summary.json", &header.wrap(summary))?;

    println!("a               {}", human(params.a()));
    println!("mean_tau        {}", human(mean_waiting_time(&params)));
    println!("fano0           {}", human(noise.jump_level));
    println!("A               {}", human(noise.feedback_gain));
    println!("detected_level  {}", human(noise.detected_level));
    Ok(())
}

pub fn simulate(args: SimulateArgs, threads: String) -> Result<(), Failure> {
    let params = RateParams::new(args.gamma, args.rabi)?;
    if args.trajectories == 0 {
        return Err(Failure::Usage("--trajectories must be >= 1".into()));
    }
    let law = if args.poisson_control {
        EventLaw::poisson(params.mean_rate())?
    } else {
        EventLaw::Jump(params)
    };
    let grid = grid_or(args.omega_grid, 0.1 * args.gamma, 10.0 * args.gamma, 40)?;
    let seed = args.seed.unwrap_or_else(rand::random);

    let mut header = RunHeader::new("simulate", threads);
    header.set("gamma", args.gamma);
    header.set("rabi", args.rabi);
    header.set(
        "law",
        if args.poisson_control {
            "poisson"
        } else {
            "jump"
        },
    );
    header.set("trajectories", args.trajectories);
    header.set("horizon", args.horizon);
    header.set("window", args.window);
    header.set("omega_grid", grid);
    header.seed = Some(seed);

    if let Some(w) = short_horizon_warning(&law, args.horizon) {
        eprintln!("warning: {w}");
    }
    let ensemble = generate_ensemble(&law, args.horizon, args.trajectories, seed)?;
    let curve = periodogram(&ensemble, &grid.points())?;
    let fano = fano_factor(&ensemble, args.window)?;
    let events: usize = ensemble.iter().map(|t| t.len()).sum();

    let body = json!({
        "fano": fano.fano,
        "stderr": fano.stderr,
        "window": fano.window,
        "mean_count": fano.mean_count,
        "variance": fano.variance,
        "n_windows": fano.n_windows,
        "events": events,
        "expected_fano0": match law {
            EventLaw::Jump(p) => ClosedLoopNoise::new(&p).jump_level,
            EventLaw::Poisson { .. } => 1.0,
        },
    });
    write_text(
        &args.out_dir,
        "spectrum.csv",
        &spectrum_csv(&header, &curve),
    )?;
    write_json(&args.out_dir, "fano.json", &header.wrap(body))?;

    println!("seed       {seed}");
    println!("events     {events}");
    println!("windows    {}", fano.n_windows);
    println!("fano       {} +- {}", human(fano.fano), human(fano.stderr));
    Ok(())
}

fn steady_state_json(args: &DesignArgs, pump_rate: f64, volume: f64) -> Result<Value, Failure> {
    let ss = steady_state_solve(pump_rate, args.tau_p, volume)?;
    let designs = designs_from_steady_state(args.nu, pump_rate, args.tau_p, volume)?;
    let roots: Vec<Value> = ss
        .roots
        .iter()
        .zip(&designs)
        .map(|(r, d)| {
            let mut quantities = serde_json::Map::new();
            for (name, value, unit) in d.quantities() {
                quantities.insert(name.into(), with_unit(value, unit));
            }
            json!({
                "gamma": with_unit(r.gamma, "1/s"),
                "gamma_tau_p": r.gamma * args.tau_p,
                "a": r.a,
                "detected_level": r.detected_level,
                "design": quantities,
            })
        })
        .collect();
    Ok(json!({
        "steady_state": {
            "pump_rate": with_unit(ss.pump_rate, "1/s"),
            "tau_p": with_unit(ss.tau_p, "s"),
            "volume": with_unit(ss.volume, "m^3"),
            "mu": with_unit(ss.mu, "1"),
            "rabi": with_unit(ss.rabi, "rad/s"),
        },
        "root_count": roots.len(),
        "roots": roots,
    }))
}

pub fn design(args: DesignArgs, threads: String) -> Result<(), Failure> {
    let mut header = RunHeader::new("design", threads);
    let (pump_rate, volume) = if args.paper_example {
        let d = reference_design(args.tau_p, args.nu)?;
        header.set("preset", "minimum_noise_one_photon");
        (d.pump_rate, d.volume)
    } else {
        // clap guarantees both are present without the preset
        (
            args.pump_rate.unwrap_or(f64::NAN),
            args.volume.unwrap_or(f64::NAN),
        )
    };
    header.set("pump_rate", pump_rate);
    header.set("tau_p", args.tau_p);
    header.set("volume", volume);
    header.set("nu", args.nu);

    let body = steady_state_json(&args, pump_rate, volume)?;
    write_json(&args.out_dir, "design.json", &header.wrap(body.clone()))?;

    for root in body["roots"].as_array().into_iter().flatten() {
        let g = root["gamma_tau_p"].as_f64().unwrap_or(f64::NAN);
        let level = root["detected_level"].as_f64().unwrap_or(f64::NAN);
        let d = &root["design"];
        println!("gamma*tau_p {}  detected_level {}", human(g), human(level));
        for key in [
            "d",
            "volume_over_tau_p_sq",
            "sqrt_area",
            "capacitance",
            "inductance",
        ] {
            let v = d[key]["value"].as_f64().unwrap_or(f64::NAN);
            let unit = d[key]["unit"].as_str().unwrap_or("");
            println!("  {key:<22}{} {unit}", human(v));
        }
    }
    Ok(())
}

pub fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let outcomes = validation::run(ValidationOptions {
        quick: args.quick,
        inject_fault: args.inject_fault,
        seed: args.seed,
    });
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    println!(
        "{:<width$}  {:>12}  {:>12}  result",
        "check", "value", "threshold"
    );
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "{:<width$}  {:>12}  {:>12}  {tag}",
            o.name,
            human(o.value),
            human(o.threshold)
        );
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name.as_str())
        .collect();
    println!(
        "{} passed, {} failed",
        outcomes.len() - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!(
            "failed: {}",
            failed.join(", ")
        )))
    }
}
