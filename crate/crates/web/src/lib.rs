//! Browser bindings. Every exported function returns a JSON string; the
//! plain `*_json` versions are what the native tests exercise.

use dampwave::certificates::{auto_omega, certify_weight, construct_radial_subsolution, mu_formula, predicted_exponents, SamplingPlan};
use dampwave::energetics::energy;
use dampwave::support::build_q;
use dampwave::{make_power_law, Cadence, CoefficientField, Discretization, Grid, InitialData, InitialShape, PowerLawEnvelope, Profile, RunConfig, SourceField};
use serde_json::json;
use wasm_bindgen::prelude::*;

const N: usize = 3;
const DATA_RADIUS: f64 = 3.0;
const MAX_NODES: usize = 8192;

fn field(alpha: f64, beta: f64, gamma: f64) -> Result<CoefficientField, String> {
    let env = PowerLawEnvelope::with_exponents(alpha, beta, gamma);
    env.validate().map_err(|e| e.to_string())?;
    make_power_law(env, Profile::PurePower).map_err(|e| e.to_string())
}

fn setup(alpha: f64, beta: f64, gamma: f64, t_end: f64, nodes: usize) -> Result<(Discretization, InitialData, PowerLawEnvelope), String> {
    if !(t_end > 0.0 && t_end <= 2000.0) {
        return Err(format!("t_end = {t_end} outside (0, 2000]"));
    }
    if !(64..=MAX_NODES).contains(&nodes) {
        return Err(format!("nodes = {nodes} outside [64, {MAX_NODES}]"));
    }
    let f = field(alpha, beta, gamma)?;
    let support = build_q(&f.envelope, DATA_RADIUS).map_err(|e| e.to_string())?;
    let grid = Grid::sized_for(N, &support, t_end, nodes).map_err(|e| e.to_string())?;
    let op = Discretization::new(&grid, &f).map_err(|e| e.to_string())?;
    let data = InitialData::named(InitialShape::GaussianBump, 1.0, DATA_RADIUS, 0.0).map_err(|e| e.to_string())?;
    Ok((op, data, f.envelope))
}

/// Energy against time for a Gaussian bump, plus the predicted exponent.
pub fn simulate_decay_json(alpha: f64, beta: f64, gamma: f64, t_end: f64, nodes: usize) -> Result<String, String> {
    let (op, data, env) = setup(alpha, beta, gamma, t_end, nodes)?;
    let cfg = RunConfig {
        cfl: 0.5,
        t_end,
        cadence: Cadence::PerDecade { per_decade: 32, t_min: 0.5 },
    };
    let traj = dampwave::solver::run(&data, &op, &SourceField::zero(), &cfg).map_err(|e| e.to_string())?;
    let mut t = Vec::new();
    let mut e = Vec::new();
    for s in &traj.snapshots {
        t.push(s.t);
        e.push(energy(s, &op).map_err(|e| e.to_string())?);
    }
    let mu = mu_formula(&env).map_err(|e| e.to_string())?;
    Ok(json!({
        "t": t,
        "energy": e,
        "mu": mu,
        "predicted_exponent": predicted_exponents(mu, 0.0, 0).energy_k,
        "dt": traj.dt,
        "r_max": op.grid.r_max,
    })
    .to_string())
}

/// Radial profile `u(r, t)` at a single time.
pub fn solution_profile_json(alpha: f64, beta: f64, gamma: f64, t: f64, nodes: usize) -> Result<String, String> {
    let (op, data, env) = setup(alpha, beta, gamma, t.max(1e-9), nodes)?;
    let cfg = RunConfig {
        cfl: 0.5,
        t_end: t,
        cadence: Cadence::Uniform { interval: t.max(1e-9) },
    };
    let traj = dampwave::solver::run(&data, &op, &SourceField::zero(), &cfg).map_err(|e| e.to_string())?;
    let last = traj.snapshots.last().ok_or("no snapshot")?;
    let r: Vec<f64> = (0..op.grid.m).map(|i| op.grid.node(i)).collect();
    let support = build_q(&env, DATA_RADIUS).map_err(|e| e.to_string())?;
    Ok(json!({
        "t": last.t,
        "r": r,
        "u": last.u,
        "predicted_radius": support.predicted_radius(last.t),
    })
    .to_string())
}

/// Weight, subsolution and rate certificates for the given exponents.
pub fn certify_json(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<String, String> {
    let f = field(alpha, beta, gamma)?;
    let env = f.envelope;
    let support = build_q(&env, DATA_RADIUS).map_err(|e| e.to_string())?;
    let t_max = 400.0;
    let omega = auto_omega(&env).map_err(|e| e.to_string())?;
    let weight = certify_weight(&env, &f, &support, omega, omega + 1.0, 1.0, t_max, &SamplingPlan::default());
    let sub = construct_radial_subsolution(&f, N, delta, support.grid_radius(t_max)).map_err(|e| e.to_string())?;
    let mu = sub.mu_formula;
    let p = predicted_exponents(mu, delta, 1);
    let weight = match weight {
        Ok((w, rep)) => json!({ "omega": w.omega, "w0": w.w0, "t0": rep.t0, "pass": rep.pass }),
        Err(e) => json!({ "omega": omega, "error": e.to_string(), "pass": false }),
    };
    Ok(json!({
        "weight": weight,
        "mu": mu,
        "mu_numeric": sub.mu_numeric,
        "energy_exponents": [predicted_exponents(mu, delta, 0).energy_k, p.energy_k],
        "damping_exponent": p.damping,
        "linf_sq_exponent": p.linf_sq,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate_decay(alpha: f64, beta: f64, gamma: f64, t_end: f64, nodes: usize) -> Result<String, JsValue> {
    js(simulate_decay_json(alpha, beta, gamma, t_end, nodes))
}

#[wasm_bindgen]
pub fn solution_profile(alpha: f64, beta: f64, gamma: f64, t: f64, nodes: usize) -> Result<String, JsValue> {
    js(solution_profile_json(alpha, beta, gamma, t, nodes))
}

#[wasm_bindgen]
pub fn certify(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<String, JsValue> {
    js(certify_json(alpha, beta, gamma, delta))
}
