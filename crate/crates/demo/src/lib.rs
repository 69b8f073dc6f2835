//! Browser bindings: FBN paths, the three continuous flows and the
//! admissible relaxation band, all returned as JSON strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fbsplit::flows::{newton_flow, prox_grad_flow, semigroup_flow, Admissibility, FlowConfig, Integrator};
use fbsplit::gallery::{gallery_entry, GalleryEntry};
use fbsplit::hilbert::{fbn_relaxation_bound, Vector};
use fbsplit::splitters::{run, StepPolicy, StopRule};
use fbsplit::trace::series;
use fbsplit::Trace;

/// Gallery problems that live in the plane.
pub const PLANAR: [&str; 3] = ["box-quadratic", "halfspace-nonunique", "rotation-residual"];

#[derive(Serialize)]
struct Path {
    label: String,
    points: Vec<[f64; 2]>,
    residual: Vec<f64>,
    converged: Option<bool>,
}

#[derive(Serialize)]
struct Scene {
    problem: String,
    beta: f64,
    reference: [f64; 2],
    paths: Vec<Path>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ErrorReply {
    error: String,
}

fn planar_entry(problem: &str) -> Result<GalleryEntry, String> {
    if !PLANAR.contains(&problem) {
        return Err(format!("'{problem}' is not a planar gallery problem"));
    }
    gallery_entry(problem).map_err(|e| e.to_string())
}

fn point(x: &Vector) -> [f64; 2] {
    [x[0], x[1]]
}

fn path(label: &str, trace: &Trace) -> Path {
    Path {
        label: label.to_string(),
        points: trace.states.iter().map(point).collect(),
        residual: trace.series(series::RESIDUAL).map(<[f64]>::to_vec).unwrap_or_default(),
        converged: trace.converged,
    }
}

fn reply<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&ErrorReply { error }),
    }
    .expect("plain data serializes")
}

/// FBN iterates from `(x0, y0)` with `mu = mu_factor * beta`.
pub fn fbn_scene(problem: &str, h: f64, mu_factor: f64, x0: f64, y0: f64, iters: usize) -> Result<String, String> {
    let e = planar_entry(problem)?;
    let beta = e.problem.beta();
    let policy = StepPolicy::fbn(h, mu_factor * beta, beta).map_err(|e| e.to_string())?;
    let start = Vector::from_slice(&[x0, y0]).map_err(|e| e.to_string())?;
    let trace = run(&e.problem, &policy, &start, &StopRule::new(1e-12, iters), None).map_err(|e| e.to_string())?;
    Ok(reply(Ok(Scene {
        problem: e.name.to_string(),
        beta,
        reference: point(&e.reference),
        paths: vec![path("fbn", &trace)],
        warnings: trace.warnings,
    })))
}

/// Newton, semigroup and proximal-gradient trajectories from a feasible
/// projection of `(x0, y0)`.
pub fn flows_scene(problem: &str, x0: f64, y0: f64, horizon: f64) -> Result<String, String> {
    let e = planar_entry(problem)?;
    let beta = e.problem.beta();
    let raw = Vector::from_slice(&[x0, y0]).map_err(|e| e.to_string())?;
    let start = e.problem.phi().prox(beta, &raw).map_err(|e| e.to_string())?;
    let dt = 0.01_f64.min(beta / 2.0);
    let every = ((horizon / dt) as usize / 400).max(1);
    let cfg = |m| FlowConfig::new(dt, horizon, m, every).map_err(|e| e.to_string());
    let newton = newton_flow(&e.problem, beta, &start, None, &cfg(Integrator::Rk4)?, None).map_err(|e| e.to_string())?;
    let semigroup = semigroup_flow(&e.problem, &start, &cfg(Integrator::ExplicitEuler)?, None, Admissibility::Enforce)
        .map_err(|e| e.to_string())?;
    let proxgrad = prox_grad_flow(&e.problem, beta, &start, &cfg(Integrator::Rk4)?, None, Admissibility::Enforce)
        .map_err(|e| e.to_string())?;
    Ok(reply(Ok(Scene {
        problem: e.name.to_string(),
        beta,
        reference: point(&e.reference),
        paths: vec![path("newton", &newton), path("semigroup", &semigroup), path("prox-grad", &proxgrad)],
        warnings: vec![],
    })))
}

#[derive(Serialize)]
struct Band {
    mu_over_beta: Vec<f64>,
    delta: Vec<f64>,
}

/// Upper relaxation bound `delta(mu)` sampled on `(0, 2 beta)`.
pub fn relaxation_band(samples: usize) -> String {
    let n = samples.max(2);
    let mut band = Band {
        mu_over_beta: Vec::with_capacity(n),
        delta: Vec::with_capacity(n),
    };
    for k in 1..=n {
        let m = 2.0 * k as f64 / (n + 1) as f64;
        band.mu_over_beta.push(m);
        band.delta.push(fbn_relaxation_bound(m, 1.0).expect("inside (0, 2)"));
    }
    reply(Ok(band))
}

#[wasm_bindgen(js_name = fbnPath)]
pub fn fbn_path(problem: &str, h: f64, mu_factor: f64, x0: f64, y0: f64, iters: u32) -> String {
    fbn_scene(problem, h, mu_factor, x0, y0, iters as usize).unwrap_or_else(|e| reply::<()>(Err(e)))
}

#[wasm_bindgen(js_name = flowPaths)]
pub fn flow_paths(problem: &str, x0: f64, y0: f64, horizon: f64) -> String {
    flows_scene(problem, x0, y0, horizon).unwrap_or_else(|e| reply::<()>(Err(e)))
}

#[wasm_bindgen(js_name = relaxationBand)]
pub fn relaxation_band_js(samples: u32) -> String {
    relaxation_band(samples as usize)
}
