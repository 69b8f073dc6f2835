use std::fmt::Write as _;
use std::path::Path;
use std::thread;

use serde::Serialize;

use fbsplit::flows::{self, Admissibility, FlowConfig};
use fbsplit::gallery::{self, GalleryEntry};
use fbsplit::hilbert::sample_points;
use fbsplit::lyapunov::{Anchor, CERTIFICATION_TOL};
use fbsplit::splitters::{self, Scheme, StepPolicy, StopRule};
use fbsplit::trace::series;
use fbsplit::{Error, InclusionProblem, Result, Trace, Vector};

use crate::config::{ProblemSpec, RunConfig, RunKind};
use crate::inline::parse_problem;

pub const CSV_COLUMNS: [&str; 7] = [
    series::RESIDUAL,
    series::STEP_NORM_SQ,
    series::B_ERROR,
    series::A_K,
    series::GAMMA_Z,
    series::G_Z,
    series::K_Z,
];

pub struct Resolved {
    pub name: String,
    pub problem: InclusionProblem,
    pub anchor: Option<Anchor>,
    pub start: Vector,
}

pub fn resolve_problem(cfg: &RunConfig) -> Result<Resolved> {
    let (name, problem, reference, default_start) = match &cfg.problem {
        ProblemSpec::Gallery(name) => {
            let GalleryEntry {
                problem,
                reference,
                start,
                ..
            } = gallery::gallery_entry(name)?;
            (name.clone(), problem, Some(reference), start)
        }
        ProblemSpec::Inline { phi, operator } => {
            let p = parse_problem(phi, operator)?;
            let start = p.phi().prox_unchecked(1.0, &Vector::zeros(p.dim()));
            ("inline".to_string(), p, None, start)
        }
    };
    let reference = match &cfg.reference {
        Some(r) => Some(Vector::new(r.clone())?),
        None => reference,
    };
    let anchor = reference
        .map(|z| Anchor::certified(&problem, z, problem.beta(), CERTIFICATION_TOL))
        .transpose()?;
    let start = match (&cfg.x0, cfg.params.seed) {
        (Some(x0), _) => Vector::new(x0.clone())?,
        // seeded draw, mapped into the domain
        (None, Some(seed)) => {
            let raw = sample_points(problem.dim(), 1, 5.0, seed).remove(0);
            problem.phi().prox_unchecked(problem.beta(), &raw)
        }
        (None, None) => default_start,
    };
    problem.check_point(&start)?;
    Ok(Resolved {
        name,
        problem,
        anchor,
        start,
    })
}

fn admissibility(cfg: &RunConfig) -> Admissibility {
    if cfg.params.override_admissibility {
        Admissibility::Override
    } else {
        Admissibility::Enforce
    }
}

/// Builds the step policy for a splitter. In `shared` mode (compare) the
/// classical scheme takes the shared prox parameter as its step.
pub fn policy_for(scheme: Scheme, cfg: &RunConfig, beta: f64, shared: bool) -> Result<StepPolicy> {
    let p = &cfg.params;
    let mu = p.mu.unwrap_or(beta);
    let h = match scheme {
        Scheme::FbClassical if shared => mu,
        Scheme::FbClassical => p.h.or(p.mu).unwrap_or(beta),
        _ => p.h.unwrap_or(1.0),
    };
    StepPolicy::new(scheme, h, mu, beta, admissibility(cfg))
}

pub fn execute(kind: RunKind, cfg: &RunConfig, r: &Resolved, shared: bool) -> Result<Trace> {
    let p = &cfg.params;
    let beta = r.problem.beta();
    let anchor = r.anchor.as_ref();
    let mu = p.mu.unwrap_or(beta);
    let flow_cfg = |dt: f64| FlowConfig::new(dt, p.horizon, p.method, p.record_every);
    let mut trace = match kind {
        RunKind::Splitter(scheme) => {
            let policy = policy_for(scheme, cfg, beta, shared)?;
            let stop = StopRule::new(p.tol, p.max_iters).record_every(p.record_every);
            return splitters::run(&r.problem, &policy, &r.start, &stop, anchor);
        }
        RunKind::NewtonFlow => flows::newton_flow(&r.problem, mu, &r.start, None, &flow_cfg(p.dt.unwrap_or(0.01))?, anchor)?,
        RunKind::SemigroupFlow => {
            let dt = p.dt.unwrap_or(0.01_f64.min(beta));
            flows::semigroup_flow(&r.problem, &r.start, &flow_cfg(dt)?, anchor, admissibility(cfg))?
        }
        RunKind::ProxGradFlow => {
            flows::prox_grad_flow(&r.problem, mu, &r.start, &flow_cfg(p.dt.unwrap_or(0.01))?, anchor, admissibility(cfg))?
        }
    };
    trace.converged = Some(trace.last(series::RESIDUAL).is_some_and(|res| res <= p.tol));
    Ok(trace)
}

fn fmt_value(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        String::new()
    } else {
        x.to_string()
    }
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("index");
    for c in CSV_COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for j in 0..trace.len() {
        let _ = write!(out, "{}", trace.index[j]);
        for c in CSV_COLUMNS {
            out.push(',');
            if let Some(s) = trace.series(c) {
                out.push_str(&fmt_value(s[j]));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub problem: String,
    pub scheme: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub limit: Vec<f64>,
    pub b_limit: Vec<f64>,
    pub warnings: Vec<String>,
}

pub fn summarize(kind: RunKind, r: &Resolved, trace: &Trace) -> Summary {
    let limit = trace.last_state().cloned().unwrap_or_else(|| r.start.clone());
    Summary {
        problem: r.name.clone(),
        scheme: kind.to_string(),
        converged: trace.converged.unwrap_or(false),
        iterations: trace.steps,
        final_residual: trace.last(series::RESIDUAL).unwrap_or(f64::NAN),
        b_limit: r.problem.operator().apply(&limit).to_vec(),
        limit: limit.to_vec(),
        warnings: trace.warnings.clone(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

/// Runs the single configured scheme. Returns the summary; files are
/// written when paths are configured.
pub fn cmd_solve(cfg: &RunConfig) -> Result<Summary> {
    let kind = match cfg.schemes.as_slice() {
        [k] => *k,
        _ => return Err(Error::InvalidInput("solve takes exactly one scheme".into())),
    };
    let r = resolve_problem(cfg)?;
    let trace = execute(kind, cfg, &r, false)?;
    let summary = summarize(kind, &r, &trace);
    if let Some(path) = &cfg.csv {
        write_file(path, &trace_csv(&trace))?;
    }
    if let Some(path) = &cfg.json {
        write_file(path, &to_json(&summary))?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub scheme: String,
    pub converged: bool,
    /// Iterations (steps for flows) to reach the tolerance.
    pub iterations: usize,
    pub final_residual: f64,
    pub b_limit: Vec<f64>,
    pub csv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub problem: String,
    pub rows: Vec<CompareRow>,
    pub skipped: Vec<String>,
    /// Largest pairwise distance between the final B-images.
    pub b_agreement: f64,
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareReport> {
    let out_dir = cfg
        .out_dir
        .clone()
        .ok_or_else(|| Error::InvalidInput("compare needs an output directory".into()))?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", out_dir.display())))?;
    let r = resolve_problem(cfg)?;
    let results: Vec<(RunKind, Result<Trace>)> = thread::scope(|s| {
        let handles: Vec<_> = cfg
            .schemes
            .iter()
            .map(|&k| {
                let r = &r;
                (k, s.spawn(move || execute(k, cfg, r, true)))
            })
            .collect();
        handles
            .into_iter()
            .map(|(k, h)| (k, h.join().expect("solver thread panicked")))
            .collect()
    });
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (kind, res) in results {
        match res {
            Ok(trace) => {
                let file = format!("{kind}.csv");
                write_file(&out_dir.join(&file), &trace_csv(&trace))?;
                let s = summarize(kind, &r, &trace);
                rows.push(CompareRow {
                    scheme: s.scheme,
                    converged: s.converged,
                    iterations: s.iterations,
                    final_residual: s.final_residual,
                    b_limit: s.b_limit,
                    csv: file,
                });
            }
            Err(e @ Error::Inadmissible(_)) => skipped.push(format!("{kind}: {e}")),
            Err(e) => return Err(e),
        }
    }
    let mut b_agreement = 0.0_f64;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let d = a
                .b_limit
                .iter()
                .zip(&b.b_limit)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            b_agreement = b_agreement.max(d);
        }
    }
    let report = CompareReport {
        problem: r.name,
        rows,
        skipped,
        b_agreement,
    };
    write_file(&out_dir.join("compare.json"), &to_json(&report))?;
    Ok(report)
}

pub fn cmd_list(filter: Option<&str>) -> String {
    let mut out = format!("{:<22} {:>4}  {:<10} {}\n", "name", "dim", "solutions", "stresses");
    for e in gallery::builtin_gallery() {
        if filter.is_some_and(|f| !e.name.contains(f)) {
            continue;
        }
        let mult = if e.unique { "unique" } else { "multiple" };
        let _ = writeln!(out, "{:<22} {:>4}  {:<10} {}", e.name, e.dim(), mult, e.hypothesis);
        let _ = writeln!(out, "{:<22}       {}", "", e.notes);
    }
    out
}
