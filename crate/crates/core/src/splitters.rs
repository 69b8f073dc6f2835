//! Discrete splitting schemes for `0 in subdiff(phi)(x) + B(x)`.
//!
//! * FBN: `y_{k+1} = (1 - h) y_k + h (x_k - mu B x_k)`, `x_k = prox_{mu phi}(y_k)`;
//! * classical forward-backward: `x_{k+1} = prox_{h phi}(x_k - h B x_k)`;
//! * relaxed forward-backward:
//!   `x_{k+1} = (1 - h) x_k + h prox_{mu phi}(x_k - mu B x_k)`.
//!
//! Steps are pure functions of `(problem, policy, state)`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::flows::Admissibility;
use crate::hilbert::{fbn_relaxation_bound, Vector};
use crate::lyapunov::{self, Anchor};
use crate::problem::InclusionProblem;
use crate::trace::{series, Sample, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Fbn,
    FbClassical,
    FbRelaxed,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Fbn, Scheme::FbClassical, Scheme::FbRelaxed];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fbn => "fbn",
            Scheme::FbClassical => "fb-classical",
            Scheme::FbRelaxed => "fb-relaxed",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

/// Describes the bound violated by `(h, mu)` for `scheme`, if any.
pub fn admissibility_violation(scheme: Scheme, h: f64, mu: f64, beta: f64) -> Option<String> {
    match scheme {
        Scheme::Fbn => match fbn_relaxation_bound(mu, beta) {
            Err(Error::Inadmissible(msg)) => Some(msg),
            Err(e) => Some(e.to_string()),
            Ok(delta) if h >= delta => Some(format!(
                "h={h} >= δ={delta} per Hypothesis H (0 < h < δ = 1/2 + min(1, beta/mu), beta={beta}, mu={mu})"
            )),
            Ok(_) => None,
        },
        Scheme::FbClassical => (h >= 2.0 * beta).then(|| {
            format!(
                "h={h} >= 2*beta={}: the classical forward-backward step requires 0 < h < 2 beta",
                2.0 * beta
            )
        }),
        Scheme::FbRelaxed => {
            if mu >= 2.0 * beta {
                Some(format!(
                    "mu={mu} >= 2*beta={}: the relaxed forward-backward scheme requires 0 < mu < 2 beta",
                    2.0 * beta
                ))
            } else if h > 1.0 {
                Some(format!(
                    "h={h} > 1: the relaxed forward-backward scheme requires 0 < h <= 1"
                ))
            } else {
                None
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPolicy {
    pub scheme: Scheme,
    pub h: f64,
    /// Prox parameter; equals `h` for the classical scheme.
    pub mu: f64,
    /// Violated bound when built with [`Admissibility::Override`].
    pub warning: Option<String>,
}

impl StepPolicy {
    pub fn new(scheme: Scheme, h: f64, mu: f64, beta: f64, admissibility: Admissibility) -> Result<Self> {
        ensure_positive("h", h)?;
        let mu = if scheme == Scheme::FbClassical { h } else { mu };
        ensure_positive("mu", mu)?;
        ensure_positive("beta", beta)?;
        let warning = match (admissibility_violation(scheme, h, mu, beta), admissibility) {
            (None, _) => None,
            (Some(msg), Admissibility::Enforce) => return Err(Error::Inadmissible(msg)),
            (Some(msg), Admissibility::Override) => Some(msg),
        };
        Ok(Self {
            scheme,
            h,
            mu,
            warning,
        })
    }

    pub fn fbn(h: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::new(Scheme::Fbn, h, mu, beta, Admissibility::Enforce)
    }

    pub fn fb_classical(h: f64, beta: f64) -> Result<Self> {
        Self::new(Scheme::FbClassical, h, h, beta, Admissibility::Enforce)
    }

    pub fn fb_relaxed(h: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::new(Scheme::FbRelaxed, h, mu, beta, Admissibility::Enforce)
    }

    /// Builds the policy even if `(h, mu)` is outside the proven region.
    pub fn unchecked(scheme: Scheme, h: f64, mu: f64, beta: f64) -> Result<Self> {
        Self::new(scheme, h, mu, beta, Admissibility::Override)
    }

    pub fn prox_parameter(&self) -> f64 {
        self.mu
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverState {
    pub k: usize,
    pub x: Vector,
    /// Lifted variable, FBN only. `x = prox_{mu phi}(y)`.
    pub y: Option<Vector>,
    /// Subgradient of `phi` at `prox_point`.
    pub v: Vector,
    /// Equal to `x` except for the relaxed scheme, where it is the inner
    /// prox point of the last step.
    pub prox_point: Vector,
    pub residual: f64,
}

impl SolverState {
    /// Starting state. For FBN `y0 = x0 + mu v0` with `v0` the minimal norm
    /// subgradient at `x0` (or `y0 = x0` outside the domain).
    pub fn initial(problem: &InclusionProblem, policy: &StepPolicy, x0: &Vector) -> Result<Self> {
        problem.check_point(x0)?;
        if !x0.is_finite() {
            return Err(Error::InvalidInitialCondition("x0 must be finite".into()));
        }
        let phi = problem.phi();
        let mu = policy.mu;
        let v0 = phi.min_norm_subgradient(x0);
        if policy.scheme == Scheme::Fbn {
            let y0 = match &v0 {
                Some(v) => x0.add_scaled(mu, v),
                None => x0.clone(),
            };
            return Ok(Self::from_y(problem, policy, y0));
        }
        let (prox_point, v) = match v0 {
            Some(v) => (x0.clone(), v),
            None => {
                let w = x0.add_scaled(-mu, &problem.operator().apply(x0));
                let p = phi.prox_unchecked(mu, &w);
                let v = (&w - &p) * (1.0 / mu);
                (p, v)
            }
        };
        Ok(Self {
            k: 0,
            residual: problem.residual_unchecked(mu, x0),
            x: x0.clone(),
            y: None,
            v,
            prox_point,
        })
    }

    /// FBN state with the given lifted variable.
    pub fn from_y(problem: &InclusionProblem, policy: &StepPolicy, y: Vector) -> Self {
        let mu = policy.mu;
        let x = problem.phi().prox_unchecked(mu, &y);
        let v = (&y - &x) * (1.0 / mu);
        Self {
            k: 0,
            residual: problem.residual_unchecked(mu, &x),
            prox_point: x.clone(),
            x,
            y: Some(y),
            v,
        }
    }
}

fn expect_scheme(policy: &StepPolicy, scheme: Scheme) -> Result<()> {
    if policy.scheme == scheme {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{scheme} step called with a {} policy",
            policy.scheme
        )))
    }
}

fn fbn_advance(problem: &InclusionProblem, mu: f64, h: f64, s: &SolverState) -> Result<SolverState> {
    let y = s
        .y
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("FBN state has no lifted variable".into()))?;
    let w = s.x.add_scaled(-mu, &problem.operator().apply(&s.x));
    let y_next = y.lerp(&w, h);
    let x = problem.phi().prox_unchecked(mu, &y_next);
    let v = (&y_next - &x) * (1.0 / mu);
    Ok(SolverState {
        k: s.k + 1,
        residual: problem.residual_unchecked(mu, &x),
        prox_point: x.clone(),
        x,
        y: Some(y_next),
        v,
    })
}

pub fn fbn_step(problem: &InclusionProblem, policy: &StepPolicy, s: &SolverState) -> Result<SolverState> {
    expect_scheme(policy, Scheme::Fbn)?;
    fbn_advance(problem, policy.mu, policy.h, s)
}

pub fn fb_step(problem: &InclusionProblem, policy: &StepPolicy, s: &SolverState) -> Result<SolverState> {
    expect_scheme(policy, Scheme::FbClassical)?;
    let h = policy.h;
    let w = s.x.add_scaled(-h, &problem.operator().apply(&s.x));
    let x = problem.phi().prox_unchecked(h, &w);
    let v = (&w - &x) * (1.0 / h);
    Ok(SolverState {
        k: s.k + 1,
        residual: problem.residual_unchecked(h, &x),
        prox_point: x.clone(),
        x,
        y: None,
        v,
    })
}

pub fn relaxed_fb_step(problem: &InclusionProblem, policy: &StepPolicy, s: &SolverState) -> Result<SolverState> {
    expect_scheme(policy, Scheme::FbRelaxed)?;
    let mu = policy.mu;
    let w = s.x.add_scaled(-mu, &problem.operator().apply(&s.x));
    let p = problem.phi().prox_unchecked(mu, &w);
    let v = (&w - &p) * (1.0 / mu);
    let x = s.x.lerp(&p, policy.h);
    Ok(SolverState {
        k: s.k + 1,
        residual: problem.residual_unchecked(mu, &x),
        x,
        y: None,
        v,
        prox_point: p,
    })
}

pub fn step(problem: &InclusionProblem, policy: &StepPolicy, s: &SolverState) -> Result<SolverState> {
    match policy.scheme {
        Scheme::Fbn => fbn_step(problem, policy, s),
        Scheme::FbClassical => fb_step(problem, policy, s),
        Scheme::FbRelaxed => relaxed_fb_step(problem, policy, s),
    }
}

/// `|x - prox_{mu phi}(x - mu B x)|`.
pub fn residual(problem: &InclusionProblem, mu: f64, x: &Vector) -> Result<f64> {
    problem.residual(mu, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub tol: f64,
    pub max_iters: usize,
    pub record_every: usize,
}

impl StopRule {
    pub fn new(tol: f64, max_iters: usize) -> Self {
        Self {
            tol,
            max_iters,
            record_every: 1,
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every.max(1);
        self
    }
}

struct Recorder<'a> {
    problem: &'a InclusionProblem,
    mu: f64,
    anchor: Option<&'a Anchor>,
    trace: Trace,
    step_sq: f64,
    y_step_sq: f64,
}

impl<'a> Recorder<'a> {
    fn new(problem: &'a InclusionProblem, mu: f64, anchor: Option<&'a Anchor>, warning: Option<&String>) -> Self {
        let mut trace = Trace::default();
        trace.warnings.extend(warning.map(|w| format!("admissibility overridden: {w}")));
        Self {
            problem,
            mu,
            anchor,
            trace,
            step_sq: 0.0,
            y_step_sq: 0.0,
        }
    }

    fn accumulate(&mut self, prev: &SolverState, next: &SolverState) {
        self.step_sq += (&next.x - &prev.x).norm_squared();
        if let (Some(a), Some(b)) = (&prev.y, &next.y) {
            self.y_step_sq += (b - a).norm_squared();
        }
    }

    fn record(&mut self, s: &SolverState) {
        let phi = self.problem.phi();
        let mu = self.mu;
        let mut values = vec![(series::RESIDUAL, s.residual)];
        if s.k > 0 {
            values.push((series::STEP_NORM_SQ, self.step_sq));
            if s.y.is_some() {
                values.push((series::Y_STEP_NORM_SQ, self.y_step_sq));
            }
        }
        self.step_sq = 0.0;
        self.y_step_sq = 0.0;
        if let Some(a) = self.anchor {
            let bx = self.problem.operator().apply(&s.x);
            let p = &s.prox_point;
            let gamma = lyapunov::gamma_z_raw(p, &s.v, a, mu, phi);
            values.extend([
                (series::B_ERROR, (&bx - &a.bz).norm()),
                (series::A_K, lyapunov::a_k_raw(p, &s.v, a, mu, phi)),
                (series::GAMMA_Z, gamma),
                (series::G_Z, lyapunov::g_z_raw(p, &s.v, a, phi)),
                (series::K_Z, lyapunov::k_z(&s.x, a, phi)),
                (series::DUAL_ERROR, (&s.v + &a.bz).norm()),
            ]);
            if let Some(y) = &s.y {
                let mut d = y - &s.x;
                d += &(&a.bz * mu);
                values.push((series::Y_MINUS_X_ERROR, d.norm()));
            }
        }
        let mut vectors = Vec::new();
        if let Some(y) = &s.y {
            vectors.push(("y", y.clone()));
        }
        if s.y.is_none() && s.prox_point != s.x {
            vectors.push(("prox_point", s.prox_point.clone()));
        }
        self.trace.push(Sample {
            index: s.k as f64,
            state: s.x.clone(),
            dual: Some(s.v.clone()),
            vectors,
            values,
        });
    }
}

fn drive(
    problem: &InclusionProblem,
    mu: f64,
    warning: Option<&String>,
    start: SolverState,
    stop: &StopRule,
    anchor: Option<&Anchor>,
    mut advance: impl FnMut(&SolverState) -> Result<SolverState>,
) -> Result<Trace> {
    let mut rec = Recorder::new(problem, mu, anchor, warning);
    let mut s = start;
    rec.record(&s);
    let every = stop.record_every.max(1);
    while s.residual > stop.tol && s.k < stop.max_iters {
        let next = advance(&s)?;
        rec.accumulate(&s, &next);
        s = next;
        let done = s.residual <= stop.tol || s.k >= stop.max_iters || !s.residual.is_finite();
        if s.k.is_multiple_of(every) || done {
            rec.record(&s);
        }
        if !s.residual.is_finite() {
            rec.trace.warnings.push(format!("iterates diverged at k={}", s.k));
            break;
        }
    }
    rec.trace.steps = s.k;
    rec.trace.converged = Some(s.residual <= stop.tol);
    Ok(rec.trace)
}

/// Iterates from `x0` until the residual (probe `mu` of the policy) drops
/// to `stop.tol` or `stop.max_iters` steps were taken. Non-convergence is
/// reported through `Trace::converged`, never as an error.
pub fn run(
    problem: &InclusionProblem,
    policy: &StepPolicy,
    x0: &Vector,
    stop: &StopRule,
    anchor: Option<&Anchor>,
) -> Result<Trace> {
    let start = SolverState::initial(problem, policy, x0)?;
    run_from(problem, policy, start, stop, anchor)
}

pub fn run_from(
    problem: &InclusionProblem,
    policy: &StepPolicy,
    start: SolverState,
    stop: &StopRule,
    anchor: Option<&Anchor>,
) -> Result<Trace> {
    drive(problem, policy.mu, policy.warning.as_ref(), start, stop, anchor, |s| {
        step(problem, policy, s)
    })
}

/// FBN with a step-dependent relaxation `h_k = schedule(k)`, each required
/// to satisfy `eps <= h_k <= delta - eps`.
pub fn run_fbn_varying(
    problem: &InclusionProblem,
    mu: f64,
    schedule: impl Fn(usize) -> f64,
    eps: f64,
    x0: &Vector,
    stop: &StopRule,
    anchor: Option<&Anchor>,
) -> Result<Trace> {
    ensure_positive("eps", eps)?;
    let delta = fbn_relaxation_bound(mu, problem.beta())?;
    if 2.0 * eps >= delta {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            reason: format!("band [eps, delta - eps] is empty for delta = {delta}"),
        });
    }
    let base = StepPolicy::fbn(1.0, mu, problem.beta())?;
    let start = SolverState::initial(problem, &base, x0)?;
    drive(problem, mu, None, start, stop, anchor, |s| {
        let h = schedule(s.k);
        if !(h >= eps && h <= delta - eps) {
            return Err(Error::Inadmissible(format!(
                "h_{}={h} outside [eps, δ - eps] = [{eps}, {}] per Hypothesis H",
                s.k,
                delta - eps
            )));
        }
        fbn_advance(problem, mu, h, s)
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use nalgebra::DMatrix;

    use super::*;
    use crate::hilbert::{HalfspaceIndicator, LinearOperator, ZeroFunction};

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    fn identity_problem() -> InclusionProblem {
        InclusionProblem::new(Arc::new(ZeroFunction::new(1)), Arc::new(LinearOperator::identity(1))).unwrap()
    }

    fn halfspace_problem() -> InclusionProblem {
        InclusionProblem::new(
            Arc::new(HalfspaceIndicator::new(v(&[-1.0, 0.0]), -1.0).unwrap()),
            Arc::new(
                LinearOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), Vector::zeros(2))
                    .unwrap(),
            ),
        )
        .unwrap()
    }

    #[test]
    fn fbn_hand_iteration() {
        let p = identity_problem();
        let pol = StepPolicy::fbn(1.0, 1.0, 1.0).unwrap();
        let s0 = SolverState::from_y(&p, &pol, v(&[5.0]));
        assert_eq!(s0.x[0], 5.0);
        let s1 = fbn_step(&p, &pol, &s0).unwrap();
        assert_eq!(s1.y.as_ref().unwrap()[0], 0.0);
        assert_eq!(s1.x[0], 0.0);
        assert_eq!(s1.residual, 0.0);
    }

    #[test]
    fn fbn_fixed_point() {
        let p = halfspace_problem();
        let pol = StepPolicy::fbn(1.2, 0.5, 1.0).unwrap();
        let z = v(&[1.0, 3.0]);
        let y0 = z.add_scaled(-0.5, &p.operator().apply(&z));
        let s0 = SolverState::from_y(&p, &pol, y0.clone());
        let s1 = fbn_step(&p, &pol, &s0).unwrap();
        assert!(s1.y.unwrap().max_abs_diff(&y0) < 1e-15);
    }

    #[test]
    fn fb_hand_iterations() {
        let p = identity_problem();
        let s0 = SolverState::initial(&p, &StepPolicy::fb_classical(1.0, 1.0).unwrap(), &v(&[5.0])).unwrap();
        let s1 = fb_step(&p, &StepPolicy::fb_classical(1.0, 1.0).unwrap(), &s0).unwrap();
        assert_eq!(s1.x[0], 0.0);
        let rel = StepPolicy::fb_relaxed(0.5, 1.0, 1.0).unwrap();
        let s0 = SolverState::initial(&p, &rel, &v(&[4.0])).unwrap();
        let s1 = relaxed_fb_step(&p, &rel, &s0).unwrap();
        assert_eq!(s1.x[0], 2.0);
    }

    #[test]
    fn residual_examples() {
        let p = identity_problem();
        assert_eq!(residual(&p, 1.0, &v(&[3.0])).unwrap(), 3.0);
        let h = halfspace_problem();
        assert_eq!(residual(&h, 1.0, &v(&[1.0, 7.0])).unwrap(), 0.0);
        assert!(residual(&h, 1.0, &v(&[1.0])).is_err());
    }

    #[test]
    fn h_one_recovers_classical_step() {
        let p = halfspace_problem();
        let fbn = StepPolicy::fbn(1.0, 0.7, 1.0).unwrap();
        let fb = StepPolicy::fb_classical(0.7, 1.0).unwrap();
        let stop = StopRule::new(0.0, 200);
        let a = run(&p, &fbn, &v(&[4.0, -2.0]), &stop, None).unwrap();
        let b = run(&p, &fb, &a.states[0], &stop, None).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn admissibility_bounds() {
        assert!(StepPolicy::fbn(1.49, 1.0, 1.0).is_ok());
        let e = StepPolicy::fbn(1.5, 1.0, 1.0).unwrap_err().to_string();
        assert!(e.contains("δ=1.5") && e.contains("Hypothesis H"), "{e}");
        assert!(StepPolicy::fbn(0.5, 2.0, 1.0).is_err());
        assert!(StepPolicy::fb_classical(2.0, 1.0).is_err());
        assert!(StepPolicy::fb_relaxed(1.01, 1.0, 1.0).is_err());
        assert!(StepPolicy::fb_relaxed(1.0, 2.0, 1.0).is_err());
        assert!(StepPolicy::fb_relaxed(1.0, 1.9, 1.0).is_ok());
        let forced = StepPolicy::unchecked(Scheme::Fbn, 1.8, 1.0, 1.0).unwrap();
        assert!(forced.warning.is_some());
        assert!(StepPolicy::fbn(0.0, 1.0, 1.0).is_err());
        assert!(StepPolicy::unchecked(Scheme::Fbn, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn empty_run() {
        let p = identity_problem();
        let tr = run(&p, &StepPolicy::fbn(1.0, 1.0, 1.0).unwrap(), &v(&[3.0]), &StopRule::new(1e-10, 0), None).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.converged, Some(false));
    }

    #[test]
    fn override_warning_reaches_trace() {
        let p = identity_problem();
        let pol = StepPolicy::unchecked(Scheme::FbClassical, 2.5, 0.0, 1.0).unwrap();
        let tr = run(&p, &pol, &v(&[1.0]), &StopRule::new(1e-10, 20), None).unwrap();
        assert_eq!(tr.warnings.len(), 1);
        assert_eq!(tr.converged, Some(false));
    }

    #[test]
    fn varying_relaxation() {
        let p = halfspace_problem();
        let stop = StopRule::new(1e-12, 10_000);
        let tr = run_fbn_varying(&p, 1.0, |k| if k % 2 == 0 { 0.3 } else { 1.4 }, 0.05, &v(&[3.0, 1.0]), &stop, None)
            .unwrap();
        assert_eq!(tr.converged, Some(true));
        assert!(run_fbn_varying(&p, 1.0, |_| 1.48, 0.05, &v(&[3.0, 1.0]), &stop, None).is_err());
    }

    #[test]
    fn thinned_trace_sums_steps() {
        let p = identity_problem();
        let pol = StepPolicy::fb_classical(0.5, 1.0).unwrap();
        let full = run(&p, &pol, &v(&[1.0]), &StopRule::new(0.0, 6), None).unwrap();
        let thin = run(&p, &pol, &v(&[1.0]), &StopRule::new(0.0, 6).record_every(3), None).unwrap();
        assert_eq!(thin.len(), 3);
        let a: f64 = full.series(series::STEP_NORM_SQ).unwrap()[1..4].iter().sum();
        assert!((thin.series(series::STEP_NORM_SQ).unwrap()[1] - a).abs() < 1e-15);
    }
}
