//! Integrators for the three continuous dynamics attached to the inclusion
//! `0 in subdiff(phi)(x) + B(x)`:
//!
//! * the regularized Newton system, integrated in its lifted form
//!   `y' = -(y - prox_{mu phi}(y)) - mu B(prox_{mu phi}(y))` with
//!   `x = prox_{mu phi}(y)` and `v = (y - x) / mu`;
//! * the semigroup flow `x' + subdiff(phi)(x) + B(x) ∋ 0`, approximated by
//!   its implicit-explicit discretization;
//! * the proximal-gradient flow `x' + x - prox_{mu phi}(x - mu B(x)) = 0`.
//!
//! The regularization parameter `lambda = 1/mu` is held constant.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::hilbert::Vector;
use crate::lyapunov::{self, Anchor};
use crate::problem::InclusionProblem;
use crate::trace::{series, Sample, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExplicitEuler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub horizon: f64,
    pub method: Integrator,
    pub record_every: usize,
}

impl FlowConfig {
    pub fn new(dt: f64, horizon: f64, method: Integrator, record_every: usize) -> Result<Self> {
        ensure_positive("dt", dt)?;
        ensure_positive("horizon", horizon)?;
        if horizon < dt {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
                reason: format!("must be at least dt = {dt}"),
            });
        }
        if record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                value: 0.0,
                reason: "must be a positive integer".into(),
            });
        }
        Ok(Self {
            dt,
            horizon,
            method,
            record_every,
        })
    }

    pub fn rk4(dt: f64, horizon: f64) -> Result<Self> {
        Self::new(dt, horizon, Integrator::Rk4, 1)
    }

    fn steps(&self) -> usize {
        ((self.horizon / self.dt).round() as usize).max(1)
    }

    fn records_at(&self, step: usize, total: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == total
    }
}

/// Whether parameter bounds are enforced or only reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Admissibility {
    #[default]
    Enforce,
    /// Run anyway and record the violated bound as a trace warning.
    Override,
}

/// One step of `y' = f(y)`.
pub fn ode_step(method: Integrator, f: &impl Fn(&Vector) -> Vector, y: &Vector, dt: f64) -> Vector {
    match method {
        Integrator::ExplicitEuler => y.add_scaled(dt, &f(y)),
        Integrator::Rk4 => {
            let k1 = f(y);
            let k2 = f(&y.add_scaled(0.5 * dt, &k1));
            let k3 = f(&y.add_scaled(0.5 * dt, &k2));
            let k4 = f(&y.add_scaled(dt, &k3));
            let mut incr = k1;
            incr += &(k2 * 2.0);
            incr += &(k3 * 2.0);
            incr += &k4;
            y.add_scaled(dt / 6.0, &incr)
        }
    }
}

fn gate(violation: Option<String>, admissibility: Admissibility, trace: &mut Trace) -> Result<()> {
    match (violation, admissibility) {
        (None, _) => Ok(()),
        (Some(msg), Admissibility::Enforce) => Err(Error::Inadmissible(msg)),
        (Some(msg), Admissibility::Override) => {
            trace.warnings.push(format!("admissibility overridden: {msg}"));
            Ok(())
        }
    }
}

/// Regularized Newton dynamic with constant `lambda = 1/mu`.
///
/// `v0` must be a subgradient of `phi` at `x0`; when omitted the minimal
/// norm subgradient is used, which exists for every catalog function on its
/// domain.
pub fn newton_flow(
    problem: &InclusionProblem,
    mu: f64,
    x0: &Vector,
    v0: Option<&Vector>,
    cfg: &FlowConfig,
    anchor: Option<&Anchor>,
) -> Result<Trace> {
    ensure_positive("mu", mu)?;
    problem.check_point(x0)?;
    let phi = problem.phi();
    let b = problem.operator();
    let v0 = match v0 {
        Some(v) => {
            problem.check_point(v)?;
            v.clone()
        }
        None => phi.min_norm_subgradient(x0).ok_or_else(|| {
            Error::InvalidInitialCondition("x0 has no known subgradient (outside dom phi?)".into())
        })?,
    };
    let gap = lyapunov::subgradient_gap(phi, x0, &v0, mu);
    if gap > lyapunov::SUBGRADIENT_TOL * x0.norm().max(1.0) {
        return Err(Error::InvalidInitialCondition(format!(
            "v0 is not a subgradient of phi at x0 (prox identity off by {gap:e})"
        )));
    }

    let field = |y: &Vector| {
        let x = phi.prox_unchecked(mu, y);
        let bx = b.apply(&x);
        let mut out = &x - y;
        out -= &(bx * mu);
        out
    };

    let mut trace = Trace::default();
    let n = cfg.steps();
    let mut y = x0.add_scaled(mu, &v0);
    let mut prev_x: Option<(Vector, f64)> = None;
    for step in 0..=n {
        if step > 0 {
            y = ode_step(cfg.method, &field, &y, cfg.dt);
        }
        if !cfg.records_at(step, n) {
            continue;
        }
        let t = step as f64 * cfg.dt;
        let x = phi.prox_unchecked(mu, &y);
        let v = (&y - &x) * (1.0 / mu);
        let bx = b.apply(&x);
        let mut values = vec![
            (series::RESIDUAL, problem.residual_unchecked(mu, &x)),
            (series::V_PLUS_BX, (&v + &bx).norm()),
        ];
        if let Some((px, pt)) = &prev_x {
            let d2 = (&x - px).norm_squared();
            values.push((series::STEP_NORM_SQ, d2));
            values.push((series::ENERGY_INCREMENT, d2 / (t - pt)));
        }
        if let Some(a) = anchor {
            let gamma = lyapunov::gamma_z_raw(&x, &v, a, mu, phi);
            values.extend([
                (series::B_ERROR, (&bx - &a.bz).norm()),
                (series::G_Z, lyapunov::g_z_raw(&x, &v, a, phi)),
                (series::GAMMA_Z, gamma),
                (series::A_K, gamma / mu),
                (series::K_Z, lyapunov::k_z(&x, a, phi)),
                (series::DUAL_ERROR, (&v + &a.bz).norm()),
                (series::BIG_G_Z, lyapunov::big_g_z(&x, &v, a, mu, problem.beta(), phi)),
            ]);
        }
        prev_x = Some((x.clone(), t));
        trace.push(Sample {
            index: t,
            state: x,
            dual: Some(v),
            vectors: vec![("y", y.clone())],
            values,
        });
    }
    trace.steps = n;
    Ok(trace)
}

/// Semigroup orbit approximated by `x_{k+1} = prox_{dt phi}(x_k - dt B(x_k))`.
///
/// The recorded dual at sample `j` is a subgradient at `states[j]`; the
/// residual series uses the probe `mu = beta`.
pub fn semigroup_flow(
    problem: &InclusionProblem,
    x0: &Vector,
    cfg: &FlowConfig,
    anchor: Option<&Anchor>,
    admissibility: Admissibility,
) -> Result<Trace> {
    problem.check_point(x0)?;
    let phi = problem.phi();
    let b = problem.operator();
    let beta = problem.beta();
    let dt = cfg.dt;
    let mut trace = Trace::default();
    let violation = (dt >= 2.0 * beta).then(|| {
        format!(
            "dt={dt} >= 2*beta={}: the implicit-explicit step requires 0 < dt < 2 beta",
            2.0 * beta
        )
    });
    gate(violation, admissibility, &mut trace)?;

    // x0 must lie in the closure of dom phi: prox_{eps phi}(x0) -> x0.
    let near = phi.prox_unchecked(1e-12, x0);
    if !phi.eval(&near).is_finite() || (&near - x0).norm() > 1e-9 * x0.norm().max(1.0) {
        return Err(Error::InvalidInitialCondition(
            "x0 is not in the closure of dom phi".into(),
        ));
    }

    let n = cfg.steps();
    let mut x = x0.clone();
    let mut v = phi.min_norm_subgradient(x0);
    let mut prev: Option<(Vector, f64)> = None;
    let mut step_sq = 0.0;
    for step in 0..=n {
        if step > 0 {
            let w = x.add_scaled(-dt, &b.apply(&x));
            let next = phi.prox_unchecked(dt, &w);
            step_sq += (&next - &x).norm_squared();
            // keeps duals absent once the first one was unknown
            v = v.map(|_| (&w - &next) * (1.0 / dt));
            x = next;
        }
        if !cfg.records_at(step, n) {
            continue;
        }
        let t = step as f64 * dt;
        let bx = b.apply(&x);
        let mut values = vec![(series::RESIDUAL, problem.residual_unchecked(beta, &x))];
        if let Some(v) = &v {
            values.push((series::V_PLUS_BX, (v + &bx).norm()));
        }
        if let Some((_, pt)) = &prev {
            values.push((series::STEP_NORM_SQ, step_sq));
            values.push((series::ENERGY_INCREMENT, step_sq / (t - pt)));
        }
        step_sq = 0.0;
        if let Some(a) = anchor {
            let hz = lyapunov::h_z(&x, a);
            let kz = lyapunov::k_z(&x, a, phi);
            values.extend([
                (series::B_ERROR, (&bx - &a.bz).norm()),
                (series::H_Z, hz),
                (series::K_Z, kz),
                (series::H_PLUS_K, hz + 2.0 * beta * kz),
            ]);
            if let Some(v) = &v {
                values.push((series::G_Z, lyapunov::g_z_raw(&x, v, a, phi)));
                values.push((series::DUAL_ERROR, (v + &a.bz).norm()));
            }
        }
        prev = Some((x.clone(), t));
        trace.push(Sample {
            index: t,
            state: x.clone(),
            dual: v.clone(),
            vectors: vec![],
            values,
        });
    }
    trace.steps = n;
    Ok(trace)
}

/// Proximal-gradient flow `x' = prox_{mu phi}(x - mu B x) - x`.
///
/// For non-potential `B` the parameter must satisfy `mu < 4 beta`; for a
/// gradient `B` every `mu > 0` is admissible.
pub fn prox_grad_flow(
    problem: &InclusionProblem,
    mu: f64,
    x0: &Vector,
    cfg: &FlowConfig,
    anchor: Option<&Anchor>,
    admissibility: Admissibility,
) -> Result<Trace> {
    ensure_positive("mu", mu)?;
    problem.check_point(x0)?;
    let beta = problem.beta();
    let mut trace = Trace::default();
    let violation = (!problem.is_potential() && mu >= 4.0 * beta).then(|| {
        format!(
            "mu={mu} >= 4*beta={}: the proximal-gradient flow with non-potential B requires 0 < mu < 4 beta",
            4.0 * beta
        )
    });
    gate(violation, admissibility, &mut trace)?;

    let phi = problem.phi();
    let b = problem.operator();
    let field = |x: &Vector| &problem.forward_backward(mu, x) - x;

    let n = cfg.steps();
    let mut x = x0.clone();
    let mut prev: Option<(Vector, f64)> = None;
    for step in 0..=n {
        if step > 0 {
            x = ode_step(cfg.method, &field, &x, cfg.dt);
        }
        if !cfg.records_at(step, n) {
            continue;
        }
        let t = step as f64 * cfg.dt;
        let velocity = field(&x);
        let bx = b.apply(&x);
        let speed = velocity.norm();
        let mut values = vec![(series::RESIDUAL, speed), (series::VELOCITY, speed)];
        if let Some((px, pt)) = &prev {
            let d2 = (&x - px).norm_squared();
            values.push((series::STEP_NORM_SQ, d2));
            values.push((series::ENERGY_INCREMENT, d2 / (t - pt)));
        }
        if let Some(a) = anchor {
            values.extend([
                (series::B_ERROR, (&bx - &a.bz).norm()),
                (series::H_Z, lyapunov::h_z(&x, a)),
                (series::K_Z, lyapunov::k_z(&x, a, phi)),
            ]);
        }
        prev = Some((x.clone(), t));
        trace.push(Sample {
            index: t,
            state: x.clone(),
            dual: None,
            vectors: vec![("velocity", velocity), ("bx", bx)],
            values,
        });
    }
    trace.steps = n;
    Ok(trace)
}
