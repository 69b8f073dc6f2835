//! Lyapunov quantities anchored at a (candidate) solution `z`, and generic
//! checks on the scalar series they produce.
//!
//! With `v` a subgradient of `phi` at `x`:
//!
//! ```text
//! g_z     = phi(z) - phi(x) - <z - x, v>            (>= 0)
//! Gamma_z = |x - z|^2 / 2 + mu g_z
//! A       = |x - z|^2 / (2 mu) + g_z = Gamma_z / mu
//! h_z     = |x - z|^2 / 2
//! k_z     = phi(x) - phi(z) + <B z, x - z>           (>= 0 for z in S)
//! ```
//!
//! In finite dimension weak and strong convergence coincide, so the
//! inf-compactness conditions for strong convergence hold vacuously and are
//! not checked.

use serde::Serialize;

use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::hilbert::{Proximable, Vector};
use crate::problem::InclusionProblem;

/// Tolerance of the prox identity `x = prox(mu, x + mu v)` used to accept
/// `v` as a subgradient at `x`.
pub const SUBGRADIENT_TOL: f64 = 1e-9;

/// Residual a point must reach to count as a certified solution.
pub const CERTIFICATION_TOL: f64 = 1e-8;

/// A point `z` together with `B(z)` and `phi(z)`.
#[derive(Debug, Clone, Serialize)]
pub struct Anchor {
    pub z: Vector,
    pub bz: Vector,
    pub phi_z: f64,
    /// Fixed-point residual of `z` at the probe used when it was built.
    pub residual: f64,
    pub certified: bool,
}

impl Anchor {
    /// Anchor at an arbitrary point; `certified` is set when the residual
    /// with probe `beta` is below [`CERTIFICATION_TOL`].
    pub fn new(problem: &InclusionProblem, z: Vector) -> Result<Self> {
        problem.check_point(&z)?;
        let residual = problem.residual_unchecked(problem.beta(), &z);
        Ok(Self {
            bz: problem.operator().apply(&z),
            phi_z: problem.phi().eval(&z),
            certified: residual <= CERTIFICATION_TOL,
            residual,
            z,
        })
    }

    /// Anchor that must be a solution: errors when the residual with probe
    /// `mu` exceeds `tolerance`.
    pub fn certified(problem: &InclusionProblem, z: Vector, mu: f64, tolerance: f64) -> Result<Self> {
        let residual = problem.residual(mu, &z)?;
        if residual > tolerance {
            return Err(Error::Uncertified { residual, tolerance });
        }
        Ok(Self {
            bz: problem.operator().apply(&z),
            phi_z: problem.phi().eval(&z),
            certified: true,
            residual,
            z,
        })
    }
}

/// `|x - prox(mu, x + mu v)|`, zero iff `v` is a subgradient at `x`.
pub fn subgradient_gap(phi: &dyn Proximable, x: &Vector, v: &Vector, mu: f64) -> f64 {
    let y = x.add_scaled(mu, v);
    (x - &phi.prox_unchecked(mu, &y)).norm()
}

pub fn check_subgradient(phi: &dyn Proximable, x: &Vector, v: &Vector, mu: f64) -> Result<()> {
    ensure_dim(phi.dim(), x.dim())?;
    ensure_dim(phi.dim(), v.dim())?;
    let gap = subgradient_gap(phi, x, v, mu);
    if gap <= SUBGRADIENT_TOL * x.norm().max(1.0) {
        Ok(())
    } else {
        Err(Error::InvalidDual { gap })
    }
}

pub(crate) fn g_z_raw(x: &Vector, v: &Vector, anchor: &Anchor, phi: &dyn Proximable) -> f64 {
    anchor.phi_z - phi.eval(x) - v.dot(&(&anchor.z - x))
}

/// Bregman gap `phi(z) - phi(x) - <z - x, v>`.
pub fn g_z(x: &Vector, v: &Vector, anchor: &Anchor, phi: &dyn Proximable) -> Result<f64> {
    check_subgradient(phi, x, v, 1.0)?;
    ensure_dim(x.dim(), anchor.z.dim())?;
    Ok(g_z_raw(x, v, anchor, phi))
}

pub(crate) fn gamma_z_raw(x: &Vector, v: &Vector, anchor: &Anchor, mu: f64, phi: &dyn Proximable) -> f64 {
    0.5 * (x - &anchor.z).norm_squared() + mu * g_z_raw(x, v, anchor, phi)
}

/// `|x - z|^2 / 2 + mu g_z`.
pub fn gamma_z(x: &Vector, v: &Vector, anchor: &Anchor, mu: f64, phi: &dyn Proximable) -> Result<f64> {
    ensure_positive("mu", mu)?;
    check_subgradient(phi, x, v, mu)?;
    ensure_dim(x.dim(), anchor.z.dim())?;
    Ok(gamma_z_raw(x, v, anchor, mu, phi))
}

pub(crate) fn a_k_raw(x: &Vector, v: &Vector, anchor: &Anchor, mu: f64, phi: &dyn Proximable) -> f64 {
    (x - &anchor.z).norm_squared() / (2.0 * mu) + g_z_raw(x, v, anchor, phi)
}

/// Discrete Lyapunov value `|x - z|^2 / (2 mu) + g_z`.
pub fn a_k(x: &Vector, v: &Vector, anchor: &Anchor, mu: f64, phi: &dyn Proximable) -> Result<f64> {
    ensure_positive("mu", mu)?;
    check_subgradient(phi, x, v, mu)?;
    ensure_dim(x.dim(), anchor.z.dim())?;
    Ok(a_k_raw(x, v, anchor, mu, phi))
}

/// `phi(x) - phi(z) + <Bz, x - z>`; `+inf` when `x` is outside `dom phi`.
pub fn k_z(x: &Vector, anchor: &Anchor, phi: &dyn Proximable) -> f64 {
    let fx = phi.eval(x);
    if !fx.is_finite() {
        return f64::INFINITY;
    }
    fx - anchor.phi_z + anchor.bz.dot(&(x - &anchor.z))
}

/// `|x - z|^2 / 2`.
pub fn h_z(x: &Vector, anchor: &Anchor) -> f64 {
    0.5 * (x - &anchor.z).norm_squared()
}

/// `Gamma_z + 2 beta (phi(x) + <x, Bz>)`. Exposed as a trace series only;
/// it is monotone up to constants, not exactly.
pub fn big_g_z(x: &Vector, v: &Vector, anchor: &Anchor, mu: f64, beta: f64, phi: &dyn Proximable) -> f64 {
    gamma_z_raw(x, v, anchor, mu, phi) + 2.0 * beta * (phi.eval(x) + x.dot(&anchor.bz))
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    /// Largest consecutive increase beyond the allowed slack, clamped at 0.
    pub worst_excess: f64,
    /// Largest raw consecutive increase, clamped at 0.
    pub worst_increase: f64,
    pub worst_index: Option<usize>,
    pub pass: bool,
}

/// Checks `series[j+1] - series[j] <= slack` for every `j`.
pub fn check_monotone(series: &[f64], slack: f64) -> Result<MonotoneReport> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("monotonicity needs at least two samples".into()));
    }
    check_monotone_with(series, &vec![slack; series.len() - 1])
}

/// Checks `series[j+1] - series[j] <= slacks[j]` for every `j`.
pub fn check_monotone_with(series: &[f64], slacks: &[f64]) -> Result<MonotoneReport> {
    if series.len() < 2 {
        return Err(Error::InvalidInput("monotonicity needs at least two samples".into()));
    }
    if slacks.len() != series.len() - 1 {
        return Err(Error::InvalidInput(format!(
            "expected {} slack values, got {}",
            series.len() - 1,
            slacks.len()
        )));
    }
    let mut worst_excess = 0.0_f64;
    let mut worst_increase = 0.0_f64;
    let mut worst_index = None;
    let mut pass = true;
    for (j, (w, &slack)) in series.windows(2).zip(slacks).enumerate() {
        let inc = w[1] - w[0];
        if inc.is_nan() {
            // undefined sample
            pass = false;
            worst_index.get_or_insert(j);
            continue;
        }
        if inc > slack {
            pass = false;
        }
        worst_increase = worst_increase.max(inc);
        let excess = inc - slack;
        if excess > worst_excess {
            worst_excess = excess;
            worst_index = Some(j);
        }
    }
    Ok(MonotoneReport {
        worst_excess,
        worst_increase,
        worst_index,
        pass,
    })
}

/// Default bound on the fraction of mass allowed in the last tenth of a series.
pub const DEFAULT_TAIL_BOUND: f64 = 1e-4;

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityReport {
    pub partial_sums: Vec<f64>,
    pub total: f64,
    /// Fraction of the total mass carried by the last tenth of the indices.
    pub tail_fraction: f64,
    pub pass: bool,
}

/// Falsifier for square-summability of a nonnegative series (typically
/// already squared increments): passes when the last tenth of the indices
/// carries at most `tail_bound` of the total mass.
pub fn check_square_summable(series: &[f64], tail_bound: f64) -> Result<SummabilityReport> {
    if series.is_empty() {
        return Err(Error::InvalidInput("series is empty".into()));
    }
    if let Some(bad) = series.iter().find(|&&s| s.is_nan() || s < 0.0) {
        return Err(Error::InvalidInput(format!("negative or undefined entry {bad}")));
    }
    let partial_sums: Vec<f64> = series
        .iter()
        .scan(0.0, |acc, &s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    let total = *partial_sums.last().unwrap();
    let n = series.len();
    let tail_len = (n / 10).max(1);
    let tail: f64 = series[n - tail_len..].iter().sum();
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    Ok(SummabilityReport {
        partial_sums,
        total,
        tail_fraction,
        pass: tail_fraction <= tail_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BzReport {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Tolerance on the pairwise spread of `B` over certified solutions.
pub const BZ_TOL: f64 = 1e-8;

/// Maximum pairwise `|B z_i - B z_j|` over certified solutions.
pub fn bz_constancy(
    problem: &InclusionProblem,
    solutions: &[Vector],
    mu: f64,
    certification_tol: f64,
) -> Result<BzReport> {
    if solutions.is_empty() {
        return Err(Error::InvalidInput("no solutions given".into()));
    }
    let mut images = Vec::with_capacity(solutions.len());
    for z in solutions {
        let residual = problem.residual(mu, z)?;
        if residual > certification_tol {
            return Err(Error::Uncertified {
                residual,
                tolerance: certification_tol,
            });
        }
        images.push(problem.operator().apply(z));
    }
    let mut max_deviation = 0.0_f64;
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            max_deviation = max_deviation.max(a.distance(b));
        }
    }
    Ok(BzReport {
        max_deviation,
        pass: max_deviation <= BZ_TOL,
    })
}
