//! Sampling-based verification of the operator inequalities the solvers rely on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Cocoercive, Proximable, Vector};
use crate::error::{ensure_dim, ensure_positive, Error, Result};

/// Default tolerance for algebraic identities in double precision.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

pub type SamplePair = (Vector, Vector);

/// `count` reproducible pairs drawn uniformly from `[-radius, radius]^dim`.
pub fn sample_pairs(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<SamplePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| Vector::from_fn(dim, |_| rng.random_range(-radius..=radius));
    (0..count).map(|_| (draw(&mut rng), draw(&mut rng))).collect()
}

/// `count` reproducible points drawn uniformly from `[-radius, radius]^dim`.
pub fn sample_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Vector::from_fn(dim, |_| rng.random_range(-radius..=radius)))
        .collect()
}

fn validate_pairs(dim: usize, samples: &[SamplePair]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("sample list is empty".into()));
    }
    for (a, b) in samples {
        ensure_dim(dim, a.dim())?;
        ensure_dim(dim, b.dim())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FirmNonexpansiveReport {
    /// `max |P y1 - P y2|^2 - <P y1 - P y2, y1 - y2>` over the samples.
    pub max_violation: f64,
    pub pairs: usize,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_firmly_nonexpansive(
    phi: &dyn Proximable,
    mu: f64,
    samples: &[SamplePair],
    tolerance: f64,
) -> Result<FirmNonexpansiveReport> {
    ensure_positive("mu", mu)?;
    validate_pairs(phi.dim(), samples)?;
    let max_violation = samples
        .iter()
        .map(|(y1, y2)| {
            let dp = &phi.prox_unchecked(mu, y1) - &phi.prox_unchecked(mu, y2);
            dp.norm_squared() - dp.dot(&(y1 - y2))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FirmNonexpansiveReport {
        max_violation,
        pairs: samples.len(),
        tolerance,
        pass: max_violation <= tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CocoercivityReport {
    /// `min <Bx - By, x - y> - beta |Bx - By|^2` over the samples.
    pub min_slack: f64,
    /// `max |Bx - By| - |x - y| / beta`; nonpositive for a `1/beta`-Lipschitz map.
    pub max_lipschitz_excess: f64,
    pub beta: f64,
    pub pairs: usize,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_cocoercive(
    b: &dyn Cocoercive,
    samples: &[SamplePair],
    tolerance: f64,
) -> Result<CocoercivityReport> {
    validate_pairs(b.dim(), samples)?;
    let beta = b.beta();
    let mut min_slack = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    for (x, y) in samples {
        let dx = x - y;
        let db = &b.apply(x) - &b.apply(y);
        min_slack = min_slack.min(db.dot(&dx) - beta * db.norm_squared());
        max_excess = max_excess.max(db.norm() - dx.norm() / beta);
    }
    Ok(CocoercivityReport {
        min_slack,
        max_lipschitz_excess: max_excess,
        beta,
        pairs: samples.len(),
        tolerance,
        pass: min_slack >= -tolerance && max_excess <= tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProxOptimalityReport {
    /// `min_w phi(w) - phi(x) - <v, w - x>` with `x = prox(mu, y)`, `v = (y - x)/mu`.
    pub min_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Subgradient inequality for the pair produced by one prox evaluation.
pub fn check_prox_optimality(
    phi: &dyn Proximable,
    mu: f64,
    y: &Vector,
    probes: &[Vector],
    tolerance: f64,
) -> Result<ProxOptimalityReport> {
    let x = phi.prox(mu, y)?;
    let v = (y - &x) * (1.0 / mu);
    let fx = phi.eval(&x);
    if !fx.is_finite() {
        return Err(Error::InvalidInput("prox landed outside the domain".into()));
    }
    let mut min_gap = f64::INFINITY;
    for w in probes {
        ensure_dim(phi.dim(), w.dim())?;
        min_gap = min_gap.min(phi.eval(w) - fx - v.dot(&(w - &x)));
    }
    Ok(ProxOptimalityReport {
        min_gap,
        tolerance,
        pass: min_gap >= -tolerance,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NonexpansiveReport {
    /// `max |T x - T y|^2 - |x - y|^2` for `T = I - mu B`.
    pub max_expansion: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_forward_step_nonexpansive(
    b: &dyn Cocoercive,
    mu: f64,
    samples: &[SamplePair],
    tolerance: f64,
) -> Result<NonexpansiveReport> {
    ensure_positive("mu", mu)?;
    validate_pairs(b.dim(), samples)?;
    let max_expansion = samples
        .iter()
        .map(|(x, y)| {
            let tx = x.add_scaled(-mu, &b.apply(x));
            let ty = y.add_scaled(-mu, &b.apply(y));
            (&tx - &ty).norm_squared() - (x - y).norm_squared()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NonexpansiveReport {
        max_expansion,
        tolerance,
        pass: max_expansion <= tolerance,
    })
}
