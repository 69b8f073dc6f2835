//! Convex lower-semicontinuous functions exposed through their value and
//! their proximal mapping `prox_{mu f}(y) = argmin_w f(w) + |w - y|^2 / (2 mu)`.
//!
//! Every instance in the catalog has a closed-form (or single
//! eigendecomposition) prox, so the mappings are exact up to rounding.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Vector;
use crate::error::{ensure_dim, ensure_positive, Error, Result};

/// Relative slack used when deciding set membership for indicator functions.
const MEMBERSHIP_TOL: f64 = 1e-9;

/// A proper convex l.s.c. function with a computable proximal mapping.
pub trait Proximable: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Function value, `f64::INFINITY` outside the domain.
    fn eval(&self, x: &Vector) -> f64;

    /// Proximal mapping without argument validation.
    fn prox_unchecked(&self, mu: f64, y: &Vector) -> Vector;

    /// Element of minimal norm of the subdifferential at `x`, when it is
    /// nonempty and known in closed form.
    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        let _ = x;
        None
    }

    fn prox(&self, mu: f64, y: &Vector) -> Result<Vector> {
        ensure_positive("mu", mu)?;
        ensure_dim(self.dim(), y.dim())?;
        Ok(self.prox_unchecked(mu, y))
    }
}

/// Validated proximal evaluation `prox_{mu phi}(y)`.
pub fn prox_eval(phi: &dyn Proximable, mu: f64, y: &Vector) -> Result<Vector> {
    phi.prox(mu, y)
}

fn indicator(inside: bool) -> f64 {
    if inside {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `f = 0`.
#[derive(Debug, Clone)]
pub struct ZeroFunction {
    dim: usize,
}

impl ZeroFunction {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Proximable for ZeroFunction {
    fn name(&self) -> String {
        "zero".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn prox_unchecked(&self, _mu: f64, y: &Vector) -> Vector {
        y.clone()
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        Some(Vector::zeros(x.dim()))
    }
}

/// `f(x) = |x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct HalfSquaredNorm {
    dim: usize,
}

impl HalfSquaredNorm {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Proximable for HalfSquaredNorm {
    fn name(&self) -> String {
        "half-squared-norm".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> f64 {
        0.5 * x.norm_squared()
    }

    fn prox_unchecked(&self, mu: f64, y: &Vector) -> Vector {
        y * (1.0 / (1.0 + mu))
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        Some(x.clone())
    }
}

/// `f(x) = <Qx, x>/2 + <c, x>` with `Q` symmetric positive semidefinite.
///
/// The prox solves `(I + mu Q) x = y - mu c`; `Q` is diagonalized once at
/// construction so each evaluation is two dense matrix-vector products.
#[derive(Debug, Clone)]
pub struct ConvexQuadratic {
    q: DMatrix<f64>,
    c: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl ConvexQuadratic {
    pub fn new(q: DMatrix<f64>, c: Vector) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::InvalidInput("quadratic form must be square".into()));
        }
        ensure_dim(n, c.dim())?;
        let scale = q.amax().max(1.0);
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidInput("quadratic form must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(q.clone());
        let lo = eig.eigenvalues.min();
        if lo < -1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "quadratic form is not positive semidefinite (eigenvalue {lo:e})"
            )));
        }
        Ok(Self {
            q,
            c: c.as_dvector().clone(),
            eigenvalues: eig.eigenvalues.map(|l| l.max(0.0)),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }
}

impl Proximable for ConvexQuadratic {
    fn name(&self) -> String {
        format!("convex-quadratic({})", self.c.len())
    }

    fn dim(&self) -> usize {
        self.c.len()
    }

    fn eval(&self, x: &Vector) -> f64 {
        let x = x.as_dvector();
        0.5 * x.dot(&(&self.q * x)) + self.c.dot(x)
    }

    fn prox_unchecked(&self, mu: f64, y: &Vector) -> Vector {
        let rhs = y.as_dvector() - &self.c * mu;
        let mut coeffs = self.eigenvectors.tr_mul(&rhs);
        for (ci, li) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *ci /= 1.0 + mu * li;
        }
        Vector::from_dvector(&self.eigenvectors * coeffs)
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        Some(Vector::from_dvector(&self.q * x.as_dvector() + &self.c))
    }
}

/// `f(x) = weight * |x|_1`; prox is componentwise soft thresholding.
#[derive(Debug, Clone)]
pub struct L1Norm {
    dim: usize,
    weight: f64,
}

impl L1Norm {
    pub fn new(dim: usize, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                value: weight,
                reason: "must be finite and nonnegative".into(),
            });
        }
        Ok(Self { dim, weight })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

impl Proximable for L1Norm {
    fn name(&self) -> String {
        format!("l1(weight={})", self.weight)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> f64 {
        self.weight * x.coords().iter().map(|c| c.abs()).sum::<f64>()
    }

    fn prox_unchecked(&self, mu: f64, y: &Vector) -> Vector {
        let t = mu * self.weight;
        y.map(|v| soft_threshold(v, t))
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        let w = self.weight;
        Some(x.map(|c| {
            if c > 0.0 {
                w
            } else if c < 0.0 {
                -w
            } else {
                0.0
            }
        }))
    }
}

/// Indicator of the box `{x : lo <= x <= hi}`; bounds may be infinite.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxIndicator {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        ensure_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::InvalidInput("box must have dimension >= 1".into()));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if l.is_nan() || h.is_nan() || l > h || *l == f64::INFINITY || *h == f64::NEG_INFINITY {
                return Err(Error::InvalidInput(format!("empty box side [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.coords()
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&c, (&l, &h))| {
                c >= l - MEMBERSHIP_TOL * (1.0 + l.abs()) && c <= h + MEMBERSHIP_TOL * (1.0 + h.abs())
            })
    }
}

impl Proximable for BoxIndicator {
    fn name(&self) -> String {
        format!("box-indicator({})", self.lo.len())
    }

    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn eval(&self, x: &Vector) -> f64 {
        indicator(self.contains(x))
    }

    fn prox_unchecked(&self, _mu: f64, y: &Vector) -> Vector {
        Vector::from_fn(y.dim(), |i| y[i].max(self.lo[i]).min(self.hi[i]))
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        self.contains(x).then(|| Vector::zeros(x.dim()))
    }
}

/// Indicator of the closed Euclidean ball `{x : |x - center| <= radius}`.
#[derive(Debug, Clone)]
pub struct BallIndicator {
    center: Vector,
    radius: f64,
}

impl BallIndicator {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "radius",
                value: radius,
                reason: "must be finite and nonnegative".into(),
            });
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.distance(&self.center) <= self.radius + MEMBERSHIP_TOL * (1.0 + self.radius)
    }
}

impl Proximable for BallIndicator {
    fn name(&self) -> String {
        format!("ball-indicator(r={})", self.radius)
    }

    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        indicator(self.contains(x))
    }

    fn prox_unchecked(&self, _mu: f64, y: &Vector) -> Vector {
        let d = y - &self.center;
        let n = d.norm();
        if n <= self.radius {
            y.clone()
        } else {
            self.center.add_scaled(self.radius / n, &d)
        }
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        self.contains(x).then(|| Vector::zeros(x.dim()))
    }
}

/// Indicator of the halfspace `{x : <a, x> <= b}` with `a != 0`.
#[derive(Debug, Clone)]
pub struct HalfspaceIndicator {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl HalfspaceIndicator {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = normal.norm_squared();
        if normal_sq == 0.0 {
            return Err(Error::InvalidInput("halfspace normal must be nonzero".into()));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidParameter {
                name: "offset",
                value: offset,
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            normal,
            offset,
            normal_sq,
        })
    }

    pub fn contains(&self, x: &Vector) -> bool {
        let scale = 1.0 + self.offset.abs() + self.normal.norm() * x.norm();
        self.normal.dot(x) <= self.offset + MEMBERSHIP_TOL * scale
    }
}

impl Proximable for HalfspaceIndicator {
    fn name(&self) -> String {
        "halfspace-indicator".into()
    }

    fn dim(&self) -> usize {
        self.normal.dim()
    }

    fn eval(&self, x: &Vector) -> f64 {
        indicator(self.contains(x))
    }

    fn prox_unchecked(&self, _mu: f64, y: &Vector) -> Vector {
        let excess = self.normal.dot(y) - self.offset;
        if excess <= 0.0 {
            y.clone()
        } else {
            y.add_scaled(-excess / self.normal_sq, &self.normal)
        }
    }

    fn min_norm_subgradient(&self, x: &Vector) -> Option<Vector> {
        self.contains(x).then(|| Vector::zeros(x.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c).unwrap()
    }

    /// Grid minimization of `f(w) + (w - y)^2 / (2 mu)` in one dimension.
    fn brute_force_prox_1d(f: impl Fn(f64) -> f64, mu: f64, y: f64) -> f64 {
        let (lo, hi, n) = (-10.0, 10.0, 2_000_001);
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|i| lo + i as f64 * step)
            .map(|w| (w, f(w) + (w - y).powi(2) / (2.0 * mu)))
            .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
            .0
    }

    #[test]
    fn l1_prox_matches_grid_search() {
        let expected = brute_force_prox_1d(f64::abs, 1.0, 2.0);
        assert!((expected - 1.0).abs() < 1e-5);
        let phi = L1Norm::new(1, 1.0).unwrap();
        let x = prox_eval(&phi, 1.0, &v(&[2.0])).unwrap();
        assert_eq!(x.coords(), &[1.0]);
        assert!((x[0] - expected).abs() < 1e-5);
    }

    #[test]
    fn l1_prox_fixes_minimizer() {
        let phi = L1Norm::new(1, 1.0).unwrap();
        assert_eq!(phi.prox(1.0, &v(&[0.0])).unwrap().coords(), &[0.0]);
    }

    #[test]
    fn half_squared_prox_solves_stationarity() {
        // (1 + mu) x = y
        let phi = HalfSquaredNorm::new(1);
        let x = phi.prox(1.0, &v(&[2.0])).unwrap();
        assert_eq!(x.coords(), &[1.0]);
        assert!(((1.0 + 1.0) * x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn box_prox_clamps() {
        let phi = BoxIndicator::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        for mu in [1e-3, 1.0, 50.0] {
            assert_eq!(phi.prox(mu, &v(&[2.0, -1.0])).unwrap().coords(), &[1.0, 0.0]);
        }
    }

    #[test]
    fn quadratic_prox_agrees_with_half_squared_norm() {
        let q = DMatrix::identity(3, 3);
        let phi = ConvexQuadratic::new(q, Vector::zeros(3)).unwrap();
        let y = v(&[2.0, -4.0, 1.0]);
        let x = phi.prox(1.0, &y).unwrap();
        assert!(x.max_abs_diff(&v(&[1.0, -2.0, 0.5])) < 1e-14);
    }

    #[test]
    fn quadratic_prox_solves_linear_system() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let c = v(&[0.5, -1.0]);
        let phi = ConvexQuadratic::new(q.clone(), c.clone()).unwrap();
        let y = v(&[1.0, 2.0]);
        let mu = 0.7;
        let x = phi.prox(mu, &y).unwrap();
        let lhs = x.as_dvector() + (&q * x.as_dvector()) * mu;
        let rhs = y.as_dvector() - c.as_dvector() * mu;
        assert!((lhs - rhs).amax() < 1e-13);
    }

    #[test]
    fn quadratic_rejects_indefinite() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(ConvexQuadratic::new(q, Vector::zeros(2)).is_err());
    }

    #[test]
    fn ball_and_halfspace_projections() {
        let ball = BallIndicator::new(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = ball.prox(1.0, &v(&[3.0, 4.0])).unwrap();
        assert!(p.max_abs_diff(&v(&[0.6, 0.8])) < 1e-15);
        assert_eq!(ball.eval(&p), 0.0);

        // {x1 >= 1}
        let hs = HalfspaceIndicator::new(v(&[-1.0, 0.0]), -1.0).unwrap();
        assert_eq!(hs.prox(1.0, &v(&[0.0, 7.0])).unwrap().coords(), &[1.0, 7.0]);
        assert_eq!(hs.prox(1.0, &v(&[3.0, 7.0])).unwrap().coords(), &[3.0, 7.0]);
        assert_eq!(hs.eval(&v(&[0.0, 0.0])), f64::INFINITY);
    }

    #[test]
    fn prox_rejects_bad_arguments() {
        let phi = L1Norm::new(2, 1.0).unwrap();
        assert!(matches!(
            phi.prox(0.0, &v(&[1.0, 1.0])),
            Err(Error::InvalidParameter { name: "mu", .. })
        ));
        assert!(matches!(
            phi.prox(1.0, &v(&[1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn min_norm_subgradients() {
        let l1 = L1Norm::new(3, 2.0).unwrap();
        assert_eq!(
            l1.min_norm_subgradient(&v(&[1.0, 0.0, -3.0])).unwrap().coords(),
            &[2.0, 0.0, -2.0]
        );
        let bx = BoxIndicator::new(vec![0.0], vec![1.0]).unwrap();
        assert!(bx.min_norm_subgradient(&v(&[2.0])).is_none());
        assert_eq!(bx.min_norm_subgradient(&v(&[0.5])).unwrap().coords(), &[0.0]);
    }
}
