//! Single-valued cocoercive operators `B` with a known modulus `beta`:
//! `<Bx - By, x - y> >= beta |Bx - By|^2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use super::{Proximable, Vector};
use crate::error::{ensure_dim, ensure_positive, Error, Result};

pub trait Cocoercive: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Cocoercivity modulus.
    fn beta(&self) -> f64;

    fn apply(&self, x: &Vector) -> Vector;

    /// True when `B` is known to be the gradient of a convex function.
    fn is_gradient(&self) -> bool {
        false
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.dim())?;
        Ok(self.apply(x))
    }
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    (m - m.transpose()).amax() <= 1e-14 * m.amax().max(1.0)
}

/// Largest `beta` with `<Mu, u> >= beta |Mu|^2` for every `u`.
///
/// A cocoercive linear map has `ker M` orthogonal to `ran M`, so it acts
/// as an invertible map `M_r` on its range. Substituting `w = M_r u` turns
/// the inequality into `<w, M_r^{-1} w> >= beta |w|^2`, whence
/// `beta = lambda_min(sym(M_r^{-1}))`.
pub fn certify_linear_beta(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n || n == 0 {
        return Err(Error::InvalidInput("linear operator must be square".into()));
    }
    let svd = SVD::new(m.clone(), true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::NotCocoercive("singular value decomposition failed".into())),
    };
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return Err(Error::NotCocoercive(
            "linear part vanishes; every modulus works, none is certified".into(),
        ));
    }
    let rank_tol = 1e-12 * sigma_max * n as f64;
    let rank_idx: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] > rank_tol).collect();
    let range = u.select_columns(&rank_idx);
    let corange = v_t.transpose().select_columns(&rank_idx);

    // ran M must coincide with (ker M)^perp.
    let leak = (&corange - &range * range.tr_mul(&corange)).amax();
    if leak > 1e-9 {
        return Err(Error::NotCocoercive(format!(
            "range and kernel are not orthogonal (leak {leak:e})"
        )));
    }

    let restricted = range.tr_mul(&(m * &range));
    let inv = restricted
        .try_inverse()
        .ok_or_else(|| Error::NotCocoercive("restricted map is singular".into()))?;
    let sym = (&inv + inv.transpose()) * 0.5;
    let beta = SymmetricEigen::new(sym).eigenvalues.min();
    if beta <= 1e-14 / sigma_max {
        return Err(Error::NotCocoercive(format!("certified modulus {beta:e} is not positive")));
    }
    Ok(beta)
}

/// Affine map `B(x) = Mx + b` with certified modulus.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    m: DMatrix<f64>,
    b: DVector<f64>,
    beta: f64,
    symmetric: bool,
}

impl LinearOperator {
    pub fn new(m: DMatrix<f64>, b: Vector) -> Result<Self> {
        ensure_dim(m.nrows(), b.dim())?;
        let beta = certify_linear_beta(&m)?;
        Ok(Self {
            symmetric: is_symmetric(&m),
            m,
            b: b.as_dvector().clone(),
            beta,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
            b: DVector::zeros(dim),
            beta: 1.0,
            symmetric: true,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

impl Cocoercive for LinearOperator {
    fn name(&self) -> String {
        format!("linear({})", self.b.len())
    }

    fn dim(&self) -> usize {
        self.b.len()
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn apply(&self, x: &Vector) -> Vector {
        Vector::from_dvector(&self.m * x.as_dvector() + &self.b)
    }

    fn is_gradient(&self) -> bool {
        self.symmetric
    }
}

/// Gradient of `Psi(x) = <Qx, x>/2 - <r, x>`, i.e. `B(x) = Qx - r`, with
/// `Q` symmetric positive semidefinite and `beta = 1 / lambda_max(Q)`.
#[derive(Debug, Clone)]
pub struct QuadraticGradient {
    q: DMatrix<f64>,
    r: DVector<f64>,
    lipschitz: f64,
}

impl QuadraticGradient {
    pub fn new(q: DMatrix<f64>, r: Vector) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::InvalidInput("Hessian must be square".into()));
        }
        ensure_dim(n, r.dim())?;
        if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(Error::InvalidInput("Hessian must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(q.clone());
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        if lo < -1e-12 * hi.abs().max(1.0) {
            return Err(Error::NotCocoercive(format!(
                "Hessian is not positive semidefinite (eigenvalue {lo:e})"
            )));
        }
        if hi <= 0.0 {
            return Err(Error::NotCocoercive("Hessian vanishes".into()));
        }
        Ok(Self {
            q,
            r: r.as_dvector().clone(),
            lipschitz: hi,
        })
    }

    /// `Psi(x) = <Q(x - c), x - c>/2`.
    pub fn centered(q: DMatrix<f64>, center: &Vector) -> Result<Self> {
        let r = Vector::from_dvector(&q * center.as_dvector());
        Self::new(q, r)
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn potential(&self, x: &Vector) -> f64 {
        let x = x.as_dvector();
        0.5 * x.dot(&(&self.q * x)) - self.r.dot(x)
    }
}

impl Cocoercive for QuadraticGradient {
    fn name(&self) -> String {
        format!("quadratic-gradient({})", self.r.len())
    }

    fn dim(&self) -> usize {
        self.r.len()
    }

    fn beta(&self) -> f64 {
        1.0 / self.lipschitz
    }

    fn apply(&self, x: &Vector) -> Vector {
        Vector::from_dvector(&self.q * x.as_dvector() - &self.r)
    }

    fn is_gradient(&self) -> bool {
        true
    }
}

/// `B = I - T` for the nonexpansive affine map `T(x) = Rx + t`; `beta = 1/2`.
#[derive(Debug, Clone)]
pub struct NonexpansiveResidual {
    r: DMatrix<f64>,
    t: DVector<f64>,
    symmetric: bool,
}

impl NonexpansiveResidual {
    pub fn new(r: DMatrix<f64>, t: Vector) -> Result<Self> {
        let n = r.nrows();
        if r.ncols() != n {
            return Err(Error::InvalidInput("map must be square".into()));
        }
        ensure_dim(n, t.dim())?;
        let norm = SVD::new(r.clone(), false, false).singular_values.max();
        if norm > 1.0 + 1e-12 {
            return Err(Error::NotCocoercive(format!(
                "map has operator norm {norm} > 1 and is not nonexpansive"
            )));
        }
        Ok(Self {
            symmetric: is_symmetric(&r),
            r,
            t: t.as_dvector().clone(),
        })
    }

    /// `B = I - R_theta` for the planar rotation by `theta`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        Self {
            r,
            t: DVector::zeros(2),
            symmetric: s == 0.0,
        }
    }
}

impl Cocoercive for NonexpansiveResidual {
    fn name(&self) -> String {
        format!("nonexpansive-residual({})", self.t.len())
    }

    fn dim(&self) -> usize {
        self.t.len()
    }

    fn beta(&self) -> f64 {
        0.5
    }

    fn apply(&self, x: &Vector) -> Vector {
        let x = x.as_dvector();
        Vector::from_dvector(x - (&self.r * x + &self.t))
    }

    fn is_gradient(&self) -> bool {
        self.symmetric
    }
}

/// Resolvent `J = (I + lambda M)^{-1}` of a maximal monotone operator `M`.
#[derive(Debug, Clone)]
pub enum Resolvent {
    /// `M = subdifferential of phi`, so `J = prox_{lambda phi}`.
    Subdifferential(Arc<dyn Proximable>),
    /// Linear monotone `M`; the stored matrix is `(I + lambda M)^{-1}`.
    Linear(DMatrix<f64>),
}

/// Yosida approximation `M_lambda = (I - J_lambda) / lambda`, which is
/// `lambda`-cocoercive.
#[derive(Debug, Clone)]
pub struct Yosida {
    lambda: f64,
    resolvent: Resolvent,
    dim: usize,
}

impl Yosida {
    pub fn of_subdifferential(phi: Arc<dyn Proximable>, lambda: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        Ok(Self {
            lambda,
            dim: phi.dim(),
            resolvent: Resolvent::Subdifferential(phi),
        })
    }

    /// Yosida approximation of a linear monotone map (`sym(M)` PSD). With a
    /// skew part this is a genuinely non-potential cocoercive operator.
    pub fn of_linear_monotone(m: DMatrix<f64>, lambda: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidInput("map must be square".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let lo = SymmetricEigen::new(sym).eigenvalues.min();
        if lo < -1e-12 * m.amax().max(1.0) {
            return Err(Error::InvalidInput(format!("map is not monotone (eigenvalue {lo:e})")));
        }
        let inv = (DMatrix::identity(n, n) + m * lambda)
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("I + lambda M is singular".into()))?;
        Ok(Self {
            lambda,
            dim: n,
            resolvent: Resolvent::Linear(inv),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Cocoercive for Yosida {
    fn name(&self) -> String {
        format!("yosida(lambda={})", self.lambda)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn beta(&self) -> f64 {
        self.lambda
    }

    fn apply(&self, x: &Vector) -> Vector {
        let j = match &self.resolvent {
            Resolvent::Subdifferential(phi) => phi.prox_unchecked(self.lambda, x),
            Resolvent::Linear(inv) => Vector::from_dvector(inv * x.as_dvector()),
        };
        (x - &j) * (1.0 / self.lambda)
    }

    fn is_gradient(&self) -> bool {
        matches!(self.resolvent, Resolvent::Subdifferential(_))
    }
}
