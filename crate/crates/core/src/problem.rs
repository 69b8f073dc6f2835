use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_dim, ensure_positive, Error, Result};
use crate::hilbert::{Cocoercive, Proximable, Vector};

/// The inclusion `0 in subdiff(phi)(x) + B(x)`.
#[derive(Clone)]
pub struct InclusionProblem {
    phi: Arc<dyn Proximable>,
    b: Arc<dyn Cocoercive>,
}

impl InclusionProblem {
    pub fn new(phi: Arc<dyn Proximable>, b: Arc<dyn Cocoercive>) -> Result<Self> {
        ensure_dim(phi.dim(), b.dim())?;
        let beta = b.beta();
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "cocoercivity modulus must be finite and positive".into(),
            });
        }
        Ok(Self { phi, b })
    }

    pub fn phi(&self) -> &dyn Proximable {
        self.phi.as_ref()
    }

    pub fn operator(&self) -> &dyn Cocoercive {
        self.b.as_ref()
    }

    pub fn beta(&self) -> f64 {
        self.b.beta()
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    /// Whether `B` is known to be a gradient.
    pub fn is_potential(&self) -> bool {
        self.b.is_gradient()
    }

    pub fn check_point(&self, x: &Vector) -> Result<()> {
        ensure_dim(self.dim(), x.dim())
    }

    /// `prox_{mu phi}(x - mu B(x))`.
    pub(crate) fn forward_backward(&self, mu: f64, x: &Vector) -> Vector {
        let w = x.add_scaled(-mu, &self.b.apply(x));
        self.phi.prox_unchecked(mu, &w)
    }

    pub(crate) fn residual_unchecked(&self, mu: f64, x: &Vector) -> f64 {
        (x - &self.forward_backward(mu, x)).norm()
    }

    /// Fixed-point residual `|x - prox_{mu phi}(x - mu B x)|`, zero exactly
    /// on the solution set.
    pub fn residual(&self, mu: f64, x: &Vector) -> Result<f64> {
        ensure_positive("mu", mu)?;
        self.check_point(x)?;
        Ok(self.residual_unchecked(mu, x))
    }
}

impl fmt::Debug for InclusionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InclusionProblem")
            .field("phi", &self.phi.name())
            .field("b", &self.b.name())
            .field("beta", &self.beta())
            .field("dim", &self.dim())
            .finish()
    }
}
