//! Built-in problem instances with reference solutions certified by an
//! independent small-step forward-backward oracle.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hilbert::{
    BallIndicator, BoxIndicator, HalfspaceIndicator, L1Norm, LinearOperator, NonexpansiveResidual,
    QuadraticGradient, Vector,
};
use crate::problem::InclusionProblem;

pub const ORACLE_TOL: f64 = 1e-12;
pub const ORACLE_MAX_ITERS: usize = 10_000_000;
/// Residual (probe `mu = beta`) every reference must meet.
pub const REFERENCE_TOL: f64 = 1e-11;

/// Seed of the lasso design matrix and observations.
pub const LASSO_SEED: u64 = 20_240_611;
pub const LASSO_ROWS: usize = 200;
pub const LASSO_COLS: usize = 10;
pub const LASSO_WEIGHT: f64 = 0.1;

/// Classical forward-backward with `h = beta / 10` from the origin.
pub fn oracle_solve(problem: &InclusionProblem) -> Result<Vector> {
    oracle_solve_from(problem, &Vector::zeros(problem.dim()))
}

/// Runs until the residual is below [`ORACLE_TOL`] both at the oracle step
/// and at `mu = beta`, or fails with [`Error::OracleFailure`].
pub fn oracle_solve_from(problem: &InclusionProblem, x0: &Vector) -> Result<Vector> {
    problem.check_point(x0)?;
    let beta = problem.beta();
    let h = beta / 10.0;
    let b = problem.operator();
    let phi = problem.phi();
    let mut x = x0.clone();
    let mut res = f64::INFINITY;
    for k in 0..ORACLE_MAX_ITERS {
        let next = phi.prox_unchecked(h, &x.add_scaled(-h, &b.apply(&x)));
        res = (&next - &x).norm();
        x = next;
        if !res.is_finite() {
            return Err(Error::OracleFailure { residual: res, iterations: k + 1 });
        }
        if res <= ORACLE_TOL && problem.residual_unchecked(beta, &x) <= ORACLE_TOL {
            return Ok(x);
        }
    }
    Err(Error::OracleFailure {
        residual: res,
        iterations: ORACLE_MAX_ITERS,
    })
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub problem: InclusionProblem,
    /// Points of the solution set known in closed form.
    pub known_solutions: Vec<Vector>,
    /// Oracle solution.
    pub reference: Vector,
    /// Feasible default start with a known subgradient.
    pub start: Vector,
    pub unique: bool,
    pub hypothesis: &'static str,
    pub notes: &'static str,
}

impl GalleryEntry {
    fn build(
        name: &'static str,
        problem: InclusionProblem,
        known_solutions: Vec<Vector>,
        start: Vector,
        unique: bool,
        hypothesis: &'static str,
        notes: &'static str,
    ) -> Result<Self> {
        let reference = oracle_solve_from(&problem, &start)?;
        let beta = problem.beta();
        for z in known_solutions.iter().chain([&reference]) {
            let r = problem.residual(beta, z)?;
            if r > REFERENCE_TOL {
                return Err(Error::Uncertified {
                    residual: r,
                    tolerance: REFERENCE_TOL,
                });
            }
        }
        Ok(Self {
            name,
            problem,
            known_solutions,
            reference,
            start,
            unique,
            hypothesis,
            notes,
        })
    }

    pub fn dim(&self) -> usize {
        self.problem.dim()
    }
}

fn v(c: &[f64]) -> Vector {
    Vector::from_slice(c).expect("finite literal")
}

fn box_quadratic() -> Result<GalleryEntry> {
    let problem = InclusionProblem::new(
        Arc::new(BoxIndicator::new(vec![0.0, 0.0], vec![1.0, 1.0])?),
        Arc::new(QuadraticGradient::centered(DMatrix::identity(2, 2), &v(&[2.0, -1.0]))?),
    )?;
    GalleryEntry::build(
        "box-quadratic",
        problem,
        vec![v(&[1.0, 0.0])],
        v(&[0.5, 0.5]),
        true,
        "strong monotonicity",
        "box [0,1]^2, B = x - (2,-1); unique solution (1,0), the projection of (2,-1)",
    )
}

/// Least-squares data `(A^T A / m, A^T b / m)` for the seeded design.
pub fn lasso_data() -> (DMatrix<f64>, Vector) {
    let mut rng = ChaCha8Rng::seed_from_u64(LASSO_SEED);
    let a = DMatrix::<f64>::from_fn(LASSO_ROWS, LASSO_COLS, |_, _| StandardNormal.sample(&mut rng));
    let truth = Vector::from_fn(LASSO_COLS, |j| match j {
        0 => 1.5,
        3 => -2.0,
        6 => 0.8,
        _ => 0.0,
    });
    let noise = nalgebra::DVector::<f64>::from_fn(LASSO_ROWS, |_, _| {
        let e: f64 = StandardNormal.sample(&mut rng);
        0.1 * e
    });
    let obs = &a * truth.as_dvector() + noise;
    let m = LASSO_ROWS as f64;
    let q = a.transpose() * &a / m;
    // exact symmetry for the certificate
    let q = (&q + q.transpose()) * 0.5;
    let r = Vector::new((a.transpose() * obs / m).iter().copied().collect()).expect("finite data");
    (q, r)
}

fn lasso() -> Result<GalleryEntry> {
    let (q, r) = lasso_data();
    let problem = InclusionProblem::new(
        Arc::new(L1Norm::new(LASSO_COLS, LASSO_WEIGHT)?),
        Arc::new(QuadraticGradient::new(q, r)?),
    )?;
    GalleryEntry::build(
        "lasso",
        problem,
        vec![],
        Vector::zeros(LASSO_COLS),
        true,
        "potential case, beta = 1/L",
        "0.1 |x|_1 plus the mean squared error of a seeded 200x10 Gaussian design",
    )
}

fn halfspace_nonunique() -> Result<GalleryEntry> {
    let problem = InclusionProblem::new(
        Arc::new(HalfspaceIndicator::new(v(&[-1.0, 0.0]), -1.0)?),
        Arc::new(LinearOperator::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Vector::zeros(2),
        )?),
    )?;
    GalleryEntry::build(
        "halfspace-nonunique",
        problem,
        vec![v(&[1.0, 0.0]), v(&[1.0, 5.0]), v(&[1.0, -3.0])],
        v(&[2.0, 0.5]),
        false,
        "constancy of B on the solution set",
        "{x1 >= 1} in R^2, B(x) = (x1, 0); every (1, s) solves, B = (1, 0) on all of them",
    )
}

fn rotation_residual() -> Result<GalleryEntry> {
    let problem = InclusionProblem::new(
        Arc::new(BallIndicator::new(v(&[2.0, 1.0]), 1.0)?),
        Arc::new(NonexpansiveResidual::rotation(FRAC_PI_2)),
    )?;
    GalleryEntry::build(
        "rotation-residual",
        problem,
        vec![],
        v(&[2.0, 1.0]),
        true,
        "non-potential B, beta = 1/2",
        "ball of radius 1 around (2,1), B = I - R with R the quarter-turn rotation",
    )
}

fn potential_largestep() -> Result<GalleryEntry> {
    let problem = InclusionProblem::new(
        Arc::new(BoxIndicator::new(vec![0.0], vec![1.0])?),
        Arc::new(QuadraticGradient::centered(DMatrix::identity(1, 1), &v(&[2.0]))?),
    )?;
    GalleryEntry::build(
        "potential-largestep",
        problem,
        vec![v(&[1.0])],
        v(&[0.5]),
        true,
        "gradient B, proximal-gradient flow with mu > 4 beta",
        "interval [0,1], B(x) = x - 2; solution 1",
    )
}

pub const GALLERY_NAMES: [&str; 5] = [
    "box-quadratic",
    "lasso",
    "halfspace-nonunique",
    "rotation-residual",
    "potential-largestep",
];

/// Builds one entry by name.
pub fn gallery_entry(name: &str) -> Result<GalleryEntry> {
    match name {
        "box-quadratic" => box_quadratic(),
        "lasso" => lasso(),
        "halfspace-nonunique" => halfspace_nonunique(),
        "rotation-residual" => rotation_residual(),
        "potential-largestep" => potential_largestep(),
        _ => Err(Error::InvalidInput(format!("unknown gallery problem '{name}'"))),
    }
}

/// All entries whose oracle succeeded.
pub fn builtin_gallery() -> Vec<GalleryEntry> {
    GALLERY_NAMES.iter().filter_map(|n| gallery_entry(n).ok()).collect()
}
