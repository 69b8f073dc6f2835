//! Euclidean space, proximable functions, cocoercive operators and the
//! checks that certify their defining inequalities.

mod averaged;
mod checks;
mod operator;
mod prox;
mod vector;

pub use averaged::{averaged_composition, fbn_relaxation_bound, AveragedConstant};
pub use checks::{
    check_cocoercive, check_firmly_nonexpansive, check_forward_step_nonexpansive,
    check_prox_optimality, sample_pairs, sample_points, CocoercivityReport,
    FirmNonexpansiveReport, NonexpansiveReport, ProxOptimalityReport, SamplePair,
    DEFAULT_TOLERANCE,
};
pub use operator::{
    certify_linear_beta, Cocoercive, LinearOperator, NonexpansiveResidual, QuadraticGradient,
    Resolvent, Yosida,
};
pub use prox::{
    prox_eval, BallIndicator, BoxIndicator, ConvexQuadratic, HalfSquaredNorm, HalfspaceIndicator,
    L1Norm, Proximable, ZeroFunction,
};
pub use vector::Vector;
