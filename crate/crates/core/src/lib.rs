//! Forward-backward splitting for structured monotone inclusions
//!
//! ```text
//! 0 in subdiff(phi)(x) + B(x)
//! ```
//!
//! with `phi` convex, proper and lower semicontinuous and `B` a
//! `beta`-cocoercive operator on `R^n`. The crate provides the operator
//! catalog ([`hilbert`]), three continuous dynamics ([`flows`]), the
//! discrete schemes FBN, classical and relaxed forward-backward
//! ([`splitters`]), Lyapunov diagnostics ([`lyapunov`]) and a small set of
//! certified test problems ([`gallery`]).
//!
//! ```
//! use fbsplit::{gallery, splitters::{run, StepPolicy, StopRule}};
//!
//! let entry = gallery::gallery_entry("box-quadratic").unwrap();
//! let beta = entry.problem.beta();
//! let policy = StepPolicy::fbn(1.4, beta, beta).unwrap();
//! let trace = run(&entry.problem, &policy, &entry.start, &StopRule::new(1e-10, 10_000), None).unwrap();
//! assert_eq!(trace.converged, Some(true));
//! ```

pub mod error;
pub mod flows;
pub mod gallery;
pub mod hilbert;
pub mod lyapunov;
pub mod problem;
pub mod splitters;
pub mod trace;

pub use error::{Error, Result};
pub use hilbert::Vector;
pub use problem::InclusionProblem;
pub use trace::Trace;
