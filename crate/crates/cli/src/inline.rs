//! Inline problem compositions, e.g.
//!
//! ```text
//! phi      = box:0,0|1,1
//! operator = quadratic:1,0,0,1|2,-1
//! ```
//!
//! Functions: `zero:<dim>`, `half-sq:<dim>`, `l1:<dim>|<weight>`,
//! `box:<lo>|<hi>`, `ball:<center>|<radius>`, `halfspace:<normal>|<offset>`.
//!
//! Operators: `identity:<dim>`, `linear:<M row-major>|<offset>`,
//! `quadratic:<Q row-major>|<r>` (B = Qx - r), `rotation:<theta>`
//! (B = I - R_theta).

use std::sync::Arc;

use nalgebra::DMatrix;

use fbsplit::hilbert::{
    BallIndicator, BoxIndicator, Cocoercive, HalfSquaredNorm, HalfspaceIndicator, L1Norm,
    LinearOperator, NonexpansiveResidual, Proximable, QuadraticGradient, ZeroFunction,
};
use fbsplit::{Error, InclusionProblem, Result, Vector};

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("not a number: '{t}'")))
        })
        .collect()
}

fn parse_scalar(s: &str) -> Result<f64> {
    let v = parse_list(s)?;
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(Error::InvalidInput(format!("expected one number, got '{s}'"))),
    }
}

fn parse_dim(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("not a dimension: '{s}'")))
}

fn split_kind(s: &str) -> (&str, Vec<&str>) {
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let args = if rest.is_empty() { vec![] } else { rest.split('|').collect() };
    (kind.trim(), args)
}

fn square(entries: Vec<f64>) -> Result<DMatrix<f64>> {
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != entries.len() {
        return Err(Error::InvalidInput(format!(
            "{} matrix entries do not form a square matrix",
            entries.len()
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, &entries))
}

fn arity(kind: &str, args: &[&str], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("'{kind}' takes {n} '|'-separated arguments")))
    }
}

pub fn parse_phi(s: &str) -> Result<Arc<dyn Proximable>> {
    let (kind, args) = split_kind(s);
    let phi: Arc<dyn Proximable> = match kind {
        "zero" => {
            arity(kind, &args, 1)?;
            Arc::new(ZeroFunction::new(parse_dim(args[0])?))
        }
        "half-sq" => {
            arity(kind, &args, 1)?;
            Arc::new(HalfSquaredNorm::new(parse_dim(args[0])?))
        }
        "l1" => {
            arity(kind, &args, 2)?;
            Arc::new(L1Norm::new(parse_dim(args[0])?, parse_scalar(args[1])?)?)
        }
        "box" => {
            arity(kind, &args, 2)?;
            Arc::new(BoxIndicator::new(parse_list(args[0])?, parse_list(args[1])?)?)
        }
        "ball" => {
            arity(kind, &args, 2)?;
            Arc::new(BallIndicator::new(Vector::new(parse_list(args[0])?)?, parse_scalar(args[1])?)?)
        }
        "halfspace" => {
            arity(kind, &args, 2)?;
            Arc::new(HalfspaceIndicator::new(
                Vector::new(parse_list(args[0])?)?,
                parse_scalar(args[1])?,
            )?)
        }
        _ => return Err(Error::InvalidInput(format!("unknown function '{kind}'"))),
    };
    Ok(phi)
}

pub fn parse_operator(s: &str) -> Result<Arc<dyn Cocoercive>> {
    let (kind, args) = split_kind(s);
    let op: Arc<dyn Cocoercive> = match kind {
        "identity" => {
            arity(kind, &args, 1)?;
            Arc::new(LinearOperator::identity(parse_dim(args[0])?))
        }
        "linear" => {
            arity(kind, &args, 2)?;
            Arc::new(LinearOperator::new(square(parse_list(args[0])?)?, Vector::new(parse_list(args[1])?)?)?)
        }
        "quadratic" => {
            arity(kind, &args, 2)?;
            Arc::new(QuadraticGradient::new(square(parse_list(args[0])?)?, Vector::new(parse_list(args[1])?)?)?)
        }
        "rotation" => {
            arity(kind, &args, 1)?;
            Arc::new(NonexpansiveResidual::rotation(parse_scalar(args[0])?))
        }
        _ => return Err(Error::InvalidInput(format!("unknown operator '{kind}'"))),
    };
    Ok(op)
}

pub fn parse_problem(phi: &str, operator: &str) -> Result<InclusionProblem> {
    InclusionProblem::new(parse_phi(phi)?, parse_operator(operator)?)
}
