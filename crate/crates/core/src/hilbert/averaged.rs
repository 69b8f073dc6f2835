use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};

/// Averaging constant `alpha` in `(0, 1)` of `T = (1 - alpha) I + alpha R`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AveragedConstant(f64);

impl AveragedConstant {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "averaging constant must lie in (0, 1)".into(),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Averaging constant of `T1 o T2` for `alpha_i`-averaged `T_i`:
/// `alpha = 1 / delta` with `delta = 1/2 + min(1/alpha_1, 1/alpha_2) / 2`.
pub fn averaged_composition(a1: AveragedConstant, a2: AveragedConstant) -> AveragedConstant {
    let delta = 0.5 + 0.5 * (1.0 / a1.0).min(1.0 / a2.0);
    AveragedConstant(1.0 / delta)
}

/// Upper bound `delta = 1/2 + min(1, beta/mu)` on the FBN relaxation
/// parameter. Requires `0 < mu < 2 beta`, which makes `delta > 1`.
pub fn fbn_relaxation_bound(mu: f64, beta: f64) -> Result<f64> {
    ensure_positive("mu", mu)?;
    ensure_positive("beta", beta)?;
    if mu >= 2.0 * beta {
        return Err(Error::Inadmissible(format!(
            "mu={mu} >= 2*beta={} (Hypothesis H requires 0 < mu < 2 beta)",
            2.0 * beta
        )));
    }
    Ok(0.5 + (beta / mu).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: f64) -> AveragedConstant {
        AveragedConstant::new(x).unwrap()
    }

    #[test]
    fn two_halves_compose_to_two_thirds() {
        let out = averaged_composition(a(0.5), a(0.5)).value();
        assert!((out - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn equal_constants_follow_closed_form() {
        for alpha in [0.1, 0.3, 0.77, 0.95] {
            let out = averaged_composition(a(alpha), a(alpha)).value();
            assert!((out - 2.0 * alpha / (alpha + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn composition_tends_to_one() {
        let out = averaged_composition(a(1.0 - 1e-9), a(1.0 - 1e-9)).value();
        assert!(out < 1.0 && out > 1.0 - 1e-8);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(AveragedConstant::new(0.0).is_err());
        assert!(AveragedConstant::new(1.0).is_err());
        assert!(AveragedConstant::new(-0.2).is_err());
    }

    #[test]
    fn relaxation_bound_values() {
        assert_eq!(fbn_relaxation_bound(1.0, 1.0).unwrap(), 1.5);
        assert_eq!(fbn_relaxation_bound(0.25, 1.0).unwrap(), 1.5);
        assert!((fbn_relaxation_bound(1.5, 1.0).unwrap() - 7.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn relaxation_bound_rejects_large_mu() {
        let err = fbn_relaxation_bound(2.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("Hypothesis H"));
    }

    #[test]
    fn prox_and_forward_blocks_give_the_fbn_bound() {
        // prox is 1/2-averaged and I - mu B is mu/(2 beta)-averaged.
        for (mu, beta) in [(0.3, 1.0), (1.0, 1.0), (1.7, 1.0), (0.05, 0.1)] {
            let t = averaged_composition(a(0.5), a(mu / (2.0 * beta)));
            let delta = fbn_relaxation_bound(mu, beta).unwrap();
            assert!((1.0 / t.value() - delta).abs() < 1e-12);
        }
    }
}
