use std::collections::BTreeMap;

use serde::Serialize;

use crate::hilbert::Vector;

/// Names of the scalar series recorded by the integrators and splitters.
pub mod series {
    pub const RESIDUAL: &str = "residual";
    /// `|x_j - x_{j-1}|^2` summed over the steps between two records.
    pub const STEP_NORM_SQ: &str = "step_norm_sq";
    pub const Y_STEP_NORM_SQ: &str = "y_step_norm_sq";
    pub const B_ERROR: &str = "b_error";
    pub const A_K: &str = "a_k";
    pub const GAMMA_Z: &str = "gamma_z";
    pub const BIG_G_Z: &str = "big_g_z";
    pub const G_Z: &str = "g_z";
    pub const H_Z: &str = "h_z";
    pub const K_Z: &str = "k_z";
    pub const H_PLUS_K: &str = "h_z_plus_2beta_k_z";
    /// `|v + B x|`
    pub const V_PLUS_BX: &str = "v_plus_bx";
    /// `|v + B z|`
    pub const DUAL_ERROR: &str = "dual_error";
    /// `|(y - x) + mu B z|`
    pub const Y_MINUS_X_ERROR: &str = "y_minus_x_error";
    /// `|x_j - x_{j-1}|^2 / (t_j - t_{j-1})`
    pub const ENERGY_INCREMENT: &str = "energy_increment";
    pub const VELOCITY: &str = "velocity";
}

/// Time- or iteration-indexed record of a run.
///
/// Every series has one entry per recorded sample; quantities that are not
/// defined at a sample are stored as NaN.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Trace {
    pub index: Vec<f64>,
    pub states: Vec<Vector>,
    /// `duals[j]` is a subgradient of `phi`; for most schemes at `states[j]`.
    pub duals: Option<Vec<Vector>>,
    /// Additional vector series such as the lifted variable `y`.
    pub vectors: BTreeMap<String, Vec<Vector>>,
    pub aux: BTreeMap<String, Vec<f64>>,
    /// `None` for continuous flows, which have no stopping rule.
    pub converged: Option<bool>,
    /// Steps or iterations actually performed.
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// One recorded sample.
pub struct Sample<'a> {
    pub index: f64,
    pub state: Vector,
    pub dual: Option<Vector>,
    pub vectors: Vec<(&'a str, Vector)>,
    pub values: Vec<(&'a str, f64)>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.aux.get(name).map(Vec::as_slice)
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.series(name).and_then(|s| s.last().copied())
    }

    pub fn last_state(&self) -> Option<&Vector> {
        self.states.last()
    }

    pub fn last_dual(&self) -> Option<&Vector> {
        self.duals.as_ref().and_then(|d| d.last())
    }

    pub fn vector_series(&self, name: &str) -> Option<&[Vector]> {
        self.vectors.get(name).map(Vec::as_slice)
    }

    pub fn push(&mut self, sample: Sample<'_>) {
        let n = self.len();
        self.index.push(sample.index);
        self.states.push(sample.state);
        match (sample.dual, n) {
            (Some(v), 0) => self.duals = Some(vec![v]),
            (Some(v), _) => {
                if let Some(d) = self.duals.as_mut() {
                    d.push(v);
                }
            }
            (None, _) => self.duals = None,
        }
        for (name, v) in sample.vectors {
            let col = self.vectors.entry(name.to_string()).or_default();
            if col.len() == n {
                col.push(v);
            }
        }
        self.vectors.retain(|_, col| col.len() == n + 1);
        for (name, value) in sample.values {
            let col = self
                .aux
                .entry(name.to_string())
                .or_insert_with(|| vec![f64::NAN; n]);
            col.push(value);
        }
        for col in self.aux.values_mut() {
            if col.len() == n {
                col.push(f64::NAN);
            }
        }
    }

    /// Every series has the same length and the index increases strictly.
    pub fn is_consistent(&self) -> bool {
        let n = self.len();
        self.states.len() == n
            && self.duals.as_ref().is_none_or(|d| d.len() == n)
            && self.vectors.values().all(|c| c.len() == n)
            && self.aux.values().all(|c| c.len() == n)
            && self.index.windows(2).all(|w| w[0] < w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: f64) -> Vector {
        Vector::from_slice(&[c]).unwrap()
    }

    #[test]
    fn missing_values_are_padded_with_nan() {
        let mut t = Trace::default();
        t.push(Sample {
            index: 0.0,
            state: v(1.0),
            dual: Some(v(0.0)),
            vectors: vec![],
            values: vec![("a", 1.0)],
        });
        t.push(Sample {
            index: 1.0,
            state: v(0.5),
            dual: Some(v(0.0)),
            vectors: vec![],
            values: vec![("b", 2.0)],
        });
        assert!(t.is_consistent());
        assert_eq!(t.series("a").unwrap()[0], 1.0);
        assert!(t.series("a").unwrap()[1].is_nan());
        assert!(t.series("b").unwrap()[0].is_nan());
        assert_eq!(t.last("b"), Some(2.0));
        assert_eq!(t.duals.as_ref().unwrap().len(), 2);
    }
}
