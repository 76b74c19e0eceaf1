use crate::cpt::{check_distribution, Cpt, ParentConfig, Shape, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

use super::{fit_groups, ApproxResult};

/// Deterministic map from parent configurations to a binary node `M`.
///
/// `m1[row]` is true when that row's configuration sends `M` to 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScmSpec {
    m1: Vec<bool>,
}

impl ScmSpec {
    pub fn new(m1: Vec<bool>) -> Result<Self> {
        if m1.iter().all(|&b| b) || m1.iter().all(|&b| !b) {
            return Err(Error::Spec(
                "SCM bipartition must have two nonempty blocks".into(),
            ));
        }
        Ok(Self { m1 })
    }

    pub fn from_fn(shape: &Shape, f: impl Fn(&ParentConfig) -> bool) -> Result<Self> {
        Self::new(shape.configs().map(|c| f(&c)).collect())
    }

    /// Bit `r` of `mask` set means row `r` is in the `M = 1` block; rows past
    /// bit 63 are in the `M = 0` block.
    pub fn from_mask(n_rows: usize, mask: u64) -> Result<Self> {
        Self::new((0..n_rows).map(|r| r < 64 && mask >> r & 1 == 1).collect())
    }

    pub fn m1(&self) -> &[bool] {
        &self.m1
    }

    pub fn n_rows(&self) -> usize {
        self.m1.len()
    }

    /// `[rows with M = 0, rows with M = 1]`.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(), Vec::new()];
        for (r, &b) in self.m1.iter().enumerate() {
            groups[b as usize].push(r);
        }
        groups
    }

    pub fn block_sizes(&self) -> (usize, usize) {
        let ones = self.m1.iter().filter(|&&b| b).count();
        (self.m1.len() - ones, ones)
    }
}

/// The "simple AND" structure: `M = 1` iff every parent is in state 1.
pub fn simple_and(shape: &Shape) -> Result<ScmSpec> {
    ScmSpec::from_fn(shape, |c| c.values().iter().all(|&s| s == 1))
}

/// Median fit of `Y | M` for a fixed bipartition.
pub fn scm_fit(truth: &Cpt, spec: &ScmSpec) -> Result<ApproxResult> {
    if spec.n_rows() != truth.n_rows() {
        return Err(Error::ShapeMismatch(format!(
            "SCM spec covers {} rows, table has {}",
            spec.n_rows(),
            truth.n_rows()
        )));
    }
    fit_groups(truth, &spec.groups())
}

/// Forward model `p(y | x) = p(y | m = f(x))` with `lower[m]` as `Y | M = m`.
pub fn scm_evaluate(shape: &Shape, spec: &ScmSpec, lower: &[Vec<f64>; 2]) -> Result<Cpt> {
    if spec.n_rows() != shape.n_rows() {
        return Err(Error::ShapeMismatch(format!(
            "SCM spec covers {} rows, table has {}",
            spec.n_rows(),
            shape.n_rows()
        )));
    }
    for (m, q) in lower.iter().enumerate() {
        check_distribution(q, shape.child_card(), NORMALIZATION_TOLERANCE).map_err(|reason| {
            Error::NotNormalized {
                row: format!("M={m}"),
                reason,
            }
        })?;
    }
    let rows = spec.m1.iter().map(|&b| lower[b as usize].clone()).collect();
    Cpt::from_shape(shape, rows)
}
