use crate::cpt::{Cpt, Shape};
use crate::error::{Error, Result};

use super::{argmin_first, fit_groups, groups_by_key, ApproxResult};

/// Removes the edge from one parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PruneSpec {
    pub parent: usize,
}

impl PruneSpec {
    pub fn validate(&self, shape: &Shape) -> Result<()> {
        if self.parent >= shape.n_parents() {
            return Err(Error::Spec(format!(
                "cannot prune parent {} of {}",
                self.parent,
                shape.n_parents()
            )));
        }
        Ok(())
    }
}

/// Rows agreeing on every parent except the pruned one.
pub fn prune_groups(shape: &Shape, spec: &PruneSpec) -> Result<Vec<Vec<usize>>> {
    spec.validate(shape)?;
    let p = spec.parent;
    Ok(groups_by_key(shape, |c| {
        c.iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, &s)| s)
            .collect::<Vec<_>>()
    }))
}

pub fn prune_fit(truth: &Cpt, spec: &PruneSpec) -> Result<ApproxResult> {
    fit_groups(truth, &prune_groups(truth.shape(), spec)?)
}

/// Tries every single-parent prune; ties go to the lowest parent index.
pub fn prune_best(truth: &Cpt) -> Result<(PruneSpec, ApproxResult)> {
    let n = truth.shape().n_parents();
    if n < 2 {
        return Err(Error::Spec(format!(
            "pruning search needs at least two parents, table has {n}"
        )));
    }
    let mut fits = (0..n)
        .map(|parent| prune_fit(truth, &PruneSpec { parent }))
        .collect::<Result<Vec<_>>>()?;
    let best = argmin_first(fits.iter().map(|f| f.score)).expect("n >= 2");
    Ok((PruneSpec { parent: best }, fits.swap_remove(best)))
}
