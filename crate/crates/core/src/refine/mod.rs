//! Structural refinements of a local structure.
//!
//! Pruning, divorcing and simple canonical models force rows of the table to
//! share distributions, so they are fitted in closed form through
//! [`fit_grouping`](crate::grouping::fit_grouping). Causal-interaction models
//! (ICI, PICI, SICI) are parametric forward evaluators whose parameters are
//! searched by the optimizer.

mod divorce;
mod ici;
mod mechanism;
mod prune;
mod savings;
mod scm;
mod sici;

use std::collections::HashMap;
use std::hash::Hash;

pub use divorce::{divorce_best, divorce_fit, divorce_groups, DivorceSpec, Gate};
pub use ici::{ici_evaluate, noisy_average_lower, noisy_or, pici_evaluate, IciSpec};
pub use mechanism::{Combiner, MechanismModel};
pub use prune::{prune_best, prune_fit, prune_groups, PruneSpec};
pub use savings::{param_savings, RefinementSpec};
pub use scm::{scm_evaluate, scm_fit, simple_and, ScmSpec};
pub use sici::{ds_sici_evaluate, us_sici_evaluate, Lower, SiciSpec};

use crate::cpt::{Cpt, Shape};
use crate::error::Result;
use crate::grouping::{expand_grouped, fit_grouping};
use crate::metrics::score_sum_tvd;

/// Scores closer than this are treated as ties by every argmin.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// An approximate table expanded to the full shape, with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub cpt: Cpt,
    pub score: f64,
    pub free_params: usize,
}

impl ApproxResult {
    /// Scores `approx` against `truth`, relabelling it with truth's variables.
    pub fn scored(truth: &Cpt, approx: &Cpt, free_params: usize) -> Result<Self> {
        let cpt = truth.with_rows(approx.rows().to_vec())?;
        let score = score_sum_tvd(truth, &cpt)?;
        Ok(Self {
            cpt,
            score,
            free_params,
        })
    }
}

/// Fits a row grouping by medians and scores the expanded table.
pub(crate) fn fit_groups(truth: &Cpt, groups: &[Vec<usize>]) -> Result<ApproxResult> {
    let grouping = fit_grouping(truth, groups)?;
    let cpt = expand_grouped(truth, &grouping)?;
    let score = score_sum_tvd(truth, &cpt)?;
    Ok(ApproxResult {
        cpt,
        score,
        free_params: groups.len() * (truth.shape().child_card() - 1),
    })
}

/// Groups rows by a key of their parent configuration, in order of first
/// appearance.
pub(crate) fn groups_by_key<K, F>(shape: &Shape, mut key: F) -> Vec<Vec<usize>>
where
    K: Eq + Hash,
    F: FnMut(&[usize]) -> K,
{
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (row, config) in shape.configs().enumerate() {
        let next = groups.len();
        let g = *index.entry(key(config.values())).or_insert(next);
        if g == next {
            groups.push(Vec::new());
        }
        groups[g].push(row);
    }
    groups
}

/// Index of the first minimum, ignoring differences below [`TIE_TOLERANCE`].
pub(crate) fn argmin_first<I: IntoIterator<Item = f64>>(scores: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if s >= b - TIE_TOLERANCE => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
