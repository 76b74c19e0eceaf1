//! Row groupings that share one child distribution, and their optimal fit.
//!
//! Under the summed TVD loss each group contributes `Σ_j |p_j − q|` per child
//! state, which the median minimizes.

use crate::cpt::{check_distribution, Cpt, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

/// Median of `values`; even-length input yields the midpoint of the two
/// central values.
pub fn median_lad(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median of an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(median_sorted(&sorted))
}

#[inline]
pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Checks that `groups` is a partition of `0..n_rows` into nonempty blocks.
pub fn validate_partition(groups: &[Vec<usize>], n_rows: usize) -> Result<()> {
    let mut seen = vec![false; n_rows];
    for (g, members) in groups.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Partition(format!("group {g} is empty")));
        }
        for &row in members {
            if row >= n_rows {
                return Err(Error::Partition(format!(
                    "group {g} names row {row}, table has {n_rows}"
                )));
            }
            if std::mem::replace(&mut seen[row], true) {
                return Err(Error::Partition(format!("row {row} is covered twice")));
            }
        }
    }
    if let Some(row) = seen.iter().position(|s| !s) {
        return Err(Error::Partition(format!("row {row} is not covered")));
    }
    Ok(())
}

/// A partition of rows with one shared child distribution per block.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    groups: Vec<Vec<usize>>,
    params: Vec<Vec<f64>>,
}

impl Grouping {
    pub fn new(groups: Vec<Vec<usize>>, params: Vec<Vec<f64>>) -> Result<Self> {
        if groups.len() != params.len() {
            return Err(Error::Partition(format!(
                "{} groups but {} parameter vectors",
                groups.len(),
                params.len()
            )));
        }
        for (g, q) in params.iter().enumerate() {
            let len = params[0].len();
            check_distribution(q, len, NORMALIZATION_TOLERANCE).map_err(|reason| {
                Error::NotNormalized {
                    row: format!("group {g}"),
                    reason,
                }
            })?;
        }
        Ok(Self { groups, params })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Fits each group's shared distribution by per-state medians.
pub fn fit_grouping(truth: &Cpt, groups: &[Vec<usize>]) -> Result<Grouping> {
    validate_partition(groups, truth.n_rows())?;
    let child_card = truth.shape().child_card();
    let mut column = Vec::new();
    let params = groups
        .iter()
        .map(|members| {
            let mut q: Vec<f64> = (0..child_card)
                .map(|state| {
                    column.clear();
                    column.extend(members.iter().map(|&r| truth.row(r)[state]));
                    column.sort_by(f64::total_cmp);
                    median_sorted(&column)
                })
                .collect();
            normalize_medians(&mut q);
            q
        })
        .collect();
    Grouping::new(groups.to_vec(), params)
}

/// Turns per-state medians into a distribution.
///
/// Binary: `(m, 1 − m)` exactly. Larger children are divided by their sum,
/// falling back to uniform when every median is zero.
#[inline]
pub(crate) fn normalize_medians(q: &mut [f64]) {
    if q.len() == 2 {
        q[1] = 1.0 - q[0];
        return;
    }
    let sum: f64 = q.iter().sum();
    if sum > 0.0 {
        q.iter_mut().for_each(|v| *v /= sum);
    } else {
        let u = 1.0 / q.len() as f64;
        q.iter_mut().for_each(|v| *v = u);
    }
}

/// Full-shape table where each row carries its group's distribution.
pub fn expand_grouped(template: &Cpt, grouping: &Grouping) -> Result<Cpt> {
    validate_partition(grouping.groups(), template.n_rows())?;
    let child_card = template.shape().child_card();
    if let Some(q) = grouping.params().first() {
        if q.len() != child_card {
            return Err(Error::ShapeMismatch(format!(
                "group distributions have {} states, child has {child_card}",
                q.len()
            )));
        }
    }
    let mut rows = vec![Vec::new(); template.n_rows()];
    for (members, q) in grouping.groups().iter().zip(grouping.params()) {
        for &r in members {
            rows[r] = q.clone();
        }
    }
    template.with_rows(rows)
}
