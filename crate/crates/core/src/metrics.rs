//! Distances between child distributions and table-level scores.

use std::fmt;
use std::str::FromStr;

use crate::cpt::Cpt;
use crate::error::{Error, Result};

pub const DEFAULT_KL_EPSILON: f64 = 1e-9;

/// Total variation distance `½ Σ |p_y − q_y|`.
pub fn tvd_row(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(tvd_unchecked(p, q))
}

#[inline]
pub(crate) fn tvd_unchecked(p: &[f64], q: &[f64]) -> f64 {
    if p.len() == 2 {
        // binary child: ½(|Δ| + |−Δ|) collapses to |Δ|
        return (p[0] - q[0]).abs();
    }
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Kullback–Leibler divergence `KL(p || q)` with `q` smoothed by `epsilon`.
pub fn kl_row(p: &[f64], q: &[f64], epsilon: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Config(format!(
            "KL smoothing must be positive, got {epsilon}"
        )));
    }
    let total: f64 = q.iter().map(|v| v + epsilon).sum();
    Ok(p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / ((b + epsilon) / total)).ln())
        .sum())
}

/// Which row-wise distance a table score sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Tvd,
    Kl { epsilon: f64 },
}

impl Metric {
    pub fn row(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        match *self {
            Metric::Tvd => tvd_row(p, q),
            Metric::Kl { epsilon } => kl_row(p, q, epsilon),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tvd" => Ok(Metric::Tvd),
            "kl" => Ok(Metric::Kl {
                epsilon: DEFAULT_KL_EPSILON,
            }),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Tvd => f.write_str("tvd"),
            Metric::Kl { .. } => f.write_str("kl"),
        }
    }
}

/// Per-row distances between two tables of the same shape.
pub fn row_scores(truth: &Cpt, approx: &Cpt, metric: Metric) -> Result<Vec<f64>> {
    truth.same_shape(approx)?;
    truth
        .rows()
        .iter()
        .zip(approx.rows())
        .map(|(p, q)| metric.row(p, q))
        .collect()
}

/// Sum of row-wise total variation distances.
pub fn score_sum_tvd(truth: &Cpt, approx: &Cpt) -> Result<f64> {
    truth.same_shape(approx)?;
    Ok(sum_tvd_rows(truth.rows(), approx.rows()))
}

pub fn score(truth: &Cpt, approx: &Cpt, metric: Metric) -> Result<f64> {
    Ok(row_scores(truth, approx, metric)?.iter().sum())
}

#[inline]
pub(crate) fn sum_tvd_rows(truth: &[Vec<f64>], approx: &[Vec<f64>]) -> f64 {
    truth
        .iter()
        .zip(approx)
        .map(|(p, q)| tvd_unchecked(p, q))
        .sum()
}
