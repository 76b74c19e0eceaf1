//! Conditional probability tables and their row indexing.
//!
//! Rows are laid out in mixed-radix order with the first parent varying
//! fastest, so for parents `(A, B)` the rows run `(a0,b0), (a1,b0), (a0,b1), ...`.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Absolute tolerance on row sums accepted by [`Cpt::new`].
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A discrete variable with named states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    name: String,
    states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: Vec<S>) -> Result<Self> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if states.len() < 2 {
            return Err(Error::Variable(format!(
                "{name} needs at least two states, got {}",
                states.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(Error::Variable(format!("{name} has duplicate state {s:?}")));
            }
        }
        Ok(Self { name, states })
    }

    /// A variable with generated state labels `s0, s1, ...`.
    pub fn with_cardinality(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        Self::new(name, (0..cardinality).map(|i| format!("s{i}")).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Cardinalities of a local structure `(s_1, ..., s_n) -> s_c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    parents: Vec<usize>,
    child: usize,
}

impl Shape {
    pub fn new(parents: Vec<usize>, child: usize) -> Result<Self> {
        if child < 2 {
            return Err(Error::Cardinality(format!("child cardinality {child} < 2")));
        }
        if let Some(i) = parents.iter().position(|&s| s == 0) {
            return Err(Error::Cardinality(format!("parent {i} has cardinality 0")));
        }
        parents
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .ok_or_else(|| Error::Cardinality("row count overflows".into()))?;
        Ok(Self { parents, child })
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parents
    }

    pub fn child_card(&self) -> usize {
        self.child
    }

    pub fn n_parents(&self) -> usize {
        self.parents.len()
    }

    pub fn n_rows(&self) -> usize {
        self.parents.iter().product()
    }

    /// Free parameters of the full table.
    pub fn param_count(&self) -> usize {
        self.n_rows() * (self.child - 1)
    }

    pub fn row_index(&self, config: &ParentConfig) -> Result<usize> {
        row_index(config, &self.parents)
    }

    pub fn config_of(&self, index: usize) -> Result<ParentConfig> {
        config_of(index, &self.parents)
    }

    /// All parent configurations in row order.
    pub fn configs(&self) -> impl Iterator<Item = ParentConfig> + '_ {
        (0..self.n_rows()).map(move |i| config_unchecked(i, &self.parents))
    }
}

/// One state index per parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParentConfig(pub Vec<usize>);

impl ParentConfig {
    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

/// Number of free parameters needed to specify a full table.
pub fn param_count(parents: &[usize], child_card: usize) -> Result<usize> {
    Ok(Shape::new(parents.to_vec(), child_card)?.param_count())
}

pub fn row_index(config: &ParentConfig, parents: &[usize]) -> Result<usize> {
    if config.0.len() != parents.len() {
        return Err(Error::ShapeMismatch(format!(
            "configuration has {} values for {} parents",
            config.0.len(),
            parents.len()
        )));
    }
    let mut index = 0;
    let mut stride = 1;
    for (parent, (&state, &card)) in config.0.iter().zip(parents).enumerate() {
        if state >= card {
            return Err(Error::StateOutOfRange {
                parent,
                state,
                cardinality: card,
            });
        }
        index += state * stride;
        stride *= card;
    }
    Ok(index)
}

pub fn config_of(index: usize, parents: &[usize]) -> Result<ParentConfig> {
    let rows: usize = parents.iter().product();
    if index >= rows {
        return Err(Error::IndexOutOfRange { index, rows });
    }
    Ok(config_unchecked(index, parents))
}

fn config_unchecked(mut index: usize, parents: &[usize]) -> ParentConfig {
    let mut values = Vec::with_capacity(parents.len());
    for &card in parents {
        values.push(index % card);
        index /= card;
    }
    ParentConfig(values)
}

/// A child variable's distribution for every configuration of its parents.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    child: Variable,
    parents: Vec<Variable>,
    shape: Shape,
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new(child: Variable, parents: Vec<Variable>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let shape = Shape::new(
            parents.iter().map(Variable::cardinality).collect(),
            child.cardinality(),
        )?;
        if rows.len() != shape.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} rows, got {}",
                shape.n_rows(),
                rows.len()
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            check_distribution(row, shape.child_card(), NORMALIZATION_TOLERANCE).map_err(
                |reason| Error::NotNormalized {
                    row: k.to_string(),
                    reason,
                },
            )?;
        }
        Ok(Self {
            child,
            parents,
            shape,
            rows,
        })
    }

    /// A table over generated variable names; handy for synthetic problems.
    pub fn from_shape(shape: &Shape, rows: Vec<Vec<f64>>) -> Result<Self> {
        let child = Variable::with_cardinality("Y", shape.child_card())?;
        let parents = shape
            .parent_cards()
            .iter()
            .enumerate()
            .map(|(i, &s)| Variable::with_cardinality(format!("X{}", i + 1), s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(child, parents, rows)
    }

    /// Same variables, different rows.
    pub fn with_rows(&self, rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(self.child.clone(), self.parents.clone(), rows)
    }

    pub fn child(&self) -> &Variable {
        &self.child
    }

    pub fn parents(&self) -> &[Variable] {
        &self.parents
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.rows[index]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn parent_index(&self, name: &str) -> Option<usize> {
        self.parents.iter().position(|p| p.name() == name)
    }

    /// Human-readable labels of a row's parent configuration.
    pub fn config_labels(&self, index: usize) -> Vec<&str> {
        let config = config_unchecked(index, self.shape.parent_cards());
        config
            .0
            .iter()
            .zip(&self.parents)
            .map(|(&s, p)| p.states()[s].as_str())
            .collect()
    }

    pub(crate) fn same_shape(&self, other: &Cpt) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} -> {} vs {:?} -> {}",
                self.shape.parent_cards(),
                self.shape.child_card(),
                other.shape.parent_cards(),
                other.shape.child_card()
            )));
        }
        Ok(())
    }
}

/// Checks length, range and sum of a probability vector.
pub(crate) fn check_distribution(
    row: &[f64],
    len: usize,
    tolerance: f64,
) -> std::result::Result<(), String> {
    if row.len() != len {
        return Err(format!("expected {len} entries, got {}", row.len()));
    }
    if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("entry {p} outside [0, 1]"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(format!("entries sum to {sum}"));
    }
    Ok(())
}

/// Observed counts `n_c(k)` for each row `k` and child state `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    shape: Shape,
    counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn new(shape: Shape, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != shape.n_rows() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} count rows, got {}",
                shape.n_rows(),
                counts.len()
            )));
        }
        if let Some(k) = counts.iter().position(|r| r.len() != shape.child_card()) {
            return Err(Error::ShapeMismatch(format!(
                "count row {k} has {} entries, expected {}",
                counts[k].len(),
                shape.child_card()
            )));
        }
        Ok(Self { shape, counts })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }
}

/// Maximum-likelihood table: each row's counts divided by its total.
pub fn mle_from_counts(counts: &CountTable) -> Result<Cpt> {
    let rows = counts
        .counts
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                return Err(Error::ZeroCountRow(k));
            }
            Ok(row.iter().map(|&n| n as f64 / total as f64).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Cpt::from_shape(&counts.shape, rows)
}
