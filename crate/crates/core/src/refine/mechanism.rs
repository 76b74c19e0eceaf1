//! Shared machinery for causal-interaction models: a layer of independent
//! binary mechanisms, each driven by a block of parents, combined into the
//! child either deterministically or through a lower table `p(y | m)`.
//!
//! Mechanism configurations are bitmasks with mechanism `b` at bit `b`.

use crate::cpt::{check_distribution, Shape, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

/// Guard on the number of mechanisms (the lower layer has `2^m` configurations).
pub const MAX_MECHANISMS: usize = 20;

/// Deterministic map from mechanism configurations to child states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Combiner {
    n_mechanisms: usize,
    labels: Vec<usize>,
}

impl Combiner {
    pub fn new(n_mechanisms: usize, labels: Vec<usize>) -> Result<Self> {
        if n_mechanisms > MAX_MECHANISMS {
            return Err(Error::SearchSpace(format!(
                "{n_mechanisms} mechanisms exceed the limit of {MAX_MECHANISMS}"
            )));
        }
        if labels.len() != 1 << n_mechanisms {
            return Err(Error::Spec(format!(
                "combiner over {n_mechanisms} mechanisms needs {} labels, got {}",
                1usize << n_mechanisms,
                labels.len()
            )));
        }
        Ok(Self {
            n_mechanisms,
            labels,
        })
    }

    pub fn from_fn(n_mechanisms: usize, f: impl Fn(usize) -> usize) -> Result<Self> {
        if n_mechanisms > MAX_MECHANISMS {
            return Err(Error::SearchSpace(format!(
                "{n_mechanisms} mechanisms exceed the limit of {MAX_MECHANISMS}"
            )));
        }
        Self::new(n_mechanisms, (0..1usize << n_mechanisms).map(f).collect())
    }

    /// Child state 1 iff any mechanism is 1.
    pub fn or(n_mechanisms: usize) -> Result<Self> {
        Self::from_fn(n_mechanisms, |m| (m != 0) as usize)
    }

    /// Child state 1 iff every mechanism is 1.
    pub fn and(n_mechanisms: usize) -> Result<Self> {
        let all = (1usize << n_mechanisms) - 1;
        Self::from_fn(n_mechanisms, |m| (m == all) as usize)
    }

    pub fn n_mechanisms(&self) -> usize {
        self.n_mechanisms
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, m: usize) -> usize {
        self.labels[m]
    }

    /// `p(y | m)` as a 0/1 table.
    pub fn indicator_table(&self, child_card: usize) -> Vec<Vec<f64>> {
        self.labels
            .iter()
            .map(|&y| (0..child_card).map(|c| (c == y) as u8 as f64).collect())
            .collect()
    }

    pub(crate) fn check_child(&self, child_card: usize) -> Result<()> {
        if let Some(m) = self.labels.iter().position(|&y| y >= child_card) {
            return Err(Error::Spec(format!(
                "combiner sends configuration {m} to state {}, child has {child_card}",
                self.labels[m]
            )));
        }
        Ok(())
    }
}

/// Precomputed indexing of parent blocks for fast evaluation.
#[derive(Debug, Clone)]
pub struct MechanismModel {
    blocks: Vec<Vec<usize>>,
    table_lens: Vec<usize>,
    offsets: Vec<usize>,
    /// `n_rows × n_blocks`, entry = offset of the row's block configuration in
    /// the flattened tables.
    row_slots: Vec<usize>,
    n_rows: usize,
    child_card: usize,
}

impl MechanismModel {
    /// `blocks` must partition the parent indices; parents within a block are
    /// ordered ascending and index the block table first-fastest.
    pub fn new(shape: &Shape, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = shape.n_parents();
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Partition("empty parent block".into()));
            }
            block.sort_unstable();
            for &p in block.iter() {
                if p >= n {
                    return Err(Error::Partition(format!("no parent {p}")));
                }
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::Partition(format!("parent {p} in two blocks")));
                }
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::Partition(format!("parent {p} is in no block")));
        }
        if blocks.len() > MAX_MECHANISMS {
            return Err(Error::SearchSpace(format!(
                "{} mechanisms exceed the limit of {MAX_MECHANISMS}",
                blocks.len()
            )));
        }
        let cards = shape.parent_cards();
        let table_lens: Vec<usize> = blocks
            .iter()
            .map(|b| b.iter().map(|&p| cards[p]).product())
            .collect();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for &len in &table_lens {
            offsets.push(acc);
            acc += len;
        }
        let mut row_slots = Vec::with_capacity(shape.n_rows() * blocks.len());
        for config in shape.configs() {
            for (b, block) in blocks.iter().enumerate() {
                let mut index = 0;
                let mut stride = 1;
                for &p in block {
                    index += config.values()[p] * stride;
                    stride *= cards[p];
                }
                row_slots.push(offsets[b] + index);
            }
        }
        Ok(Self {
            blocks,
            table_lens,
            offsets,
            row_slots,
            n_rows: shape.n_rows(),
            child_card: shape.child_card(),
        })
    }

    /// One mechanism per parent.
    pub fn singletons(shape: &Shape) -> Result<Self> {
        Self::new(shape, (0..shape.n_parents()).map(|p| vec![p]).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n_mechanisms(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_configs(&self) -> usize {
        1 << self.blocks.len()
    }

    /// Rows of each mechanism table `p(M_b = 1 | x_(b))`.
    pub fn table_lens(&self) -> &[usize] {
        &self.table_lens
    }

    /// Free parameters of the upper layer.
    pub fn n_params(&self) -> usize {
        self.table_lens.iter().sum()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn flatten(&self, tables: &[Vec<f64>]) -> Result<Vec<f64>> {
        if tables.len() != self.blocks.len() {
            return Err(Error::Spec(format!(
                "{} mechanism tables for {} mechanisms",
                tables.len(),
                self.blocks.len()
            )));
        }
        for (b, (t, &len)) in tables.iter().zip(&self.table_lens).enumerate() {
            if t.len() != len {
                return Err(Error::Spec(format!(
                    "mechanism {b} table has {} entries, expected {len}",
                    t.len()
                )));
            }
            if let Some(p) = t.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Spec(format!(
                    "mechanism {b} probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(tables.concat())
    }

    pub fn unflatten(&self, flat: &[f64]) -> Vec<Vec<f64>> {
        self.offsets
            .iter()
            .zip(&self.table_lens)
            .map(|(&o, &len)| flat[o..o + len].to_vec())
            .collect()
    }

    /// Joint distribution of the mechanisms for one row, written into `buf`.
    #[inline]
    pub(crate) fn mechanism_dist(&self, row: usize, flat: &[f64], buf: &mut Vec<f64>) {
        let m = self.blocks.len();
        buf.clear();
        buf.resize(1 << m, 0.0);
        buf[0] = 1.0;
        let slots = &self.row_slots[row * m..(row + 1) * m];
        let mut len = 1;
        for &slot in slots {
            let p1 = flat[slot];
            let (lo, hi) = buf.split_at_mut(len);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                *b = *a * p1;
                *a *= 1.0 - p1;
            }
            len *= 2;
        }
    }

    /// `p(y | x) = Σ_{m : f(m) = y} Π_b p(m_b | x_(b))`.
    pub fn evaluate_deterministic(
        &self,
        flat: &[f64],
        combiner: &Combiner,
    ) -> Result<Vec<Vec<f64>>> {
        self.check_lower_size(combiner.n_mechanisms())?;
        combiner.check_child(self.child_card)?;
        let mut buf = Vec::new();
        Ok((0..self.n_rows)
            .map(|row| {
                self.mechanism_dist(row, flat, &mut buf);
                let mut out = vec![0.0; self.child_card];
                for (m, &p) in buf.iter().enumerate() {
                    out[combiner.label(m)] += p;
                }
                clamp_unit(&mut out);
                out
            })
            .collect())
    }

    /// `p(y | x) = Σ_m p(y | m) Π_b p(m_b | x_(b))`.
    pub fn evaluate_stochastic(&self, flat: &[f64], lower: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if lower.len() != self.n_configs() {
            return Err(Error::ShapeMismatch(format!(
                "lower table has {} rows, expected {}",
                lower.len(),
                self.n_configs()
            )));
        }
        for (m, q) in lower.iter().enumerate() {
            check_distribution(q, self.child_card, NORMALIZATION_TOLERANCE).map_err(|reason| {
                Error::NotNormalized {
                    row: format!("m={m:0width$b}", width = self.blocks.len().max(1)),
                    reason,
                }
            })?;
        }
        let mut buf = Vec::new();
        Ok((0..self.n_rows)
            .map(|row| {
                self.mechanism_dist(row, flat, &mut buf);
                let mut out = vec![0.0; self.child_card];
                for (pm, q) in buf.iter().zip(lower) {
                    for (o, &qy) in out.iter_mut().zip(q) {
                        *o += qy * pm;
                    }
                }
                clamp_unit(&mut out);
                out
            })
            .collect())
    }

    /// Summed TVD of the deterministic model against `truth`, without
    /// building a table. `labels` is indexed by mechanism configuration.
    #[inline]
    pub(crate) fn tvd_deterministic(
        &self,
        flat: &[f64],
        labels: &[usize],
        truth: &[Vec<f64>],
        buf: &mut Vec<f64>,
        out: &mut Vec<f64>,
    ) -> f64 {
        let mut total = 0.0;
        for (row, p) in truth.iter().enumerate() {
            self.mechanism_dist(row, flat, buf);
            if self.child_card == 2 {
                let q0: f64 = buf
                    .iter()
                    .zip(labels)
                    .filter(|(_, &y)| y == 0)
                    .map(|(p, _)| p)
                    .sum();
                total += (p[0] - q0).abs();
            } else {
                out.clear();
                out.resize(self.child_card, 0.0);
                for (m, &pm) in buf.iter().enumerate() {
                    out[labels[m]] += pm;
                }
                total += 0.5
                    * p.iter()
                        .zip(out.iter())
                        .map(|(a, b)| (a - b).abs())
                        .sum::<f64>();
            }
        }
        total
    }

    fn check_lower_size(&self, n_mechanisms: usize) -> Result<()> {
        if n_mechanisms != self.blocks.len() {
            return Err(Error::Spec(format!(
                "combiner over {n_mechanisms} mechanisms, model has {}",
                self.blocks.len()
            )));
        }
        Ok(())
    }
}

/// Rounding can push a sum of products a hair past 1.
fn clamp_unit(row: &mut [f64]) {
    row.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
}
