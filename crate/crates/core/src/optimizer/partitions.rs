//! Enumeration of two-block row partitions and of set partitions of parents.

use crate::error::{Error, Result};

pub const MAX_BIPARTITION_ITEMS: usize = 30;
pub const MAX_SET_PARTITION_ITEMS: usize = 12;

/// Unordered non-trivial bipartitions of `k` items, each yielded once.
///
/// Item 0 always stays in the first block, so each yielded mask is the
/// membership of the second block (bit `i` = item `i`). There are
/// `2^(k−1) − 1` of them.
#[derive(Debug, Clone)]
pub struct Bipartitions {
    next: u64,
    last: u64,
}

impl Bipartitions {
    pub fn len(&self) -> u64 {
        self.last + 1 - self.next
    }

    pub fn is_empty(&self) -> bool {
        self.next > self.last
    }
}

impl Iterator for Bipartitions {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.next > self.last {
            return None;
        }
        let b = self.next;
        self.next += 1;
        Some(b << 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.last + 1).saturating_sub(self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Bipartitions {}

pub fn enumerate_bipartitions(item_count: usize) -> Result<Bipartitions> {
    if !(2..=MAX_BIPARTITION_ITEMS).contains(&item_count) {
        return Err(Error::SearchSpace(format!(
            "bipartition enumeration supports 2..={MAX_BIPARTITION_ITEMS} items, got {item_count}"
        )));
    }
    Ok(Bipartitions {
        next: 1,
        last: (1u64 << (item_count - 1)) - 1,
    })
}

/// Number of non-trivial bipartitions of `k` items.
pub fn bipartition_count(item_count: usize) -> u64 {
    (1u64 << (item_count - 1)) - 1
}

/// All set partitions of `0..n` in restricted-growth-string order, starting
/// with the single block and ending with all singletons.
#[derive(Debug, Clone)]
pub struct SetPartitions {
    rgs: Vec<usize>,
    done: bool,
}

impl Iterator for SetPartitions {
    type Item = Vec<Vec<usize>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let current = blocks_of(&self.rgs);
        self.done = !advance_rgs(&mut self.rgs);
        Some(current)
    }
}

pub fn enumerate_set_partitions(n: usize) -> Result<SetPartitions> {
    if !(1..=MAX_SET_PARTITION_ITEMS).contains(&n) {
        return Err(Error::SearchSpace(format!(
            "set partition enumeration supports 1..={MAX_SET_PARTITION_ITEMS} items, got {n}"
        )));
    }
    Ok(SetPartitions {
        rgs: vec![0; n],
        done: false,
    })
}

/// Steps to the next restricted growth string; false after the last.
fn advance_rgs(rgs: &mut [usize]) -> bool {
    for i in (1..rgs.len()).rev() {
        let prefix_max = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= prefix_max {
            rgs[i] += 1;
            rgs[i + 1..].iter_mut().for_each(|v| *v = 0);
            return true;
        }
    }
    false
}

fn blocks_of(rgs: &[usize]) -> Vec<Vec<usize>> {
    let n_blocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); n_blocks];
    for (item, &b) in rgs.iter().enumerate() {
        blocks[b].push(item);
    }
    blocks
}
