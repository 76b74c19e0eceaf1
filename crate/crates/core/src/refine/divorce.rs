use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cpt::{Cpt, Shape};
use crate::error::{Error, Result};

use super::{argmin_first, fit_groups, groups_by_key, ApproxResult};

/// Logic gate defining the intermediate node of a divorce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    And,
    Or,
    Xor,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::And, Gate::Or, Gate::Xor];

    /// XOR over more than two inputs is odd parity.
    pub fn apply(self, mut inputs: impl Iterator<Item = bool>) -> bool {
        match self {
            Gate::And => inputs.all(|b| b),
            Gate::Or => inputs.any(|b| b),
            Gate::Xor => inputs.fold(false, |a, b| a ^ b),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::And => "AND",
            Gate::Or => "OR",
            Gate::Xor => "XOR",
        })
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Ok(Gate::And),
            "OR" => Ok(Gate::Or),
            "XOR" => Ok(Gate::Xor),
            _ => Err(Error::Spec(format!("unknown gate {s:?}"))),
        }
    }
}

/// Routes a subset of parents through a gate before the child.
///
/// `binarization[j]` lists the states of `divorced[j]` that feed input 1 to
/// the gate, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivorceSpec {
    divorced: Vec<usize>,
    gate: Gate,
    binarization: Vec<Vec<usize>>,
}

impl DivorceSpec {
    pub fn new(
        shape: &Shape,
        divorced: Vec<usize>,
        gate: Gate,
        binarization: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = shape.n_parents();
        if divorced.len() < 2 {
            return Err(Error::Spec("divorce needs at least two parents".into()));
        }
        if divorced.len() >= n {
            return Err(Error::Spec(format!(
                "divorcing {} of {n} parents leaves none behind",
                divorced.len()
            )));
        }
        if binarization.len() != divorced.len() {
            return Err(Error::Spec(format!(
                "{} binarizations for {} divorced parents",
                binarization.len(),
                divorced.len()
            )));
        }
        let mut pairs: Vec<(usize, Vec<usize>)> = divorced.into_iter().zip(binarization).collect();
        pairs.sort();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Spec(format!("parent {} divorced twice", w[0].0)));
            }
        }
        for (parent, states) in &mut pairs {
            if *parent >= n {
                return Err(Error::Spec(format!("no parent {parent}")));
            }
            let card = shape.parent_cards()[*parent];
            states.sort_unstable();
            states.dedup();
            if states.iter().any(|&s| s >= card) {
                return Err(Error::Spec(format!(
                    "binarization of parent {parent} names a state >= {card}"
                )));
            }
            if states.is_empty() || states.len() == card {
                return Err(Error::Spec(format!(
                    "binarization of parent {parent} must be a proper nonempty subset"
                )));
            }
        }
        let (divorced, binarization) = pairs.into_iter().unzip();
        Ok(Self {
            divorced,
            gate,
            binarization,
        })
    }

    /// Binary parents feed state 1; multi-state parents need an explicit subset.
    pub fn with_default_binarization(
        shape: &Shape,
        divorced: Vec<usize>,
        gate: Gate,
        overrides: &[(usize, Vec<usize>)],
    ) -> Result<Self> {
        let binarization = divorced
            .iter()
            .map(|&p| {
                if let Some((_, s)) = overrides.iter().find(|(q, _)| *q == p) {
                    return Ok(s.clone());
                }
                match shape.parent_cards().get(p) {
                    Some(2) => Ok(vec![1]),
                    Some(_) => Err(Error::Spec(format!(
                        "parent {p} has more than two states and needs a binarization"
                    ))),
                    None => Err(Error::Spec(format!("no parent {p}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(shape, divorced, gate, binarization)
    }

    pub fn divorced(&self) -> &[usize] {
        &self.divorced
    }

    pub fn gate(&self) -> Gate {
        self.gate
    }

    pub fn binarization(&self) -> &[Vec<usize>] {
        &self.binarization
    }

    fn gate_output(&self, config: &[usize]) -> bool {
        self.gate.apply(
            self.divorced
                .iter()
                .zip(&self.binarization)
                .map(|(&p, ones)| ones.contains(&config[p])),
        )
    }
}

/// Rows agreeing on the gate output and on every non-divorced parent.
pub fn divorce_groups(shape: &Shape, spec: &DivorceSpec) -> Result<Vec<Vec<usize>>> {
    if spec.divorced.iter().any(|&p| p >= shape.n_parents()) {
        return Err(Error::Spec("divorce spec does not fit this table".into()));
    }
    for (&p, ones) in spec.divorced.iter().zip(&spec.binarization) {
        let card = shape.parent_cards()[p];
        if ones.is_empty() || ones.len() >= card || ones.iter().any(|&s| s >= card) {
            return Err(Error::Spec(format!(
                "binarization of parent {p} must be a proper nonempty subset"
            )));
        }
    }
    Ok(groups_by_key(shape, |c| {
        let rest: Vec<usize> = c
            .iter()
            .enumerate()
            .filter(|(i, _)| !spec.divorced.contains(i))
            .map(|(_, &s)| s)
            .collect();
        (spec.gate_output(c), rest)
    }))
}

pub fn divorce_fit(truth: &Cpt, spec: &DivorceSpec) -> Result<ApproxResult> {
    fit_groups(truth, &divorce_groups(truth.shape(), spec)?)
}

/// Every divorce of `size` parents, in lexicographic (subset, gate,
/// binarization) order.
pub fn divorce_candidates(shape: &Shape, size: usize) -> Result<Vec<DivorceSpec>> {
    let n = shape.n_parents();
    if size < 2 || size >= n {
        return Err(Error::Spec(format!(
            "divorce block size {size} must lie in [2, {}]",
            n.saturating_sub(1)
        )));
    }
    let mut out = Vec::new();
    for subset in combinations(n, size) {
        let choices: Vec<Vec<Vec<usize>>> = subset
            .iter()
            .map(|&p| binarizations(shape.parent_cards()[p]))
            .collect();
        for gate in Gate::ALL {
            for binarization in cartesian(&choices) {
                out.push(DivorceSpec {
                    divorced: subset.clone(),
                    gate,
                    binarization,
                });
            }
        }
    }
    Ok(out)
}

/// Exhaustive divorce search over parent subsets of the given size.
pub fn divorce_best(truth: &Cpt, size: usize) -> Result<(DivorceSpec, ApproxResult)> {
    let candidates = divorce_candidates(truth.shape(), size)?;
    let scores = candidates
        .par_iter()
        .map(|spec| divorce_fit(truth, spec).map(|f| f.score))
        .collect::<Result<Vec<_>>>()?;
    let best = argmin_first(scores).expect("at least one candidate");
    let spec = candidates[best].clone();
    let fit = divorce_fit(truth, &spec)?;
    Ok((spec, fit))
}

/// Proper nonempty state subsets feeding the gate; binary parents use `{1}`.
fn binarizations(card: usize) -> Vec<Vec<usize>> {
    if card == 2 {
        return vec![vec![1]];
    }
    (1..(1u64 << card) - 1)
        .map(|mask| (0..card).filter(|&s| mask >> s & 1 == 1).collect())
        .collect()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn cartesian(choices: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect()
    })
}
