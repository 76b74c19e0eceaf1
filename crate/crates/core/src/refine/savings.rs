use crate::cpt::{Cpt, Shape};
use crate::error::{Error, Result};

use super::sici::Lower;
use super::{
    divorce_fit, ds_sici_evaluate, ici_evaluate, prune_fit, scm_fit, us_sici_evaluate,
    ApproxResult, DivorceSpec, IciSpec, PruneSpec, ScmSpec, SiciSpec,
};

/// One instance of a structural method.
#[derive(Debug, Clone, PartialEq)]
pub enum RefinementSpec {
    Prune(PruneSpec),
    Divorce(DivorceSpec),
    Scm(ScmSpec),
    Ici(IciSpec),
    Sici(SiciSpec),
}

/// Free parameters of a refined structure and the saving over the full table.
pub fn param_savings(spec: &RefinementSpec, shape: &Shape) -> Result<(usize, i64)> {
    let child_free = shape.child_card() - 1;
    let cards = shape.parent_cards();
    let free = match spec {
        RefinementSpec::Prune(p) => {
            p.validate(shape)?;
            shape.n_rows() / cards[p.parent] * child_free
        }
        RefinementSpec::Divorce(d) => {
            if d.divorced().iter().any(|&p| p >= cards.len()) {
                return Err(Error::Spec("divorce spec does not fit this table".into()));
            }
            let remaining: usize = (0..cards.len())
                .filter(|i| !d.divorced().contains(i))
                .map(|i| cards[i])
                .product();
            2 * remaining * child_free
        }
        RefinementSpec::Scm(_) => 2 * child_free,
        RefinementSpec::Ici(ici) => ici.n_params(),
        RefinementSpec::Sici(sici) => {
            let upper: usize = sici
                .blocks
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|&p| cards.get(p).copied().unwrap_or(0))
                        .product::<usize>()
                })
                .sum();
            let lower = match &sici.lower {
                Lower::Deterministic(_) => 0,
                Lower::Stochastic(t) => t.len() * child_free,
            };
            upper + lower
        }
    };
    Ok((free, shape.param_count() as i64 - free as i64))
}

impl RefinementSpec {
    /// Expands the refined structure to a full table and scores it against
    /// `truth`. Grouping methods are fitted by medians first.
    pub fn evaluate(&self, truth: &Cpt) -> Result<ApproxResult> {
        let shape = truth.shape();
        let (free, _) = param_savings(self, shape)?;
        let approx = match self {
            RefinementSpec::Prune(p) => return prune_fit(truth, p),
            RefinementSpec::Divorce(d) => return divorce_fit(truth, d),
            RefinementSpec::Scm(s) => return scm_fit(truth, s),
            RefinementSpec::Ici(ici) => ici_evaluate(shape, ici)?,
            RefinementSpec::Sici(sici) => match sici.lower {
                Lower::Deterministic(_) => us_sici_evaluate(shape, sici)?,
                Lower::Stochastic(_) => ds_sici_evaluate(shape, sici)?,
            },
        };
        ApproxResult::scored(truth, &approx, free)
    }

    /// Human-readable summary using the table's variable names.
    pub fn describe(&self, cpt: &Cpt) -> String {
        let name = |p: usize| cpt.parents()[p].name().to_owned();
        let state = |p: usize, s: usize| cpt.parents()[p].states()[s].clone();
        match self {
            RefinementSpec::Prune(p) => format!("prune {}", name(p.parent)),
            RefinementSpec::Divorce(d) => {
                let inputs: Vec<String> = d
                    .divorced()
                    .iter()
                    .zip(d.binarization())
                    .map(|(&p, ones)| {
                        let states: Vec<String> = ones.iter().map(|&s| state(p, s)).collect();
                        format!("{}={}", name(p), states.join("|"))
                    })
                    .collect();
                format!("{}({})", d.gate(), inputs.join(", "))
            }
            RefinementSpec::Scm(s) => {
                let (m0, m1) = s.block_sizes();
                format!("bipartition {m0}-{m1}")
            }
            RefinementSpec::Ici(ici) => {
                format!("combiner {}", labels_string(ici.combiner.labels()))
            }
            RefinementSpec::Sici(sici) => {
                let blocks: Vec<String> = sici
                    .blocks
                    .iter()
                    .map(|b| b.iter().map(|&p| name(p)).collect::<Vec<_>>().join(","))
                    .collect();
                match &sici.lower {
                    Lower::Deterministic(c) => {
                        format!(
                            "{}; combiner {}",
                            blocks.join(" | "),
                            labels_string(c.labels())
                        )
                    }
                    Lower::Stochastic(_) => format!("{}; stochastic lower", blocks.join(" | ")),
                }
            }
        }
    }
}

fn labels_string(labels: &[usize]) -> String {
    labels.iter().map(|l| l.to_string()).collect()
}
