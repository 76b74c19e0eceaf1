use crate::cpt::{Cpt, Shape};
use crate::error::{Error, Result};

use super::mechanism::{Combiner, MechanismModel};

/// Independence of causal influences: one binary mechanism per parent,
/// combined deterministically.
///
/// `mech_cpts[i][x]` is `P(M_i = 1 | X_i = x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IciSpec {
    pub mech_cpts: Vec<Vec<f64>>,
    pub combiner: Combiner,
}

impl IciSpec {
    pub fn n_params(&self) -> usize {
        self.mech_cpts.iter().map(Vec::len).sum()
    }
}

/// Noisy-OR over binary parents: each active cause is inhibited with
/// probability `inhibitors[i]`; inactive causes never fire.
pub fn noisy_or(inhibitors: &[f64]) -> Result<IciSpec> {
    if let Some(p) = inhibitors.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Spec(format!(
            "inhibition probability {p} outside [0, 1]"
        )));
    }
    Ok(IciSpec {
        mech_cpts: inhibitors.iter().map(|&p| vec![0.0, 1.0 - p]).collect(),
        combiner: Combiner::or(inhibitors.len())?,
    })
}

pub fn ici_evaluate(shape: &Shape, spec: &IciSpec) -> Result<Cpt> {
    let model = MechanismModel::singletons(shape)?;
    let flat = model.flatten(&spec.mech_cpts)?;
    Cpt::from_shape(shape, model.evaluate_deterministic(&flat, &spec.combiner)?)
}

/// ICI with a stochastic lower table: `lower[m]` is `p(y | m)`.
pub fn pici_evaluate(shape: &Shape, mech_cpts: &[Vec<f64>], lower: &[Vec<f64>]) -> Result<Cpt> {
    let model = MechanismModel::singletons(shape)?;
    let flat = model.flatten(mech_cpts)?;
    Cpt::from_shape(shape, model.evaluate_stochastic(&flat, lower)?)
}

/// Noisy-average lower table for a binary child over `n` binary mechanisms:
/// `p(y | m)` is the fraction of mechanisms in state `y`.
///
/// Mechanisms sharing a larger child's state space would need non-binary
/// mechanism tables, which [`MechanismModel`] does not represent.
pub fn noisy_average_lower(n_mechanisms: usize) -> Result<Vec<Vec<f64>>> {
    if n_mechanisms == 0 {
        return Err(Error::Spec(
            "noisy average needs at least one mechanism".into(),
        ));
    }
    if n_mechanisms > super::mechanism::MAX_MECHANISMS {
        return Err(Error::SearchSpace(format!("{n_mechanisms} mechanisms")));
    }
    let n = n_mechanisms as f64;
    Ok((0..1usize << n_mechanisms)
        .map(|m| {
            let ones = m.count_ones() as f64;
            vec![(n - ones) / n, ones / n]
        })
        .collect())
}
