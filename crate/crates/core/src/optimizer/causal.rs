//! Joint search over a deterministic combiner and the mechanism tables of ICI
//! and US-SICI models.

use crate::cpt::Cpt;
use crate::error::{Error, Result};
use crate::refine::{Combiner, IciSpec, Lower, MechanismModel, RefinementSpec, SiciSpec};

use super::ga::{ga_optimize, Encoding, GaConfig, Genome};
use super::partitions::{enumerate_set_partitions, MAX_SET_PARTITION_ITEMS};
use super::{Progress, SearchResult, TIE_TOLERANCE};

/// Best model found for every candidate partition, plus the overall winner.
#[derive(Debug, Clone)]
pub struct SiciSearch {
    pub per_partition: Vec<SearchResult<RefinementSpec>>,
    /// Index into `per_partition`; the first of any tied minima.
    pub best: usize,
}

impl SiciSearch {
    pub fn best_result(&self) -> &SearchResult<RefinementSpec> {
        &self.per_partition[self.best]
    }
}

/// Optimized combiner labels and flattened mechanism tables.
struct MechanismFit {
    model: MechanismModel,
    combiner: Combiner,
    tables: Vec<Vec<f64>>,
}

/// Genome: one child-state gene per mechanism configuration `m ≥ 1`
/// (`m = 0` is pinned to state 0 so relabelled duplicates are not searched),
/// followed by one probability per mechanism-table row.
fn optimize_mechanisms(
    truth: &Cpt,
    blocks: Vec<Vec<usize>>,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<MechanismFit>> {
    let child_card = truth.shape().child_card();
    if child_card != 2 {
        return Err(Error::Cardinality(format!(
            "mechanism search needs a binary child, {} has {child_card} states",
            truth.child().name()
        )));
    }
    let model = MechanismModel::new(truth.shape(), blocks)?;
    let n_configs = model.n_configs();
    let encoding = Encoding {
        integer_cards: vec![child_card; n_configs - 1],
        n_reals: model.n_params(),
    };
    let rows = truth.rows();
    let fitness = |g: &Genome| {
        let mut labels = Vec::with_capacity(n_configs);
        labels.push(0);
        labels.extend_from_slice(&g.integer_part);
        let mut buf = Vec::with_capacity(n_configs);
        let mut out = Vec::new();
        model.tvd_deterministic(&g.real_part, &labels, rows, &mut buf, &mut out)
    };
    let result = ga_optimize(fitness, &encoding, config, on_progress)?;
    let labels: Vec<usize> = std::iter::once(0)
        .chain(result.best.integer_part.iter().copied())
        .collect();
    let combiner = Combiner::new(model.n_mechanisms(), labels)?;
    let tables = model.unflatten(&result.best.real_part);
    Ok(result.map(|_| MechanismFit {
        model,
        combiner,
        tables,
    }))
}

/// ICI with one mechanism per parent.
pub fn optimize_ici(
    truth: &Cpt,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<RefinementSpec>> {
    let singletons = (0..truth.shape().n_parents()).map(|p| vec![p]).collect();
    let result = optimize_mechanisms(truth, singletons, config, on_progress)?;
    Ok(result.map(|fit| {
        RefinementSpec::Ici(IciSpec {
            mech_cpts: fit.tables,
            combiner: fit.combiner,
        })
    }))
}

/// US-SICI for a fixed partition of the parents.
pub fn optimize_sici_partition(
    truth: &Cpt,
    blocks: Vec<Vec<usize>>,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<RefinementSpec>> {
    let result = optimize_mechanisms(truth, blocks, config, on_progress)?;
    Ok(result.map(|fit| {
        RefinementSpec::Sici(SiciSpec {
            blocks: fit.model.blocks().to_vec(),
            mech_cpts: fit.tables,
            lower: Lower::Deterministic(fit.combiner),
        })
    }))
}

/// US-SICI over every partition of the parents except the single block,
/// which saves nothing over the full table.
pub fn optimize_sici(
    truth: &Cpt,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SiciSearch> {
    let n = truth.shape().n_parents();
    if n > MAX_SET_PARTITION_ITEMS {
        return Err(Error::SearchSpace(format!(
            "partition search supports at most {MAX_SET_PARTITION_ITEMS} parents, table has {n}"
        )));
    }
    if n < 2 {
        return Err(Error::Spec(
            "partition search needs at least two parents".into(),
        ));
    }
    let mut per_partition = Vec::new();
    for blocks in enumerate_set_partitions(n)?.filter(|p| p.len() > 1) {
        log::info!("SICI partition {blocks:?}");
        per_partition.push(optimize_sici_partition(truth, blocks, config, on_progress)?);
    }
    let mut best = 0;
    for (i, r) in per_partition.iter().enumerate() {
        if r.best_score < per_partition[best].best_score - TIE_TOLERANCE {
            best = i;
        }
    }
    Ok(SiciSearch {
        per_partition,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpt::Shape;
    use crate::metrics::score_sum_tvd;
    use crate::optimizer::no_progress;
    use crate::refine::{ici_evaluate, noisy_or, us_sici_evaluate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_config(seed: u64) -> GaConfig {
        GaConfig {
            population: 100,
            restarts: 3,
            seed,
            ..Default::default()
        }
    }

    fn random_binary_cpt(rng: &mut ChaCha8Rng, parents: Vec<usize>) -> Cpt {
        let shape = Shape::new(parents, 2).unwrap();
        let rows = (0..shape.n_rows())
            .map(|_| {
                let p: f64 = rng.random();
                vec![p, 1.0 - p]
            })
            .collect();
        Cpt::from_shape(&shape, rows).unwrap()
    }

    fn rescore(truth: &Cpt, spec: &RefinementSpec) -> f64 {
        let approx = match spec {
            RefinementSpec::Ici(s) => ici_evaluate(truth.shape(), s).unwrap(),
            RefinementSpec::Sici(s) => us_sici_evaluate(truth.shape(), s).unwrap(),
            _ => unreachable!(),
        };
        score_sum_tvd(truth, &approx).unwrap()
    }

    #[test]
    fn recovers_a_noisy_or() {
        let shape = Shape::new(vec![2, 2, 2], 2).unwrap();
        let truth = ici_evaluate(&shape, &noisy_or(&[0.2, 0.5, 0.7]).unwrap()).unwrap();
        let r = optimize_ici(&truth, &GaConfig::default(), &no_progress).unwrap();
        assert!(r.best_score <= 1e-3, "{}", r.best_score);
        assert!((rescore(&truth, &r.best) - r.best_score).abs() < 1e-12);
    }

    /// Exhaustive oracle for two binary parents: every combiner, a coarse grid
    /// over the four mechanism probabilities, then a fine grid around the
    /// coarse optimum.
    fn two_parent_oracle(truth: &Cpt) -> f64 {
        let p0: Vec<f64> = truth.rows().iter().map(|r| r[0]).collect();
        let score = |f: usize, a: [f64; 2], b: [f64; 2]| -> f64 {
            let mut total = 0.0;
            for x2 in 0..2 {
                for x1 in 0..2 {
                    let (pa, pb) = (a[x1], b[x2]);
                    // mechanism configuration bits: bit 0 = M1, bit 1 = M2
                    let pm = [
                        (1.0 - pa) * (1.0 - pb),
                        pa * (1.0 - pb),
                        (1.0 - pa) * pb,
                        pa * pb,
                    ];
                    let q0: f64 = (0..4).filter(|m| (f >> m) & 1 == 0).map(|m| pm[m]).sum();
                    total += (p0[x1 + 2 * x2] - q0).abs();
                }
            }
            total
        };
        let mut best = f64::INFINITY;
        // f(0) = 0, so label masks are the even numbers below 16
        for f in (0..16).step_by(2) {
            let coarse: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
            let mut arg = ([0.0; 2], [0.0; 2], f64::INFINITY);
            for &a0 in &coarse {
                for &a1 in &coarse {
                    for &b0 in &coarse {
                        for &b1 in &coarse {
                            let s = score(f, [a0, a1], [b0, b1]);
                            if s < arg.2 {
                                arg = ([a0, a1], [b0, b1], s);
                            }
                        }
                    }
                }
            }
            let fine = |c: f64| -> Vec<f64> {
                (-50..=50)
                    .map(|i| (c + i as f64 * 0.001).clamp(0.0, 1.0))
                    .collect()
            };
            let (fa0, fa1, fb0, fb1) = (
                fine(arg.0[0]),
                fine(arg.0[1]),
                fine(arg.1[0]),
                fine(arg.1[1]),
            );
            let mut local = arg.2;
            for &a0 in &fa0 {
                for &a1 in &fa1 {
                    for &b0 in fb0.iter().step_by(2) {
                        for &b1 in fb1.iter().step_by(2) {
                            local = local.min(score(f, [a0, a1], [b0, b1]));
                        }
                    }
                }
            }
            best = best.min(local);
        }
        best
    }

    #[test]
    fn two_parent_ici_matches_exhaustive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed in 0..2 {
            let truth = random_binary_cpt(&mut rng, vec![2, 2]);
            let ga = optimize_ici(&truth, &small_config(seed), &no_progress).unwrap();
            let oracle = two_parent_oracle(&truth);
            assert!(
                (ga.best_score - oracle).abs() <= 5e-3,
                "GA {} vs oracle {oracle}",
                ga.best_score
            );
        }
    }

    #[test]
    fn recovers_a_generating_partition() {
        let shape = Shape::new(vec![2, 3, 2], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = SiciSpec {
            blocks: vec![vec![0], vec![1, 2]],
            mech_cpts: vec![
                (0..2).map(|_| rng.random()).collect(),
                (0..6).map(|_| rng.random()).collect(),
            ],
            // y = 1 iff M1 = 1 and M2 = 0
            lower: Lower::Deterministic(Combiner::new(2, vec![0, 1, 0, 0]).unwrap()),
        };
        let truth = us_sici_evaluate(&shape, &spec).unwrap();
        let config = GaConfig {
            population: 150,
            restarts: 4,
            seed: 2,
            ..Default::default()
        };
        let r = optimize_sici_partition(&truth, vec![vec![2, 1], vec![0]], &config, &no_progress)
            .unwrap();
        assert!(r.best_score <= 1e-3, "{}", r.best_score);
        let RefinementSpec::Sici(found) = &r.best else {
            panic!()
        };
        assert_eq!(found.blocks, vec![vec![1, 2], vec![0]]);
        assert_eq!(found.mech_cpts.iter().map(Vec::len).sum::<usize>(), 8);
        assert!((rescore(&truth, &r.best) - r.best_score).abs() < 1e-12);
    }

    #[test]
    fn partition_search_covers_all_nontrivial_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let truth = random_binary_cpt(&mut rng, vec![2, 2, 2]);
        let config = GaConfig {
            population: 60,
            restarts: 2,
            ..Default::default()
        };
        let search = optimize_sici(&truth, &config, &no_progress).unwrap();
        assert_eq!(search.per_partition.len(), 4);
        let min = search
            .per_partition
            .iter()
            .map(|r| r.best_score)
            .fold(f64::INFINITY, f64::min);
        assert!(search.best_result().best_score <= min + TIE_TOLERANCE);

        // the all-singleton partition is the ICI search problem
        let singletons = search.per_partition.last().unwrap();
        let RefinementSpec::Sici(s) = &singletons.best else {
            panic!()
        };
        assert_eq!(s.blocks, vec![vec![0], vec![1], vec![2]]);
        let ici = optimize_ici(&truth, &config, &no_progress).unwrap();
        assert!((ici.best_score - singletons.best_score).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_binary_child() {
        let shape = Shape::new(vec![2, 2], 3).unwrap();
        let truth = Cpt::from_shape(&shape, vec![vec![0.2, 0.3, 0.5]; 4]).unwrap();
        assert!(optimize_ici(&truth, &small_config(0), &no_progress).is_err());
    }
}
