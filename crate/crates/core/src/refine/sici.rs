use crate::cpt::{Cpt, Shape};
use crate::error::{Error, Result};

use super::mechanism::{Combiner, MechanismModel};

/// How mechanisms combine into the child.
#[derive(Debug, Clone, PartialEq)]
pub enum Lower {
    /// Upper-stochastic variant: a deterministic combiner.
    Deterministic(Combiner),
    /// Double-stochastic variant: `p(y | m)` per mechanism configuration.
    Stochastic(Vec<Vec<f64>>),
}

/// Surjective ICI: parents are partitioned into blocks, each block driving one
/// binary mechanism.
///
/// `mech_cpts[b]` is indexed by the joint configuration of block `b`'s
/// parents (ascending parent order, first varying fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SiciSpec {
    pub blocks: Vec<Vec<usize>>,
    pub mech_cpts: Vec<Vec<f64>>,
    pub lower: Lower,
}

impl SiciSpec {
    pub fn n_params(&self) -> usize {
        let lower = match &self.lower {
            Lower::Deterministic(_) => 0,
            Lower::Stochastic(t) => t.iter().map(|r| r.len().saturating_sub(1)).sum(),
        };
        self.mech_cpts.iter().map(Vec::len).sum::<usize>() + lower
    }
}

pub fn us_sici_evaluate(shape: &Shape, spec: &SiciSpec) -> Result<Cpt> {
    let Lower::Deterministic(combiner) = &spec.lower else {
        return Err(Error::Spec("US-SICI needs a deterministic combiner".into()));
    };
    let model = MechanismModel::new(shape, spec.blocks.clone())?;
    check_sorted_blocks(&spec.blocks, &model)?;
    let flat = model.flatten(&spec.mech_cpts)?;
    Cpt::from_shape(shape, model.evaluate_deterministic(&flat, combiner)?)
}

pub fn ds_sici_evaluate(shape: &Shape, spec: &SiciSpec) -> Result<Cpt> {
    let Lower::Stochastic(lower) = &spec.lower else {
        return Err(Error::Spec("DS-SICI needs a stochastic lower table".into()));
    };
    let model = MechanismModel::new(shape, spec.blocks.clone())?;
    check_sorted_blocks(&spec.blocks, &model)?;
    let flat = model.flatten(&spec.mech_cpts)?;
    Cpt::from_shape(shape, model.evaluate_stochastic(&flat, lower)?)
}

/// Tables are indexed in ascending parent order, so an unsorted block would
/// silently permute them.
fn check_sorted_blocks(blocks: &[Vec<usize>], model: &MechanismModel) -> Result<()> {
    if blocks != model.blocks() {
        return Err(Error::Partition(
            "parents within each block must be listed in ascending order".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::{ici_evaluate, pici_evaluate, IciSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_rows_close(a: &Cpt, b: &Cpt) {
        for (x, y) in a.rows().iter().flatten().zip(b.rows().iter().flatten()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    fn anxiety_shape() -> Shape {
        Shape::new(vec![2, 2, 2, 3], 2).unwrap()
    }

    #[test]
    fn singleton_blocks_reduce_to_ici() {
        let shape = anxiety_shape();
        let mech = vec![
            vec![0.1, 0.8],
            vec![0.3, 0.2],
            vec![0.6, 0.9],
            vec![0.4, 0.5, 0.05],
        ];
        let combiner =
            Combiner::new(4, (0..16).map(|m| (m * 7 % 3 == 1) as usize).collect()).unwrap();
        let sici = SiciSpec {
            blocks: (0..4).map(|p| vec![p]).collect(),
            mech_cpts: mech.clone(),
            lower: Lower::Deterministic(combiner.clone()),
        };
        let ici = IciSpec {
            mech_cpts: mech.clone(),
            combiner: combiner.clone(),
        };
        assert_rows_close(
            &us_sici_evaluate(&shape, &sici).unwrap(),
            &ici_evaluate(&shape, &ici).unwrap(),
        );

        let ds = SiciSpec {
            lower: Lower::Stochastic(combiner.indicator_table(2)),
            ..sici.clone()
        };
        assert_rows_close(
            &ds_sici_evaluate(&shape, &ds).unwrap(),
            &pici_evaluate(&shape, &mech, &combiner.indicator_table(2)).unwrap(),
        );
    }

    #[test]
    fn single_block_relabels_the_table() {
        let shape = Shape::new(vec![2, 3], 2).unwrap();
        let table: Vec<f64> = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        let spec = SiciSpec {
            blocks: vec![vec![0, 1]],
            mech_cpts: vec![table.clone()],
            lower: Lower::Deterministic(Combiner::new(1, vec![1, 0]).unwrap()),
        };
        let cpt = us_sici_evaluate(&shape, &spec).unwrap();
        for (row, &p1) in cpt.rows().iter().zip(&table) {
            assert!((row[0] - p1).abs() < 1e-15);
        }
    }

    #[test]
    fn variants_are_checked() {
        let shape = Shape::new(vec![2, 2], 2).unwrap();
        let spec = SiciSpec {
            blocks: vec![vec![0, 1]],
            mech_cpts: vec![vec![0.5; 4]],
            lower: Lower::Stochastic(vec![vec![0.5, 0.5]; 2]),
        };
        assert!(us_sici_evaluate(&shape, &spec).is_err());
        assert!(ds_sici_evaluate(&shape, &spec).is_ok());
        let unsorted = SiciSpec {
            blocks: vec![vec![1, 0]],
            ..spec.clone()
        };
        assert!(ds_sici_evaluate(&shape, &unsorted).is_err());
        let overlapping = SiciSpec {
            blocks: vec![vec![0, 1], vec![1]],
            mech_cpts: vec![vec![0.5; 4], vec![0.5; 2]],
            lower: Lower::Stochastic(vec![vec![0.5, 0.5]; 4]),
        };
        assert!(ds_sici_evaluate(&shape, &overlapping).is_err());
    }

    #[test]
    fn indicator_ds_equals_us_on_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shape = anxiety_shape();
        let blocks = vec![vec![1], vec![0, 2, 3]];
        for _ in 0..100 {
            let mech = vec![
                (0..2).map(|_| rng.random()).collect(),
                (0..12).map(|_| rng.random()).collect(),
            ];
            let combiner =
                Combiner::new(2, (0..4).map(|_| rng.random_range(0..2)).collect()).unwrap();
            let us = SiciSpec {
                blocks: blocks.clone(),
                mech_cpts: mech,
                lower: Lower::Deterministic(combiner.clone()),
            };
            let ds = SiciSpec {
                lower: Lower::Stochastic(combiner.indicator_table(2)),
                ..us.clone()
            };
            assert_rows_close(
                &us_sici_evaluate(&shape, &us).unwrap(),
                &ds_sici_evaluate(&shape, &ds).unwrap(),
            );
        }
    }

    /// Explicit enumeration of `Σ_m p(y|m) Π_b p(m_b | x_(b))`.
    #[test]
    fn ds_matches_double_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = Shape::new(vec![2, 3, 2, 2], 2).unwrap();
        let blocks = vec![vec![0, 3], vec![1], vec![2]];
        for _ in 0..30 {
            let mech: Vec<Vec<f64>> = vec![
                (0..4).map(|_| rng.random()).collect(),
                (0..3).map(|_| rng.random()).collect(),
                (0..2).map(|_| rng.random()).collect(),
            ];
            let lower: Vec<Vec<f64>> = (0..8)
                .map(|_| {
                    let a: f64 = rng.random();
                    vec![a, 1.0 - a]
                })
                .collect();
            let spec = SiciSpec {
                blocks: blocks.clone(),
                mech_cpts: mech.clone(),
                lower: Lower::Stochastic(lower.clone()),
            };
            let cpt = ds_sici_evaluate(&shape, &spec).unwrap();
            for (row, x) in shape.configs().enumerate() {
                let x = x.values();
                let idx = [x[0] + 2 * x[3], x[1], x[2]];
                let mut y0 = 0.0;
                for m0 in 0..2 {
                    for m1 in 0..2 {
                        for m2 in 0..2 {
                            let f = |b: usize, on: usize| {
                                let p = mech[b][idx[b]];
                                if on == 1 {
                                    p
                                } else {
                                    1.0 - p
                                }
                            };
                            let w = f(0, m0) * f(1, m1) * f(2, m2);
                            y0 += lower[m0 | m1 << 1 | m2 << 2][0] * w;
                        }
                    }
                }
                assert!((cpt.row(row)[0] - y0).abs() < 1e-12);
            }
        }
    }
}
