use cpt_refine::cpt::{config_of, row_index, Shape};
use cpt_refine::io::{cpt_from_json, cpt_to_json};
use cpt_refine::metrics::score_sum_tvd;
use cpt_refine::refine::{
    divorce_fit, ds_sici_evaluate, ici_evaluate, noisy_or, param_savings, pici_evaluate, prune_fit,
    scm_fit, us_sici_evaluate, Combiner, DivorceSpec, Gate, IciSpec, Lower, PruneSpec,
    RefinementSpec, ScmSpec, SiciSpec,
};
use cpt_refine::Cpt;
use proptest::prelude::*;

fn cards(max_parents: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 1..=max_parents)
}

/// A binary-child table over the given parent cardinalities.
fn binary_cpt(max_parents: usize) -> impl Strategy<Value = Cpt> {
    cards(max_parents).prop_flat_map(|cards| {
        let shape = Shape::new(cards, 2).unwrap();
        prop::collection::vec(0.0f64..=1.0, shape.n_rows()).prop_map(move |p0| {
            let rows = p0.into_iter().map(|p| vec![p, 1.0 - p]).collect();
            Cpt::from_shape(&shape, rows).unwrap()
        })
    })
}

/// Mechanism tables and a combiner with `f(0) = 0` for singleton blocks.
fn ici_case(max_parents: usize) -> impl Strategy<Value = (Shape, IciSpec)> {
    cards(max_parents).prop_flat_map(|cards| {
        let n = cards.len();
        let tables: Vec<_> = cards
            .iter()
            .map(|&s| prop::collection::vec(0.0f64..=1.0, s))
            .collect();
        let labels = prop::collection::vec(0usize..2, (1 << n) - 1);
        (Just(cards), tables, labels).prop_map(move |(cards, mech_cpts, rest)| {
            let labels = std::iter::once(0).chain(rest).collect();
            let spec = IciSpec {
                mech_cpts,
                combiner: Combiner::new(n, labels).unwrap(),
            };
            (Shape::new(cards, 2).unwrap(), spec)
        })
    })
}

fn max_diff(a: &Cpt, b: &Cpt) -> f64 {
    a.rows()
        .iter()
        .flatten()
        .zip(b.rows().iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn is_normalized(cpt: &Cpt) -> bool {
    cpt.rows().iter().all(|r| {
        r.iter().all(|p| (0.0..=1.0).contains(p)) && (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn row_index_and_config_are_inverse(cards in cards(5)) {
        let n_rows: usize = cards.iter().product();
        for i in 0..n_rows {
            let config = config_of(i, &cards).unwrap();
            prop_assert_eq!(row_index(&config, &cards).unwrap(), i);
        }
    }

    #[test]
    fn noisy_or_matches_closed_form(inhibitors in prop::collection::vec(0.0f64..=1.0, 1..=6)) {
        let shape = Shape::new(vec![2; inhibitors.len()], 2).unwrap();
        let cpt = ici_evaluate(&shape, &noisy_or(&inhibitors).unwrap()).unwrap();
        for (row, config) in shape.configs().enumerate() {
            let closed: f64 = config
                .values()
                .iter()
                .zip(&inhibitors)
                .filter(|(&x, _)| x == 1)
                .map(|(_, p)| p)
                .product();
            prop_assert!((cpt.row(row)[0] - closed).abs() <= 1e-12);
        }
    }

    #[test]
    fn mechanism_model_reductions_agree((shape, ici) in ici_case(4)) {
        let n = shape.n_parents();
        let direct = ici_evaluate(&shape, &ici).unwrap();
        prop_assert!(is_normalized(&direct));

        let us = SiciSpec {
            blocks: (0..n).map(|p| vec![p]).collect(),
            mech_cpts: ici.mech_cpts.clone(),
            lower: Lower::Deterministic(ici.combiner.clone()),
        };
        let us_cpt = us_sici_evaluate(&shape, &us).unwrap();
        prop_assert!(max_diff(&us_cpt, &direct) <= 1e-12);

        let indicator = ici.combiner.indicator_table(2);
        let pici = pici_evaluate(&shape, &ici.mech_cpts, &indicator).unwrap();
        prop_assert!(max_diff(&pici, &direct) <= 1e-12);

        let ds = SiciSpec { lower: Lower::Stochastic(indicator), ..us };
        let ds_cpt = ds_sici_evaluate(&shape, &ds).unwrap();
        prop_assert!(max_diff(&ds_cpt, &us_cpt) <= 1e-12);
        for cpt in [&us_cpt, &pici, &ds_cpt] {
            prop_assert!(is_normalized(cpt));
        }
    }

    #[test]
    fn save_then_load_is_bitwise(truth in binary_cpt(4)) {
        let reloaded = cpt_from_json(&cpt_to_json(&truth).unwrap()).unwrap();
        prop_assert_eq!(reloaded.rows(), truth.rows());
    }

    #[test]
    fn grouped_fits_account_for_every_parameter(truth in binary_cpt(4), seed in any::<u64>()) {
        let shape = truth.shape().clone();
        let n = shape.n_parents();
        let parent = (seed as usize) % n;
        let mut specs = vec![RefinementSpec::Prune(PruneSpec { parent })];
        if n >= 3 {
            let binarization = [0, 1]
                .iter()
                .map(|&p| if shape.parent_cards()[p] == 2 { vec![1] } else { vec![(seed as usize >> 8) % 3] })
                .collect();
            let gate = Gate::ALL[(seed as usize >> 4) % 3];
            specs.push(RefinementSpec::Divorce(
                DivorceSpec::new(&shape, vec![0, 1], gate, binarization).unwrap(),
            ));
        }
        let mask = seed % (1u64 << shape.n_rows().min(63));
        if let Ok(scm) = ScmSpec::from_mask(shape.n_rows(), mask) {
            specs.push(RefinementSpec::Scm(scm));
        }
        for spec in &specs {
            let fit = spec.evaluate(&truth).unwrap();
            let (free, savings) = param_savings(spec, &shape).unwrap();
            prop_assert_eq!(free as i64 + savings, shape.param_count() as i64);
            prop_assert!(fit.free_params <= free);
            prop_assert!(is_normalized(&fit.cpt));
            prop_assert!((score_sum_tvd(&truth, &fit.cpt).unwrap() - fit.score).abs() <= 1e-12);
        }
    }

    /// Pruning and divorcing refine the single-group fit, and the median is
    /// optimal per group, so neither can score worse than a constant table.
    #[test]
    fn refinements_never_lose_to_a_constant_table(truth in binary_cpt(4)) {
        let all: Vec<f64> = truth.rows().iter().map(|r| r[0]).collect();
        let m = cpt_refine::grouping::median_lad(&all).unwrap();
        let constant: f64 = all.iter().map(|p| (p - m).abs()).sum();
        for parent in 0..truth.shape().n_parents() {
            let fit = prune_fit(&truth, &PruneSpec { parent }).unwrap();
            prop_assert!(fit.score <= constant + 1e-12);
        }
        if truth.shape().n_parents() >= 3 {
            let spec = DivorceSpec::with_default_binarization(truth.shape(), vec![0, 1], Gate::Or, &[
                (0, vec![0]),
                (1, vec![0]),
            ])
            .unwrap();
            prop_assert!(divorce_fit(&truth, &spec).unwrap().score <= constant + 1e-12);
        }
        let scm = ScmSpec::from_mask(truth.n_rows(), 1).unwrap();
        prop_assert!(scm_fit(&truth, &scm).unwrap().score <= constant + 1e-12);
    }
}
