//! Search over the deterministic function of a simple canonical model, i.e.
//! over two-block partitions of the table's rows.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::cpt::Cpt;
use crate::error::{Error, Result};
use crate::grouping::{median_sorted, normalize_medians};
use crate::metrics::tvd_unchecked;
use crate::refine::{scm_fit, RefinementSpec, ScmSpec};

use super::ga::{ga_optimize, Encoding, GaConfig, Genome};
use super::partitions::{bipartition_count, MAX_BIPARTITION_ITEMS};
use super::{Progress, SearchResult, TIE_TOLERANCE};

const CHUNK: u64 = 1 << 15;

/// Scores bipartitions without building tables. Rows are pre-sorted per child
/// state so each block's column comes out sorted in one pass.
struct BipartitionScorer<'a> {
    truth: &'a Cpt,
    sorted: Vec<Vec<(f64, usize)>>,
}

#[derive(Default)]
struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    qa: Vec<f64>,
    qb: Vec<f64>,
}

impl<'a> BipartitionScorer<'a> {
    fn new(truth: &'a Cpt) -> Self {
        let sorted = (0..truth.shape().child_card())
            .map(|c| {
                let mut col: Vec<(f64, usize)> = truth
                    .rows()
                    .iter()
                    .enumerate()
                    .map(|(r, p)| (p[c], r))
                    .collect();
                col.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
                col
            })
            .collect();
        Self { truth, sorted }
    }

    /// Summed TVD of the median fit; `in_b(r)` says whether row `r` is in
    /// the second block.
    fn cost(&self, in_b: impl Fn(usize) -> bool, s: &mut Scratch) -> f64 {
        let binary = self.sorted.len() == 2;
        s.qa.clear();
        s.qb.clear();
        for col in &self.sorted {
            s.a.clear();
            s.b.clear();
            for &(v, r) in col {
                if in_b(r) {
                    s.b.push(v)
                } else {
                    s.a.push(v)
                }
            }
            // an empty block contributes nothing, whatever its median
            let ma = if s.a.is_empty() {
                0.0
            } else {
                median_sorted(&s.a)
            };
            let mb = if s.b.is_empty() {
                0.0
            } else {
                median_sorted(&s.b)
            };
            if binary {
                return s.a.iter().map(|v| (v - ma).abs()).sum::<f64>()
                    + s.b.iter().map(|v| (v - mb).abs()).sum::<f64>();
            }
            s.qa.push(ma);
            s.qb.push(mb);
        }
        normalize_medians(&mut s.qa);
        normalize_medians(&mut s.qb);
        self.truth
            .rows()
            .iter()
            .enumerate()
            .map(|(r, p)| tvd_unchecked(p, if in_b(r) { &s.qb } else { &s.qa }))
            .sum()
    }
}

/// Exact SCM optimum over every non-trivial bipartition of the rows.
///
/// Shards of the enumeration are scored in parallel and reduced in index
/// order, so the winner (the first minimum) is independent of scheduling.
pub fn scm_bruteforce(
    truth: &Cpt,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<RefinementSpec>> {
    let n = truth.n_rows();
    if !(2..=MAX_BIPARTITION_ITEMS).contains(&n) {
        return Err(Error::SearchSpace(format!(
            "SCM brute force supports 2..={MAX_BIPARTITION_ITEMS} rows, table has {n}"
        )));
    }
    let scorer = BipartitionScorer::new(truth);
    let total = bipartition_count(n);
    let n_chunks = total.div_ceil(CHUNK);
    let done = AtomicU64::new(0);
    let best_so_far = Mutex::new(f64::INFINITY);

    let shard_bests: Vec<(f64, u64)> = (0..n_chunks)
        .into_par_iter()
        .map_init(Scratch::default, |scratch, chunk| {
            let lo = chunk * CHUNK + 1;
            let hi = ((chunk + 1) * CHUNK).min(total);
            let mut best = (f64::INFINITY, 0u64);
            for b in lo..=hi {
                let mask = b << 1;
                let cost = scorer.cost(|r| mask >> r & 1 == 1, scratch);
                if cost < best.0 - TIE_TOLERANCE {
                    best = (cost, mask);
                }
            }
            let evaluations = done.fetch_add(hi + 1 - lo, Ordering::Relaxed) + hi + 1 - lo;
            let best_score = {
                let mut g = best_so_far.lock().expect("progress lock");
                *g = g.min(best.0);
                *g
            };
            on_progress(&Progress {
                restart: 0,
                generation: 0,
                evaluations,
                best_score,
            });
            best
        })
        .collect();

    let mut best = (f64::INFINITY, 0u64);
    for shard in shard_bests {
        if shard.0 < best.0 - TIE_TOLERANCE {
            best = shard;
        }
    }
    let spec = ScmSpec::from_mask(n, best.1)?;
    let fit = scm_fit(truth, &spec)?;
    Ok(SearchResult {
        best: RefinementSpec::Scm(spec),
        best_score: fit.score,
        evaluations: total,
        seed_used: 0,
        generations_run: 0,
        trace: Vec::new(),
    })
}

/// Integer GA over row labels, for tables too large to enumerate. Row 0 is
/// pinned to the first block.
pub fn scm_ga(
    truth: &Cpt,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<RefinementSpec>> {
    let n = truth.n_rows();
    if n < 2 {
        return Err(Error::Spec("SCM needs at least two rows".into()));
    }
    let scorer = BipartitionScorer::new(truth);
    // any non-trivial split beats the single block, so the single-block cost
    // plus one is a safe penalty for degenerate genomes
    let penalty = {
        let mut s = Scratch::default();
        scorer.cost(|_| false, &mut s) + 1.0
    };
    let encoding = Encoding {
        integer_cards: vec![2; n - 1],
        n_reals: 0,
    };
    let fitness = |g: &Genome| {
        if g.integer_part.iter().all(|&b| b == 0) {
            return penalty;
        }
        let mut s = Scratch::default();
        scorer.cost(|r| r > 0 && g.integer_part[r - 1] == 1, &mut s)
    };
    let result = ga_optimize(fitness, &encoding, config, on_progress)?;
    let m1: Vec<bool> = std::iter::once(false)
        .chain(result.best.integer_part.iter().map(|&b| b == 1))
        .collect();
    let spec = ScmSpec::new(m1)?;
    let fit = scm_fit(truth, &spec)?;
    let mut out = result.map(|_| RefinementSpec::Scm(spec));
    out.best_score = fit.score;
    Ok(out)
}

/// Brute force when the rows can be enumerated, the GA otherwise.
pub fn optimize_scm(
    truth: &Cpt,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<RefinementSpec>> {
    if truth.n_rows() <= MAX_BIPARTITION_ITEMS {
        scm_bruteforce(truth, on_progress)
    } else {
        scm_ga(truth, config, on_progress)
    }
}
