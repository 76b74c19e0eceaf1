//! A mixed integer/real genetic algorithm.
//!
//! Every gene lives in `[0, 1]`. Integer genes with `k` labels decode as
//! `floor(g · k)` (clamped to `k − 1`); real genes are used as they are.
//! Each generation keeps the elite, fills the rest of the population through
//! binary tournaments, uniform crossover and mutation, then evaluates the
//! offspring in parallel. All random draws happen on one seeded stream in a
//! fixed order, so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{Progress, SearchResult};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub max_generations: usize,
    /// Probability that an offspring is mutated.
    pub mutation_prob: f64,
    pub elitism_frac: f64,
    pub crossover_prob: f64,
    /// Generations without improvement of the best score before stopping.
    pub stall_limit: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Standard deviation of the Gaussian step on real genes.
    pub mutation_sigma: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 300,
            max_generations: 2000,
            mutation_prob: 0.3,
            elitism_frac: 0.05,
            crossover_prob: 0.8,
            stall_limit: 50,
            seed: 0,
            restarts: 10,
            mutation_sigma: 0.1,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        if self.population < 2 {
            return Err(Error::Config(format!(
                "population must be at least 2, got {}",
                self.population
            )));
        }
        unit("mutation_prob", self.mutation_prob)?;
        unit("elitism_frac", self.elitism_frac)?;
        unit("crossover_prob", self.crossover_prob)?;
        if self.stall_limit < 1 {
            return Err(Error::Config("stall_limit must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if self.mutation_sigma.is_nan() || self.mutation_sigma <= 0.0 {
            return Err(Error::Config("mutation_sigma must be positive".into()));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elitism_frac * self.population as f64).ceil() as usize).min(self.population)
    }
}

/// Layout of a chromosome: integer genes (with their label counts) followed
/// by real genes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoding {
    pub integer_cards: Vec<usize>,
    pub n_reals: usize,
}

impl Encoding {
    pub fn len(&self) -> usize {
        self.integer_cards.len() + self.n_reals
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn decode(&self, chromosome: &[f64]) -> Genome {
        let (ints, reals) = chromosome.split_at(self.integer_cards.len());
        Genome {
            integer_part: ints
                .iter()
                .zip(&self.integer_cards)
                .map(|(&g, &k)| ((g * k as f64) as usize).min(k - 1))
                .collect(),
            real_part: reals.to_vec(),
        }
    }
}

/// A decoded candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub integer_part: Vec<usize>,
    pub real_part: Vec<f64>,
}

/// Minimizes `fitness` over `config.restarts` independent seeded runs
/// (seeds `seed, seed + 1, ...`) and returns the best.
pub fn ga_optimize<F>(
    fitness: F,
    encoding: &Encoding,
    config: &GaConfig,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<SearchResult<Genome>>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    config.validate()?;
    if encoding.is_empty() {
        return Err(Error::Config("empty chromosome".into()));
    }
    if encoding.integer_cards.contains(&0) {
        return Err(Error::Config("integer gene with no labels".into()));
    }
    let mut best: Option<SearchResult<Genome>> = None;
    let mut evaluations = 0;
    for restart in 0..config.restarts {
        let seed = config.seed.wrapping_add(restart as u64);
        let run = ga_run(&fitness, encoding, config, seed, restart, on_progress);
        evaluations += run.evaluations;
        let better = match &best {
            None => true,
            Some(b) => run.best_score < b.best_score - super::TIE_TOLERANCE,
        };
        if better {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    best.evaluations = evaluations;
    Ok(best)
}

/// One seeded run.
pub fn ga_run<F>(
    fitness: &F,
    encoding: &Encoding,
    config: &GaConfig,
    seed: u64,
    restart: usize,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> SearchResult<Genome>
where
    F: Fn(&Genome) -> f64 + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, config.mutation_sigma).expect("validated sigma");
    let len = encoding.len();
    let n_ints = encoding.integer_cards.len();
    let evaluate = |pop: &[Vec<f64>]| -> Vec<f64> {
        pop.par_iter()
            .map(|c| {
                let score = fitness(&encoding.decode(c));
                if score.is_nan() {
                    f64::INFINITY
                } else {
                    score
                }
            })
            .collect()
    };

    let mut pop: Vec<Vec<f64>> = (0..config.population)
        .map(|_| (0..len).map(|_| rng.random::<f64>()).collect())
        .collect();
    let mut scores = evaluate(&pop);
    let mut evaluations = pop.len() as u64;

    let mut best_index = first_min(&scores);
    let mut best_chrom = pop[best_index].clone();
    let mut best_score = scores[best_index];
    let mut trace = vec![best_score];
    let mut stall = 0;
    let mut generations = 0;
    let elite = config.elite_count();

    while generations < config.max_generations && stall < config.stall_limit {
        generations += 1;
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

        let mut next: Vec<Vec<f64>> = order[..elite].iter().map(|&i| pop[i].clone()).collect();
        let mut next_scores: Vec<f64> = order[..elite].iter().map(|&i| scores[i]).collect();

        let tournament = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..pop.len());
            let b = rng.random_range(0..pop.len());
            if scores[b] < scores[a] {
                b
            } else {
                a
            }
        };
        let mut offspring = Vec::with_capacity(config.population - elite);
        while offspring.len() < config.population - elite {
            let pa = tournament(&mut rng);
            let pb = tournament(&mut rng);
            let (mut c1, mut c2) = (pop[pa].clone(), pop[pb].clone());
            if rng.random::<f64>() < config.crossover_prob {
                for g in 0..len {
                    if rng.random::<bool>() {
                        std::mem::swap(&mut c1[g], &mut c2[g]);
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                if rng.random::<f64>() < config.mutation_prob {
                    mutate(child, n_ints, &normal, &mut rng);
                }
            }
            offspring.push(c1);
            if offspring.len() < config.population - elite {
                offspring.push(c2);
            }
        }
        let offspring_scores = evaluate(&offspring);
        evaluations += offspring.len() as u64;
        next.extend(offspring);
        next_scores.extend(offspring_scores);
        pop = next;
        scores = next_scores;

        best_index = first_min(&scores);
        if scores[best_index] < best_score {
            best_score = scores[best_index];
            best_chrom = pop[best_index].clone();
            stall = 0;
        } else {
            stall += 1;
        }
        trace.push(best_score);
        on_progress(&Progress {
            restart,
            generation: generations,
            evaluations,
            best_score,
        });
    }

    SearchResult {
        best: encoding.decode(&best_chrom),
        best_score,
        evaluations,
        seed_used: seed,
        generations_run: generations,
        trace,
    }
}

/// Each gene changes with probability `1/L`, at least one gene per mutation.
fn mutate(chrom: &mut [f64], n_ints: usize, normal: &Normal<f64>, rng: &mut ChaCha8Rng) {
    let len = chrom.len();
    let forced = rng.random_range(0..len);
    let rate = 1.0 / len as f64;
    for (g, gene) in chrom.iter_mut().enumerate() {
        if g != forced && rng.random::<f64>() >= rate {
            continue;
        }
        if g < n_ints {
            *gene = rng.random::<f64>();
        } else {
            *gene = (*gene + normal.sample(rng)).clamp(0.0, 1.0);
        }
    }
}

fn first_min(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    best
}
