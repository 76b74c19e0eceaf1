//! Search over structures and parameters.

mod causal;
mod ga;
mod partitions;
mod scm_search;

pub use causal::{optimize_ici, optimize_sici, optimize_sici_partition, SiciSearch};
pub use ga::{ga_optimize, ga_run, Encoding, GaConfig, Genome};
pub use partitions::{
    bipartition_count, enumerate_bipartitions, enumerate_set_partitions, Bipartitions,
    SetPartitions, MAX_BIPARTITION_ITEMS, MAX_SET_PARTITION_ITEMS,
};
pub use scm_search::{optimize_scm, scm_bruteforce, scm_ga};

pub(crate) use crate::refine::TIE_TOLERANCE;

/// Progress reported while a search runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub restart: usize,
    pub generation: usize,
    pub evaluations: u64,
    pub best_score: f64,
}

/// Discards progress reports.
pub fn no_progress(_: &Progress) {}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    pub best: T,
    pub best_score: f64,
    pub evaluations: u64,
    pub seed_used: u64,
    pub generations_run: usize,
    /// Best score after each generation of the winning run.
    pub trace: Vec<f64>,
}

impl<T> SearchResult<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> SearchResult<U> {
        SearchResult {
            best: f(self.best),
            best_score: self.best_score,
            evaluations: self.evaluations,
            seed_used: self.seed_used,
            generations_run: self.generations_run,
            trace: self.trace,
        }
    }
}
