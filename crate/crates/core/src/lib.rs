//! Structural approximation of conditional probability tables.
//!
//! A full table `p(y | x₁, …, xₙ)` is replaced by a refined structure with
//! fewer free parameters — an edge prune, a divorce through a logic gate, a
//! simple canonical model, or an (S)ICI mechanism model — and the structure's
//! parameters are fitted to minimise the summed row-wise total variation
//! distance to the original.

pub mod cpt;
pub mod error;
pub mod fixtures;
pub mod grouping;
pub mod io;
pub mod metrics;
pub mod optimizer;
pub mod refine;
pub mod report;

pub use cpt::{Cpt, ParentConfig, Shape, Variable};
pub use error::{Error, Result};
pub use io::{load_cpt, save_cpt, CptDocument};
pub use metrics::{score, score_sum_tvd, Metric};
pub use optimizer::{GaConfig, Progress, SearchResult};
pub use refine::{ApproxResult, RefinementSpec};
pub use report::{reproduce, Method, Report, ReportRow};
