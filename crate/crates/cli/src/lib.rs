//! Command implementations behind the `cpt-refine` binary. Each returns the
//! text to print so the commands can be driven from tests.

use std::fmt::Write as _;
use std::path::Path;

use cpt_refine::error::{Error, Result};
use cpt_refine::metrics::row_scores;
use cpt_refine::optimizer::{optimize_ici, optimize_scm, optimize_sici, optimize_sici_partition};
use cpt_refine::refine::{
    divorce_fit, param_savings, prune_fit, DivorceSpec, Gate, PruneSpec, RefinementSpec,
};
use cpt_refine::{load_cpt, reproduce, save_cpt, Cpt, GaConfig, Method, Metric, Progress, Report};

/// Scores `approx` against `truth`; with `verbose`, one line per row first.
pub fn cmd_score(truth: &Path, approx: &Path, metric: Metric, verbose: bool) -> Result<String> {
    let truth = load_cpt(truth)?;
    let approx = load_cpt(approx)?;
    let rows = row_scores(&truth, &approx, metric)?;
    let mut out = String::new();
    if verbose {
        for (i, d) in rows.iter().enumerate() {
            let config = truth.config_labels(i).join(",");
            writeln!(out, "{:>3}  {config:<40} {d:.6}", i + 1).unwrap();
        }
    }
    writeln!(out, "{:.4}", rows.iter().sum::<f64>()).unwrap();
    Ok(out)
}

/// Runs every method; writes the summary CSV to `out` and the full set of
/// artifacts to `artifacts` when given.
pub fn cmd_reproduce(
    truth: &Path,
    config: &GaConfig,
    out: Option<&Path>,
    artifacts: Option<&Path>,
    on_progress: &(dyn Fn(Method, &Progress) + Sync),
) -> Result<Report> {
    let truth = load_cpt(truth)?;
    let report = reproduce(&truth, config, on_progress)?;
    if let Some(path) = out {
        cpt_refine::io::write_atomic(path, report.to_csv()?.as_bytes())?;
    }
    if let Some(dir) = artifacts {
        report.write_artifacts(dir)?;
    }
    Ok(report)
}

/// Structure to fit in [`cmd_method`], with parents and states by name.
#[derive(Debug, Clone)]
pub enum MethodRequest {
    Prune {
        parent: String,
    },
    Divorce {
        parents: Vec<String>,
        gate: Gate,
        maps: Vec<String>,
    },
    Scm,
    Ici,
    Sici {
        partition: Option<String>,
    },
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub spec: RefinementSpec,
    pub summary: String,
    pub score: f64,
    pub free_params: usize,
    pub savings: i64,
    pub approx: Cpt,
}

impl MethodOutcome {
    pub fn to_text(&self) -> String {
        format!(
            "structure: {}\nscore: {:.4}\nfree parameters: {}\nsavings: {}\n",
            self.summary, self.score, self.free_params, self.savings
        )
    }
}

/// Fits one method and writes the expanded table to `out` when given.
pub fn cmd_method(
    truth: &Path,
    request: &MethodRequest,
    config: &GaConfig,
    out: Option<&Path>,
    on_progress: &(dyn Fn(&Progress) + Sync),
) -> Result<MethodOutcome> {
    let truth = load_cpt(truth)?;
    let spec = match request {
        MethodRequest::Prune { parent } => {
            let spec = PruneSpec {
                parent: parent_index(&truth, parent)?,
            };
            prune_fit(&truth, &spec)?;
            RefinementSpec::Prune(spec)
        }
        MethodRequest::Divorce {
            parents,
            gate,
            maps,
        } => {
            let spec = divorce_spec(&truth, parents, *gate, maps)?;
            divorce_fit(&truth, &spec)?;
            RefinementSpec::Divorce(spec)
        }
        MethodRequest::Scm => optimize_scm(&truth, config, on_progress)?.best,
        MethodRequest::Ici => optimize_ici(&truth, config, on_progress)?.best,
        MethodRequest::Sici { partition: Some(p) } => {
            let blocks = parse_partition(&truth, p)?;
            optimize_sici_partition(&truth, blocks, config, on_progress)?.best
        }
        MethodRequest::Sici { partition: None } => optimize_sici(&truth, config, on_progress)?
            .best_result()
            .best
            .clone(),
    };
    let fit = spec.evaluate(&truth)?;
    let (free_params, savings) = param_savings(&spec, truth.shape())?;
    if let Some(path) = out {
        save_cpt(&fit.cpt, path)?;
    }
    Ok(MethodOutcome {
        summary: spec.describe(&truth),
        spec,
        score: fit.score,
        free_params,
        savings,
        approx: fit.cpt,
    })
}

fn parent_index(cpt: &Cpt, name: &str) -> Result<usize> {
    cpt.parent_index(name.trim()).ok_or_else(|| {
        let known: Vec<&str> = cpt.parents().iter().map(|p| p.name()).collect();
        Error::Spec(format!(
            "unknown parent {name:?}; parents are {}",
            known.join(", ")
        ))
    })
}

/// `maps` entries look like `Name=State[,State...]` and name the states that
/// feed the gate as true.
fn divorce_spec(cpt: &Cpt, parents: &[String], gate: Gate, maps: &[String]) -> Result<DivorceSpec> {
    let divorced = parents
        .iter()
        .map(|p| parent_index(cpt, p))
        .collect::<Result<Vec<_>>>()?;
    let overrides = maps
        .iter()
        .map(|m| {
            let (name, states) = m
                .split_once('=')
                .ok_or_else(|| Error::Spec(format!("--map {m:?} is not NAME=STATE[,STATE]")))?;
            let p = parent_index(cpt, name)?;
            if !divorced.contains(&p) {
                return Err(Error::Spec(format!(
                    "--map names {name:?}, which is not divorced"
                )));
            }
            let var = &cpt.parents()[p];
            let states = states
                .split(',')
                .map(|s| {
                    var.state_index(s.trim()).ok_or_else(|| {
                        Error::Spec(format!("{} has no state {:?}", var.name(), s.trim()))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((p, states))
        })
        .collect::<Result<Vec<_>>>()?;
    DivorceSpec::with_default_binarization(cpt.shape(), divorced, gate, &overrides)
}

/// Parses `"A | B,C"` into parent-index blocks.
pub fn parse_partition(cpt: &Cpt, text: &str) -> Result<Vec<Vec<usize>>> {
    text.split('|')
        .map(|block| {
            let names: Vec<&str> = block
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            if names.is_empty() {
                return Err(Error::Partition(format!("empty block in {text:?}")));
            }
            names.into_iter().map(|n| parent_index(cpt, n)).collect()
        })
        .collect()
}
