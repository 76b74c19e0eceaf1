//! Runs every method against one table and renders the comparison.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::cpt::Cpt;
use crate::error::{Error, Result};
use crate::io::{cpt_to_json, write_atomic};
use crate::optimizer::{optimize_ici, optimize_scm, optimize_sici, GaConfig, Progress};
use crate::refine::{divorce_best, param_savings, prune_best, RefinementSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Pruning,
    Divorcing,
    Scm,
    Ici,
    Sici,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Pruning,
        Method::Divorcing,
        Method::Scm,
        Method::Ici,
        Method::Sici,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pruning => "Pruning",
            Method::Divorcing => "Divorcing",
            Method::Scm => "SCM",
            Method::Ici => "ICI",
            Method::Sici => "SICI",
        }
    }

    /// Lower-case identifier used for file names and the command line.
    pub fn slug(self) -> &'static str {
        match self {
            Method::Pruning => "pruning",
            Method::Divorcing => "divorcing",
            Method::Scm => "scm",
            Method::Ici => "ici",
            Method::Sici => "sici",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.slug().eq_ignore_ascii_case(s) || m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Spec(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub method: Method,
    pub score: f64,
    pub free_params: usize,
    pub savings: i64,
    pub summary: String,
    pub spec: RefinementSpec,
    pub approx: Cpt,
}

/// One searched SICI partition.
#[derive(Debug, Clone)]
pub struct PartitionRow {
    pub summary: String,
    pub score: f64,
    pub free_params: usize,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub truth: Cpt,
    pub rows: Vec<ReportRow>,
    pub sici_partitions: Vec<PartitionRow>,
}

/// Divorces two parents, as a pair is the smallest non-trivial divorce.
pub const DIVORCE_SIZE: usize = 2;

fn row(truth: &Cpt, method: Method, spec: RefinementSpec) -> Result<ReportRow> {
    let fit = spec.evaluate(truth)?;
    let (free_params, savings) = param_savings(&spec, truth.shape())?;
    Ok(ReportRow {
        method,
        score: fit.score,
        free_params,
        savings,
        summary: spec.describe(truth),
        spec,
        approx: fit.cpt,
    })
}

/// Best model of every method. Pruning and divorcing need at least two and
/// three parents; the mechanism searches need a binary child.
pub fn reproduce(
    truth: &Cpt,
    config: &GaConfig,
    on_progress: &(dyn Fn(Method, &Progress) + Sync),
) -> Result<Report> {
    let mut rows = Vec::with_capacity(Method::ALL.len());

    log::info!("pruning");
    let (prune, _) = prune_best(truth)?;
    rows.push(row(truth, Method::Pruning, RefinementSpec::Prune(prune))?);

    log::info!("divorcing");
    let (divorce, _) = divorce_best(truth, DIVORCE_SIZE)?;
    rows.push(row(
        truth,
        Method::Divorcing,
        RefinementSpec::Divorce(divorce),
    )?);

    log::info!("SCM");
    let scm = optimize_scm(truth, config, &|p| on_progress(Method::Scm, p))?;
    rows.push(row(truth, Method::Scm, scm.best)?);

    log::info!("ICI");
    let ici = optimize_ici(truth, config, &|p| on_progress(Method::Ici, p))?;
    rows.push(row(truth, Method::Ici, ici.best)?);

    log::info!("SICI");
    let sici = optimize_sici(truth, config, &|p| on_progress(Method::Sici, p))?;
    let sici_partitions = sici
        .per_partition
        .iter()
        .map(|r| {
            let (free_params, _) = param_savings(&r.best, truth.shape())?;
            Ok(PartitionRow {
                summary: r.best.describe(truth),
                score: r.best_score,
                free_params,
            })
        })
        .collect::<Result<_>>()?;
    rows.push(row(truth, Method::Sici, sici.best_result().best.clone())?);

    Ok(Report {
        truth: truth.clone(),
        rows,
        sici_partitions,
    })
}

impl Report {
    pub fn row(&self, method: Method) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// One line per method: score (4dp), free parameters, savings, summary.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["method", "score", "free_params", "savings", "summary"])?;
        for r in &self.rows {
            w.write_record([
                r.method.name(),
                &format!("{:.4}", r.score),
                &r.free_params.to_string(),
                &r.savings.to_string(),
                &r.summary,
            ])?;
        }
        finish_csv(w)
    }

    /// The comparison as an aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self
            .rows
            .iter()
            .map(|r| r.summary.len())
            .max()
            .unwrap_or(0)
            .max(7);
        out.push_str(&format!(
            "{:<10} {:>8} {:>7} {:>8}  {:<width$}\n",
            "method", "score", "params", "savings", "summary"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10} {:>8.4} {:>7} {:>8}  {:<width$}\n",
                r.method.name(),
                r.score,
                r.free_params,
                r.savings,
                r.summary
            ));
        }
        if !self.sici_partitions.is_empty() {
            out.push_str("\nSICI partitions:\n");
            for p in &self.sici_partitions {
                out.push_str(&format!(
                    "  {:>8.4} {:>4}  {}\n",
                    p.score, p.free_params, p.summary
                ));
            }
        }
        out.lines()
            .map(str::trim_end)
            .collect::<Vec<_>>()
            .join("\n")
            + "\n"
    }

    /// Truth and every approximation side by side, one line per parent
    /// configuration and child state, at four decimal places.
    pub fn side_by_side_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header: Vec<String> = self
            .truth
            .parents()
            .iter()
            .map(|p| p.name().to_owned())
            .collect();
        header.push(self.truth.child().name().to_owned());
        header.push("True".to_owned());
        header.extend(self.rows.iter().map(|r| r.method.name().to_owned()));
        w.write_record(&header)?;
        for i in 0..self.truth.n_rows() {
            for (c, state) in self.truth.child().states().iter().enumerate() {
                let mut record: Vec<String> = self
                    .truth
                    .config_labels(i)
                    .into_iter()
                    .map(str::to_owned)
                    .collect();
                record.push(state.clone());
                record.push(format!("{:.4}", self.truth.row(i)[c]));
                record.extend(
                    self.rows
                        .iter()
                        .map(|r| format!("{:.4}", r.approx.row(i)[c])),
                );
                w.write_record(&record)?;
            }
        }
        finish_csv(w)
    }

    /// Writes `report.csv`, `report.txt`, `side_by_side.csv` and one CPT
    /// document per method into `dir`.
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_atomic(dir.join("report.csv"), self.to_csv()?.as_bytes())?;
        write_atomic(dir.join("report.txt"), self.to_text().as_bytes())?;
        write_atomic(
            dir.join("side_by_side.csv"),
            self.side_by_side_csv()?.as_bytes(),
        )?;
        for r in &self.rows {
            let name = format!("{}.json", r.method.slug());
            write_atomic(dir.join(name), cpt_to_json(&r.approx)?.as_bytes())?;
        }
        Ok(())
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| Error::Document(e.to_string()))
}
