//! JSON documents for conditional probability tables.
//!
//! ```json
//! {
//!   "format": 1,
//!   "child": { "name": "Anxiety", "states": ["No", "Yes"] },
//!   "parents": [ { "name": "Sex", "states": ["Female", "Male"] } ],
//!   "rows": [
//!     { "config": ["Female"], "probs": [0.9, 0.1] },
//!     { "config": ["Male"], "probs": [0.8, 0.2] }
//!   ]
//! }
//! ```
//!
//! Rows may appear in any order but must cover every parent configuration
//! exactly once; documents are always written in canonical row order.

use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::cpt::{check_distribution, Cpt, ParentConfig, Variable, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Row sums further than this from one are rejected on load.
pub const LOAD_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDoc {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDoc {
    pub config: Vec<String>,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptDocument {
    pub format: u32,
    pub child: VariableDoc,
    pub parents: Vec<VariableDoc>,
    pub rows: Vec<RowDoc>,
}

impl From<&Variable> for VariableDoc {
    fn from(v: &Variable) -> Self {
        Self {
            name: v.name().to_owned(),
            states: v.states().to_vec(),
        }
    }
}

impl From<&Cpt> for CptDocument {
    fn from(cpt: &Cpt) -> Self {
        let rows = (0..cpt.n_rows())
            .map(|k| RowDoc {
                config: cpt
                    .config_labels(k)
                    .into_iter()
                    .map(str::to_owned)
                    .collect(),
                probs: cpt.row(k).to_vec(),
            })
            .collect();
        Self {
            format: FORMAT_VERSION,
            child: cpt.child().into(),
            parents: cpt.parents().iter().map(Into::into).collect(),
            rows,
        }
    }
}

impl CptDocument {
    pub fn to_cpt(&self) -> Result<Cpt> {
        if self.format != FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported format {}, expected {FORMAT_VERSION}",
                self.format
            )));
        }
        let child = Variable::new(self.child.name.clone(), self.child.states.clone())?;
        let parents = self
            .parents
            .iter()
            .map(|p| Variable::new(p.name.clone(), p.states.clone()))
            .collect::<Result<Vec<_>>>()?;
        let cards: Vec<usize> = parents.iter().map(Variable::cardinality).collect();
        let n_rows: usize = cards.iter().product();

        let mut rows: Vec<Option<Vec<f64>>> = vec![None; n_rows];
        for row in &self.rows {
            let label = || format!("[{}]", row.config.join(", "));
            if row.config.len() != parents.len() {
                return Err(Error::Document(format!(
                    "row {} has {} states for {} parents",
                    label(),
                    row.config.len(),
                    parents.len()
                )));
            }
            let values = row
                .config
                .iter()
                .zip(&parents)
                .map(|(s, p)| {
                    p.state_index(s).ok_or_else(|| {
                        Error::Document(format!(
                            "row {}: unknown state {s:?} for {}",
                            label(),
                            p.name()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let index = crate::cpt::row_index(&ParentConfig(values), &cards)?;
            if rows[index].is_some() {
                return Err(Error::Document(format!("duplicate row {}", label())));
            }
            let probs = normalize_loaded(&row.probs, child.cardinality()).map_err(|reason| {
                Error::NotNormalized {
                    row: label(),
                    reason,
                }
            })?;
            rows[index] = Some(probs);
        }

        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(k, r)| {
                r.ok_or_else(|| {
                    let config = crate::cpt::config_of(k, &cards).expect("index in range");
                    let labels: Vec<&str> = config
                        .values()
                        .iter()
                        .zip(&parents)
                        .map(|(&s, p)| p.states()[s].as_str())
                        .collect();
                    Error::Document(format!("missing row [{}]", labels.join(", ")))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Cpt::new(child, parents, rows)
    }
}

fn normalize_loaded(probs: &[f64], len: usize) -> std::result::Result<Vec<f64>, String> {
    check_distribution(probs, len, LOAD_TOLERANCE)?;
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() <= NORMALIZATION_TOLERANCE {
        return Ok(probs.to_vec());
    }
    warn!("row sums to {sum}; renormalizing");
    Ok(probs.iter().map(|p| p / sum).collect())
}

pub fn cpt_from_json(text: &str) -> Result<Cpt> {
    let doc: CptDocument = serde_json::from_str(text)?;
    doc.to_cpt()
}

pub fn cpt_to_json(cpt: &Cpt) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&CptDocument::from(cpt))?;
    text.push('\n');
    Ok(text)
}

pub fn load_cpt(path: impl AsRef<Path>) -> Result<Cpt> {
    cpt_from_json(&fs::read_to_string(path)?)
}

pub fn save_cpt(cpt: &Cpt, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, cpt_to_json(cpt)?.as_bytes())
}

/// Writes through a temporary file in the destination directory, then renames.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
