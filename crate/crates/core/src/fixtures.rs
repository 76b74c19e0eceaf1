//! The Anxiety node of the Cardiovascular network and its published
//! approximations, transcribed at four decimal places.
//!
//! Parents are Depression, Hypertension, Sex and SleepDuration (three states);
//! the child Anxiety is binary.

use crate::cpt::Cpt;
use crate::io::cpt_from_json;
use crate::report::Method;

pub const ANXIETY_JSON: &str = include_str!("../fixtures/anxiety.json");
pub const ANXIETY_PRUNING_JSON: &str = include_str!("../fixtures/anxiety_pruning.json");
pub const ANXIETY_DIVORCING_JSON: &str = include_str!("../fixtures/anxiety_divorcing.json");
pub const ANXIETY_SCM_JSON: &str = include_str!("../fixtures/anxiety_scm.json");
pub const ANXIETY_ICI_JSON: &str = include_str!("../fixtures/anxiety_ici.json");
pub const ANXIETY_SICI_JSON: &str = include_str!("../fixtures/anxiety_sici.json");

pub fn anxiety() -> Cpt {
    cpt_from_json(ANXIETY_JSON).expect("bundled fixture is valid")
}

/// The published optimal approximation for `method`.
pub fn anxiety_column(method: Method) -> Cpt {
    let text = match method {
        Method::Pruning => ANXIETY_PRUNING_JSON,
        Method::Divorcing => ANXIETY_DIVORCING_JSON,
        Method::Scm => ANXIETY_SCM_JSON,
        Method::Ici => ANXIETY_ICI_JSON,
        Method::Sici => ANXIETY_SICI_JSON,
    };
    cpt_from_json(text).expect("bundled fixture is valid")
}

/// Published optimal scores, in [`Method::ALL`] order.
pub const PUBLISHED_SCORES: [f64; 5] = [0.6487, 0.5072, 1.2693, 0.5520, 0.3700];

/// Published free-parameter counts and savings, in [`Method::ALL`] order.
pub const PUBLISHED_PARAMS: [(usize, i64); 5] = [(12, 12), (8, 16), (2, 22), (9, 15), (14, 10)];
