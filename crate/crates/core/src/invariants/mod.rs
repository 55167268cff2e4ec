//! Graph invariants compared by expressivity: 1-WL colors, biconnectivity,
//! Laplacian characteristic polynomial, homomorphism counts, subset-property
//! truth tables and exact canonical forms.

mod bic;
mod canon;
mod catalog;
mod hierarchy;
mod hom;
mod pe;
mod sbi;
mod wl;

use serde::Serialize;
use thiserror::Error;

use crate::boolfn::TruthTable;
use crate::graph::Graph;

pub use bic::{bic, BicSummary};
pub use canon::{gi_canonical, CanonicalForm, GI_MAX_NODES};
pub use catalog::graph_catalog;
pub use hierarchy::{
    compare_pair, hierarchy_report, report_to_csv, HierarchyOptions, InvariantKind, PairReport, Verdict,
};
pub use hom::{hom_count, HomFamily, HOM_MAX_PATTERN};
pub use pe::{pe, LaplacianPolynomial, PE_MAX_NODES};
pub use sbi::{sbi_table, SubsetProperty};
pub use wl::{wl1, wl1_colors, WlHistogram, WlSignature};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("{invariant}: {n} nodes exceeds the limit of {max}")]
    TooLarge { invariant: &'static str, n: usize, max: usize },
    #[error("unknown subset property `{0}` (expected adjacency, clique or connected)")]
    UnknownProperty(String),
    #[error("unknown homomorphism pattern `{0}`")]
    UnknownPattern(String),
}

/// A field that may be skipped when the graph exceeds its size limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Limited<T> {
    Value(T),
    Skipped { skipped: String },
}

impl<T> Limited<T> {
    fn from_result(r: Result<T, InvariantError>) -> Self {
        match r {
            Ok(v) => Limited::Value(v),
            Err(e) => Limited::Skipped { skipped: format!("limit: {e}") },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Limited::Value(v) => Some(v),
            Limited::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantSummary {
    pub nodes: usize,
    pub edges: usize,
    pub wl1: WlHistogram,
    pub bic: BicSummary,
    pub pe: Limited<LaplacianPolynomial>,
    pub hom: Limited<Vec<(String, u128)>>,
    pub sbi_property: SubsetProperty,
    #[serde(serialize_with = "table_bits")]
    pub sbi: Limited<TruthTable>,
    pub gi: Limited<CanonicalForm>,
}

fn table_bits<S: serde::Serializer>(t: &Limited<TruthTable>, s: S) -> Result<S::Ok, S::Error> {
    match t {
        Limited::Value(t) => s.collect_str(&t.iter().map(|b| if b { '1' } else { '0' }).collect::<String>()),
        skipped => skipped_only(skipped, s),
    }
}

fn skipped_only<T, S: serde::Serializer>(t: &Limited<T>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let Limited::Skipped { skipped } = t else { unreachable!() };
    let mut m = s.serialize_map(Some(1))?;
    m.serialize_entry("skipped", skipped)?;
    m.end()
}

/// Every invariant of `g`; fields over their size limit are marked skipped.
pub fn summarize(g: &Graph, family: &HomFamily, property: SubsetProperty) -> InvariantSummary {
    InvariantSummary {
        nodes: g.node_count(),
        edges: g.edge_count(),
        wl1: wl1(g),
        bic: bic(g),
        pe: Limited::from_result(pe(g)),
        hom: Limited::from_result(family.counts(g)),
        sbi_property: property,
        sbi: Limited::from_result(sbi_table(g, property)),
        gi: Limited::from_result(gi_canonical(g)),
    }
}
