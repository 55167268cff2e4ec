use std::fmt;

use serde::Serialize;

use super::{bic, gi_canonical, pe, sbi_table, wl1, HomFamily, InvariantError, SubsetProperty};
use crate::graph::Graph;
use crate::subiso::{subiso, SearchBudget};

#[derive(Debug, Clone)]
pub struct HierarchyOptions {
    pub hom_family: HomFamily,
    pub sbi_property: SubsetProperty,
    pub budget: SearchBudget,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        Self {
            hom_family: HomFamily::standard(),
            sbi_property: SubsetProperty::Adjacency,
            budget: SearchBudget::default(),
        }
    }
}

/// Invariants from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantKind {
    Wl1,
    Bic,
    Pe,
    Hom,
    Sbi,
    Gi,
}

impl InvariantKind {
    pub const ALL: [InvariantKind; 6] = [Self::Wl1, Self::Bic, Self::Pe, Self::Hom, Self::Sbi, Self::Gi];

    pub fn name(self) -> &'static str {
        match self {
            Self::Wl1 => "wl1",
            Self::Bic => "bic",
            Self::Pe => "pe",
            Self::Hom => "hom",
            Self::Sbi => "sbi",
            Self::Gi => "gi",
        }
    }
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Distinguish,
    Skipped(String),
}

impl Verdict {
    fn of(equal: bool) -> Self {
        if equal {
            Self::Agree
        } else {
            Self::Distinguish
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Agree => "agree",
            Self::Distinguish => "distinguish",
            Self::Skipped(_) => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairReport {
    pub pair_id: String,
    pub verdicts: Vec<(InvariantKind, Verdict)>,
}

impl PairReport {
    pub fn verdict(&self, kind: InvariantKind) -> &Verdict {
        &self.verdicts.iter().find(|(k, _)| *k == kind).expect("all kinds present").1
    }
}

fn compare<T: PartialEq>(a: Result<T, InvariantError>, b: Result<T, InvariantError>) -> Verdict {
    match (a, b) {
        (Ok(a), Ok(b)) => Verdict::of(a == b),
        (Err(e), _) | (_, Err(e)) => Verdict::Skipped(e.to_string()),
    }
}

fn sbi_verdict(g: &Graph, h: &Graph, opts: &HierarchyOptions) -> Verdict {
    if g.node_count() != h.node_count() {
        return Verdict::Distinguish;
    }
    let tables = sbi_table(g, opts.sbi_property).and_then(|a| Ok((a, sbi_table(h, opts.sbi_property)?)));
    match tables {
        Ok((a, b)) => match subiso(&a, &b, opts.budget) {
            Ok(w) => Verdict::of(w.is_some()),
            Err(e) => Verdict::Skipped(e.to_string()),
        },
        Err(e) => Verdict::Skipped(e.to_string()),
    }
}

/// Whether each invariant tells the two graphs apart.
pub fn compare_pair(pair_id: &str, g: &Graph, h: &Graph, opts: &HierarchyOptions) -> PairReport {
    let verdicts = InvariantKind::ALL
        .iter()
        .map(|&kind| {
            let v = match kind {
                InvariantKind::Wl1 => Verdict::of(wl1(g) == wl1(h)),
                InvariantKind::Bic => Verdict::of(bic(g) == bic(h)),
                InvariantKind::Pe => compare(pe(g), pe(h)),
                InvariantKind::Hom => compare(opts.hom_family.counts(g), opts.hom_family.counts(h)),
                InvariantKind::Sbi => sbi_verdict(g, h, opts),
                InvariantKind::Gi => compare(gi_canonical(g), gi_canonical(h)),
            };
            (kind, v)
        })
        .collect();
    PairReport { pair_id: pair_id.to_string(), verdicts }
}

pub fn hierarchy_report(pairs: &[(String, Graph, Graph)], opts: &HierarchyOptions) -> Vec<PairReport> {
    pairs.iter().map(|(id, g, h)| compare_pair(id, g, h, opts)).collect()
}

/// `pair_id,invariant,verdict` rows.
pub fn report_to_csv(reports: &[PairReport]) -> String {
    let mut out = String::from("pair_id,invariant,verdict\n");
    for r in reports {
        for (kind, v) in &r.verdicts {
            out.push_str(&format!("{},{},{}\n", r.pair_id, kind, v.label()));
        }
    }
    out
}
