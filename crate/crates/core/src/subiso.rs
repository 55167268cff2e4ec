//! Isomorphism of Boolean functions under permutations of their variables, and
//! the reduction from graph isomorphism through weight-2 edge encodings.
//!
//! A permutation `π` acts on a table by `(π·f)(x) = f(π(x))`, where the `i`-th
//! coordinate of `π(x)` is `x_{π(i)}`. The search answers whether `f = π·g` for
//! some `π` and returns the witness.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::boolfn::{fwht, profile, TruthTable};
use crate::graph::Graph;
use crate::invariants::{gi_canonical, InvariantError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubIsoError {
    #[error("functions have {0} and {1} variables")]
    SizeMismatch(usize, usize),
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("graph has {0} nodes; encodings need 1..=20")]
    GraphSize(usize),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

/// A bijection on variables, stored 0-based: `map[i] = π(i + 1) - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarPermutation {
    map: Vec<usize>,
}

impl VarPermutation {
    pub fn new(map: Vec<usize>) -> Result<Self, SubIsoError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &p in &map {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(SubIsoError::NotAPermutation(n));
            }
        }
        Ok(Self { map })
    }

    /// From 1-based images `[π(1), ..., π(n)]`.
    pub fn from_one_based(images: &[usize]) -> Result<Self, SubIsoError> {
        let n = images.len();
        Self::new(
            images
                .iter()
                .map(|&p| p.checked_sub(1).ok_or(SubIsoError::NotAPermutation(n)))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Transposition of 1-based variables `a` and `b`.
    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a - 1, b - 1);
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.map.iter().map(|p| p + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &p) in self.map.iter().enumerate() {
            inv[p] = i;
        }
        Self { map: inv }
    }

    /// The index `π(x)`: bit `i` is bit `π(i)` of `x`.
    #[inline]
    pub fn act(&self, x: usize) -> usize {
        self.map.iter().enumerate().fold(0, |y, (i, &p)| y | (x >> p & 1) << i)
    }
}

/// `(π·f)(x) = f(π(x))`.
pub fn apply_perm(f: &TruthTable, pi: &VarPermutation) -> Result<TruthTable, SubIsoError> {
    if f.vars() != pi.len() {
        return Err(SubIsoError::SizeMismatch(f.vars(), pi.len()));
    }
    Ok(TruthTable::from_fn(f.vars(), |x| f.get(pi.act(x))).expect("same n"))
}

/// Bound on backtracking nodes explored by [`subiso`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { max_nodes: 20_000_000 }
    }
}

struct Backtrack<'a> {
    f: &'a TruthTable,
    g: &'a TruthTable,
    n: usize,
    /// candidates[i]: f-variables that g-variable i may map to.
    candidates: Vec<Vec<usize>>,
    map: Vec<usize>,
    used: Vec<bool>,
    /// f-index of each g-subset of already assigned variables.
    image: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Backtrack<'_> {
    fn assign(&mut self, i: usize) -> Result<bool, SubIsoError> {
        if i == self.n {
            return Ok(true);
        }
        let low = 1usize << i;
        for ci in 0..self.candidates[i].len() {
            let p = self.candidates[i][ci];
            if self.used[p] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(SubIsoError::BudgetExceeded(self.budget));
            }
            // Every g-input whose support lies in {0..=i} and contains i must agree.
            let consistent = (0..low).all(|sub| {
                let x = self.image[sub] | 1 << p;
                self.g.get(sub | low) == self.f.get(x)
            });
            if !consistent {
                continue;
            }
            for sub in 0..low {
                self.image[sub | low] = self.image[sub] | 1 << p;
            }
            self.used[p] = true;
            self.map[i] = p;
            if self.assign(i + 1)? {
                return Ok(true);
            }
            self.used[p] = false;
        }
        Ok(false)
    }
}

/// Finds `π` with `f = π·g`, or `None` when the functions are not isomorphic.
///
/// Rejects early on three permutation invariants: ones per Hamming weight, the
/// sorted influence multiset and the Fourier degree. Then assigns variables of
/// `g` in order, each to an unused variable of `f` with equal influence, checking
/// every input supported on the assigned variables as it goes. Candidates are
/// tried in ascending order, so the witness is the lexicographically smallest.
pub fn subiso(f: &TruthTable, g: &TruthTable, budget: SearchBudget) -> Result<Option<VarPermutation>, SubIsoError> {
    let n = f.vars();
    if g.vars() != n {
        return Err(SubIsoError::SizeMismatch(n, g.vars()));
    }
    if f.ones_by_weight() != g.ones_by_weight() {
        return Ok(None);
    }
    let (pf, pg) = (profile(&fwht(f)), profile(&fwht(g)));
    if pf.degree != pg.degree {
        return Ok(None);
    }
    let (mut sf, mut sg) = (pf.influences.clone(), pg.influences.clone());
    let key = |d: &crate::boolfn::Dyadic| (d.denominator_log2(), d.numerator());
    sf.sort_by_key(key);
    sg.sort_by_key(key);
    if sf != sg {
        return Ok(None);
    }
    let candidates = (0..n).map(|i| (0..n).filter(|&j| pf.influences[j] == pg.influences[i]).collect()).collect();
    let mut bt = Backtrack {
        f,
        g,
        n,
        candidates,
        map: vec![0; n],
        used: vec![false; n],
        image: vec![0; 1 << n],
        nodes: 0,
        budget: budget.max_nodes,
    };
    if f.get(0) != g.get(0) {
        return Ok(None);
    }
    Ok(bt.assign(0)?.then_some(VarPermutation { map: bt.map }))
}

/// Outcome of an isomorphism query as reported by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum SubIsoVerdict {
    Iso(VarPermutation),
    NonIso,
    Budget,
}

impl SubIsoVerdict {
    pub fn decide(f: &TruthTable, g: &TruthTable, budget: SearchBudget) -> Result<Self, SubIsoError> {
        match subiso(f, g, budget) {
            Ok(Some(w)) => Ok(Self::Iso(w)),
            Ok(None) => Ok(Self::NonIso),
            Err(SubIsoError::BudgetExceeded(_)) => Ok(Self::Budget),
            Err(e) => Err(e),
        }
    }

    pub fn is_iso(&self) -> bool {
        matches!(self, Self::Iso(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Iso(_) => "iso",
            Self::NonIso => "non-iso",
            Self::Budget => "budget",
        }
    }
}

impl Serialize for SubIsoVerdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let witness = match self {
            Self::Iso(w) => Some(w.one_based()),
            _ => None,
        };
        let mut s = serializer.serialize_struct("SubIsoVerdict", 1 + usize::from(witness.is_some()))?;
        s.serialize_field("verdict", self.label())?;
        if let Some(w) = witness {
            s.serialize_field("witness", &w)?;
        }
        s.end()
    }
}

/// Weight-2 encoding: `1` exactly on the indicator vectors of edges.
pub fn encode_graph(g: &Graph) -> Result<TruthTable, SubIsoError> {
    let n = g.node_count();
    let mut t = TruthTable::zeros(n).map_err(|_| SubIsoError::GraphSize(n))?;
    for &(u, v) in g.edges() {
        t.set(1 << u | 1 << v, true);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub gi_isomorphic: bool,
    pub subiso: SubIsoVerdict,
    pub agree: bool,
}

/// Decides isomorphism of two graphs both by canonical forms and by function
/// isomorphism of their edge encodings.
pub fn reduction_check(g1: &Graph, g2: &Graph, budget: SearchBudget) -> Result<ReductionReport, SubIsoError> {
    let gi_isomorphic = gi_canonical(g1)? == gi_canonical(g2)?;
    let subiso = if g1.node_count() != g2.node_count() {
        SubIsoVerdict::NonIso
    } else {
        match subiso(&encode_graph(g1)?, &encode_graph(g2)?, budget)? {
            Some(w) => SubIsoVerdict::Iso(w),
            None => SubIsoVerdict::NonIso,
        }
    };
    let agree = gi_isomorphic == subiso.is_iso();
    Ok(ReductionReport { gi_isomorphic, subiso, agree })
}
