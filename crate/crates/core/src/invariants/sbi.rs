use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::InvariantError;
use crate::boolfn::{TruthTable, MAX_VARS};
use crate::graph::Graph;

/// Property of an induced subgraph encoded by a subset-indexed truth table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetProperty {
    /// `|S| = 2` and `S` is an edge.
    Adjacency,
    /// `S` induces a complete graph; `∅` and singletons count as cliques.
    Clique,
    /// `S` induces a connected subgraph; singletons are connected, `∅` is not.
    Connected,
}

impl FromStr for SubsetProperty {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adjacency" => Ok(Self::Adjacency),
            "clique" => Ok(Self::Clique),
            "connected" => Ok(Self::Connected),
            other => Err(InvariantError::UnknownProperty(other.to_string())),
        }
    }
}

impl fmt::Display for SubsetProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Adjacency => "adjacency",
            Self::Clique => "clique",
            Self::Connected => "connected",
        })
    }
}

/// Truth table over node subsets: bit `i - 1` of the index selects node `i - 1`.
pub fn sbi_table(g: &Graph, property: SubsetProperty) -> Result<TruthTable, InvariantError> {
    let n = g.node_count();
    if n == 0 || n > MAX_VARS {
        return Err(InvariantError::TooLarge { invariant: "sbi", n, max: MAX_VARS });
    }
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u)).collect();
    let table = match property {
        SubsetProperty::Adjacency => TruthTable::from_fn(n, |x| {
            x.count_ones() == 2 && {
                let u = x.trailing_zeros() as usize;
                adj[u] as usize & x != 0
            }
        }),
        SubsetProperty::Clique => TruthTable::from_fn(n, |x| {
            let s = x as u32;
            (0..n).filter(|&v| s >> v & 1 == 1).all(|v| adj[v] & s == s & !(1 << v))
        }),
        SubsetProperty::Connected => TruthTable::from_fn(n, |x| {
            let s = x as u32;
            if s == 0 {
                return false;
            }
            let mut reached = s & s.wrapping_neg();
            loop {
                let mut next = reached;
                let mut frontier = reached;
                while frontier != 0 {
                    let v = frontier.trailing_zeros() as usize;
                    frontier &= frontier - 1;
                    next |= adj[v] & s;
                }
                if next == reached {
                    return reached == s;
                }
                reached = next;
            }
        }),
    };
    Ok(table.expect("1 <= n <= MAX_VARS"))
}
