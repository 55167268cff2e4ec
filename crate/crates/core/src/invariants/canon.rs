use std::fmt;

use serde::{Serialize, Serializer};

use super::InvariantError;
use crate::graph::Graph;

pub const GI_MAX_NODES: usize = 10;

/// Canonical adjacency string. Pairs `(i, j)`, `i < j`, of canonical positions are
/// listed column by column, `(0,1), (0,2), (1,2), (0,3), ...`, so the first
/// `k(k-1)/2` characters depend only on the first `k` positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    n: usize,
    bits: Vec<u8>,
}

impl CanonicalForm {
    pub fn nodes(&self) -> usize {
        self.n
    }

    /// Rebuilds the canonically labeled graph.
    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::new();
        let mut idx = 0;
        for j in 1..self.n {
            for i in 0..j {
                if self.bits[idx] == 1 {
                    edges.push((i, j));
                }
                idx += 1;
            }
        }
        Graph::new(self.n, edges).expect("valid canonical form")
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.n)?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct Search<'a> {
    g: &'a Graph,
    n: usize,
    /// Required degree at each position (non-increasing).
    degree_at: Vec<usize>,
    order: Vec<usize>,
    used: Vec<bool>,
    current: Vec<u8>,
    best: Option<Vec<u8>>,
}

impl Search<'_> {
    fn place(&mut self, k: usize) {
        if k == self.n {
            if self.best.as_ref().is_none_or(|b| self.current < *b) {
                self.best = Some(self.current.clone());
            }
            return;
        }
        let start = k * k.saturating_sub(1) / 2;
        for v in 0..self.n {
            if self.used[v] || self.g.degree(v) != self.degree_at[k] {
                continue;
            }
            self.current.truncate(start);
            for i in 0..k {
                self.current.push(u8::from(self.g.has_edge(self.order[i], v)));
            }
            if let Some(best) = &self.best {
                if self.current[..] > best[..start + k] {
                    continue;
                }
            }
            self.used[v] = true;
            self.order.push(v);
            self.place(k + 1);
            self.order.pop();
            self.used[v] = false;
        }
    }
}

/// Lexicographically smallest adjacency string over all labelings that list nodes
/// in non-increasing degree order. The candidate set is closed under relabeling,
/// so two graphs are isomorphic iff their canonical forms are equal.
pub fn gi_canonical(g: &Graph) -> Result<CanonicalForm, InvariantError> {
    let n = g.node_count();
    if n > GI_MAX_NODES {
        return Err(InvariantError::TooLarge { invariant: "gi", n, max: GI_MAX_NODES });
    }
    let mut degree_at: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    degree_at.sort_unstable_by(|a, b| b.cmp(a));
    let mut s = Search {
        g,
        n,
        degree_at,
        order: Vec::with_capacity(n),
        used: vec![false; n],
        current: Vec::with_capacity(n * n / 2),
        best: None,
    };
    s.place(0);
    Ok(CanonicalForm { n, bits: s.best.unwrap_or_default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn relabel_invariant() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5)]).unwrap();
        let c = gi_canonical(&g).unwrap();
        for perm in [[5, 4, 3, 2, 1, 0], [1, 0, 3, 2, 5, 4], [2, 4, 0, 5, 1, 3]] {
            assert_eq!(gi_canonical(&g.permuted(&perm)).unwrap(), c);
        }
    }

    #[test]
    fn separates_regular_pair() {
        let a = gi_canonical(&cycle(6)).unwrap();
        let b = gi_canonical(&disjoint_union(&cycle(3), &cycle(3))).unwrap();
        assert_ne!(a, b);
        assert_ne!(gi_canonical(&complete(3)).unwrap(), gi_canonical(&path(3)).unwrap());
    }

    #[test]
    fn canonical_graph_is_isomorphic() {
        let g = star(4);
        let c = gi_canonical(&g).unwrap();
        assert_eq!(gi_canonical(&c.to_graph()).unwrap(), c);
        assert_eq!(c.to_graph().edge_count(), 4);
    }

    #[test]
    fn matches_brute_force_minimum_on_degree_ordered_labelings() {
        let g = Graph::new(5, [(0, 1), (0, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let mut best: Option<Vec<u8>> = None;
        let mut perm: Vec<usize> = (0..5).collect();
        permute_all(&mut perm, 0, &mut |order| {
            if order.windows(2).any(|w| g.degree(w[0]) < g.degree(w[1])) {
                return;
            }
            let mut bits = Vec::new();
            for j in 1..5 {
                for i in 0..j {
                    bits.push(u8::from(g.has_edge(order[i], order[j])));
                }
            }
            if best.as_ref().is_none_or(|b| bits < *b) {
                best = Some(bits);
            }
        });
        assert_eq!(gi_canonical(&g).unwrap().bits, best.unwrap());
    }

    fn permute_all(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute_all(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn limit() {
        assert!(gi_canonical(&empty(10)).is_ok());
        assert!(matches!(gi_canonical(&empty(11)), Err(InvariantError::TooLarge { .. })));
    }
}
