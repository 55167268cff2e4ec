use std::collections::BTreeMap;

use super::canon::{gi_canonical, CanonicalForm, GI_MAX_NODES};
use crate::graph::Graph;

/// All graphs on `n` nodes up to isomorphism, in canonical-form order and
/// relabeled canonically. Built by adding one vertex with every possible
/// neighborhood to each graph on `n - 1` nodes and deduplicating by canonical form.
pub fn graph_catalog(n: usize) -> Vec<Graph> {
    assert!(n <= GI_MAX_NODES.min(8), "catalog limited to 8 nodes");
    let mut level: BTreeMap<CanonicalForm, Graph> = BTreeMap::new();
    let empty = Graph::new(0, []).unwrap();
    level.insert(gi_canonical(&empty).unwrap(), empty);
    for size in 1..=n {
        let mut next = BTreeMap::new();
        for g in level.values() {
            for nbrs in 0u32..1 << (size - 1) {
                let edges = g
                    .edges()
                    .iter()
                    .copied()
                    .chain((0..size - 1).filter(|&u| nbrs >> u & 1 == 1).map(|u| (u, size - 1)));
                let h = Graph::new(size, edges).unwrap();
                let c = gi_canonical(&h).unwrap();
                next.entry(c).or_insert_with_key(|c| c.to_graph());
            }
        }
        level = next;
    }
    level.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_counts() {
        // OEIS A000088
        let counts: Vec<usize> = (0..=6).map(|n| graph_catalog(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156]);
    }
}
