use serde::Serialize;

use crate::graph::Graph;

/// Color signature for one refinement round: previous color and the sorted
/// multiset of neighbor colors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WlSignature {
    pub color: u32,
    pub neighbors: Vec<u32>,
}

/// Full 1-WL refinement history. Colors in round `r + 1` are ranks of the sorted
/// distinct signatures of round `r`, so keys depend only on refinement history,
/// never on node order or hashing. Two graphs are 1-WL equivalent iff their
/// histories are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct WlHistogram {
    pub rounds: Vec<Vec<(WlSignature, usize)>>,
}

impl WlHistogram {
    /// Sorted sizes of the stable color classes.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.rounds.last().map(|r| r.iter().map(|(_, c)| *c).collect()).unwrap_or_default();
        sizes.sort_unstable();
        sizes
    }
}

/// Stable 1-WL colors per node together with the refinement history.
pub fn wl1_colors(g: &Graph) -> (Vec<u32>, WlHistogram) {
    let n = g.node_count();
    let mut colors = vec![0u32; n];
    let mut classes = usize::from(n > 0);
    let mut rounds = Vec::new();
    if n == 0 {
        return (colors, WlHistogram { rounds });
    }
    loop {
        let sigs: Vec<WlSignature> = (0..n)
            .map(|v| {
                let mut neighbors: Vec<u32> = g.neighbors(v).iter().map(|&u| colors[u]).collect();
                neighbors.sort_unstable();
                WlSignature { color: colors[v], neighbors }
            })
            .collect();
        let mut distinct = sigs.clone();
        distinct.sort();
        let mut hist: Vec<(WlSignature, usize)> = Vec::new();
        for s in distinct {
            match hist.last_mut() {
                Some((last, count)) if *last == s => *count += 1,
                _ => hist.push((s, 1)),
            }
        }
        for (v, s) in sigs.iter().enumerate() {
            colors[v] = hist.binary_search_by(|(k, _)| k.cmp(s)).unwrap() as u32;
        }
        let stable = hist.len() == classes;
        classes = hist.len();
        rounds.push(hist);
        if stable {
            break;
        }
    }
    (colors, WlHistogram { rounds })
}

pub fn wl1(g: &Graph) -> WlHistogram {
    wl1_colors(g).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn regular_graphs_collide() {
        let c6 = cycle(6);
        let two_c3 = disjoint_union(&cycle(3), &cycle(3));
        assert_eq!(wl1(&c6), wl1(&two_c3));
        assert_eq!(wl1(&c6).class_sizes(), vec![6]);
    }

    #[test]
    fn triangle_vs_path() {
        assert_ne!(wl1(&complete(3)), wl1(&path(3)));
        assert_eq!(wl1(&path(3)).class_sizes(), vec![1, 2]);
    }

    #[test]
    fn edgeless() {
        assert_eq!(wl1(&empty(5)).class_sizes(), vec![5]);
    }

    #[test]
    fn long_path_refines_fully() {
        // P7 splits into 4 orbits by distance from the center.
        assert_eq!(wl1(&path(7)).class_sizes(), vec![1, 2, 2, 2]);
    }
}
