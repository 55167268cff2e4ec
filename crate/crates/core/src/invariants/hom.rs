use std::str::FromStr;

use super::InvariantError;
use crate::graph::{named, Graph};

pub const HOM_MAX_PATTERN: usize = 5;

/// Number of edge-preserving maps `V(pattern) -> V(g)`, not necessarily injective.
pub fn hom_count(pattern: &Graph, g: &Graph) -> Result<u128, InvariantError> {
    let k = pattern.node_count();
    if k > HOM_MAX_PATTERN {
        return Err(InvariantError::TooLarge { invariant: "hom pattern", n: k, max: HOM_MAX_PATTERN });
    }
    // Visit pattern vertices so each one after the first of its component has an
    // already-mapped neighbor.
    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    for root in 0..k {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut i = start;
        while i < order.len() {
            for &w in pattern.neighbors(order[i]) {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    let mut image = vec![usize::MAX; k];
    Ok(extend(pattern, g, &order, 0, &mut image))
}

fn extend(pattern: &Graph, g: &Graph, order: &[usize], depth: usize, image: &mut [usize]) -> u128 {
    if depth == order.len() {
        return 1;
    }
    let p = order[depth];
    let mapped: Vec<usize> =
        pattern.neighbors(p).iter().filter(|&&q| image[q] != usize::MAX).map(|&q| image[q]).collect();
    let candidates: Vec<usize> = match mapped.first() {
        Some(&anchor) => g.neighbors(anchor).to_vec(),
        None => (0..g.node_count()).collect(),
    };
    let mut total = 0;
    for c in candidates {
        if mapped.iter().all(|&m| g.has_edge(m, c)) {
            image[p] = c;
            total += extend(pattern, g, order, depth + 1, image);
        }
    }
    image[p] = usize::MAX;
    total
}

/// A named list of patterns for homomorphism-count summaries.
#[derive(Debug, Clone)]
pub struct HomFamily {
    patterns: Vec<(String, Graph)>,
}

impl HomFamily {
    /// `K1, K2, P3, K3, S3, P4, C4`.
    pub fn standard() -> Self {
        "K1,K2,P3,K3,S3,P4,C4".parse().unwrap()
    }

    pub fn patterns(&self) -> &[(String, Graph)] {
        &self.patterns
    }

    pub fn counts(&self, g: &Graph) -> Result<Vec<(String, u128)>, InvariantError> {
        self.patterns.iter().map(|(name, p)| Ok((name.clone(), hom_count(p, g)?))).collect()
    }
}

/// Comma-separated pattern names: `K<n>` (complete), `P<n>` (path on n nodes),
/// `C<n>` (cycle), `S<k>` (star with k leaves), each at most five nodes.
impl FromStr for HomFamily {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut patterns = Vec::new();
        for name in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let bad = || InvariantError::UnknownPattern(name.to_string());
            let (kind, size) = name.split_at(1);
            let size: usize = size.parse().map_err(|_| bad())?;
            let g = match kind {
                "K" if (1..=5).contains(&size) => named::complete(size),
                "P" if (1..=5).contains(&size) => named::path(size),
                "C" if (3..=5).contains(&size) => named::cycle(size),
                "S" if (1..=4).contains(&size) => named::star(size),
                _ => return Err(bad()),
            };
            patterns.push((name.to_string(), g));
        }
        if patterns.is_empty() {
            return Err(InvariantError::UnknownPattern(s.to_string()));
        }
        Ok(Self { patterns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn basic_counts() {
        let g = disjoint_union(&cycle(5), &path(3));
        assert_eq!(hom_count(&complete(1), &g).unwrap(), 8);
        assert_eq!(hom_count(&complete(2), &g).unwrap(), 2 * g.edge_count() as u128);
        assert_eq!(hom_count(&complete(3), &cycle(6)).unwrap(), 0);
        assert_eq!(hom_count(&complete(3), &complete(3)).unwrap(), 6);
    }

    #[test]
    fn matches_brute_force() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]).unwrap();
        for p in [path(3), cycle(4), star(3), complete(3), disjoint_union(&complete(2), &complete(1))] {
            let k = p.node_count();
            let mut brute = 0u128;
            for code in 0..5usize.pow(k as u32) {
                let map: Vec<usize> = (0..k).map(|i| code / 5usize.pow(i as u32) % 5).collect();
                if p.edges().iter().all(|&(a, b)| g.has_edge(map[a], map[b])) {
                    brute += 1;
                }
            }
            assert_eq!(hom_count(&p, &g).unwrap(), brute);
        }
    }

    #[test]
    fn walks_count_degrees() {
        // hom(P3, G) = Σ deg²
        assert_eq!(hom_count(&path(3), &star(3)).unwrap(), 12);
        assert_eq!(hom_count(&path(3), &path(4)).unwrap(), 10);
    }

    #[test]
    fn family_parsing() {
        let fam: HomFamily = "K1, K2".parse().unwrap();
        assert_eq!(fam.patterns().len(), 2);
        assert!("K6".parse::<HomFamily>().is_err());
        assert!("Q3".parse::<HomFamily>().is_err());
        assert!(matches!(hom_count(&path(6), &path(2)), Err(InvariantError::TooLarge { .. })));
    }
}
