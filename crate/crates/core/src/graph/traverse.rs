use std::collections::VecDeque;

use super::Graph;

/// Hop distances from `src`; `None` for unreachable nodes.
pub fn bfs_distances(g: &Graph, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Nodes within `hops` of `v` (including `v`), ascending.
pub fn t_hop_ball(g: &Graph, v: usize, hops: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.node_count()];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == hops {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    (0..g.node_count()).filter(|&u| dist[u] != usize::MAX).collect()
}

/// Largest hop distance between two nodes of `set`; `None` when `set` spans
/// more than one connected component.
pub fn pairwise_diameter(g: &Graph, set: &[usize]) -> Option<usize> {
    let mut best = 0;
    for (i, &u) in set.iter().enumerate() {
        let dist = bfs_distances(g, u);
        for &w in &set[i + 1..] {
            best = best.max(dist[w]?);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn balls() {
        let p = path(3);
        assert_eq!(t_hop_ball(&p, 0, 0), vec![0]);
        assert_eq!(t_hop_ball(&p, 0, 1), vec![0, 1]);
        let c6 = cycle(6);
        for v in 0..6 {
            assert_eq!(t_hop_ball(&c6, v, 3), (0..6).collect::<Vec<_>>());
            assert_eq!(t_hop_ball(&c6, v, 2).len(), 5);
        }
    }

    #[test]
    fn ball_monotone_and_stabilizes() {
        let g = disjoint_union(&path(5), &cycle(4));
        let mut prev = Vec::new();
        for t in 0..8 {
            let ball = t_hop_ball(&g, 1, t);
            assert!(prev.iter().all(|u| ball.contains(u)));
            prev = ball;
        }
        assert_eq!(prev, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn ball_size_bound() {
        let g = complete(5);
        let delta = g.max_degree();
        for t in 0..4usize {
            let bound = 1 + (1..=t).map(|s| delta * (delta - 1).pow(s as u32 - 1)).sum::<usize>();
            assert!(t_hop_ball(&g, 0, t).len() <= bound);
        }
    }

    #[test]
    fn diameters() {
        let c6 = cycle(6);
        assert_eq!(pairwise_diameter(&c6, &[2]), Some(0));
        assert_eq!(pairwise_diameter(&c6, &[0, 1]), Some(1));
        assert_eq!(pairwise_diameter(&c6, &[0, 3]), Some(3));
        let split = disjoint_union(&path(2), &path(2));
        assert_eq!(pairwise_diameter(&split, &[0, 3]), None);
    }
}
