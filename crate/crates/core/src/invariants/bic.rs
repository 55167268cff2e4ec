use serde::Serialize;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BicSummary {
    pub articulation_points: usize,
    pub bridges: usize,
    /// Edge counts of the biconnected components, ascending.
    pub component_sizes: Vec<usize>,
}

struct LowLink<'a> {
    g: &'a Graph,
    disc: Vec<usize>,
    low: Vec<usize>,
    timer: usize,
    is_ap: Vec<bool>,
    bridges: usize,
    stack: Vec<(usize, usize)>,
    components: Vec<usize>,
}

impl LowLink<'_> {
    fn visit(&mut self, v: usize, parent: Option<usize>) {
        self.timer += 1;
        self.disc[v] = self.timer;
        self.low[v] = self.timer;
        let mut children = 0;
        for &w in self.g.neighbors(v) {
            if Some(w) == parent {
                continue;
            }
            if self.disc[w] == 0 {
                children += 1;
                self.stack.push((v, w));
                self.visit(w, Some(v));
                self.low[v] = self.low[v].min(self.low[w]);
                if self.low[w] > self.disc[v] {
                    self.bridges += 1;
                }
                if self.low[w] >= self.disc[v] {
                    if parent.is_some() {
                        self.is_ap[v] = true;
                    }
                    let mut size = 0;
                    while let Some(e) = self.stack.pop() {
                        size += 1;
                        if e == (v, w) {
                            break;
                        }
                    }
                    self.components.push(size);
                }
            } else if self.disc[w] < self.disc[v] {
                self.stack.push((v, w));
                self.low[v] = self.low[v].min(self.disc[w]);
            }
        }
        if parent.is_none() && children > 1 {
            self.is_ap[v] = true;
        }
    }
}

/// Articulation points, bridges and biconnected components from one low-link DFS.
pub fn bic(g: &Graph) -> BicSummary {
    let n = g.node_count();
    let mut ll = LowLink {
        g,
        disc: vec![0; n],
        low: vec![0; n],
        timer: 0,
        is_ap: vec![false; n],
        bridges: 0,
        stack: Vec::new(),
        components: Vec::new(),
    };
    for v in 0..n {
        if ll.disc[v] == 0 {
            ll.visit(v, None);
        }
    }
    ll.components.sort_unstable();
    BicSummary {
        articulation_points: ll.is_ap.iter().filter(|&&a| a).count(),
        bridges: ll.bridges,
        component_sizes: ll.components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    #[test]
    fn path_three() {
        assert_eq!(bic(&path(3)), BicSummary { articulation_points: 1, bridges: 2, component_sizes: vec![1, 1] });
    }

    #[test]
    fn cycle_six() {
        assert_eq!(bic(&cycle(6)), BicSummary { articulation_points: 0, bridges: 0, component_sizes: vec![6] });
    }

    #[test]
    fn bowtie() {
        let g = Graph::new(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)]).unwrap();
        assert_eq!(bic(&g), BicSummary { articulation_points: 1, bridges: 0, component_sizes: vec![3, 3] });
    }

    #[test]
    fn c6_vs_two_triangles() {
        let a = bic(&cycle(6));
        let b = bic(&disjoint_union(&cycle(3), &cycle(3)));
        assert_eq!(a.articulation_points, b.articulation_points);
        assert_ne!(a, b);
    }

    #[test]
    fn star_and_isolated() {
        let g = disjoint_union(&star(3), &empty(2));
        assert_eq!(bic(&g), BicSummary { articulation_points: 1, bridges: 3, component_sizes: vec![1, 1, 1] });
    }
}
