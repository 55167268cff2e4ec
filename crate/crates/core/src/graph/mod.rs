//! Undirected attributed graphs: the data model shared by every other module.

mod io;
mod synth;
mod traverse;

use thiserror::Error;

pub use io::{load_graph, load_graph_dir, LoadOptions};
pub use synth::{synth_biased_graph, SynthConfig};
pub use traverse::{bfs_distances, pairwise_diameter, t_hop_ball};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({0}, {1}) appears more than once")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {endpoint} out of range for {n} nodes")]
    EndpointRange { endpoint: usize, n: usize },
    #[error("edge references unknown node id `{0}`")]
    DanglingEdge(String),
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{node}`: sensitive attribute `{attr}` has non-binary value `{value}`")]
    NonBinarySensitive { node: String, attr: String, value: String },
    #[error("node `{node}`: label `{value}` is not 0 or 1")]
    BadLabel { node: String, value: String },
    #[error("node `{node}`: feature `{column}` has non-numeric value `{value}`")]
    BadFeature { node: String, column: String, value: String },
    #[error("row {row} has {found} fields, header has {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("{what} has {found} rows for {n} nodes")]
    RowCount { what: &'static str, found: usize, n: usize },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("invalid synthetic config: {0}")]
    Config(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Per-node binary attributes under a shared named schema.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AttrTable {
    names: Vec<String>,
    rows: Vec<Vec<bool>>,
}

impl AttrTable {
    pub fn new(names: Vec<String>, rows: Vec<Vec<bool>>) -> Result<Self, GraphError> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != names.len() {
                return Err(GraphError::Ragged { row: i, expected: names.len(), found: row.len() });
            }
        }
        Ok(Self { names, rows })
    }

    /// A table with no attributes for `n` nodes.
    pub fn empty(n: usize) -> Self {
        Self { names: Vec::new(), rows: vec![Vec::new(); n] }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_values(&self, col: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[col]).collect()
    }
}

/// An undirected simple graph with node features, binary sensitive attributes and
/// optional binary labels. Nodes are `0..n`; original ids are kept for echoing.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    ids: Vec<String>,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    feature_names: Vec<String>,
    features: Vec<Vec<f64>>,
    sensitive: AttrTable,
    labels: Option<Vec<bool>>,
}

impl Graph {
    /// Structure-only graph on `n` nodes with ids `"0".."n-1"`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (u, v) in edges {
            for endpoint in [u, v] {
                if endpoint >= n {
                    return Err(GraphError::EndpointRange { endpoint, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u, v));
            }
            let (a, b) = (u.min(v), u.max(v));
            adj[a].push(b);
            adj[b].push(a);
            list.push((a, b));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(Self {
            ids: (0..n).map(|i| i.to_string()).collect(),
            adj,
            edges: list,
            feature_names: Vec::new(),
            features: vec![Vec::new(); n],
            sensitive: AttrTable::empty(n),
            labels: None,
        })
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self, GraphError> {
        self.check_rows("ids", ids.len())?;
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(GraphError::DuplicateId(dup.clone()));
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn with_features(mut self, names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, GraphError> {
        self.check_rows("features", rows.len())?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != names.len()) {
            return Err(GraphError::Ragged { row: i, expected: names.len(), found: r.len() });
        }
        self.feature_names = names;
        self.features = rows;
        Ok(self)
    }

    pub fn with_sensitive(mut self, table: AttrTable) -> Result<Self, GraphError> {
        self.check_rows("sensitive attributes", table.len())?;
        self.sensitive = table;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<bool>) -> Result<Self, GraphError> {
        self.check_rows("labels", labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    fn check_rows(&self, what: &'static str, found: usize) -> Result<(), GraphError> {
        if found == self.node_count() {
            Ok(())
        } else {
            Err(GraphError::RowCount { what, found, n: self.node_count() })
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn sensitive(&self) -> &AttrTable {
        &self.sensitive
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Relabels node `v` as `perm[v]`, carrying ids, features, attributes and labels.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length");
        let mut inv = vec![usize::MAX; n];
        for (v, &p) in perm.iter().enumerate() {
            inv[p] = v;
        }
        assert!(inv.iter().all(|&v| v != usize::MAX), "not a permutation");
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v]));
        let mut g = Graph::new(n, edges).expect("relabeling preserves validity");
        g.ids = inv.iter().map(|&v| self.ids[v].clone()).collect();
        g.feature_names = self.feature_names.clone();
        g.features = inv.iter().map(|&v| self.features[v].clone()).collect();
        g.sensitive = AttrTable {
            names: self.sensitive.names.clone(),
            rows: inv.iter().map(|&v| self.sensitive.rows[v].clone()).collect(),
        };
        g.labels = self.labels.as_ref().map(|l| inv.iter().map(|&v| l[v]).collect());
        g
    }

    /// Same structure and metadata with features replaced.
    pub fn replace_features(&self, rows: Vec<Vec<f64>>) -> Result<Graph, GraphError> {
        let names = if rows.first().map_or(0, Vec::len) == self.feature_dim() {
            self.feature_names.clone()
        } else {
            (0..rows.first().map_or(0, Vec::len)).map(|j| format!("x{j}")).collect()
        };
        self.clone().with_features(names, rows)
    }
}

/// Common small graphs used across tests and fixtures.
pub mod named {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    /// Star with `leaves` leaves around hub 0.
    pub fn star(leaves: usize) -> Graph {
        Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub fn empty(n: usize) -> Graph {
        Graph::new(n, []).unwrap()
    }

    /// Disjoint union, nodes of `b` shifted after those of `a`.
    pub fn disjoint_union(a: &Graph, b: &Graph) -> Graph {
        let off = a.node_count();
        let edges = a.edges().iter().copied().chain(b.edges().iter().map(|&(u, v)| (u + off, v + off)));
        Graph::new(off + b.node_count(), edges).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn rejects_invalid_edges() {
        assert!(matches!(Graph::new(2, [(0, 0)]), Err(GraphError::SelfLoop(0, 0))));
        assert!(matches!(Graph::new(2, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1))));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(GraphError::EndpointRange { endpoint: 2, n: 2 })));
    }

    #[test]
    fn named_graphs() {
        assert_eq!(cycle(6).edge_count(), 6);
        assert_eq!(complete(4).edge_count(), 6);
        assert_eq!(star(3).max_degree(), 3);
        let two_triangles = disjoint_union(&cycle(3), &cycle(3));
        assert_eq!(two_triangles.node_count(), 6);
        assert!(two_triangles.has_edge(3, 5));
        assert!(!two_triangles.has_edge(2, 3));
    }

    #[test]
    fn permutation_carries_metadata() {
        let g = path(3)
            .with_features(vec!["f".into()], vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap()
            .with_labels(vec![true, false, false])
            .unwrap();
        let p = g.permuted(&[2, 0, 1]);
        assert!(p.has_edge(2, 0) && p.has_edge(0, 1));
        assert_eq!(p.features()[2], vec![0.0]);
        assert_eq!(p.labels().unwrap(), &[false, false, true]);
        assert_eq!(p.ids(), &["1", "2", "0"]);
    }

    #[test]
    fn ragged_features_rejected() {
        let err = path(2).with_features(vec!["a".into()], vec![vec![1.0], vec![]]).unwrap_err();
        assert!(matches!(err, GraphError::Ragged { row: 1, .. }));
    }
}
