use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{AttrTable, Graph, GraphError};

const SENS_PREFIX: &str = "sens:";

/// Ingestion settings.
#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Binarization thresholds for multivalent sensitive attributes, keyed by
    /// attribute name (without the `sens:` prefix): value `v` becomes `v >= t`.
    pub thresholds: BTreeMap<String, f64>,
}

fn records(text: &str) -> Result<(StringRecord, Vec<StringRecord>), GraphError> {
    let mut rdr = ReaderBuilder::new().trim(Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(GraphError::Ragged { row: i + 1, expected: header.len(), found: rec.len() });
        }
        rows.push(rec);
    }
    Ok((header, rows))
}

fn parse_bit(value: &str) -> Option<bool> {
    match value {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

/// Reads a graph from a node file (`id,label?,<features...>,<sens:name...>`) and an
/// edge file (`src,dst`). Node ids are remapped to `0..n` in file order.
pub fn load_graph(nodes_csv: &str, edges_csv: &str, opts: &LoadOptions) -> Result<Graph, GraphError> {
    let (header, rows) = records(nodes_csv)?;
    if header.get(0) != Some("id") {
        return Err(GraphError::MissingColumn("id".into()));
    }
    let mut label_col = None;
    let mut feature_cols = Vec::new();
    let mut sens_cols = Vec::new();
    for (c, name) in header.iter().enumerate().skip(1) {
        if name == "label" {
            label_col = Some(c);
        } else if let Some(attr) = name.strip_prefix(SENS_PREFIX) {
            sens_cols.push((c, attr.to_string()));
        } else {
            feature_cols.push((c, name.to_string()));
        }
    }

    let mut ids = Vec::with_capacity(rows.len());
    let mut index = HashMap::with_capacity(rows.len());
    let mut features = Vec::with_capacity(rows.len());
    let mut sens_rows = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for rec in &rows {
        let id = rec[0].to_string();
        if index.insert(id.clone(), ids.len()).is_some() {
            return Err(GraphError::DuplicateId(id));
        }
        if let Some(c) = label_col {
            let bit =
                parse_bit(&rec[c]).ok_or_else(|| GraphError::BadLabel { node: id.clone(), value: rec[c].into() })?;
            labels.push(bit);
        }
        let mut frow = Vec::with_capacity(feature_cols.len());
        for (c, name) in &feature_cols {
            let v: f64 = rec[*c].parse().map_err(|_| GraphError::BadFeature {
                node: id.clone(),
                column: name.clone(),
                value: rec[*c].into(),
            })?;
            frow.push(v);
        }
        features.push(frow);
        let mut srow = Vec::with_capacity(sens_cols.len());
        for (c, attr) in &sens_cols {
            let raw = &rec[*c];
            let bit = match opts.thresholds.get(attr) {
                Some(t) => raw.parse::<f64>().ok().map(|v| v >= *t),
                None => parse_bit(raw),
            };
            srow.push(bit.ok_or_else(|| GraphError::NonBinarySensitive {
                node: id.clone(),
                attr: attr.clone(),
                value: raw.into(),
            })?);
        }
        sens_rows.push(srow);
        ids.push(id);
    }

    let (eheader, erows) = records(edges_csv)?;
    let (src, dst) = match (eheader.iter().position(|h| h == "src"), eheader.iter().position(|h| h == "dst")) {
        (Some(s), Some(d)) => (s, d),
        (None, _) => return Err(GraphError::MissingColumn("src".into())),
        (_, None) => return Err(GraphError::MissingColumn("dst".into())),
    };
    let mut edges = Vec::with_capacity(erows.len());
    for rec in &erows {
        let lookup = |k: &str| index.get(k).copied().ok_or_else(|| GraphError::DanglingEdge(k.into()));
        edges.push((lookup(&rec[src])?, lookup(&rec[dst])?));
    }

    let n = ids.len();
    let mut g = Graph::new(n, edges)?
        .with_ids(ids)?
        .with_features(feature_cols.into_iter().map(|(_, n)| n).collect(), features)?
        .with_sensitive(AttrTable::new(sens_cols.into_iter().map(|(_, a)| a).collect(), sens_rows)?)?;
    if label_col.is_some() {
        g = g.with_labels(labels)?;
    }
    Ok(g)
}

/// Reads `nodes.csv` and `edges.csv` from a directory.
pub fn load_graph_dir(dir: &Path, opts: &LoadOptions) -> Result<Graph, GraphError> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
    };
    load_graph(&read("nodes.csv")?, &read("edges.csv")?, opts)
}

impl Graph {
    /// Node and edge CSV text in the ingestion schema.
    pub fn to_csv(&self) -> (String, String) {
        let mut nodes = String::from("id");
        if self.labels.is_some() {
            nodes.push_str(",label");
        }
        for name in &self.feature_names {
            nodes.push(',');
            nodes.push_str(name);
        }
        for name in self.sensitive.names() {
            nodes.push_str(",sens:");
            nodes.push_str(name);
        }
        nodes.push('\n');
        for v in 0..self.node_count() {
            nodes.push_str(&self.ids[v]);
            if let Some(l) = &self.labels {
                nodes.push_str(if l[v] { ",1" } else { ",0" });
            }
            for x in &self.features[v] {
                nodes.push_str(&format!(",{x}"));
            }
            for &b in &self.sensitive.rows()[v] {
                nodes.push_str(if b { ",1" } else { ",0" });
            }
            nodes.push('\n');
        }
        let mut edges = String::from("src,dst\n");
        for &(u, v) in &self.edges {
            edges.push_str(&format!("{},{}\n", self.ids[u], self.ids[v]));
        }
        (nodes, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_graph() {
        let g = load_graph("id\na\nb\n", "src,dst\na,b\n", &LoadOptions::default()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(g.labels().is_none());
    }

    #[test]
    fn dangling_edge() {
        let err = load_graph("id\na\nb\n", "src,dst\na,c\n", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::DanglingEdge(ref id) if id == "c"));
    }

    #[test]
    fn three_sensitive_attributes() {
        let nodes = "id,label,x1,x2,sens:gender,sens:region,sens:age\n\
                     u1,1,0.5,-1,0,1,1\n\
                     u2,0,2.25,0,1,0,0\n";
        let g = load_graph(nodes, "src,dst\nu2,u1\n", &LoadOptions::default()).unwrap();
        assert_eq!(g.sensitive().names(), &["gender", "region", "age"]);
        assert_eq!(g.sensitive().rows()[0], vec![false, true, true]);
        assert_eq!(g.features()[0], vec![0.5, -1.0]);
        assert_eq!(g.labels().unwrap(), &[true, false]);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn non_binary_sensitive_needs_threshold() {
        let nodes = "id,sens:age\na,34\nb,17\n";
        assert!(matches!(
            load_graph(nodes, "src,dst\n", &LoadOptions::default()),
            Err(GraphError::NonBinarySensitive { .. })
        ));
        let mut opts = LoadOptions::default();
        opts.thresholds.insert("age".into(), 30.0);
        let g = load_graph(nodes, "src,dst\n", &opts).unwrap();
        assert_eq!(g.sensitive().column_values(0), vec![true, false]);
    }

    #[test]
    fn ragged_rows() {
        let err = load_graph("id,x\na,1\nb\n", "src,dst\n", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::Ragged { .. }));
    }

    #[test]
    fn echo_round_trip() {
        let nodes = "id,label,x,sens:g\nq,1,0.1,1\nr,0,1e-7,0\ns,1,-3,1\n";
        let edges = "src,dst\nq,s\nr,q\n";
        let g = load_graph(nodes, edges, &LoadOptions::default()).unwrap();
        let (n2, e2) = g.to_csv();
        let h = load_graph(&n2, &e2, &LoadOptions::default()).unwrap();
        assert_eq!(g, h);
        assert_eq!(h.to_csv(), (n2, e2));
    }
}
