use serde::Serialize;

use super::{Aggregator, GnnError, GnnModel, Matrix};
use crate::boolfn::TruthTable;
use crate::graph::{t_hop_ball, Graph};

pub const MAX_EXTRACT_INPUTS: usize = 16;

/// The Boolean function node `v` computes over the one-bit features of
/// `input_nodes`, with every other node's feature held at 0.
///
/// Bit `i` of a table index is the feature of `input_nodes[i]`; output bit is
/// `ŷ_v > 0.5`, so an exact tie reads as 0.
pub fn extract_boolean_function(
    m: &GnnModel,
    g: &Graph,
    v: usize,
    input_nodes: &[usize],
) -> Result<TruthTable, GnnError> {
    let n = g.node_count();
    if input_nodes.len() > MAX_EXTRACT_INPUTS {
        return Err(GnnError::TooManyInputs { max: MAX_EXTRACT_INPUTS, found: input_nodes.len() });
    }
    if m.dims()[0] != 1 {
        return Err(GnnError::Shape { what: "input feature dim for extraction", expected: 1, found: m.dims()[0] });
    }
    if let Some(&bad) = input_nodes.iter().chain([&v]).find(|&&u| u >= n) {
        return Err(GnnError::Node(bad));
    }
    let k = input_nodes.len();
    let mut bits = Vec::with_capacity(1 << k);
    for x in 0..1usize << k {
        let mut feats = Matrix::zeros(n, 1);
        for (i, &u) in input_nodes.iter().enumerate() {
            feats.set(u, 0, (x >> i & 1) as f64);
        }
        bits.push(m.forward_with(g, feats)?.yhat[v] > 0.5);
    }
    Ok(TruthTable::from_bits(k, &bits).expect("k <= 16"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityReport {
    pub node: usize,
    pub hops: usize,
    pub ball: Vec<usize>,
    /// First node outside the ball whose perturbation changed `h_v` or `ŷ_v`.
    pub violation: Option<usize>,
    /// Nodes inside the ball whose perturbation changed `ŷ_v` (informational).
    pub inside_changes: usize,
}

impl LocalityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Perturbs each node's features by +1 in turn and compares node `v`'s final
/// embedding and prediction bit for bit against the unperturbed pass.
pub fn locality_check(m: &GnnModel, g: &Graph, v: usize, hops: usize) -> Result<LocalityReport, GnnError> {
    let n = g.node_count();
    if v >= n {
        return Err(GnnError::Node(v));
    }
    let x = Matrix::from_rows(g.features(), g.feature_dim())?;
    let base = m.forward_with(g, x.clone())?;
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| p.to_bits() == q.to_bits());
    let ball = t_hop_ball(g, v, hops);
    let mut violation = None;
    let mut inside_changes = 0;
    for u in 0..n {
        let mut xu = x.clone();
        xu.row_mut(u).iter_mut().for_each(|f| *f += 1.0);
        let out = m.forward_with(g, xu)?;
        let unchanged =
            same(out.embeddings().row(v), base.embeddings().row(v)) && out.yhat[v].to_bits() == base.yhat[v].to_bits();
        if ball.binary_search(&u).is_ok() {
            inside_changes += usize::from(!unchanged);
        } else if !unchanged && violation.is_none() {
            violation = Some(u);
        }
    }
    Ok(LocalityReport { node: v, hops, ball, violation, inside_changes })
}

/// One sum-aggregation layer whose embedding is the number of neighbors with
/// feature 1. With all features set to 1 it reports degrees, so it separates
/// graphs whose local edge patterns differ within one hop.
pub fn degree_model() -> GnnModel {
    let mut m = GnnModel::zeros(Aggregator::Sum, vec![1, 1]).expect("valid dims");
    m.layers[0].w_nbr.set(0, 0, 1.0);
    m.readout_w[0] = 1.0;
    m
}
