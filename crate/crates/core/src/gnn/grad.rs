use super::{Aggregator, ForwardPass, GnnError, GnnModel, Matrix};
use crate::graph::Graph;

/// Composite loss: mean cross-entropy over `task_nodes` plus
/// `lambda * Σ_g |mean_{S_g} ŷ - mean_V ŷ|` over the given subpopulations.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub task_nodes: Vec<usize>,
    /// One label per node; only entries in `task_nodes` are read.
    pub labels: Vec<bool>,
    pub groups: Vec<Vec<usize>>,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub task: f64,
    pub fair: f64,
    pub total: f64,
}

fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Objective {
    fn check(&self, n: usize) -> Result<(), GnnError> {
        if self.labels.len() != n {
            return Err(GnnError::Shape { what: "labels", expected: n, found: self.labels.len() });
        }
        let bad = self.task_nodes.iter().chain(self.groups.iter().flatten()).find(|&&v| v >= n);
        match bad {
            Some(&v) => Err(GnnError::Node(v)),
            None => Ok(()),
        }
    }

    fn eligible(&self, n: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.groups.iter().filter(move |s| !s.is_empty() && s.len() < n)
    }

    /// Loss value and `dL/ds_v` for every logit.
    fn value_and_logit_grad(&self, pass: &ForwardPass) -> (ObjectiveValue, Vec<f64>) {
        let n = pass.yhat.len();
        let mut ds = vec![0.0; n];
        let mut task = 0.0;
        if !self.task_nodes.is_empty() {
            let k = self.task_nodes.len() as f64;
            for &v in &self.task_nodes {
                let (s, y) = (pass.logits[v], f64::from(u8::from(self.labels[v])));
                task += softplus(s) - y * s;
                ds[v] += (pass.yhat[v] - y) / k;
            }
            task /= k;
        }
        let mu = pass.yhat.iter().sum::<f64>() / n as f64;
        let mut fair = 0.0;
        let mut dy = vec![0.0; n];
        for s in self.eligible(n) {
            let gap = s.iter().map(|&v| pass.yhat[v]).sum::<f64>() / s.len() as f64 - mu;
            fair += gap.abs();
            if self.lambda != 0.0 {
                let sg = self.lambda * sign(gap);
                for &v in s {
                    dy[v] += sg / s.len() as f64;
                }
                for d in &mut dy {
                    *d -= sg / n as f64;
                }
            }
        }
        if self.lambda != 0.0 {
            for v in 0..n {
                ds[v] += dy[v] * pass.yhat[v] * (1.0 - pass.yhat[v]);
            }
        }
        (ObjectiveValue { task, fair, total: task + self.lambda * fair }, ds)
    }
}

pub fn evaluate(m: &GnnModel, g: &Graph, obj: &Objective) -> Result<ObjectiveValue, GnnError> {
    obj.check(g.node_count())?;
    let pass = m.forward(g)?;
    Ok(obj.value_and_logit_grad(&pass).0)
}

/// Loss and its gradient, flattened in [`GnnModel::params`] order.
///
/// Subgradients are 0 at ReLU and absolute-value kinks; max aggregation routes
/// each coordinate's gradient to the first neighbor attaining the maximum.
pub fn loss_and_gradients(m: &GnnModel, g: &Graph, obj: &Objective) -> Result<(ObjectiveValue, Vec<f64>), GnnError> {
    obj.check(g.node_count())?;
    let pass = m.forward(g)?;
    let (value, ds) = obj.value_and_logit_grad(&pass);
    Ok((value, backward(m, g, &pass, &ds)))
}

fn backward(m: &GnnModel, g: &Graph, pass: &ForwardPass, ds: &[f64]) -> Vec<f64> {
    let n = g.node_count();
    let h_t = pass.embeddings();
    let mut d_readout_w = vec![0.0; m.readout_w.len()];
    let mut d_readout_b = 0.0;
    let mut dh = Matrix::zeros(n, h_t.cols());
    for (v, &d) in ds.iter().enumerate() {
        d_readout_b += d;
        for (k, (&h, &w)) in h_t.row(v).iter().zip(&m.readout_w).enumerate() {
            d_readout_w[k] += d * h;
            dh.set(v, k, d * w);
        }
    }

    let mut layer_grads = Vec::with_capacity(m.layers.len());
    for (t, layer) in m.layers.iter().enumerate().rev() {
        let (h_in, a, z) = (&pass.hidden[t], &pass.aggregated[t], &pass.pre[t]);
        let mut dz = dh;
        for (d, &zv) in dz.as_mut_slice().iter_mut().zip(z.as_slice()) {
            if zv <= 0.0 {
                *d = 0.0;
            }
        }
        let d_in = h_in.cols();
        let mut dw_self = Matrix::zeros(layer.bias.len(), d_in);
        let mut dw_nbr = Matrix::zeros(layer.bias.len(), d_in);
        let mut dbias = vec![0.0; layer.bias.len()];
        let mut dh_in = Matrix::zeros(n, d_in);
        let mut da = Matrix::zeros(n, d_in);
        for v in 0..n {
            let dzv = dz.row(v);
            dw_self.add_outer(dzv, h_in.row(v));
            dw_nbr.add_outer(dzv, a.row(v));
            for (b, d) in dbias.iter_mut().zip(dzv) {
                *b += d;
            }
            layer.w_self.tmul_add(dzv, dh_in.row_mut(v));
            layer.w_nbr.tmul_add(dzv, da.row_mut(v));
        }
        for v in 0..n {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            match m.agg {
                Aggregator::Sum | Aggregator::Mean => {
                    let scale = if m.agg == Aggregator::Mean { 1.0 / nbrs.len() as f64 } else { 1.0 };
                    for &u in nbrs {
                        for k in 0..d_in {
                            let add = da.get(v, k) * scale;
                            dh_in.set(u, k, dh_in.get(u, k) + add);
                        }
                    }
                }
                Aggregator::Max => {
                    for k in 0..d_in {
                        let u = pass.argmax[t][v * d_in + k];
                        dh_in.set(u, k, dh_in.get(u, k) + da.get(v, k));
                    }
                }
            }
        }
        layer_grads.push((dw_self, dw_nbr, dbias));
        dh = dh_in;
    }
    layer_grads.reverse();

    let mut out = Vec::with_capacity(m.param_count());
    for (dw_self, dw_nbr, dbias) in layer_grads {
        out.extend_from_slice(dw_self.as_slice());
        out.extend_from_slice(dw_nbr.as_slice());
        out.extend_from_slice(&dbias);
    }
    out.extend_from_slice(&d_readout_w);
    out.push(d_readout_b);
    out
}
