//! A small message-passing network with exact receptive fields.
//!
//! Layer `t` updates every node by
//! `h_v = ReLU(W_self h_v + W_nbr AGG_{u in N(v)} h_u + b)` and the readout is
//! `ŷ_v = σ(w · h_v + b)`. An empty neighborhood aggregates to the zero vector
//! under every aggregator.

mod grad;
mod probe;

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub use grad::{evaluate, loss_and_gradients, Objective, ObjectiveValue};
pub use probe::{degree_model, extract_boolean_function, locality_check, LocalityReport, MAX_EXTRACT_INPUTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GnnError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{what}: expected {expected}, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("model file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("extraction takes at most {max} input nodes, got {found}")]
    TooManyInputs { max: usize, found: usize },
    #[error("node {0} out of range")]
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Sum,
    #[default]
    Mean,
    Max,
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregator::Sum => "sum",
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
        })
    }
}

impl FromStr for Aggregator {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Aggregator::Sum),
            "mean" => Ok(Aggregator::Mean),
            "max" => Ok(Aggregator::Max),
            _ => Err(GnnError::Config(format!("unknown aggregator `{s}`"))),
        }
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self, GnnError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(GnnError::Shape { what: "feature row", expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `out += self · x`.
    fn mul_add(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += self.row(i).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    /// `out += selfᵀ · y`.
    fn tmul_add(&self, y: &[f64], out: &mut [f64]) {
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
    }

    /// `self += y xᵀ`.
    fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        for (i, &yi) in y.iter().enumerate() {
            for (a, xj) in self.row_mut(i).iter_mut().zip(x) {
                *a += yi * xj;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w_self: Matrix,
    pub w_nbr: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(d_in: usize, d_out: usize) -> Self {
        Self { w_self: Matrix::zeros(d_out, d_in), w_nbr: Matrix::zeros(d_out, d_in), bias: vec![0.0; d_out] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnnModel {
    pub agg: Aggregator,
    dims: Vec<usize>,
    pub layers: Vec<Layer>,
    pub readout_w: Vec<f64>,
    pub readout_b: f64,
}

/// Hyperparameters shared by model construction and training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden: usize,
    pub layers: usize,
    pub lr: f64,
    pub epochs: usize,
    pub lambda: f64,
    pub seed: u64,
    pub agg: Aggregator,
    /// Fraction of labeled nodes held out from the task loss and audited separately.
    pub holdout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { hidden: 16, layers: 2, lr: 0.01, epochs: 200, lambda: 0.0, seed: 7, agg: Aggregator::Mean, holdout: 0.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GnnError> {
        let bad = |m: &str| Err(GnnError::Config(m.into()));
        if self.hidden == 0 {
            return bad("hidden dim must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be >= 0");
        }
        if !(0.0..1.0).contains(&self.holdout) {
            return bad("holdout must lie in [0, 1)");
        }
        Ok(())
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// `hidden[t]` is `H^(t)`, one row per node; `hidden[0]` holds the input features.
    pub hidden: Vec<Matrix>,
    /// Neighbor aggregates feeding layer `t + 1`.
    pub aggregated: Vec<Matrix>,
    /// Pre-activations of layer `t + 1`.
    pub pre: Vec<Matrix>,
    /// For max aggregation: the neighbor supplying each coordinate.
    argmax: Vec<Vec<usize>>,
    pub logits: Vec<f64>,
    pub yhat: Vec<f64>,
}

impl ForwardPass {
    pub fn embeddings(&self) -> &Matrix {
        self.hidden.last().expect("input layer present")
    }
}

pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

impl GnnModel {
    /// All-zero model with the given layer widths `d_0..d_T`.
    pub fn zeros(agg: Aggregator, dims: Vec<usize>) -> Result<Self, GnnError> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(GnnError::Config("dims must be non-empty and positive".into()));
        }
        let layers = dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        let d_t = *dims.last().unwrap();
        Ok(Self { agg, dims, layers, readout_w: vec![0.0; d_t], readout_b: 0.0 })
    }

    /// Seeded uniform initialization in `±1/sqrt(fan_in)`.
    pub fn init(cfg: &TrainConfig, d_in: usize) -> Result<Self, GnnError> {
        cfg.validate()?;
        let mut dims = vec![d_in];
        dims.extend(std::iter::repeat_n(cfg.hidden, cfg.layers));
        let mut m = Self::zeros(cfg.agg, dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut fill = |xs: &mut [f64], fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for x in xs {
                *x = rng.random_range(-bound..bound);
            }
        };
        for (t, layer) in m.layers.iter_mut().enumerate() {
            let fan_in = m.dims[t];
            fill(layer.w_self.as_mut_slice(), fan_in);
            fill(layer.w_nbr.as_mut_slice(), fan_in);
            fill(&mut layer.bias, fan_in);
        }
        let d_t = *m.dims.last().unwrap();
        fill(&mut m.readout_w, d_t);
        let mut b = [0.0];
        fill(&mut b, d_t);
        m.readout_b = b[0];
        Ok(m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| 2 * l.w_self.as_slice().len() + l.bias.len()).sum::<usize>()
            + self.readout_w.len()
            + 1
    }

    /// Parameters in a fixed order: per layer `W_self`, `W_nbr`, `b`, then readout `w`, `b`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.w_self.as_slice());
            out.extend_from_slice(l.w_nbr.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out.extend_from_slice(&self.readout_w);
        out.push(self.readout_b);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<(), GnnError> {
        if params.len() != self.param_count() {
            return Err(GnnError::Shape {
                what: "parameter vector",
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for x in l.w_self.as_mut_slice().iter_mut().chain(l.w_nbr.as_mut_slice()).chain(&mut l.bias) {
                *x = it.next().unwrap();
            }
        }
        for x in &mut self.readout_w {
            *x = it.next().unwrap();
        }
        self.readout_b = it.next().unwrap();
        Ok(())
    }

    pub fn forward(&self, g: &Graph) -> Result<ForwardPass, GnnError> {
        let x = Matrix::from_rows(g.features(), g.feature_dim())?;
        self.forward_with(g, x)
    }

    /// Forward pass on `g` with the node features replaced by `x`.
    pub fn forward_with(&self, g: &Graph, x: Matrix) -> Result<ForwardPass, GnnError> {
        if x.cols() != self.dims[0] {
            return Err(GnnError::Shape { what: "input feature dim", expected: self.dims[0], found: x.cols() });
        }
        if x.rows() != g.node_count() {
            return Err(GnnError::Shape { what: "feature rows", expected: g.node_count(), found: x.rows() });
        }
        let n = g.node_count();
        let mut hidden = vec![x];
        let mut aggregated = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut argmax = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let h = hidden.last().unwrap();
            let (a, arg) = self.aggregate(g, h);
            let d_out = layer.bias.len();
            let mut z = Matrix::zeros(n, d_out);
            for v in 0..n {
                let zv = z.row_mut(v);
                zv.copy_from_slice(&layer.bias);
                layer.w_self.mul_add(h.row(v), zv);
                layer.w_nbr.mul_add(a.row(v), zv);
            }
            let mut next = z.clone();
            next.as_mut_slice().iter_mut().for_each(|x| *x = x.max(0.0));
            aggregated.push(a);
            argmax.push(arg);
            pre.push(z);
            hidden.push(next);
        }
        let h_t = hidden.last().unwrap();
        let logits: Vec<f64> = (0..n)
            .map(|v| self.readout_b + h_t.row(v).iter().zip(&self.readout_w).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let yhat = logits.iter().map(|&s| sigmoid(s)).collect();
        Ok(ForwardPass { hidden, aggregated, pre, argmax, logits, yhat })
    }

    /// Neighbor aggregation in ascending neighbor order.
    fn aggregate(&self, g: &Graph, h: &Matrix) -> (Matrix, Vec<usize>) {
        let (n, d) = (h.rows(), h.cols());
        let mut a = Matrix::zeros(n, d);
        let mut arg = Vec::new();
        if self.agg == Aggregator::Max {
            arg = vec![usize::MAX; n * d];
        }
        for v in 0..n {
            let nbrs = g.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            let av = a.row_mut(v);
            match self.agg {
                Aggregator::Sum | Aggregator::Mean => {
                    for &u in nbrs {
                        for (x, y) in av.iter_mut().zip(h.row(u)) {
                            *x += y;
                        }
                    }
                    if self.agg == Aggregator::Mean {
                        let k = nbrs.len() as f64;
                        av.iter_mut().for_each(|x| *x /= k);
                    }
                }
                Aggregator::Max => {
                    for k in 0..d {
                        let mut best = nbrs[0];
                        for &u in &nbrs[1..] {
                            if h.get(u, k) > h.get(best, k) {
                                best = u;
                            }
                        }
                        av[k] = h.get(best, k);
                        arg[v * d + k] = best;
                    }
                }
            }
        }
        (a, arg)
    }

    /// Plain-text dump; floats use shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut s = String::from("gnn v1\n");
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "agg {}", self.agg).unwrap();
        writeln!(s, "dims {}", self.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
        for l in &self.layers {
            for (name, m) in [("w_self", &l.w_self), ("w_nbr", &l.w_nbr)] {
                for i in 0..m.rows() {
                    writeln!(s, "{name} {}", join(m.row(i))).unwrap();
                }
            }
            writeln!(s, "bias {}", join(&l.bias)).unwrap();
        }
        writeln!(s, "readout_w {}", join(&self.readout_w)).unwrap();
        writeln!(s, "readout_b {}", self.readout_b).unwrap();
        s
    }
}

impl FromStr for GnnModel {
    type Err = GnnError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let mut next = |key: &str| -> Result<(usize, Vec<&str>), GnnError> {
            let (no, line) = lines.next().ok_or(GnnError::Parse { line: 0, msg: format!("missing `{key}`") })?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(GnnError::Parse { line: no, msg: format!("expected `{key}`") });
            }
            Ok((no, parts.collect()))
        };
        let floats = |no: usize, parts: &[&str], len: usize| -> Result<Vec<f64>, GnnError> {
            let xs = parts
                .iter()
                .map(|p| p.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| GnnError::Parse { line: no, msg: e.to_string() })?;
            if xs.len() != len {
                return Err(GnnError::Parse { line: no, msg: format!("expected {len} values, found {}", xs.len()) });
            }
            Ok(xs)
        };
        let (no, header) = next("gnn")?;
        if header != ["v1"] {
            return Err(GnnError::Parse { line: no, msg: "unsupported version".into() });
        }
        let (no, agg) = next("agg")?;
        let agg = agg
            .first()
            .copied()
            .unwrap_or("")
            .parse()
            .map_err(|e: GnnError| GnnError::Parse { line: no, msg: e.to_string() })?;
        let (no, dims) = next("dims")?;
        let dims = dims
            .iter()
            .map(|d| d.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GnnError::Parse { line: no, msg: e.to_string() })?;
        let mut m = GnnModel::zeros(agg, dims).map_err(|e| GnnError::Parse { line: no, msg: e.to_string() })?;
        for l in &mut m.layers {
            let (rows, cols) = (l.w_self.rows(), l.w_self.cols());
            for (key, mat) in [("w_self", &mut l.w_self), ("w_nbr", &mut l.w_nbr)] {
                for i in 0..rows {
                    let (no, parts) = next(key)?;
                    mat.row_mut(i).copy_from_slice(&floats(no, &parts, cols)?);
                }
            }
            let (no, parts) = next("bias")?;
            l.bias = floats(no, &parts, rows)?;
        }
        let d_t = m.readout_w.len();
        let (no, parts) = next("readout_w")?;
        m.readout_w = floats(no, &parts, d_t)?;
        let (no, parts) = next("readout_b")?;
        m.readout_b = floats(no, &parts, 1)?[0];
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::named::*;

    fn with_features(g: Graph, d: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..g.node_count()).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        g.with_features((0..d).map(|j| format!("x{j}")).collect(), rows).unwrap()
    }

    #[test]
    fn zero_model_predicts_half() {
        let g = with_features(cycle(5), 3, 1);
        let m = GnnModel::zeros(Aggregator::Sum, vec![3, 4, 4]).unwrap();
        assert!(m.forward(&g).unwrap().yhat.iter().all(|&y| y == 0.5));
    }

    #[test]
    fn init_is_seeded() {
        let cfg = TrainConfig { hidden: 5, ..Default::default() };
        let a = GnnModel::init(&cfg, 3).unwrap();
        assert_eq!(a.to_text(), GnnModel::init(&cfg, 3).unwrap().to_text());
        assert_ne!(a, GnnModel::init(&TrainConfig { seed: 8, ..cfg }, 3).unwrap());
        assert!(matches!(
            GnnModel::init(&TrainConfig { hidden: 0, ..Default::default() }, 3),
            Err(GnnError::Config(_))
        ));
    }

    #[test]
    fn feature_dim_mismatch() {
        let g = with_features(path(3), 2, 1);
        let m = GnnModel::init(&TrainConfig::default(), 3).unwrap();
        assert!(matches!(m.forward(&g), Err(GnnError::Shape { .. })));
    }

    #[test]
    fn isolated_node_is_an_mlp() {
        let g = with_features(disjoint_union(&path(2), &empty(1)), 2, 3);
        let cfg = TrainConfig { hidden: 3, layers: 2, ..Default::default() };
        let m = GnnModel::init(&cfg, 2).unwrap();
        let out = m.forward(&g).unwrap();
        // Same computation by hand with a zero neighbor message.
        let mut h = g.features()[2].clone();
        for l in &m.layers {
            let mut z = l.bias.clone();
            l.w_self.mul_add(&h, &mut z);
            h = z.into_iter().map(|x| x.max(0.0)).collect();
        }
        let s = m.readout_b + h.iter().zip(&m.readout_w).map(|(a, b)| a * b).sum::<f64>();
        assert_eq!(out.yhat[2], sigmoid(s));
    }

    #[test]
    fn equivariant_under_relabeling() {
        for agg in [Aggregator::Sum, Aggregator::Mean, Aggregator::Max] {
            let g = with_features(disjoint_union(&cycle(4), &star(3)), 3, 5);
            let m = GnnModel::init(&TrainConfig { agg, hidden: 4, layers: 3, ..Default::default() }, 3).unwrap();
            let perm = [5, 2, 7, 0, 1, 3, 6, 4];
            let a = m.forward(&g).unwrap();
            let b = m.forward(&g.permuted(&perm)).unwrap();
            for (v, &pv) in perm.iter().enumerate() {
                assert!((a.yhat[v] - b.yhat[pv]).abs() < 1e-12, "{agg}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let m = GnnModel::init(&TrainConfig { hidden: 3, layers: 2, agg: Aggregator::Max, ..Default::default() }, 2)
            .unwrap();
        let back: GnnModel = m.to_text().parse().unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), m.to_text());
        let flat: GnnModel = GnnModel::zeros(Aggregator::Sum, vec![4]).unwrap().to_text().parse().unwrap();
        assert_eq!(flat.depth(), 0);
        assert!("gnn v1\nagg mean\ndims 2 2\n".parse::<GnnModel>().is_err());
    }

    #[test]
    fn params_round_trip() {
        let mut m = GnnModel::init(&TrainConfig { hidden: 2, layers: 1, ..Default::default() }, 3).unwrap();
        let p = m.params();
        assert_eq!(p.len(), 2 * 6 + 2 + 2 + 1);
        let mut q = p.clone();
        q[0] += 1.0;
        m.set_params(&q).unwrap();
        assert_eq!(m.params(), q);
        assert!(m.set_params(&p[1..]).is_err());
    }
}
