use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AttrTable, Graph, GraphError};

/// Two-block stochastic block model with block-correlated sensitive attributes
/// and group-biased labels.
///
/// Node `v` lies in block `b_v = v / nodes_per_block`. Each sensitive attribute
/// copies `b_v` with probability `rho_attr` and is otherwise a fair coin. Feature
/// 0 is a noisy block proxy `N(0,1) + feature_shift * (2 b_v - 1)`; the remaining
/// features are independent `N(0,1)` task signals. Labels follow
/// `1[Σ_{j>=1} x_j + beta * (b_v - 1/2) + label_noise * N(0,1) > 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub nodes_per_block: usize,
    pub p_within: f64,
    pub p_cross: f64,
    pub rho_attr: f64,
    pub beta: f64,
    pub feature_dim: usize,
    pub feature_shift: f64,
    pub label_noise: f64,
    pub attributes: Vec<String>,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// The bundled biased fixture: 400 nodes, `beta = 2`, `rho_attr = 0.9`, seed 7.
    fn default() -> Self {
        Self {
            nodes_per_block: 200,
            p_within: 0.04,
            p_cross: 0.004,
            rho_attr: 0.9,
            beta: 2.0,
            feature_dim: 32,
            feature_shift: 1.0,
            label_noise: 0.5,
            attributes: vec!["gender".into(), "region".into(), "age".into()],
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::Config(msg));
        if self.nodes_per_block == 0 {
            return bad("nodes_per_block must be positive".into());
        }
        for (name, p) in [("p_within", self.p_within), ("p_cross", self.p_cross), ("rho_attr", self.rho_attr)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if self.feature_dim == 0 {
            return bad("feature_dim must be positive".into());
        }
        if !self.beta.is_finite()
            || !self.feature_shift.is_finite()
            || self.label_noise.is_nan()
            || self.label_noise < 0.0
        {
            return bad("beta, feature_shift and label_noise must be finite, label_noise >= 0".into());
        }
        Ok(())
    }

    pub fn block_of(&self, v: usize) -> usize {
        v / self.nodes_per_block
    }
}

pub fn synth_biased_graph(cfg: &SynthConfig) -> Result<Graph, GraphError> {
    cfg.validate()?;
    let n = 2 * cfg.nodes_per_block;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let block: Vec<bool> = (0..n).map(|v| cfg.block_of(v) == 1).collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { cfg.p_within } else { cfg.p_cross };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut sens = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for &b in &block {
        let row: Vec<bool> = cfg
            .attributes
            .iter()
            .map(|_| if rng.random::<f64>() < cfg.rho_attr { b } else { rng.random::<bool>() })
            .collect();
        sens.push(row);

        let sign = if b { 1.0 } else { -1.0 };
        let mut x: Vec<f64> = (0..cfg.feature_dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        x[0] += cfg.feature_shift * sign;
        let signal: f64 = x[1..].iter().sum();
        let noise: f64 = rng.sample(StandardNormal);
        let score = signal + cfg.beta * (f64::from(u8::from(b)) - 0.5) + cfg.label_noise * noise;
        labels.push(score > 0.0);
        features.push(x);
    }

    Graph::new(n, edges)?
        .with_features((0..cfg.feature_dim).map(|j| format!("x{j}")).collect(), features)?
        .with_sensitive(AttrTable::new(cfg.attributes.clone(), sens)?)?
        .with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_correlation() {
        let cfg = SynthConfig { rho_attr: 1.0, beta: 0.0, nodes_per_block: 30, ..Default::default() };
        let g = synth_biased_graph(&cfg).unwrap();
        for v in 0..g.node_count() {
            let b = cfg.block_of(v) == 1;
            assert!(g.sensitive().rows()[v].iter().all(|&s| s == b));
        }
    }

    #[test]
    fn no_cross_edges() {
        let cfg = SynthConfig { p_cross: 0.0, nodes_per_block: 40, p_within: 0.2, ..Default::default() };
        let g = synth_biased_graph(&cfg).unwrap();
        assert!(g.edges().iter().all(|&(u, v)| cfg.block_of(u) == cfg.block_of(v)));
        assert!(g.edge_count() > 0);
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig { nodes_per_block: 50, ..Default::default() };
        let a = synth_biased_graph(&cfg).unwrap().to_csv();
        let b = synth_biased_graph(&cfg).unwrap().to_csv();
        assert_eq!(a, b);
        let c = synth_biased_graph(&SynthConfig { seed: 8, ..cfg }).unwrap().to_csv();
        assert_ne!(a, c);
    }

    #[test]
    fn densities_within_three_sigma() {
        let cfg = SynthConfig { nodes_per_block: 500, p_within: 0.02, p_cross: 0.003, ..Default::default() };
        let g = synth_biased_graph(&cfg).unwrap();
        let (mut within, mut cross) = (0usize, 0usize);
        for &(u, v) in g.edges() {
            if cfg.block_of(u) == cfg.block_of(v) {
                within += 1;
            } else {
                cross += 1;
            }
        }
        let m = cfg.nodes_per_block as f64;
        let pairs_within = 2.0 * m * (m - 1.0) / 2.0;
        let pairs_cross = m * m;
        for (count, pairs, p) in [(within, pairs_within, cfg.p_within), (cross, pairs_cross, cfg.p_cross)] {
            let mean = pairs * p;
            let sd = (pairs * p * (1.0 - p)).sqrt();
            assert!((count as f64 - mean).abs() <= 3.0 * sd, "{count} vs {mean} ± {sd}");
        }
    }

    #[test]
    fn rejects_degenerate() {
        let cfg = SynthConfig { nodes_per_block: 0, ..Default::default() };
        assert!(matches!(synth_biased_graph(&cfg), Err(GraphError::Config(_))));
        let cfg = SynthConfig { p_within: 1.5, ..Default::default() };
        assert!(synth_biased_graph(&cfg).is_err());
    }
}
