use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{audit, audit_nodes, eligible, FairError, FairnessReport, ReportMetadata};
use crate::circuit::Circuit;
use crate::gnn::{loss_and_gradients, GnnModel, Objective, TrainConfig};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub task_loss: f64,
    pub fair_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GnnModel,
    pub predictions: Vec<f64>,
    pub report: FairnessReport,
    pub trace: Vec<TraceRow>,
    /// Nodes excluded from the task loss.
    pub holdout: Vec<usize>,
}

pub fn trace_to_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("epoch,task_loss,fair_loss\n");
    for r in trace {
        out.push_str(&format!("{},{},{}\n", r.epoch, r.task_loss, r.fair_loss));
    }
    out
}

/// Seeded split of `0..n` into (training, held-out), both ascending.
fn split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let k = (fraction * n as f64).round() as usize;
    if k == 0 {
        return ((0..n).collect(), Vec::new());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (mut held, mut kept) = (order[..k].to_vec(), order[k..].to_vec());
    held.sort_unstable();
    kept.sort_unstable();
    (kept, held)
}

/// Full-batch gradient descent on mean cross-entropy plus `lambda` times the
/// sum of eligible gate gaps, then an audit of the final predictions.
///
/// With `lambda = 0` the fairness term contributes no gradient, so the run is
/// bit-identical to task-only training; gaps are still traced.
pub fn train(g: &Graph, c: &Circuit, cfg: &TrainConfig) -> Result<TrainOutcome, FairError> {
    cfg.validate()?;
    let labels = g.labels().ok_or(FairError::MissingLabels)?.to_vec();
    let n = g.node_count();
    let subpops = c.gate_subpopulations(g.sensitive())?;
    let groups: Vec<Vec<usize>> =
        subpops.iter().filter(|s| eligible(s.members.len(), n)).map(|s| s.members.clone()).collect();
    let mut warnings = Vec::new();
    if groups.is_empty() {
        warnings.push("no eligible gate subpopulation; training on the task loss only".to_string());
    }
    let (task_nodes, holdout) = split(n, cfg.holdout, cfg.seed);
    let objective = Objective { task_nodes, labels: labels.clone(), groups, lambda: cfg.lambda };

    let mut model = GnnModel::init(cfg, g.feature_dim())?;
    let mut params = model.params();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let (value, grad) = loss_and_gradients(&model, g, &objective)?;
        trace.push(TraceRow { epoch, task_loss: value.task, fair_loss: value.fair });
        for (p, d) in params.iter_mut().zip(&grad) {
            *p -= cfg.lr * d;
        }
        model.set_params(&params)?;
    }

    let predictions = model.forward(g)?.yhat;
    let mut report = audit(&predictions, Some(&labels), c, g.sensitive())?;
    if !holdout.is_empty() {
        report.holdout = Some(Box::new(audit_nodes(&predictions, Some(&labels), c, g.sensitive(), &holdout)?));
    }
    report.warnings.splice(0..0, warnings);
    report.metadata = Some(ReportMetadata {
        seed: cfg.seed,
        lambda: cfg.lambda,
        epochs: cfg.epochs,
        config: serde_json::to_value(cfg).expect("config serializes"),
    });
    Ok(TrainOutcome { model, predictions, report, trace, holdout })
}
