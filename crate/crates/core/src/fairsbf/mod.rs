//! Gate-level fairness: per-gate prediction gaps, parity metrics on the output
//! subpopulation, regularized training and audit reports.

mod train;

use serde::Serialize;
use thiserror::Error;

use crate::boolfn::{fourier_degree, fwht};
use crate::circuit::{Circuit, CircuitError, CircuitStats, ClassThresholds, GateSubpopulation};
use crate::gnn::GnnError;
use crate::graph::{AttrTable, GraphError};

pub use train::{trace_to_csv, train, TraceRow, TrainOutcome};

#[derive(Debug, Error)]
pub enum FairError {
    #[error("{what}: expected {expected} entries, found {found}")]
    Shape { what: &'static str, expected: usize, found: usize },
    #[error("{metric} undefined: {reason}")]
    UndefinedMetric { metric: &'static str, reason: String },
    #[error("graph has no labels")]
    MissingLabels,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `|S_g|` and `Δ_g`; the gap is `None` when `S_g` is empty or all of `V`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateGap {
    pub gate: String,
    pub size: usize,
    pub gap: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    sum / k as f64
}

/// Whether a subpopulation enters the fairness loss: `0 < |S| < n`.
pub fn eligible(size: usize, n: usize) -> bool {
    size > 0 && size < n
}

/// Predictions shifted by the first one, so equal predictions give exactly
/// equal means.
fn centered(yhat: &[f64]) -> Vec<f64> {
    let base = yhat.first().copied().unwrap_or(0.0);
    yhat.iter().map(|y| y - base).collect()
}

/// `Δ_g = |mean_{S_g} ŷ − mean_V ŷ|` for each precomputed subpopulation.
pub fn gaps_for(yhat: &[f64], subpops: &[GateSubpopulation]) -> Vec<GateGap> {
    let n = yhat.len();
    let yhat = &centered(yhat)[..];
    let mu = mean(yhat.iter().copied());
    subpops
        .iter()
        .map(|s| GateGap {
            gate: s.gate.clone(),
            size: s.members.len(),
            gap: eligible(s.members.len(), n).then(|| (mean(s.members.iter().map(|&v| yhat[v])) - mu).abs()),
        })
        .collect()
}

pub fn fairness_gaps(yhat: &[f64], c: &Circuit, attrs: &AttrTable) -> Result<Vec<GateGap>, FairError> {
    check_len("attribute rows", yhat.len(), attrs.len())?;
    Ok(gaps_for(yhat, &c.gate_subpopulations(attrs)?))
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), FairError> {
    if expected == found {
        Ok(())
    } else {
        Err(FairError::Shape { what, expected, found })
    }
}

/// Demographic parity gap `|mean(ŷ | group) − mean(ŷ | not group)|` on soft predictions.
pub fn ddp(yhat: &[f64], group: &[bool]) -> Result<f64, FairError> {
    check_len("group", yhat.len(), group.len())?;
    let yhat = &centered(yhat)[..];
    let side = |want: bool| yhat.iter().zip(group).filter(move |(_, &g)| g == want).map(|(&y, _)| y);
    if side(true).next().is_none() || side(false).next().is_none() {
        return Err(FairError::UndefinedMetric { metric: "ddp", reason: "only one group present".into() });
    }
    Ok((mean(side(true)) - mean(side(false))).abs())
}

/// Equalized-odds gap `max(|TPR₁ − TPR₀|, |FPR₁ − FPR₀|)` with hard predictions
/// `ŷ > 0.5`.
pub fn deo(yhat: &[f64], labels: &[bool], group: &[bool]) -> Result<f64, FairError> {
    check_len("labels", yhat.len(), labels.len())?;
    check_len("group", yhat.len(), group.len())?;
    // rate(g, y): fraction predicted positive among nodes in group g with label y.
    let rate = |g: bool, y: bool| -> Result<f64, FairError> {
        let preds: Vec<bool> =
            (0..yhat.len()).filter(|&v| group[v] == g && labels[v] == y).map(|v| yhat[v] > 0.5).collect();
        if preds.is_empty() {
            let class = if y { "positive" } else { "negative" };
            return Err(FairError::UndefinedMetric {
                metric: "deo",
                reason: format!("group {} has no {class} labels", u8::from(g)),
            });
        }
        Ok(preds.iter().filter(|&&p| p).count() as f64 / preds.len() as f64)
    };
    let tpr = (rate(true, true)? - rate(false, true)?).abs();
    let fpr = (rate(true, false)? - rate(false, false)?).abs();
    Ok(tpr.max(fpr))
}

pub fn accuracy(yhat: &[f64], labels: &[bool]) -> Result<f64, FairError> {
    check_len("labels", yhat.len(), labels.len())?;
    if yhat.is_empty() {
        return Err(FairError::UndefinedMetric { metric: "accuracy", reason: "no nodes".into() });
    }
    Ok(mean(yhat.iter().zip(labels).map(|(&y, &l)| f64::from(u8::from((y > 0.5) == l)))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitProfile {
    #[serde(flatten)]
    pub stats: CircuitStats,
    /// Fourier degree of the output gate as a function of the circuit inputs.
    pub fourier_degree: usize,
    /// Degree above 2 or an XOR gate: the output is parity-like, out of reach of
    /// debiasing that only aligns low-order attribute statistics.
    pub parity_like: bool,
}

impl CircuitProfile {
    pub fn of(c: &Circuit) -> Result<Self, FairError> {
        let stats = c.stats(&ClassThresholds::default());
        let fourier_degree = fourier_degree(&fwht(&c.compile_to_table()?));
        let parity_like = fourier_degree > 2 || stats.has_xor;
        Ok(Self { stats, fourier_degree, parity_like })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub ddp: Option<f64>,
    pub deo: Option<f64>,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub lambda: f64,
    pub epochs: usize,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FairnessReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ReportMetadata>,
    pub nodes: usize,
    pub per_gate: Vec<GateGap>,
    /// Sum of the eligible gaps.
    pub fair_loss: f64,
    pub max_gap: Option<f64>,
    pub metrics: Metrics,
    pub circuit_profile: CircuitProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout: Option<Box<FairnessReport>>,
    pub warnings: Vec<String>,
}

impl FairnessReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Flat `gate,size,gap` rows; excluded gates have an empty gap.
    pub fn per_gate_csv(&self) -> String {
        let mut out = String::from("gate,size,gap\n");
        for g in &self.per_gate {
            let gap = g.gap.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", g.gate, g.size, gap));
        }
        out
    }
}

/// Assembles a report from predictions alone. Metrics that are undefined on the
/// given population are left empty with a warning.
pub fn audit(
    yhat: &[f64],
    labels: Option<&[bool]>,
    c: &Circuit,
    attrs: &AttrTable,
) -> Result<FairnessReport, FairError> {
    let n = yhat.len();
    check_len("attribute rows", n, attrs.len())?;
    if let Some(l) = labels {
        check_len("labels", n, l.len())?;
    }
    let subpops = c.gate_subpopulations(attrs)?;
    let per_gate = gaps_for(yhat, &subpops);
    let fair_loss = per_gate.iter().filter_map(|g| g.gap).sum();
    let max_gap = per_gate.iter().filter_map(|g| g.gap).reduce(f64::max);
    let mut group = vec![false; n];
    for &v in &subpops[c.output_index()].members {
        group[v] = true;
    }
    let mut warnings = Vec::new();
    let mut keep = |r: Result<f64, FairError>| match r {
        Ok(x) => Some(x),
        Err(e) => {
            warnings.push(e.to_string());
            None
        }
    };
    let ddp = keep(ddp(yhat, &group));
    let (deo, accuracy) = match labels {
        Some(l) => (keep(deo(yhat, l, &group)), keep(accuracy(yhat, l))),
        None => (None, None),
    };
    if max_gap.is_none() {
        warnings.push("no gate has a proper non-empty subpopulation".into());
    }
    Ok(FairnessReport {
        metadata: None,
        nodes: n,
        per_gate,
        fair_loss,
        max_gap,
        metrics: Metrics { ddp, deo, accuracy },
        circuit_profile: CircuitProfile::of(c)?,
        holdout: None,
        warnings,
    })
}

/// [`audit`] restricted to `nodes`.
pub fn audit_nodes(
    yhat: &[f64],
    labels: Option<&[bool]>,
    c: &Circuit,
    attrs: &AttrTable,
    nodes: &[usize],
) -> Result<FairnessReport, FairError> {
    let y: Vec<f64> = nodes.iter().map(|&v| yhat[v]).collect();
    let l: Option<Vec<bool>> = labels.map(|l| nodes.iter().map(|&v| l[v]).collect());
    let rows = nodes.iter().map(|&v| attrs.rows()[v].clone()).collect();
    let sub = AttrTable::new(attrs.names().to_vec(), rows)?;
    audit(&y, l.as_deref(), c, &sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::POKEC_CIRCUIT;

    fn single_gate() -> Circuit {
        Circuit::parse(r#"{"inputs":["a"],"gates":[{"id":"g","op":"OR","args":["a","a"]}],"output":"g"}"#).unwrap()
    }

    fn table(bits: &[bool]) -> AttrTable {
        AttrTable::new(vec!["a".into()], bits.iter().map(|&b| vec![b]).collect()).unwrap()
    }

    #[test]
    fn gap_arithmetic() {
        let gaps = fairness_gaps(&[1.0, 1.0, 0.0, 0.0], &single_gate(), &table(&[true, true, false, false])).unwrap();
        assert_eq!(gaps, vec![GateGap { gate: "g".into(), size: 2, gap: Some(0.5) }]);
        let full = fairness_gaps(&[1.0, 0.0], &single_gate(), &table(&[true, true])).unwrap();
        assert_eq!(full[0].gap, None);
        let flat = fairness_gaps(&[0.3; 4], &single_gate(), &table(&[true, false, true, false])).unwrap();
        assert_eq!(flat[0].gap, Some(0.0));
        assert!(fairness_gaps(&[0.3; 3], &single_gate(), &table(&[true, false])).is_err());
    }

    #[test]
    fn ddp_examples() {
        let g = [true, true, false, false];
        assert_eq!(ddp(&[1.0, 0.0, 1.0, 0.0], &g).unwrap(), 0.0);
        assert_eq!(ddp(&[1.0, 1.0, 0.0, 0.0], &g).unwrap(), 1.0);
        assert_eq!(ddp(&[0.2; 4], &g).unwrap(), 0.0);
        assert!(matches!(ddp(&[0.2; 2], &[true, true]), Err(FairError::UndefinedMetric { .. })));
    }

    #[test]
    fn deo_examples() {
        let labels = [true, false, true, false];
        let group = [false, false, true, true];
        let perfect = [0.9, 0.1, 0.9, 0.1];
        assert_eq!(deo(&perfect, &labels, &group).unwrap(), 0.0);
        let flipped = [0.9, 0.1, 0.1, 0.9];
        assert_eq!(deo(&flipped, &labels, &group).unwrap(), 1.0);
        let mirrored = [0.7, 0.4, 0.7, 0.4];
        assert_eq!(deo(&mirrored, &labels, &group).unwrap(), 0.0);
        let err = deo(&[0.9, 0.9, 0.9], &[true, true, false], &[false, false, true]).unwrap_err();
        assert!(err.to_string().contains("group 1 has no positive labels"), "{err}");
    }

    #[test]
    fn constant_predictions_audit() {
        let c = Circuit::parse(POKEC_CIRCUIT).unwrap();
        let rows: Vec<Vec<bool>> = (0..8).map(|x| (0..3).map(|i| x >> i & 1 == 1).collect()).collect();
        let attrs = AttrTable::new(vec!["gender".into(), "region".into(), "age".into()], rows).unwrap();
        let r = audit(&[0.4; 8], None, &c, &attrs).unwrap();
        assert_eq!(r.fair_loss, 0.0);
        assert_eq!(r.metrics.ddp, Some(0.0));
        assert_eq!(r.metrics.deo, None);
        assert_eq!(r.per_gate.len(), c.gates().len());
        assert!(r.circuit_profile.parity_like);
        // Degree 2, but the XOR gate still marks it parity-like.
        assert_eq!(r.circuit_profile.fourier_degree, 2);
    }
}
