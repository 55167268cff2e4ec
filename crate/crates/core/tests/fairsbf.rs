use proptest::prelude::*;
use sbf::circuit::{Circuit, POKEC_CIRCUIT};
use sbf::fairsbf::{audit, train};
use sbf::gnn::TrainConfig;
use sbf::graph::{synth_biased_graph, AttrTable, SynthConfig};

fn attrs(rows: Vec<Vec<bool>>) -> AttrTable {
    AttrTable::new(vec!["gender".into(), "region".into(), "age".into()], rows).unwrap()
}

fn population() -> impl Strategy<Value = (Vec<f64>, Vec<bool>, Vec<Vec<bool>>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec(0.0f64..=1.0, n),
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), 3), n),
        )
    })
}

proptest! {
    #[test]
    fn guard_and_ranges((yhat, labels, rows) in population()) {
        let c = Circuit::parse(POKEC_CIRCUIT).unwrap();
        let n = yhat.len();
        let table = attrs(rows);
        let r = audit(&yhat, Some(&labels), &c, &table).unwrap();
        let subpops = c.gate_subpopulations(&table).unwrap();
        let mut expected_loss = 0.0;
        for (gap, sub) in r.per_gate.iter().zip(&subpops) {
            prop_assert_eq!(gap.size, sub.members.len());
            let proper = !sub.members.is_empty() && sub.members.len() < n;
            prop_assert_eq!(gap.gap.is_some(), proper);
            if let Some(d) = gap.gap {
                prop_assert!((0.0..=1.0).contains(&d));
                expected_loss += d;
            }
        }
        prop_assert!((r.fair_loss - expected_loss).abs() < 1e-12);
        for m in [r.metrics.ddp, r.metrics.deo, r.metrics.accuracy].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&m));
        }
        // Pure function of its inputs.
        prop_assert_eq!(audit(&yhat, Some(&labels), &c, &table).unwrap().to_json(), r.to_json());
    }
}

#[test]
fn bundled_circuit_lists_every_gate() {
    let c = Circuit::parse(POKEC_CIRCUIT).unwrap();
    let rows: Vec<Vec<bool>> = (0..8).map(|x| (0..3).map(|i| x >> i & 1 == 1).collect()).collect();
    let r = audit(&[0.5; 8], None, &c, &attrs(rows.clone())).unwrap();
    type Rule = fn(bool, bool, bool) -> bool;
    let expected: [(&str, Rule); 8] = [
        ("!gender", |g, _, _| !g),
        ("!region", |_, r, _| !r),
        ("g0_r0", |g, r, _| !g && !r),
        ("!age", |_, _, a| !a),
        ("g1_a0", |g, _, a| g && !a),
        ("either", |g, r, a| (!g && !r) || (g && !a)),
        ("r1_a1", |_, r, a| r && a),
        ("f", |g, r, a| ((!g && !r) || (g && !a)) != (r && a)),
    ];
    assert_eq!(r.per_gate.len(), expected.len());
    for (gap, (id, rule)) in r.per_gate.iter().zip(expected) {
        assert_eq!(gap.gate, id);
        assert_eq!(gap.size, rows.iter().filter(|x| rule(x[0], x[1], x[2])).count(), "{id}");
    }
}

#[test]
fn audit_reproduces_training_report() {
    let g =
        synth_biased_graph(&SynthConfig { nodes_per_block: 40, p_within: 0.1, p_cross: 0.01, ..Default::default() })
            .unwrap();
    let c = Circuit::parse(POKEC_CIRCUIT).unwrap();
    let out =
        train(&g, &c, &TrainConfig { epochs: 30, hidden: 6, lr: 0.1, lambda: 1.0, ..Default::default() }).unwrap();
    let again = audit(&out.predictions, g.labels(), &c, g.sensitive()).unwrap();
    assert_eq!(again.per_gate, out.report.per_gate);
    assert_eq!(again.metrics, out.report.metrics);
    let reloaded: sbf::gnn::GnnModel = out.model.to_text().parse().unwrap();
    assert_eq!(reloaded.forward(&g).unwrap().yhat, out.predictions);
}
