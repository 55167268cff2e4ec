//! Boolean circuits over named attribute inputs.
//!
//! A circuit file is a JSON document:
//!
//! ```json
//! { "inputs": ["a", "b"],
//!   "gates": [ { "id": "g", "op": "AND", "args": ["a", "!b"] } ],
//!   "output": "g" }
//! ```
//!
//! Arguments name inputs or earlier gates. `!name` negates an input; each negated
//! input becomes one explicit `NOT` gate with id `!name`, inserted just before its
//! first use and shared by later uses.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boolfn::{TruthTable, MAX_VARS};
use crate::graph::AttrTable;

/// The subpopulation function from the Pokec-z experiment over `gender`, `region`, `age`.
pub const POKEC_CIRCUIT: &str = include_str!("../fixtures/pokec_f.circuit");

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("gate `{gate}`: {msg}")]
    Invalid { gate: String, msg: String },
    #[error("circuit has {0} inputs; at most {max} can be compiled", max = MAX_VARS)]
    TooManyInputs(usize),
    #[error("missing value for input `{0}`")]
    MissingInput(String),
    #[error("row {row} has {found} values, circuit has {expected} inputs")]
    RowShape { row: usize, expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateOp {
    Not,
    And,
    Or,
    Xor,
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateOp::Not => "NOT",
            GateOp::And => "AND",
            GateOp::Or => "OR",
            GateOp::Xor => "XOR",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Input(usize),
    Gate(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub op: GateOp,
    pub args: Vec<Signal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    inputs: Vec<String>,
    gates: Vec<Gate>,
    output: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    inputs: Vec<String>,
    gates: Vec<GateRecord>,
    output: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    id: String,
    op: GateOp,
    args: Vec<String>,
}

/// Thresholds for the reporting labels in [`CircuitStats`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassThresholds {
    pub ac0_max_depth: usize,
    pub nc1_log_factor: f64,
}

impl Default for ClassThresholds {
    fn default() -> Self {
        Self { ac0_max_depth: 4, nc1_log_factor: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassLabel {
    #[serde(rename = "AC0-like")]
    Ac0Like,
    #[serde(rename = "NC1-like")]
    Nc1Like,
    #[serde(rename = "other")]
    Other,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Ac0Like => "AC0-like",
            ClassLabel::Nc1Like => "NC1-like",
            ClassLabel::Other => "other",
        })
    }
}

/// Structural summary. The class label is a finite-size reporting heuristic:
/// AC0-like means no XOR and depth at most `ac0_max_depth`; NC1-like means the
/// depth after expanding every k-ary gate into a balanced binary tree is at most
/// `ceil(nc1_log_factor * log2(size + inputs))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitStats {
    pub size: usize,
    pub depth: usize,
    pub binary_depth: usize,
    pub max_fanin: usize,
    pub has_xor: bool,
    pub class_label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateSubpopulation {
    pub gate: String,
    pub members: Vec<usize>,
}

fn invalid(gate: &str, msg: impl Into<String>) -> CircuitError {
    CircuitError::Invalid { gate: gate.to_string(), msg: msg.into() }
}

impl Circuit {
    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let file: CircuitFile = serde_json::from_str(text).map_err(|e| CircuitError::Parse {
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        Self::from_file(file)
    }

    fn from_file(file: CircuitFile) -> Result<Self, CircuitError> {
        if file.inputs.is_empty() {
            return Err(invalid(&file.output, "circuit declares no inputs"));
        }
        let mut names: HashMap<String, Signal> = HashMap::new();
        for (i, name) in file.inputs.iter().enumerate() {
            if name.is_empty() || name.starts_with('!') {
                return Err(invalid(name, "input names must be non-empty and not start with `!`"));
            }
            if names.insert(name.clone(), Signal::Input(i)).is_some() {
                return Err(invalid(name, "duplicate input name"));
            }
        }
        let mut gates: Vec<Gate> = Vec::new();
        for rec in file.gates {
            if rec.id.is_empty() || rec.id.starts_with('!') {
                return Err(invalid(&rec.id, "gate ids must be non-empty and not start with `!`"));
            }
            if names.contains_key(&rec.id) {
                return Err(invalid(&rec.id, "id already used by an input or earlier gate"));
            }
            match (rec.op, rec.args.len()) {
                (GateOp::Not, 1) => {}
                (GateOp::Not, k) => return Err(invalid(&rec.id, format!("NOT takes 1 argument, got {k}"))),
                (op, k) if k < 2 => return Err(invalid(&rec.id, format!("{op} takes at least 2 arguments, got {k}"))),
                _ => {}
            }
            let mut args = Vec::with_capacity(rec.args.len());
            for arg in &rec.args {
                if let Some(base) = arg.strip_prefix('!') {
                    let Some(&Signal::Input(i)) = names.get(base) else {
                        return Err(invalid(
                            &rec.id,
                            format!("`{arg}`: negation sugar applies to declared inputs only"),
                        ));
                    };
                    let sig = match names.get(arg.as_str()) {
                        Some(&s) => s,
                        None => {
                            gates.push(Gate { id: arg.clone(), op: GateOp::Not, args: vec![Signal::Input(i)] });
                            let s = Signal::Gate(gates.len() - 1);
                            names.insert(arg.clone(), s);
                            s
                        }
                    };
                    args.push(sig);
                } else {
                    match names.get(arg.as_str()) {
                        Some(&s) => args.push(s),
                        None => {
                            return Err(invalid(
                                &rec.id,
                                format!("argument `{arg}` is not a declared input or an earlier gate"),
                            ))
                        }
                    }
                }
            }
            gates.push(Gate { id: rec.id.clone(), op: rec.op, args });
            names.insert(rec.id, Signal::Gate(gates.len() - 1));
        }
        let output = match names.get(&file.output) {
            Some(&Signal::Gate(g)) => g,
            Some(&Signal::Input(_)) => return Err(invalid(&file.output, "output must be a gate, not an input")),
            None => return Err(invalid(&file.output, "output references an unknown gate")),
        };
        Ok(Self { inputs: file.inputs, gates, output })
    }

    /// Serializes back to the file format; sugar-generated `NOT` gates are folded
    /// back into `!name` arguments.
    pub fn to_json(&self) -> String {
        let name = |s: &Signal| match *s {
            Signal::Input(i) => self.inputs[i].clone(),
            Signal::Gate(g) => self.gates[g].id.clone(),
        };
        let file = CircuitFile {
            inputs: self.inputs.clone(),
            gates: self
                .gates
                .iter()
                .filter(|g| !g.id.starts_with('!'))
                .map(|g| GateRecord { id: g.id.clone(), op: g.op, args: g.args.iter().map(name).collect() })
                .collect(),
            output: self.gates[self.output].id.clone(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output_index(&self) -> usize {
        self.output
    }

    pub fn output_id(&self) -> &str {
        &self.gates[self.output].id
    }

    /// Values of every gate, in order, for inputs given in declaration order.
    pub fn eval_gates(&self, assignment: &[bool]) -> Vec<bool> {
        assert_eq!(assignment.len(), self.inputs.len(), "assignment length");
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            let mut args = gate.args.iter().map(|s| match *s {
                Signal::Input(i) => assignment[i],
                Signal::Gate(g) => values[g],
            });
            let v = match gate.op {
                GateOp::Not => !args.next().unwrap(),
                GateOp::And => args.all(|b| b),
                GateOp::Or => args.any(|b| b),
                GateOp::Xor => args.fold(false, |acc, b| acc ^ b),
            };
            values.push(v);
        }
        values
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.eval_gates(assignment)[self.output]
    }

    pub fn eval_named(&self, assignment: &HashMap<String, bool>) -> Result<bool, CircuitError> {
        let bits = self
            .inputs
            .iter()
            .map(|name| assignment.get(name).copied().ok_or_else(|| CircuitError::MissingInput(name.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.eval(&bits))
    }

    /// Truth table of the output, input `i` (declaration order) on bit `i`.
    pub fn compile_to_table(&self) -> Result<TruthTable, CircuitError> {
        let k = self.inputs.len();
        if k > MAX_VARS {
            return Err(CircuitError::TooManyInputs(k));
        }
        let mut bits = vec![false; k];
        Ok(TruthTable::from_fn(k, |x| {
            for (i, b) in bits.iter_mut().enumerate() {
                *b = x >> i & 1 == 1;
            }
            self.eval(&bits)
        })
        .expect("1 <= k <= MAX_VARS"))
    }

    pub fn stats(&self, thresholds: &ClassThresholds) -> CircuitStats {
        let mut depth = vec![0usize; self.gates.len()];
        let mut bdepth = vec![0usize; self.gates.len()];
        let level = |s: &Signal, d: &[usize]| match *s {
            Signal::Input(_) => 0,
            Signal::Gate(g) => d[g],
        };
        for (g, gate) in self.gates.iter().enumerate() {
            depth[g] = 1 + gate.args.iter().map(|s| level(s, &depth)).max().unwrap_or(0);
            let tree = (gate.args.len().max(2) as f64).log2().ceil() as usize;
            bdepth[g] = tree + gate.args.iter().map(|s| level(s, &bdepth)).max().unwrap_or(0);
        }
        let size = self.gates.len();
        let has_xor = self.gates.iter().any(|g| g.op == GateOp::Xor);
        let d = depth[self.output];
        let bd = bdepth[self.output];
        let nc1_bound = (thresholds.nc1_log_factor * ((size + self.inputs.len()) as f64).log2()).ceil();
        let class_label = if !has_xor && d <= thresholds.ac0_max_depth {
            ClassLabel::Ac0Like
        } else if bd as f64 <= nc1_bound {
            ClassLabel::Nc1Like
        } else {
            ClassLabel::Other
        };
        CircuitStats {
            size,
            depth: d,
            binary_depth: bd,
            max_fanin: self.gates.iter().map(|g| g.args.len()).max().unwrap_or(0),
            has_xor,
            class_label,
        }
    }

    /// Column of each circuit input within `attrs`.
    pub fn bind(&self, attrs: &AttrTable) -> Result<Vec<usize>, CircuitError> {
        self.inputs
            .iter()
            .map(|name| attrs.column(name).ok_or_else(|| CircuitError::MissingInput(name.clone())))
            .collect()
    }

    /// Per-node input rows in circuit declaration order.
    pub fn project(&self, attrs: &AttrTable) -> Result<Vec<Vec<bool>>, CircuitError> {
        let cols = self.bind(attrs)?;
        Ok(attrs.rows().iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect())
    }

    /// `S_g = { v : g(x_v) = 1 }` for every gate, in topological order. Rows are in
    /// circuit input order.
    pub fn gate_subpopulations_rows(&self, rows: &[Vec<bool>]) -> Result<Vec<GateSubpopulation>, CircuitError> {
        let mut members = vec![Vec::new(); self.gates.len()];
        for (v, row) in rows.iter().enumerate() {
            if row.len() != self.inputs.len() {
                return Err(CircuitError::RowShape { row: v, expected: self.inputs.len(), found: row.len() });
            }
            for (g, val) in self.eval_gates(row).into_iter().enumerate() {
                if val {
                    members[g].push(v);
                }
            }
        }
        Ok(self
            .gates
            .iter()
            .zip(members)
            .map(|(g, members)| GateSubpopulation { gate: g.id.clone(), members })
            .collect())
    }

    pub fn gate_subpopulations(&self, attrs: &AttrTable) -> Result<Vec<GateSubpopulation>, CircuitError> {
        self.gate_subpopulations_rows(&self.project(attrs)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{fourier_degree, fwht};

    fn pokec() -> Circuit {
        Circuit::parse(POKEC_CIRCUIT).unwrap()
    }

    fn and_ab() -> Circuit {
        Circuit::parse(r#"{"inputs":["a","b"],"gates":[{"id":"g","op":"AND","args":["a","b"]}],"output":"g"}"#).unwrap()
    }

    #[test]
    fn pokec_structure() {
        let c = pokec();
        assert_eq!(c.inputs(), &["gender", "region", "age"]);
        // Five binary gates plus one NOT per negated input.
        assert_eq!(c.gates().len(), 8);
        assert_eq!(c.gates().iter().filter(|g| g.op != GateOp::Not).count(), 5);
        let s = c.stats(&ClassThresholds::default());
        assert!(s.has_xor);
        assert_eq!(s.depth, 4);
        assert_eq!(s.class_label, ClassLabel::Nc1Like);
    }

    #[test]
    fn pokec_hand_evaluation() {
        let c = pokec();
        assert!(c.eval(&[false, false, false]));
        assert!(c.eval(&[true, true, true]));
        let f = |g: bool, r: bool, a: bool| ((!g && !r) || (g && !a)) ^ (r && a);
        for x in 0..8usize {
            let (g, r, a) = (x & 1 == 1, x & 2 == 2, x & 4 == 4);
            assert_eq!(c.eval(&[g, r, a]), f(g, r, a), "x = {x:03b}");
        }
        let table = c.compile_to_table().unwrap();
        assert_eq!(table.len(), 8);
        assert!(fourier_degree(&fwht(&table)) >= 2);
    }

    #[test]
    fn single_and() {
        let c = and_ab();
        let s = c.stats(&ClassThresholds::default());
        assert_eq!((s.size, s.depth), (1, 1));
        assert!(c.eval(&[true, true]));
        let named: HashMap<String, bool> = [("a".to_string(), true), ("b".to_string(), true)].into();
        assert_eq!(c.eval_named(&named), Ok(true));
        let partial: HashMap<String, bool> = [("a".to_string(), true)].into();
        assert_eq!(c.eval_named(&partial), Err(CircuitError::MissingInput("b".into())));
    }

    #[test]
    fn validation_errors() {
        let undeclared = r#"{"inputs":["a"],"gates":[{"id":"g","op":"AND","args":["a","zz"]}],"output":"g"}"#;
        assert!(matches!(Circuit::parse(undeclared), Err(CircuitError::Invalid { ref gate, .. }) if gate == "g"));
        let forward = r#"{"inputs":["a"],"gates":[{"id":"g","op":"AND","args":["a","h"]},{"id":"h","op":"NOT","args":["a"]}],"output":"h"}"#;
        assert!(matches!(Circuit::parse(forward), Err(CircuitError::Invalid { ref gate, .. }) if gate == "g"));
        let arity = r#"{"inputs":["a","b"],"gates":[{"id":"g","op":"NOT","args":["a","b"]}],"output":"g"}"#;
        assert!(matches!(Circuit::parse(arity), Err(CircuitError::Invalid { .. })));
        let unary_and = r#"{"inputs":["a"],"gates":[{"id":"g","op":"AND","args":["a"]}],"output":"g"}"#;
        assert!(Circuit::parse(unary_and).is_err());
        let bad_out = r#"{"inputs":["a"],"gates":[{"id":"g","op":"NOT","args":["a"]}],"output":"a"}"#;
        assert!(Circuit::parse(bad_out).is_err());
        let syntax = "{\"inputs\": [\"a\"],\n \"gates\": oops }";
        assert!(matches!(Circuit::parse(syntax), Err(CircuitError::Parse { line: 2, .. })));
        let bad_op = r#"{"inputs":["a","b"],"gates":[{"id":"g","op":"NAND","args":["a","b"]}],"output":"g"}"#;
        assert!(matches!(Circuit::parse(bad_op), Err(CircuitError::Parse { .. })));
    }

    #[test]
    fn xor_compiles_to_parity() {
        let c = Circuit::parse(r#"{"inputs":["a","b"],"gates":[{"id":"x","op":"XOR","args":["a","b"]}],"output":"x"}"#)
            .unwrap();
        let t = c.compile_to_table().unwrap();
        assert_eq!(t, TruthTable::parity(2, 0b11).unwrap());
        assert_eq!(fourier_degree(&fwht(&t)), 2);
    }

    #[test]
    fn not_compiles_to_complemented_dictator() {
        let c =
            Circuit::parse(r#"{"inputs":["a"],"gates":[{"id":"n","op":"NOT","args":["a"]}],"output":"n"}"#).unwrap();
        assert_eq!(c.compile_to_table().unwrap(), TruthTable::dictator(1, 1).unwrap().complement());
    }

    #[test]
    fn class_labels() {
        let dnf = r#"{"inputs":["a","b","c","d","e"],"gates":[
            {"id":"t1","op":"AND","args":["a","b","c"]},
            {"id":"t2","op":"AND","args":["d","e"]},
            {"id":"o","op":"OR","args":["t1","t2"]}],"output":"o"}"#;
        let s = Circuit::parse(dnf).unwrap().stats(&ClassThresholds::default());
        assert_eq!((s.depth, s.max_fanin, s.has_xor), (2, 3, false));
        assert_eq!(s.class_label, ClassLabel::Ac0Like);

        let mut gates = vec![r#"{"id":"n1","op":"NOT","args":["a"]}"#.to_string()];
        for i in 2..=10 {
            gates.push(format!(r#"{{"id":"n{i}","op":"NOT","args":["n{}"]}}"#, i - 1));
        }
        let chain = format!(r#"{{"inputs":["a"],"gates":[{}],"output":"n10"}}"#, gates.join(","));
        let s = Circuit::parse(&chain).unwrap().stats(&ClassThresholds::default());
        assert_eq!(s.depth, 10);
        assert_eq!(s.class_label, ClassLabel::Other);
    }

    #[test]
    fn subpopulations() {
        let rows = vec![vec![true, true], vec![true, false], vec![false, true], vec![false, false]];
        let subs = and_ab().gate_subpopulations_rows(&rows).unwrap();
        assert_eq!(subs, vec![GateSubpopulation { gate: "g".into(), members: vec![0] }]);

        let subs = pokec().gate_subpopulations_rows(&[vec![false; 3], vec![true; 3]]).unwrap();
        assert_eq!(subs.last().unwrap().members, vec![0, 1]);

        let neg =
            Circuit::parse(r#"{"inputs":["a","b"],"gates":[{"id":"g","op":"AND","args":["!a","!b"]}],"output":"g"}"#)
                .unwrap();
        let subs = neg.gate_subpopulations_rows(&vec![vec![false, false]; 5]).unwrap();
        assert!(subs.iter().all(|s| s.members.len() == 5));

        assert!(matches!(and_ab().gate_subpopulations_rows(&[vec![true]]), Err(CircuitError::RowShape { row: 0, .. })));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let c = pokec();
        let again = Circuit::parse(&c.to_json()).unwrap();
        assert_eq!(again, c);
    }
}
