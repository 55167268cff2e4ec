use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args};
use sbf::boolfn::{fwht, noise_stability, profile, TruthTable};
use sbf::circuit::{Circuit, ClassThresholds, POKEC_CIRCUIT};
use sbf::fairsbf::{audit, trace_to_csv, train, FairnessReport};
use sbf::gnn::{Aggregator, GnnModel, TrainConfig};
use sbf::graph::{load_graph_dir, synth_biased_graph, Graph, LoadOptions, SynthConfig};
use sbf::invariants::{
    compare_pair, report_to_csv, summarize, wl1_colors, HierarchyOptions, HomFamily, SubsetProperty, Verdict,
};
use sbf::subiso::{reduction_check, SearchBudget, SubIsoVerdict};
use serde_json::{json, Value};

use crate::output::{csv_field, emit, json_doc, read, write, Failure, Outcome};
use crate::{Cli, Command, Format, Global};

const STABILITY_RHOS: [f64; 4] = [0.25, 0.5, 0.75, 0.9];
const DEFAULT_SEED: u64 = 7;

pub const EXIT_NON_ISO: u8 = 1;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_DISAGREE: u8 = 4;

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze(a) => analyze(g, a),
        Command::Subiso(a) => subiso_cmd(g, a),
        Command::Reduce(a) => reduce(g, a),
        Command::Invariants(a) => invariants(g, a),
        Command::Wl(a) => wl(g, a),
        Command::Train(a) => train_cmd(g, a),
        Command::Audit(a) => audit_cmd(g, a),
        Command::Synth(a) => synth(g, a),
    }
}

fn base_config(g: &Global, command: &str) -> Value {
    json!({
        "command": command,
        "seed": g.seed,
        "format": g.format.name(),
    })
}

fn with(mut config: Value, extra: Value) -> Value {
    if let (Value::Object(m), Value::Object(e)) = (&mut config, extra) {
        m.extend(e);
    }
    config
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn load_dir(dir: &Path, opts: &LoadOptions) -> Result<Graph, Failure> {
    load_graph_dir(dir, opts).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))
}

fn load_table(path: &Path) -> Result<TruthTable, Failure> {
    read(path)?.parse().map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_circuit(path: Option<&Path>) -> Result<Circuit, Failure> {
    match path {
        Some(p) => Circuit::parse(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => Ok(Circuit::parse(POKEC_CIRCUIT).expect("bundled circuit parses")),
    }
}

fn csv_unsupported(what: &str) -> Failure {
    Failure::input(format!("--format csv is not available for {what}"))
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["table", "circuit"])))]
pub struct AnalyzeArgs {
    /// Truth table file (`n=<k>` header, then the bits).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Circuit file (JSON).
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Maximum depth for the AC0-like label.
    #[arg(long, default_value_t = ClassThresholds::default().ac0_max_depth)]
    ac0_depth: usize,
    /// Log factor for the NC1-like label.
    #[arg(long, default_value_t = ClassThresholds::default().nc1_log_factor)]
    nc1_factor: f64,
}

fn analyze(g: &Global, a: &AnalyzeArgs) -> Outcome {
    let thresholds = ClassThresholds { ac0_max_depth: a.ac0_depth, nc1_log_factor: a.nc1_factor };
    let (table, circuit) = match (&a.table, &a.circuit) {
        (Some(p), _) => (load_table(p)?, None),
        (None, Some(p)) => {
            let c = load_circuit(Some(p))?;
            let t = c.compile_to_table().map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            (t, Some(c))
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    let spectrum = fwht(&table);
    let prof = profile(&spectrum);
    let stability: Vec<(f64, f64)> =
        STABILITY_RHOS.iter().map(|&r| (r, noise_stability(&spectrum, r).expect("rho in range"))).collect();
    let config = with(
        base_config(g, "analyze"),
        json!({
            "table": a.table.as_deref().map(path_str),
            "circuit": a.circuit.as_deref().map(path_str),
            "ac0_depth": a.ac0_depth,
            "nc1_factor": a.nc1_factor,
        }),
    );
    let text = match g.format {
        Format::Json => {
            let mut body = json!({
                "n": table.vars(),
                "degree": prof.degree,
                "influences": prof.influences,
                "total_influence": prof.total_influence,
                "weight_by_level": prof.weight_by_level,
                "support_size": prof.support_size,
                "noise_stability": stability.iter().map(|(r, s)| json!({"rho": r, "value": s})).collect::<Vec<_>>(),
            });
            if let Some(c) = &circuit {
                let stats = c.stats(&thresholds);
                body["circuit"] = json!({
                    "parity_like": prof.degree > 2 || stats.has_xor,
                    "inputs": c.inputs(),
                    "gates": c.gates().iter().map(|g| g.id.clone()).collect::<Vec<_>>(),
                    "stats": stats,
                });
            }
            json_doc(&config, body)
        }
        Format::Csv => {
            let mut out = String::from("quantity,index,value\n");
            out.push_str(&format!("degree,,{}\n", prof.degree));
            for (i, inf) in prof.influences.iter().enumerate() {
                out.push_str(&format!("influence,{},{inf}\n", i + 1));
            }
            out.push_str(&format!("total_influence,,{}\n", prof.total_influence));
            for (k, w) in prof.weight_by_level.iter().enumerate() {
                out.push_str(&format!("weight,{k},{w}\n"));
            }
            for (r, s) in &stability {
                out.push_str(&format!("noise_stability,{r},{s}\n"));
            }
            for s in spectrum.support() {
                out.push_str(&format!("coeff,{s},{}\n", spectrum.scaled(s)));
            }
            if let Some(c) = &circuit {
                let st = c.stats(&thresholds);
                out.push_str(&format!("has_xor,,{}\n", st.has_xor));
                out.push_str(&format!("class_label,,{}\n", st.class_label));
            }
            out
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Debug, Args)]
pub struct SubisoArgs {
    /// Truth table `f`.
    f: PathBuf,
    /// Truth table `g`; the witness `π` satisfies `f = π·g`.
    g: PathBuf,
    /// Maximum number of search nodes.
    #[arg(long, default_value_t = SearchBudget::default().max_nodes)]
    budget: u64,
}

fn verdict_code(v: &SubIsoVerdict) -> u8 {
    match v {
        SubIsoVerdict::Iso(_) => 0,
        SubIsoVerdict::NonIso => EXIT_NON_ISO,
        SubIsoVerdict::Budget => EXIT_BUDGET,
    }
}

fn subiso_cmd(g: &Global, a: &SubisoArgs) -> Outcome {
    let (f, h) = (load_table(&a.f)?, load_table(&a.g)?);
    let verdict = SubIsoVerdict::decide(&f, &h, SearchBudget { max_nodes: a.budget }).map_err(Failure::input)?;
    let config = with(base_config(g, "subiso"), json!({"f": path_str(&a.f), "g": path_str(&a.g), "budget": a.budget}));
    let text = match g.format {
        Format::Json => json_doc(&config, &verdict),
        Format::Csv => {
            let witness = match &verdict {
                SubIsoVerdict::Iso(p) => p.one_based().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                _ => String::new(),
            };
            format!("verdict,witness\n{},{witness}\n", verdict.label())
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(verdict_code(&verdict))
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Directory with `nodes.csv` and `edges.csv`.
    graph1: PathBuf,
    graph2: PathBuf,
    #[arg(long, default_value_t = SearchBudget::default().max_nodes)]
    budget: u64,
}

fn reduce(g: &Global, a: &ReduceArgs) -> Outcome {
    let opts = LoadOptions::default();
    let (g1, g2) = (load_dir(&a.graph1, &opts)?, load_dir(&a.graph2, &opts)?);
    let r = reduction_check(&g1, &g2, SearchBudget { max_nodes: a.budget }).map_err(Failure::input)?;
    let config = with(
        base_config(g, "reduce"),
        json!({"graph1": path_str(&a.graph1), "graph2": path_str(&a.graph2), "budget": a.budget}),
    );
    let text = match g.format {
        Format::Json => json_doc(
            &config,
            json!({
                "gi": if r.gi_isomorphic { "iso" } else { "non-iso" },
                "subiso": r.subiso,
                "agree": r.agree,
            }),
        ),
        Format::Csv => format!(
            "gi,subiso,agree\n{},{},{}\n",
            if r.gi_isomorphic { "iso" } else { "non-iso" },
            r.subiso.label(),
            r.agree
        ),
    };
    if r.subiso == SubIsoVerdict::Budget {
        emit(g.out.as_deref(), &text)?;
        return Ok(EXIT_BUDGET);
    }
    if !r.agree {
        return Err(Failure {
            code: EXIT_DISAGREE,
            msg: format!(
                "canonical forms say {} but the encoded search says {}",
                if r.gi_isomorphic { "iso" } else { "non-iso" },
                r.subiso.label()
            ),
        });
    }
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Debug, Args)]
pub struct InvariantsArgs {
    graph: PathBuf,
    /// Second graph; switches to the pairwise hierarchy table.
    other: Option<PathBuf>,
    /// Comma-separated homomorphism patterns, e.g. `K1,K2,P3`.
    #[arg(long, default_value = "K1,K2,P3,K3,S3,P4,C4")]
    hom_family: String,
    /// Subset property for the SBI table: adjacency, clique or connected.
    #[arg(long, default_value = "adjacency")]
    property: String,
    /// Pair identifier used in the hierarchy table.
    #[arg(long)]
    pair_id: Option<String>,
    #[arg(long, default_value_t = SearchBudget::default().max_nodes)]
    budget: u64,
}

fn invariants(g: &Global, a: &InvariantsArgs) -> Outcome {
    let family: HomFamily = a.hom_family.parse().map_err(Failure::input)?;
    let property: SubsetProperty = a.property.parse().map_err(Failure::input)?;
    let opts = LoadOptions::default();
    let first = load_dir(&a.graph, &opts)?;
    let mut config = with(
        base_config(g, "invariants"),
        json!({
            "graph": path_str(&a.graph),
            "other": a.other.as_deref().map(path_str),
            "hom_family": a.hom_family,
            "property": property.to_string(),
        }),
    );
    let text = match &a.other {
        None => {
            let s = summarize(&first, &family, property);
            match g.format {
                Format::Json => json_doc(&config, &s),
                Format::Csv => {
                    let Value::Object(fields) = serde_json::to_value(&s).expect("summary serializes") else {
                        unreachable!()
                    };
                    let mut out = String::from("invariant,value\n");
                    for (k, v) in fields {
                        out.push_str(&format!("{k},{}\n", csv_field(&v.to_string())));
                    }
                    out
                }
            }
        }
        Some(path) => {
            let second = load_dir(path, &opts)?;
            let pair_id = a.pair_id.clone().unwrap_or_else(|| {
                let stem = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                format!("{}_vs_{}", stem(&a.graph), stem(path))
            });
            config["pair_id"] = json!(pair_id);
            config["budget"] = json!(a.budget);
            let hopts = HierarchyOptions {
                hom_family: family,
                sbi_property: property,
                budget: SearchBudget { max_nodes: a.budget },
            };
            let r = compare_pair(&pair_id, &first, &second, &hopts);
            match g.format {
                Format::Json => {
                    let rows: BTreeMap<&str, Value> = r
                        .verdicts
                        .iter()
                        .map(|(k, v)| {
                            let cell = match v {
                                Verdict::Skipped(why) => json!({"verdict": v.label(), "reason": why}),
                                _ => json!(v.label()),
                            };
                            (k.name(), cell)
                        })
                        .collect();
                    json_doc(&config, json!({"pair_id": pair_id, "verdicts": rows}))
                }
                Format::Csv => report_to_csv(&[r]),
            }
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Debug, Args)]
pub struct WlArgs {
    graph: PathBuf,
}

fn wl(g: &Global, a: &WlArgs) -> Outcome {
    let graph = load_dir(&a.graph, &LoadOptions::default())?;
    let (colors, hist) = wl1_colors(&graph);
    let config = with(base_config(g, "wl"), json!({"graph": path_str(&a.graph)}));
    let text = match g.format {
        Format::Json => json_doc(
            &config,
            json!({
                "nodes": graph.node_count(),
                "colors": graph.ids().iter().zip(&colors).map(|(id, c)| json!({"id": id, "color": c})).collect::<Vec<_>>(),
                "class_sizes": hist.class_sizes(),
                "rounds": hist.rounds.len(),
                "history": hist,
            }),
        ),
        Format::Csv => {
            let mut out = String::from("id,color\n");
            for (id, c) in graph.ids().iter().zip(&colors) {
                out.push_str(&format!("{},{c}\n", csv_field(id)));
            }
            out
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

fn parse_agg(s: &str) -> Result<Aggregator, String> {
    s.parse().map_err(|e: sbf::gnn::GnnError| e.to_string())
}

fn parse_threshold(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, found `{s}`"))?;
    let t = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((name.to_string(), t))
}

/// Where the graph comes from: a directory or the synthetic generator.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["graph", "synth"])))]
pub struct GraphSource {
    /// Directory with `nodes.csv` and `edges.csv`.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// `default` for the bundled biased fixture, or a JSON generator config file.
    #[arg(long)]
    synth: Option<String>,
    /// Binarization threshold for a multivalent sensitive attribute, `name=value`.
    #[arg(long = "threshold", value_parser = parse_threshold)]
    thresholds: Vec<(String, f64)>,
}

impl GraphSource {
    fn load(&self) -> Result<(Graph, Value), Failure> {
        if let Some(dir) = &self.graph {
            let opts = LoadOptions { thresholds: self.thresholds.iter().cloned().collect() };
            let thresholds: BTreeMap<_, _> = opts.thresholds.clone();
            return Ok((load_dir(dir, &opts)?, json!({"graph": path_str(dir), "thresholds": thresholds})));
        }
        let spec = self.synth.as_deref().expect("clap requires a graph source");
        let cfg = synth_config(spec)?;
        let g = synth_biased_graph(&cfg).map_err(Failure::input)?;
        Ok((g, json!({"synth": spec, "synth_config": cfg})))
    }
}

fn synth_config(spec: &str) -> Result<SynthConfig, Failure> {
    if spec == "default" {
        return Ok(SynthConfig::default());
    }
    let path = Path::new(spec);
    serde_json::from_str(&read(path)?).map_err(|e| Failure::input(format!("{spec}: {e}")))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Circuit file; defaults to the bundled gender/region/age circuit.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Fairness weight; 0 trains on the task loss alone.
    #[arg(long, default_value_t = TrainConfig::default().lambda)]
    lambda: f64,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = TrainConfig::default().lr)]
    lr: f64,
    #[arg(long, default_value_t = TrainConfig::default().hidden)]
    hidden: usize,
    #[arg(long, default_value_t = TrainConfig::default().layers)]
    layers: usize,
    /// sum, mean or max.
    #[arg(long, value_parser = parse_agg, default_value = "mean")]
    agg: Aggregator,
    /// Fraction of nodes left out of the task loss and audited separately.
    #[arg(long, default_value_t = TrainConfig::default().holdout)]
    holdout: f64,
}

fn out_dir(g: &Global, command: &str) -> Result<PathBuf, Failure> {
    let dir = g.out.clone().ok_or_else(|| Failure::input(format!("{command} needs --out DIR")))?;
    fs::create_dir_all(&dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn report_doc(config: &Value, report: &FairnessReport) -> String {
    json_doc(config, report)
}

fn train_cmd(g: &Global, a: &TrainArgs) -> Outcome {
    let cfg = TrainConfig {
        hidden: a.hidden,
        layers: a.layers,
        lr: a.lr,
        epochs: a.epochs,
        lambda: a.lambda,
        seed: g.seed.unwrap_or(DEFAULT_SEED),
        agg: a.agg,
        holdout: a.holdout,
    };
    cfg.validate().map_err(Failure::input)?;
    let circuit = load_circuit(a.circuit.as_deref())?;
    let (graph, source) = a.source.load()?;
    if g.format == Format::Csv {
        return Err(csv_unsupported("train (it always writes report.json and trace.csv)"));
    }
    let dir = out_dir(g, "train")?;
    let outcome = train(&graph, &circuit, &cfg).map_err(Failure::input)?;
    let config = with(
        with(base_config(g, "train"), source),
        json!({
            "circuit": a.circuit.as_deref().map(path_str),
            "train": cfg,
        }),
    );
    let mut predictions = String::from("id,yhat\n");
    for (id, y) in graph.ids().iter().zip(&outcome.predictions) {
        predictions.push_str(&format!("{},{y}\n", csv_field(id)));
    }
    let files = [
        ("model.txt", outcome.model.to_text()),
        ("report.json", report_doc(&config, &outcome.report)),
        ("trace.csv", trace_to_csv(&outcome.trace)),
        ("predictions.csv", predictions),
    ];
    for (name, text) in &files {
        write(&dir.join(name), text)?;
    }
    let listing: String = files.iter().map(|(name, _)| format!("{}\n", dir.join(name).display())).collect();
    emit(None, &listing)?;
    Ok(0)
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("scores").required(true).args(["model", "predictions"])))]
pub struct AuditArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Model file written by `train`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// CSV with columns `id,yhat`.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

fn read_predictions(path: &Path, graph: &Graph) -> Result<Vec<f64>, Failure> {
    let text = read(path)?;
    let bad = |line: usize, msg: String| Failure::input(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "id,yhat" => {}
        _ => return Err(bad(1, "expected header `id,yhat`".into())),
    }
    let index: HashMap<&str, usize> = graph.ids().iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut out = vec![None; graph.node_count()];
    for (i, line) in lines {
        let (id, y) = line.rsplit_once(',').ok_or_else(|| bad(i + 1, "expected two columns".into()))?;
        let id = id.trim().trim_matches('"');
        let &v = index.get(id).ok_or_else(|| bad(i + 1, format!("unknown node `{id}`")))?;
        let y: f64 = y.trim().parse().map_err(|_| bad(i + 1, format!("`{}` is not a number", y.trim())))?;
        if !(0.0..=1.0).contains(&y) {
            return Err(bad(i + 1, format!("prediction {y} outside [0, 1]")));
        }
        if out[v].replace(y).is_some() {
            return Err(bad(i + 1, format!("duplicate node `{id}`")));
        }
    }
    out.into_iter()
        .enumerate()
        .map(|(v, y)| {
            y.ok_or_else(|| Failure::input(format!("{}: no prediction for `{}`", path.display(), graph.ids()[v])))
        })
        .collect()
}

fn audit_cmd(g: &Global, a: &AuditArgs) -> Outcome {
    let circuit = load_circuit(a.circuit.as_deref())?;
    let (graph, source) = a.source.load()?;
    let yhat = match (&a.model, &a.predictions) {
        (Some(p), _) => {
            let model: GnnModel = read(p)?.parse().map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            model.forward(&graph).map_err(Failure::input)?.yhat
        }
        (None, Some(p)) => read_predictions(p, &graph)?,
        (None, None) => unreachable!("clap requires scores"),
    };
    let report = audit(&yhat, graph.labels(), &circuit, graph.sensitive()).map_err(Failure::input)?;
    let config = with(
        with(base_config(g, "audit"), source),
        json!({
            "circuit": a.circuit.as_deref().map(path_str),
            "model": a.model.as_deref().map(path_str),
            "predictions": a.predictions.as_deref().map(path_str),
        }),
    );
    let text = match g.format {
        Format::Json => report_doc(&config, &report),
        Format::Csv => report.per_gate_csv(),
    };
    emit(g.out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator config; defaults to the bundled biased fixture.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn synth(g: &Global, a: &SynthArgs) -> Outcome {
    let mut cfg = match &a.config {
        Some(p) => synth_config(&path_str(p))?,
        None => SynthConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    if g.format == Format::Csv {
        return Err(csv_unsupported("synth (it always writes nodes.csv and edges.csv)"));
    }
    let graph = synth_biased_graph(&cfg).map_err(Failure::input)?;
    let dir = out_dir(g, "synth")?;
    let (nodes, edges) = graph.to_csv();
    let config = base_config(g, "synth");
    let files = [("nodes.csv", nodes), ("edges.csv", edges), ("config.json", json_doc(&config, &cfg))];
    for (name, text) in &files {
        write(&dir.join(name), text)?;
    }
    let listing: String = files.iter().map(|(name, _)| format!("{}\n", dir.join(name).display())).collect();
    emit(None, &listing)?;
    Ok(0)
}
