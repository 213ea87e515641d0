use std::io::{Read, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sepgraph::classify::{
    classify_exchange_with_cap, classify_simplicity, ExchangeWitness, SimplicityCase,
};
use sepgraph::conditions::{condition_c, condition_k, condition_l};
use sepgraph::document::{load, to_dot, GraphDocument};
use sepgraph::model::{hs_is_trivial, DirectedGraph, SeparatedGraph};
use sepgraph::omega::{act, enumerate_balls, OmegaError, DEFAULT_BALL_CAP};
use sepgraph::paths::{format_word, m_cd, parse_word, MaxChoiceDistance};
use sepgraph::transforms::{
    apply_orientation, bipartite_replacement, construct_e1, degenerate, degenerate_amplified,
    find_orientation, TransformError,
};

#[derive(Parser)]
#[command(
    name = "sepgraph",
    version,
    about = "Check, transform and classify separated graphs"
)]
struct Cli {
    /// Output format; `structured` (alias `json`) prints JSON.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Ignore group labels and use one group per range vertex.
    #[arg(long, global = true)]
    trivial: bool,
    /// Cap on enumerated balls and on vertices added by one refinement step.
    /// Defaults to SEPGRAPH_MAX_ENUM, or 100000.
    #[arg(long, global = true)]
    max_enum: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "json")]
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a graph file.
    Validate { file: String },
    /// Run every check and both classifications.
    Report { file: String },
    /// Decide one condition.
    Check { condition: Cond, file: String },
    /// Simplicity or exchange verdict.
    Classify { kind: Kind, file: String },
    /// Graph transformations.
    Transform {
        #[command(subcommand)]
        op: TransformOp,
    },
    /// Finite balls of the configuration space.
    Omega {
        #[command(subcommand)]
        op: OmegaOp,
    },
    /// Graphviz export, edges coloured by group label.
    Dot { file: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Cond {
    C,
    L,
    K,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Simplicity,
    Exchange,
}

#[derive(Subcommand)]
enum TransformOp {
    /// Replace every vertex by a source and a range copy joined by a hook edge
    Bipartite { file: String },
    /// Multiresolution steps of a bipartite graph
    E1 {
        #[arg(long, default_value_t = 1)]
        iterate: usize,
        file: String,
    },
    /// Orient the edges and print the resulting directed graph
    Orient { file: String },
    /// Refine until Condition (C) holds, then orient
    Degenerate { file: String },
}

#[derive(Subcommand)]
enum OmegaOp {
    /// Every ball of the given radius
    Balls {
        #[arg(long)]
        radius: usize,
        file: String,
    },
    /// Translate every ball containing the word; the radius defaults to the
    /// word length plus one.
    Act {
        #[arg(long)]
        word: String,
        #[arg(long)]
        radius: Option<usize>,
        file: String,
    },
}

const OK: u8 = 0;
const FAILS: u8 = 1;
const INPUT: u8 = 2;
const CAP: u8 = 3;

struct Output {
    text: String,
    value: Value,
    code: u8,
}

impl Output {
    fn new(text: String, value: Value, code: u8) -> Self {
        Output { text, value, code }
    }
}

fn read_graph(file: &str, trivial: bool) -> Result<SeparatedGraph, String> {
    let text = if file == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        std::fs::read_to_string(file).map_err(|e| format!("{file}: {e}"))?
    };
    load(&text, trivial).map_err(|e| format!("{file}: {e}"))
}

fn graph_text(g: &SeparatedGraph) -> String {
    GraphDocument::from_graph(g).to_string()
}

fn graph_value(g: &SeparatedGraph) -> Value {
    serde_json::to_value(GraphDocument::from_graph(g)).unwrap()
}

fn directed_text(d: &DirectedGraph) -> String {
    let mut out = String::new();
    for v in &d.vertex_ids {
        out.push_str(&format!("vertex {v}\n"));
    }
    for e in 0..d.edge_count() {
        out.push_str(&format!(
            "edge {} : {} -> {}\n",
            d.edge_ids[e], d.vertex_ids[d.src[e]], d.vertex_ids[d.rng[e]]
        ));
    }
    out
}

fn transform_code(e: &TransformError) -> u8 {
    match e {
        TransformError::BlowupCapExceeded { .. } => CAP,
        TransformError::NotBipartite | TransformError::NameClash(_) => INPUT,
        _ => FAILS,
    }
}

fn mcd_text(m: &MaxChoiceDistance) -> String {
    match m {
        MaxChoiceDistance::NotApplicable => "not applicable (Condition (C) holds)".into(),
        MaxChoiceDistance::Finite(n, _) => n.to_string(),
        MaxChoiceDistance::Infinite(_) => "infinite".into(),
    }
}

fn check(g: &SeparatedGraph, c: Cond) -> Output {
    let v = match c {
        Cond::C => condition_c(g),
        Cond::L => condition_l(g),
        Cond::K => condition_k(g),
    };
    let text = v.describe(g);
    let code = if v.holds { OK } else { FAILS };
    Output::new(text.clone(), json!({ "summary": text, "verdict": v }), code)
}

fn simplicity(g: &SeparatedGraph) -> Output {
    let r = match classify_simplicity(g) {
        Ok(r) => r,
        Err(e) => return Output::new(e.to_string(), json!({ "error": e }), INPUT),
    };
    let mut lines = Vec::new();
    match &r.case {
        SimplicityCase::NotSimpleOrUnknown { reasons } => {
            lines.push("not simple".to_string());
            lines.extend(reasons.iter().map(|s| format!("  {s}")));
        }
        SimplicityCase::Case1 {
            directed,
            classical_simple,
            ..
        } => {
            lines.push("case 1: every cycle admits exactly one choice".into());
            lines.push(format!(
                "  oriented graph: {} vertices, {} edges",
                directed.vertex_count(),
                directed.edge_count()
            ));
            lines.push(format!(
                "  oriented graph classically simple: {classical_simple}"
            ));
        }
        SimplicityCase::Case2 {
            vertex,
            closed_path,
            ..
        } => {
            lines.push(format!(
                "case 2: {} admits no choices and one simple closed path {}",
                g.vertex_id(*vertex),
                closed_path.display(g)
            ));
        }
        SimplicityCase::Case3 {
            vertex,
            closed_paths,
            ..
        } => {
            lines.push(format!(
                "case 3: {} admits no choices and {} simple closed paths (free group of rank at least two)",
                g.vertex_id(*vertex),
                closed_paths.len()
            ));
        }
    }
    let f = r.flags;
    lines.push(format!(
        "simple: leavitt={} leavitt_tame={} full_cstar={} tame_cstar={} reduced_tame_cstar={}",
        f.leavitt, f.leavitt_tame, f.full_cstar, f.tame_cstar, f.reduced_tame_cstar
    ));
    lines.extend(r.notes.iter().map(|n| format!("note: {n}")));
    let code = if f.leavitt { OK } else { FAILS };
    Output::new(
        lines.join("\n"),
        json!({ "case": r.case_number(), "report": r }),
        code,
    )
}

fn exchange(g: &SeparatedGraph, cap: usize) -> Output {
    let r = classify_exchange_with_cap(g, cap);
    let mut lines = vec![r.condition_k.describe(g)];
    let mut code = OK;
    if r.holds {
        lines.push("exchange: true, real rank zero: true, essentially free: true".into());
        match (&r.degeneration, &r.degeneration_error) {
            (Some(d), _) => {
                lines.push(format!(
                    "degeneration: {} step(s) to a directed graph with {} vertices and {} edges{}",
                    d.steps,
                    d.directed.vertex_count(),
                    d.directed.edge_count(),
                    if d.amplified {
                        " (after bipartite replacement)"
                    } else {
                        ""
                    }
                ));
                lines.push(format!(
                    "classical Condition (K) on the degenerate graph: {}",
                    r.classical_k == Some(true)
                ));
            }
            (None, Some(e)) => lines.push(format!("degeneration unavailable: {e}")),
            _ => {}
        }
    } else if let Some(f) = &r.failure {
        code = FAILS;
        lines.push("exchange: false".into());
        let roman = ["i", "ii", "iii"][f.category as usize - 1];
        let vertices: Vec<String> = f
            .applicable
            .iter()
            .map(|(v, c)| {
                format!(
                    "{} ({})",
                    g.vertex_id(*v),
                    ["i", "ii", "iii"][*c as usize - 1]
                )
            })
            .collect();
        lines.push(format!(
            "category ({roman}); applicable: {}",
            vertices.join(", ")
        ));
        lines.push(match &f.witness {
            ExchangeWitness::NoChoice { vertex, cycle, rank_class, .. } => format!(
                "witness: {} admits no choices on cycle {}; rank class {}",
                g.vertex_id(*vertex),
                cycle.display(g),
                if *rank_class >= 2 { "at least 2".to_string() } else { rank_class.to_string() }
            ),
            ExchangeWitness::Quotient { vertex, hereditary, error } => match hereditary {
                Some(h) => format!(
                    "witness: quotient by {{{}}} puts {} on a cycle without choices",
                    g.vertex_names(h).join(", "),
                    g.vertex_id(*vertex)
                ),
                None => format!("witness unavailable: {}", error.clone().unwrap_or_default()),
            },
            ExchangeWitness::Isolated { vertex, config, certificate } => match (config, certificate) {
                (Some(p), Some(c)) if c.max_translate < c.center => format!(
                    "witness: periodic configuration at {} with period {}; s-count {} against at most {} for translates up to radius {}",
                    g.vertex_id(p.root),
                    format_word(g, &p.alpha),
                    c.center,
                    c.max_translate,
                    c.radius
                ),
                (Some(p), Some(c)) => format!(
                    "witness: periodic configuration at {} with period {}; every branch off the line of the period ends inside radius {}, so its orbit is finite",
                    g.vertex_id(p.root),
                    format_word(g, &p.alpha),
                    c.radius
                ),
                _ => format!("witness: {} admits at least two choices on a cycle", g.vertex_id(*vertex)),
            },
        });
    }
    lines.extend(r.notes.iter().map(|n| format!("note: {n}")));
    Output::new(lines.join("\n"), json!({ "report": r }), code)
}

fn report(g: &SeparatedGraph, cap: usize) -> Output {
    let mut text = Vec::new();
    let mut value = serde_json::Map::new();
    for (name, c) in [("c", Cond::C), ("l", Cond::L), ("k", Cond::K)] {
        let o = check(g, c);
        text.push(o.text);
        value.insert(name.into(), o.value);
    }
    match hs_is_trivial(g) {
        Ok(t) => {
            text.push(match &t.witness {
                None => "hereditary C-saturated sets: trivial".into(),
                Some(w) => format!(
                    "hereditary C-saturated sets: non-trivial, e.g. {{{}}}",
                    g.vertex_names(w).join(", ")
                ),
            });
            value.insert("hs".into(), json!(t));
        }
        Err(e) => text.push(format!("hereditary C-saturated sets: {e}")),
    }
    let m = m_cd(g);
    text.push(format!("maximal choice distance: {}", mcd_text(&m)));
    value.insert("m_cd".into(), json!(m));
    let s = simplicity(g);
    text.push(s.text);
    value.insert("simplicity".into(), s.value);
    let x = exchange(g, cap);
    text.push(x.text);
    value.insert("exchange".into(), x.value);
    Output::new(text.join("\n"), Value::Object(value), OK)
}

fn transform(op: &TransformOp, trivial: bool, cap: usize) -> Result<Output, Output> {
    let file = match op {
        TransformOp::Bipartite { file }
        | TransformOp::E1 { file, .. }
        | TransformOp::Orient { file } => file,
        TransformOp::Degenerate { file } => file,
    };
    let g = read_graph(file, trivial).map_err(input_error)?;
    let fail =
        |e: TransformError| Output::new(e.to_string(), json!({ "error": e }), transform_code(&e));
    Ok(match op {
        TransformOp::Bipartite { .. } => {
            let b = bipartite_replacement(&g);
            Output::new(
                graph_text(&b.graph),
                json!({ "graph": graph_value(&b.graph) }),
                OK,
            )
        }
        TransformOp::E1 { iterate, .. } => {
            let steps = construct_e1(&g, *iterate, cap).map_err(fail)?;
            let last = steps.last().map_or(&g, |s| &s.graph);
            let projection: Vec<(String, String)> = steps.last().map_or(Vec::new(), |_| {
                last.vertices()
                    .map(|v| (last.vertex_id(v).to_string(), steps_parent(&g, &steps, v)))
                    .collect()
            });
            Output::new(
                graph_text(last),
                json!({ "graph": graph_value(last), "projection": projection }),
                OK,
            )
        }
        TransformOp::Orient { .. } => match find_orientation(&g) {
            Ok(o) => {
                let d = apply_orientation(&g, &o).map_err(fail)?;
                let signs: Vec<String> = g
                    .edges()
                    .map(|e| format!("{} {:+} (type {})", g.edge_id(e), o.signs[e], o.types[e]))
                    .collect();
                let text = format!("{}\n{}", signs.join("\n"), directed_text(&d));
                Output::new(text, json!({ "orientation": o, "directed": d }), OK)
            }
            Err(ob) => Output::new(ob.describe(&g), json!({ "obstruction": ob }), FAILS),
        },
        TransformOp::Degenerate { .. } => {
            let direct = g.is_bipartite() || sepgraph::paths::choice_report(&g).condition_c();
            let r = if direct {
                degenerate(&g, cap)
            } else {
                degenerate_amplified(&g, cap)
            }
            .map_err(fail)?;
            let text = format!(
                "{} step(s){}\n{}",
                r.steps,
                if r.amplified {
                    ", after bipartite replacement"
                } else {
                    ""
                },
                directed_text(&r.directed)
            );
            Output::new(text, json!({ "degeneration": r }), OK)
        }
    })
}

/// Id of the vertex of the input graph that a vertex of the last step
/// refines.
fn steps_parent(
    g: &SeparatedGraph,
    steps: &[sepgraph::transforms::MultiresolutionStep],
    mut v: usize,
) -> String {
    for s in steps.iter().rev() {
        v = s.projection[v];
    }
    g.vertex_id(v).to_string()
}

fn omega(op: &OmegaOp, trivial: bool, cap: usize) -> Result<Output, Output> {
    let cap_error = |e: OmegaError| {
        let code = if matches!(e, OmegaError::CapExceeded { .. }) {
            CAP
        } else {
            FAILS
        };
        Output::new(e.to_string(), json!({ "error": e }), code)
    };
    match op {
        OmegaOp::Balls { radius, file } => {
            let g = read_graph(file, trivial).map_err(input_error)?;
            let balls = enumerate_balls(&g, *radius, cap).map_err(cap_error)?;
            let mut text = format!("{} ball(s) of radius {radius}", balls.len());
            for b in &balls {
                text.push_str(&format!("\n{}: {}", g.vertex_id(b.root), b.display(&g)));
            }
            let listed: Vec<Value> = balls
                .iter()
                .map(|b| {
                    let words: Vec<String> =
                        b.elements.iter().map(|w| format_word(&g, w)).collect();
                    json!({ "root": g.vertex_id(b.root), "radius": b.radius, "elements": words })
                })
                .collect();
            Ok(Output::new(
                text,
                json!({ "count": balls.len(), "balls": listed }),
                OK,
            ))
        }
        OmegaOp::Act { word, radius, file } => {
            let g = read_graph(file, trivial).map_err(input_error)?;
            let w = parse_word(&g, word).map_err(|e| input_error(e.to_string()))?;
            let radius = radius.unwrap_or(w.len() + 1);
            let balls = enumerate_balls(&g, radius, cap).map_err(cap_error)?;
            let mut lines = Vec::new();
            let mut pairs = Vec::new();
            for b in balls.iter().filter(|b| b.contains(&w)) {
                let t = act(&g, &w, b).map_err(cap_error)?;
                lines.push(format!("{} -> {}", b.display(&g), t.display(&g)));
                pairs.push(json!({
                    "ball": b.elements.iter().map(|x| format_word(&g, x)).collect::<Vec<_>>(),
                    "root": g.vertex_id(b.root),
                    "image": t.elements.iter().map(|x| format_word(&g, x)).collect::<Vec<_>>(),
                    "image_root": g.vertex_id(t.root),
                }));
            }
            let code = if pairs.is_empty() { FAILS } else { OK };
            if pairs.is_empty() {
                lines.push(format!(
                    "no ball of radius {radius} contains {}",
                    format_word(&g, &w)
                ));
            }
            Ok(Output::new(
                lines.join("\n"),
                json!({ "radius": radius, "results": pairs }),
                code,
            ))
        }
    }
}

fn input_error(message: String) -> Output {
    Output::new(message.clone(), json!({ "error": message }), INPUT)
}

fn run(cli: &Cli) -> Output {
    let cap = cli
        .max_enum
        .or_else(|| {
            std::env::var("SEPGRAPH_MAX_ENUM")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(DEFAULT_BALL_CAP);
    let graph = |file: &str| read_graph(file, cli.trivial);
    let result = match &cli.command {
        Command::Validate { file } => graph(file).map(|g| {
            let text = format!(
                "valid: {} vertices, {} edges, {} groups",
                g.vertex_count(),
                g.edge_count(),
                g.groups().len()
            );
            Output::new(text, json!({ "valid": true, "graph": graph_value(&g) }), OK)
        }),
        Command::Report { file } => graph(file).map(|g| report(&g, cap)),
        Command::Check { condition, file } => graph(file).map(|g| check(&g, *condition)),
        Command::Classify { kind, file } => graph(file).map(|g| match kind {
            Kind::Simplicity => simplicity(&g),
            Kind::Exchange => exchange(&g, cap),
        }),
        Command::Transform { op } => return transform(op, cli.trivial, cap).unwrap_or_else(|e| e),
        Command::Omega { op } => return omega(op, cli.trivial, cap).unwrap_or_else(|e| e),
        Command::Dot { file } => {
            graph(file).map(|g| Output::new(to_dot(&g), json!({ "dot": to_dot(&g) }), OK))
        }
    };
    result.unwrap_or_else(input_error)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(&cli);
    let body = match cli.format {
        Format::Text => out.text,
        Format::Structured => serde_json::to_string_pretty(&out.value).unwrap(),
    };
    if out.code == INPUT && cli.format == Format::Text {
        eprintln!("error: {body}");
    } else {
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        let _ = writeln!(std::io::stdout(), "{}", body.trim_end());
    }
    ExitCode::from(out.code)
}
