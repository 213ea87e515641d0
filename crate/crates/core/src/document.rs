//! Text, JSON and DOT forms of separated graphs.
//!
//! The text format is line oriented:
//!
//! ```text
//! graph S5
//! vertex u1
//! vertex v
//! edge f1 : u1 -> v @ a
//! ```
//!
//! Tokens are separated by whitespace, `#` starts a comment, and the label
//! after `@` names the group of the edge at its range vertex.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{RawGraph, SeparatedGraph, ValidationError};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub name: String,
    pub vertices: Vec<String>,
    pub edges: Vec<DocEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocEdge {
    pub id: String,
    pub source: String,
    pub range: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("edge `{0}` has no group label (use the trivial separation for classical graphs)")]
    MissingLabel(String),
    #[error("malformed JSON document: {0}")]
    Json(String),
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (col, (i, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (true, Some((c, s))) => {
                out.push((c, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some((col + 1, i)),
            _ => {}
        }
    }
    if let Some((c, s)) = start {
        out.push((c, &line[s..]));
    }
    out
}

pub fn parse(text: &str) -> Result<GraphDocument, SyntaxError> {
    let mut doc = GraphDocument::default();
    let mut named = false;
    let mut vertex_set = BTreeSet::new();
    let mut edge_set = BTreeSet::new();
    for (n, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let err = |column: usize, message: String| SyntaxError {
            line: n + 1,
            column,
            message,
        };
        let Some(&(col, keyword)) = toks.first() else {
            continue;
        };
        let end = line.chars().count() + 1;
        let expect = |i: usize, what: &str| -> Result<&str, SyntaxError> {
            toks.get(i)
                .map(|t| t.1)
                .ok_or_else(|| err(end, format!("expected {what}")))
        };
        match keyword {
            "graph" => {
                if named {
                    return Err(err(col, "second `graph` line".into()));
                }
                doc.name = expect(1, "a graph name")?.to_string();
                named = true;
                if let Some(&(c, t)) = toks.get(2) {
                    return Err(err(c, format!("unexpected `{t}`")));
                }
            }
            "vertex" => {
                if toks.len() < 2 {
                    return Err(err(end, "expected a vertex id".into()));
                }
                for &(c, id) in &toks[1..] {
                    if !vertex_set.insert(id.to_string()) {
                        return Err(err(c, format!("duplicate vertex `{id}`")));
                    }
                    doc.vertices.push(id.to_string());
                }
            }
            "edge" => {
                let id = expect(1, "an edge id")?;
                for (i, sep) in [(2, ":"), (4, "->")] {
                    let t = expect(i, &format!("`{sep}`"))?;
                    if t != sep {
                        return Err(err(toks[i].0, format!("expected `{sep}`, found `{t}`")));
                    }
                }
                let source = expect(3, "a source vertex")?;
                let range = expect(5, "a range vertex")?;
                for (i, v) in [(3, source), (5, range)] {
                    if !vertex_set.contains(v) {
                        return Err(err(toks[i].0, format!("undeclared vertex `{v}`")));
                    }
                }
                let label = match toks.get(6) {
                    None => None,
                    Some(&(_, "@")) => {
                        let l = toks
                            .get(7)
                            .ok_or_else(|| err(end, "expected a group label".into()))?
                            .1;
                        if let Some(&(c2, t)) = toks.get(8) {
                            return Err(err(c2, format!("unexpected `{t}`")));
                        }
                        Some(l.to_string())
                    }
                    Some(&(c, t)) => return Err(err(c, format!("expected `@`, found `{t}`"))),
                };
                if !edge_set.insert(id.to_string()) {
                    return Err(err(toks[1].0, format!("duplicate edge `{id}`")));
                }
                doc.edges.push(DocEdge {
                    id: id.into(),
                    source: source.into(),
                    range: range.into(),
                    label,
                });
            }
            other => return Err(err(col, format!("unknown keyword `{other}`"))),
        }
    }
    Ok(doc)
}

impl GraphDocument {
    /// Builds the graph; with `trivial`, labels are ignored and every range
    /// vertex gets a single group.
    pub fn to_graph(&self, trivial: bool) -> Result<SeparatedGraph, DocumentError> {
        let mut raw = RawGraph::new(self.name.clone());
        raw.vertices = self.vertices.clone();
        for e in &self.edges {
            if trivial {
                raw = raw.edge(&e.id, &e.source, &e.range);
            } else {
                let label = e
                    .label
                    .as_deref()
                    .ok_or_else(|| DocumentError::MissingLabel(e.id.clone()))?;
                raw = raw.labelled_edge(&e.id, &e.source, &e.range, label);
            }
        }
        if trivial {
            raw = raw.trivially_separated();
        }
        Ok(raw.validate()?)
    }

    pub fn from_graph(g: &SeparatedGraph) -> GraphDocument {
        GraphDocument {
            name: g.name().to_string(),
            vertices: g.vertices().map(|v| g.vertex_id(v).to_string()).collect(),
            edges: g
                .edges()
                .map(|e| DocEdge {
                    id: g.edge_id(e).to_string(),
                    source: g.vertex_id(g.source(e)).to_string(),
                    range: g.vertex_id(g.range(e)).to_string(),
                    label: Some(g.group(g.group_of(e)).label.clone()),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_json(text: &str) -> Result<GraphDocument, DocumentError> {
        serde_json::from_str(text).map_err(|e| DocumentError::Json(e.to_string()))
    }
}

impl fmt::Display for GraphDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.name.is_empty() {
            writeln!(f, "graph {}", self.name)?;
        }
        for v in &self.vertices {
            writeln!(f, "vertex {v}")?;
        }
        for e in &self.edges {
            write!(f, "edge {} : {} -> {}", e.id, e.source, e.range)?;
            match &e.label {
                Some(l) => writeln!(f, " @ {l}")?,
                None => writeln!(f)?,
            }
        }
        Ok(())
    }
}

/// Parses either format: JSON when the text starts with `{`.
pub fn load(text: &str, trivial: bool) -> Result<SeparatedGraph, DocumentError> {
    let doc = if text.trim_start().starts_with('{') {
        GraphDocument::from_json(text)?
    } else {
        parse(text)?
    };
    doc.to_graph(trivial)
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22",
];

/// Palette colour for a group label; depends only on the label text.
pub fn label_color(label: &str) -> &'static str {
    // FNV-1a keeps the colour stable across runs and toolchains.
    let mut h: u32 = 0x811c_9dc5;
    for b in label.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    PALETTE[h as usize % PALETTE.len()]
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(g: &SeparatedGraph) -> String {
    let mut out = format!("digraph {} {{\n", quote(g.name()));
    for v in g.vertices() {
        out.push_str(&format!("  {};\n", quote(g.vertex_id(v))));
    }
    for e in g.edges() {
        let label = &g.group(g.group_of(e)).label;
        out.push_str(&format!(
            "  {} -> {} [id={}, label={}, group={}, color={}];\n",
            quote(g.vertex_id(g.source(e))),
            quote(g.vertex_id(g.range(e))),
            quote(g.edge_id(e)),
            quote(g.edge_id(e)),
            quote(label),
            quote(label_color(label)),
        ));
    }
    out.push_str("}\n");
    out
}
