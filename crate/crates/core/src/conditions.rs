//! Conditions (C), (L) and (K), and their classical counterparts on plain
//! directed graphs.

use serde::Serialize;

use crate::model::{all_hs_sets, DirectedGraph, SeparatedGraph, VertexSet};
use crate::paths::{
    base_simple_census, choice_report, is_base_simple, is_simple_cycle, on_cycle, simple_cycles,
    BaseSimple, ChoiceItem, ChoiceReport, Path,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    C,
    L,
    K,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum KClause {
    NoChoice,
    SeveralChoices(usize),
    FewBaseSimpleCycles(BaseSimple),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Failure {
    /// Two distinct choices at `vertex`; `offenders` lists every vertex
    /// with at least two.
    TooManyChoices {
        vertex: usize,
        items: Vec<ChoiceItem>,
        offenders: Vec<usize>,
    },
    /// A simple cycle none of whose vertices admits a choice.
    ChoiceFreeCycle { cycle: Path },
    /// A vertex on `cycle` violating one clause of Condition (K).
    CycleVertex {
        vertex: usize,
        cycle: Path,
        clause: KClause,
    },
}

/// Why a vertex on a cycle satisfies Condition (K).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KCertificate {
    pub vertex: usize,
    pub choice: ChoiceItem,
    pub cycles: (Path, Path),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub holds: bool,
    pub failure: Option<Failure>,
    pub certificates: Vec<KCertificate>,
}

impl ConditionVerdict {
    fn holds(condition: Condition, certificates: Vec<KCertificate>) -> Self {
        ConditionVerdict {
            condition,
            holds: true,
            failure: None,
            certificates,
        }
    }

    fn fails(condition: Condition, failure: Failure) -> Self {
        ConditionVerdict {
            condition,
            holds: false,
            failure: Some(failure),
            certificates: Vec::new(),
        }
    }

    /// Replays the witnesses against the definitions.
    pub fn verify(&self, g: &SeparatedGraph) -> bool {
        let report = choice_report(g);
        let failure_ok = match &self.failure {
            None => self.holds,
            Some(f) => !self.holds && verify_failure(g, &report, f),
        };
        failure_ok
            && self
                .certificates
                .iter()
                .all(|c| verify_certificate(g, &report, c))
    }

    pub fn describe(&self, g: &SeparatedGraph) -> String {
        let name = match self.condition {
            Condition::C => "Condition (C)",
            Condition::L => "Condition (L)",
            Condition::K => "Condition (K)",
        };
        match &self.failure {
            None => format!("{name}: holds"),
            Some(Failure::TooManyChoices { vertex, items, .. }) => {
                format!(
                    "{name}: fails at {} ({} choices)",
                    g.vertex_id(*vertex),
                    items.len()
                )
            }
            Some(Failure::ChoiceFreeCycle { cycle }) => {
                format!(
                    "{name}: fails, simple cycle {} admits no choice",
                    cycle.display(g)
                )
            }
            Some(Failure::CycleVertex {
                vertex,
                cycle,
                clause,
            }) => {
                let why = match clause {
                    KClause::NoChoice => "admits no choice".to_string(),
                    KClause::SeveralChoices(n) => format!("admits {n} choices"),
                    KClause::FewBaseSimpleCycles(b) => {
                        format!("has {} base-simple cycle(s) up to inversion", b.class())
                    }
                };
                format!(
                    "{name}: fails at {} on cycle {}: {why}",
                    g.vertex_id(*vertex),
                    cycle.display(g)
                )
            }
        }
    }
}

fn verify_failure(g: &SeparatedGraph, report: &ChoiceReport, f: &Failure) -> bool {
    match f {
        Failure::TooManyChoices {
            vertex,
            items,
            offenders,
        } => {
            offenders.iter().all(|&u| report.count(u) >= 2)
                && items.len() >= 2
                && items
                    .iter()
                    .all(|i| i.verify(g) && item_vertex(g, i) == *vertex)
                && items[0].subject != items[1].subject
        }
        Failure::ChoiceFreeCycle { cycle } => {
            is_simple_cycle(g, cycle) && cycle.vertices(g).iter().all(|&u| report.count(u) == 0)
        }
        Failure::CycleVertex {
            vertex,
            cycle,
            clause,
        } => {
            let on = cycle.start == *vertex && cycle.is_cycle(g);
            on && match clause {
                KClause::NoChoice => report.count(*vertex) == 0,
                KClause::SeveralChoices(n) => report.count(*vertex) == *n && *n >= 2,
                KClause::FewBaseSimpleCycles(b) => {
                    report.count(*vertex) == 1
                        && b.class() < 2
                        && base_simple_census(g, *vertex) == *b
                }
            }
        }
    }
}

fn verify_certificate(g: &SeparatedGraph, report: &ChoiceReport, c: &KCertificate) -> bool {
    let (a, b) = &c.cycles;
    let distinct = a.syms != b.syms && a.syms != b.inverse(g).syms;
    report.count(c.vertex) == 1
        && c.choice.verify(g)
        && item_vertex(g, &c.choice) == c.vertex
        && [a, b]
            .iter()
            .all(|p| p.start == c.vertex && p.is_cycle(g) && is_base_simple(g, p))
        && distinct
}

fn item_vertex(g: &SeparatedGraph, item: &ChoiceItem) -> usize {
    match item.subject {
        crate::paths::ChoiceSubject::Edge(e) => g.source(e),
        crate::paths::ChoiceSubject::Group(x) => g.group(x).vertex,
    }
}

pub fn condition_c(g: &SeparatedGraph) -> ConditionVerdict {
    let report = choice_report(g);
    let offenders: Vec<usize> = report
        .vertices
        .iter()
        .filter(|v| v.count >= 2)
        .map(|v| v.vertex)
        .collect();
    match offenders.first() {
        Some(&v) => ConditionVerdict::fails(
            Condition::C,
            Failure::TooManyChoices {
                vertex: v,
                items: report.vertices[v].items.clone(),
                offenders,
            },
        ),
        None => ConditionVerdict::holds(Condition::C, Vec::new()),
    }
}

pub fn condition_l(g: &SeparatedGraph) -> ConditionVerdict {
    let report = choice_report(g);
    for v in g.vertices().filter(|&v| report.count(v) == 0) {
        if let Some(cycle) = simple_cycles(g, v).into_iter().next() {
            return ConditionVerdict::fails(Condition::L, Failure::ChoiceFreeCycle { cycle });
        }
    }
    ConditionVerdict::holds(Condition::L, Vec::new())
}

pub fn condition_k(g: &SeparatedGraph) -> ConditionVerdict {
    let report = choice_report(g);
    let mut certificates = Vec::new();
    for v in g.vertices() {
        let Some(cycle) = on_cycle(g, v) else {
            continue;
        };
        let count = report.count(v);
        let clause = match count {
            0 => Some(KClause::NoChoice),
            1 => None,
            n => Some(KClause::SeveralChoices(n)),
        };
        if let Some(clause) = clause {
            return ConditionVerdict::fails(
                Condition::K,
                Failure::CycleVertex {
                    vertex: v,
                    cycle,
                    clause,
                },
            );
        }
        match base_simple_census(g, v) {
            BaseSimple::TwoOrMore(a, b) => certificates.push(KCertificate {
                vertex: v,
                choice: report.vertices[v].items[0].clone(),
                cycles: (a, b),
            }),
            other => {
                return ConditionVerdict::fails(
                    Condition::K,
                    Failure::CycleVertex {
                        vertex: v,
                        cycle,
                        clause: KClause::FewBaseSimpleCycles(other),
                    },
                )
            }
        }
    }
    ConditionVerdict::holds(Condition::K, certificates)
}

/// Vertices of a directed graph reachable from `v` along edges, as a flag
/// vector, restricted to vertices accepted by `allow`.
fn reach(
    d: &DirectedGraph,
    from: &[usize],
    allow: &dyn Fn(usize) -> bool,
    backward: bool,
) -> Vec<bool> {
    let mut seen = vec![false; d.vertex_count()];
    let mut stack: Vec<usize> = from.iter().copied().filter(|&u| allow(u)).collect();
    for &u in &stack {
        seen[u] = true;
    }
    while let Some(u) = stack.pop() {
        for e in 0..d.edge_count() {
            let (a, b) = if backward {
                (d.rng[e], d.src[e])
            } else {
                (d.src[e], d.rng[e])
            };
            if a == u && !seen[b] && allow(b) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    seen
}

/// Number of first-return cycles at `v`, saturating at `cap`.
pub fn first_return_cycles(d: &DirectedGraph, v: usize, cap: usize) -> usize {
    let inner = |u: usize| u != v;
    let outs: Vec<usize> = d.out_edges(v);
    let loops = outs.iter().filter(|&&e| d.rng[e] == v).count();
    let heads: Vec<usize> = outs.iter().map(|&e| d.rng[e]).filter(|&u| u != v).collect();
    let fwd = reach(d, &heads, &inner, false);
    let tails: Vec<usize> = d
        .in_edges(v)
        .iter()
        .map(|&e| d.src[e])
        .filter(|&u| u != v)
        .collect();
    let back = reach(d, &tails, &inner, true);
    let live = |u: usize| fwd[u] && back[u];
    // A cycle among live vertices can be pumped.
    let n = d.vertex_count();
    let mut state = vec![0u8; n];
    let mut count = vec![0usize; n];
    fn visit(
        d: &DirectedGraph,
        u: usize,
        v: usize,
        cap: usize,
        live: &dyn Fn(usize) -> bool,
        state: &mut [u8],
        count: &mut [usize],
    ) -> bool {
        state[u] = 1;
        let mut total = 0usize;
        for e in d.out_edges(u) {
            let w = d.rng[e];
            if w == v {
                total += 1;
            } else if live(w) {
                match state[w] {
                    1 => return false,
                    0 => {
                        if !visit(d, w, v, cap, live, state, count) {
                            return false;
                        }
                        total += count[w];
                    }
                    _ => total += count[w],
                }
            }
            total = total.min(cap);
        }
        state[u] = 2;
        count[u] = total;
        true
    }
    let mut total = loops;
    for &e in &outs {
        let w = d.rng[e];
        if w == v || !live(w) {
            continue;
        }
        if state[w] == 0 && !visit(d, w, v, cap, &live, &mut state, &mut count) {
            return cap;
        }
        total += count[w];
    }
    total.min(cap)
}

/// Vertices lying on a directed cycle.
pub fn classical_cycle_vertices(d: &DirectedGraph) -> Vec<usize> {
    (0..d.vertex_count())
        .filter(|&v| first_return_cycles(d, v, 1) >= 1)
        .collect()
}

/// Classical Condition (K): every vertex on a cycle has at least two
/// first-return cycles. Returns the first offending vertex on failure.
pub fn classical_condition_k(d: &DirectedGraph) -> Result<(), usize> {
    for v in 0..d.vertex_count() {
        let c = first_return_cycles(d, v, 2);
        if c == 1 {
            return Err(v);
        }
    }
    Ok(())
}

/// Classical Condition (L): every cycle has an entry, i.e. passes a vertex
/// receiving at least two edges. Returns a vertex on an entry-free cycle on
/// failure.
pub fn classical_condition_l(d: &DirectedGraph) -> Result<(), usize> {
    let n = d.vertex_count();
    let single: Vec<bool> = (0..n).map(|v| d.in_edges(v).len() == 1).collect();
    for v in (0..n).filter(|&v| single[v]) {
        let e = d.in_edges(v)[0];
        // Follow the unique incoming edges backwards; an entry-free cycle
        // through v is exactly a return to v.
        let mut u = d.src[e];
        for _ in 0..n {
            if u == v {
                return Err(v);
            }
            if !single[u] {
                break;
            }
            u = d.src[d.in_edges(u)[0]];
        }
    }
    Ok(())
}

/// Hereditary and saturated sets of a directed graph.
pub fn classical_hs_sets(d: &DirectedGraph) -> Vec<VertexSet> {
    all_hs_sets(&d.to_separated())
}

/// Simplicity of the graph algebras of a finite directed graph: Condition (L)
/// and no hereditary saturated sets besides the trivial ones.
pub fn classical_simple(d: &DirectedGraph) -> bool {
    if d.vertex_count() == 0 {
        return false;
    }
    classical_condition_l(d).is_ok()
        && crate::model::hs_is_trivial(&d.to_separated())
            .map(|t| t.trivial)
            .unwrap_or(false)
}
