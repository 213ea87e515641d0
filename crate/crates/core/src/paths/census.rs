use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use super::{
    choice_report, meet, step_allowed, sym_range, trace, word_inverse, Automaton, Path, Sym, Word,
};
use crate::model::SeparatedGraph;

/// Canonical representative of a word up to inversion.
pub(crate) fn canonical(word: &[Sym]) -> Word {
    let inv = word_inverse(word);
    if inv.as_slice() < word {
        inv
    } else {
        word.to_vec()
    }
}

fn start_states(g: &SeparatedGraph, v: usize) -> Vec<usize> {
    let mut s: Vec<usize> = g
        .out_edges(v)
        .iter()
        .map(|&e| Sym::plain(e).index())
        .chain(g.in_edges(v).iter().map(|&e| Sym::inv(e).index()))
        .collect();
    s.sort_unstable();
    s
}

/// A cycle based at `v`, if any.
pub fn on_cycle(g: &SeparatedGraph, v: usize) -> Option<Path> {
    let a = Automaton::new(g);
    for s in start_states(g, v) {
        let parent = a.bfs(&[s], |_| true, false);
        let first = Sym::from_index(s);
        let hit = (0..a.len()).find(|&t| {
            parent[t].is_some()
                && sym_range(g, Sym::from_index(t)) == v
                && step_allowed(g, Sym::from_index(t), first)
        });
        if let Some(t) = hit {
            let word: Word = trace(&parent, t).into_iter().map(Sym::from_index).collect();
            return Some(Path {
                start: v,
                syms: word,
            });
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BaseSimple {
    Zero,
    One(Path),
    /// Two base-simple cycles that are not inverse to each other.
    TwoOrMore(Path, Path),
}

impl BaseSimple {
    pub fn class(&self) -> usize {
        match self {
            BaseSimple::Zero => 0,
            BaseSimple::One(_) => 1,
            BaseSimple::TwoOrMore(..) => 2,
        }
    }
}

/// Base-simple cycles at `v` up to inversion, reported as 0, 1 or ≥ 2.
///
/// Walks start at `v`, avoid `v` in between and must close up admissibly. A
/// walk that can revisit an automaton state can be pumped, which gives
/// infinitely many cycles; otherwise all walks are simple in the automaton
/// and are enumerated outright.
pub fn base_simple_census(g: &SeparatedGraph, v: usize) -> BaseSimple {
    let a = Automaton::new(g);
    let n = a.len();
    let inner = |i: usize| sym_range(g, Sym::from_index(i)) != v;
    let (comp, cyclic) = a.components(&inner);
    let is_cyclic = |i: usize| inner(i) && cyclic[comp[i]];

    for s in start_states(g, v) {
        let first = Sym::from_index(s);
        let closes = |t: usize| {
            sym_range(g, Sym::from_index(t)) == v && step_allowed(g, Sym::from_index(t), first)
        };
        if !inner(s) {
            continue;
        }
        let fwd = a.bfs(&[s], inner, false);
        let feeders: Vec<usize> = (0..n)
            .filter(|&p| inner(p) && a.succ[p].iter().any(|&t| closes(t)))
            .collect();
        let back = a.bfs(&feeders, inner, true);
        if let Some(q) = (0..n).find(|&q| fwd[q].is_some() && back[q].is_some() && is_cyclic(q)) {
            let to_q = trace(&fwd, q);
            let loop_from_q = {
                let par = a.bfs(&a.succ[q].clone(), inner, false);
                trace(&par, q)
            };
            let mut tail = trace(&back, q);
            tail.reverse();
            let p = *tail.last().unwrap();
            let t = *a.succ[p].iter().find(|&&t| closes(t)).unwrap();
            let mut one = to_q.clone();
            one.extend_from_slice(&tail[1..]);
            one.push(t);
            let mut two = to_q;
            two.extend_from_slice(&loop_from_q);
            two.extend_from_slice(&tail[1..]);
            two.push(t);
            let p1 = Path {
                start: v,
                syms: super::states_to_word(&one),
            };
            let p2 = Path {
                start: v,
                syms: super::states_to_word(&two),
            };
            return BaseSimple::TwoOrMore(p1, p2);
        }
    }

    let mut classes: Vec<Word> = Vec::new();
    let mut found: Vec<Word> = Vec::new();
    for s in start_states(g, v) {
        let first = Sym::from_index(s);
        let closes = |t: usize| {
            sym_range(g, Sym::from_index(t)) == v && step_allowed(g, Sym::from_index(t), first)
        };
        if closes(s) {
            record(&mut classes, &mut found, vec![first]);
        }
        if !inner(s) {
            continue;
        }
        let feeders: Vec<usize> = (0..n)
            .filter(|&p| inner(p) && a.succ[p].iter().any(|&t| closes(t)))
            .collect();
        let back = a.bfs(&feeders, inner, true);
        if back[s].is_none() {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(s, 0)];
        let mut path: Vec<usize> = vec![s];
        while let Some((q, i)) = stack.pop() {
            if classes.len() >= 2 {
                break;
            }
            if i < a.succ[q].len() {
                stack.push((q, i + 1));
                let t = a.succ[q][i];
                if closes(t) {
                    let mut w = path.clone();
                    w.push(t);
                    record(&mut classes, &mut found, super::states_to_word(&w));
                }
                if inner(t) && back[t].is_some() && !path.contains(&t) {
                    path.push(t);
                    stack.push((t, 0));
                }
            } else {
                path.pop();
            }
        }
        if classes.len() >= 2 {
            break;
        }
    }
    let rep = |c: &Word| {
        let w = found.iter().find(|w| canonical(w) == *c).unwrap().clone();
        Path { start: v, syms: w }
    };
    match classes.len() {
        0 => BaseSimple::Zero,
        1 => BaseSimple::One(rep(&classes[0])),
        _ => BaseSimple::TwoOrMore(rep(&classes[0]), rep(&classes[1])),
    }
}

fn record(classes: &mut Vec<Word>, found: &mut Vec<Word>, w: Word) {
    let c = canonical(&w);
    if !classes.contains(&c) {
        classes.push(c);
    }
    found.push(w);
}

/// Simple cycles based at `v`: only the endpoints repeat a vertex.
pub fn simple_cycles(g: &SeparatedGraph, v: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut visited = vec![false; g.vertex_count()];
    visited[v] = true;
    let mut word = Vec::new();
    extend_simple(
        g,
        v,
        v,
        &mut visited,
        &mut word,
        &mut |w| {
            if step_allowed(g, *w.last().unwrap(), w[0]) {
                out.push(Path {
                    start: v,
                    syms: w.to_vec(),
                });
            }
        },
        true,
    );
    out
}

/// Depth-first search over admissible paths from `at` that never revisit a
/// vertex; when `closing` is set, `sink` sees each path that returns to
/// `base`, otherwise it sees every path.
fn extend_simple(
    g: &SeparatedGraph,
    base: usize,
    at: usize,
    visited: &mut [bool],
    word: &mut Word,
    sink: &mut dyn FnMut(&[Sym]),
    closing: bool,
) {
    let options = g
        .out_edges(at)
        .iter()
        .map(|&e| Sym::plain(e))
        .chain(g.in_edges(at).iter().map(|&e| Sym::inv(e)))
        .collect::<Vec<_>>();
    for s in options {
        if let Some(&last) = word.last() {
            if !step_allowed(g, last, s) {
                continue;
            }
        }
        let to = sym_range(g, s);
        word.push(s);
        if closing && to == base {
            sink(word);
        } else if !visited[to] {
            if !closing {
                sink(word);
            }
            visited[to] = true;
            extend_simple(g, base, to, visited, word, sink, closing);
            visited[to] = false;
        }
        word.pop();
    }
}

/// Simple admissible paths from `v`, the trivial one included.
pub(crate) fn simple_paths(g: &SeparatedGraph, v: usize) -> Vec<Path> {
    let mut out = vec![Path::trivial(v)];
    let mut visited = vec![false; g.vertex_count()];
    visited[v] = true;
    let mut word = Vec::new();
    extend_simple(
        g,
        v,
        v,
        &mut visited,
        &mut word,
        &mut |w| {
            out.push(Path {
                start: v,
                syms: w.to_vec(),
            })
        },
        false,
    );
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum CensusError {
    #[error("unknown vertex index {0}")]
    UnknownVertex(usize),
    #[error("vertex admits a choice")]
    ChoicePresent,
    #[error("not a closed admissible path at the vertex")]
    NotClosed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimpleClosedCensus {
    /// Number of simple closed paths up to inversion.
    pub count: usize,
    /// One representative per class, in canonical form.
    pub witnesses: Vec<Path>,
}

impl SimpleClosedCensus {
    /// Rank class of the group of closed paths: 0, 1, or 2 for "at least two".
    pub fn rank_class(&self) -> usize {
        self.count.min(2)
    }
}

/// Simple closed paths `γ^-1 β γ` at a vertex without choices.
pub fn simple_closed_census(
    g: &SeparatedGraph,
    v: usize,
) -> Result<SimpleClosedCensus, CensusError> {
    if v >= g.vertex_count() {
        return Err(CensusError::UnknownVertex(v));
    }
    if choice_report(g).count(v) != 0 {
        return Err(CensusError::ChoicePresent);
    }
    let mut classes: BTreeSet<Word> = BTreeSet::new();
    for gamma in simple_paths(g, v) {
        let u = gamma.end(g);
        for beta in simple_cycles(g, u) {
            let mut w = gamma.syms.clone();
            w.extend_from_slice(&beta.syms);
            w.extend(word_inverse(&gamma.syms));
            if super::is_admissible(g, &w).unwrap_or(false) {
                classes.insert(canonical(&w));
            }
        }
    }
    let witnesses: Vec<Path> = classes
        .into_iter()
        .map(|w| Path { start: v, syms: w })
        .collect();
    Ok(SimpleClosedCensus {
        count: witnesses.len(),
        witnesses,
    })
}

/// Splits a closed path at a choice-free vertex as `γ^-1 β γ` with
/// `γ = α ∧ α^-1`; returns `(γ, β)`.
pub fn decompose_closed_path(
    g: &SeparatedGraph,
    alpha: &Path,
) -> Result<(Path, Path), CensusError> {
    let v = alpha.start;
    if v >= g.vertex_count() {
        return Err(CensusError::UnknownVertex(v));
    }
    if !alpha.is_closed(g) || !alpha.is_admissible(g) {
        return Err(CensusError::NotClosed);
    }
    if choice_report(g).count(v) != 0 {
        return Err(CensusError::ChoicePresent);
    }
    let inv = word_inverse(&alpha.syms);
    let mut k = meet(&alpha.syms, &inv).len();
    k = k.min((alpha.syms.len() - 1) / 2);
    let gamma = Path {
        start: v,
        syms: alpha.syms[..k].to_vec(),
    };
    let beta_start = gamma.end(g);
    let beta = Path {
        start: beta_start,
        syms: alpha.syms[k..alpha.syms.len() - k].to_vec(),
    };
    Ok((gamma, beta))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleCensus {
    pub vertex: usize,
    pub on_cycle: Option<Path>,
    pub base_simple: BaseSimple,
    /// Only present when the vertex admits no choices.
    pub simple_closed: Option<SimpleClosedCensus>,
    pub decomposition: Option<(Path, Path)>,
}

pub fn cycle_census(
    g: &SeparatedGraph,
    v: usize,
    closed: Option<&Path>,
) -> Result<CycleCensus, CensusError> {
    if v >= g.vertex_count() {
        return Err(CensusError::UnknownVertex(v));
    }
    let no_choice = choice_report(g).count(v) == 0;
    let decomposition = match closed {
        Some(p) => {
            if p.start != v {
                return Err(CensusError::NotClosed);
            }
            Some(decompose_closed_path(g, p)?)
        }
        None => None,
    };
    Ok(CycleCensus {
        vertex: v,
        on_cycle: on_cycle(g, v),
        base_simple: base_simple_census(g, v),
        simple_closed: if no_choice {
            Some(simple_closed_census(g, v)?)
        } else {
            None
        },
        decomposition,
    })
}

/// Whether `alpha` returns to its base only at the end.
pub fn is_base_simple(g: &SeparatedGraph, alpha: &Path) -> bool {
    let vs = alpha.vertices(g);
    alpha.is_closed(g) && vs[1..vs.len() - 1].iter().all(|&u| u != alpha.start)
}

/// Whether `alpha` repeats no vertex except at its two ends.
pub fn is_simple_cycle(g: &SeparatedGraph, alpha: &Path) -> bool {
    let vs = alpha.vertices(g);
    let inner: BTreeSet<usize> = vs[..vs.len() - 1].iter().copied().collect();
    alpha.is_cycle(g) && inner.len() == vs.len() - 1
}
