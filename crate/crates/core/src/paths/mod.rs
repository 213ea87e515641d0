//! Admissible paths in the doubled graph.
//!
//! Words are stored in traversal order: index 0 is the first symbol walked
//! (the initial symbol), the last index is the terminal symbol. Printed words
//! use the conventional right-to-left order, so the stored word `[e, f]` is
//! shown as `f e`.

mod census;
mod choices;
mod mcd;
mod standard;

pub use census::{
    base_simple_census, cycle_census, decompose_closed_path, is_base_simple, is_simple_cycle,
    on_cycle, simple_closed_census, simple_cycles, BaseSimple, CensusError, CycleCensus,
    SimpleClosedCensus,
};
pub use choices::{
    choice_report, ChoiceAnalysis, ChoiceItem, ChoiceReport, ChoiceSubject, ChoiceWitness,
    VertexChoices,
};
pub use mcd::{is_connector, m_cd, ConnectorWitness, MaxChoiceDistance, PumpWitness};
pub use standard::{standard_form, StandardForm};

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ClosureError, HereditarySaturatedSet, SeparatedGraph, VertexSet};

/// A letter of the doubled graph: an edge or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Sym {
    pub edge: usize,
    pub inverse: bool,
}

impl Sym {
    pub fn plain(edge: usize) -> Sym {
        Sym {
            edge,
            inverse: false,
        }
    }

    pub fn inv(edge: usize) -> Sym {
        Sym {
            edge,
            inverse: true,
        }
    }

    pub fn flip(self) -> Sym {
        Sym {
            edge: self.edge,
            inverse: !self.inverse,
        }
    }

    /// Dense automaton state index.
    pub fn index(self) -> usize {
        2 * self.edge + self.inverse as usize
    }

    pub fn from_index(i: usize) -> Sym {
        Sym {
            edge: i / 2,
            inverse: i % 2 == 1,
        }
    }

    /// Sign of the letter: +1 for an edge, -1 for an inverse edge.
    pub fn sign(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

pub type Word = Vec<Sym>;

pub fn sym_source(g: &SeparatedGraph, s: Sym) -> usize {
    if s.inverse {
        g.range(s.edge)
    } else {
        g.source(s.edge)
    }
}

pub fn sym_range(g: &SeparatedGraph, s: Sym) -> usize {
    if s.inverse {
        g.source(s.edge)
    } else {
        g.range(s.edge)
    }
}

/// Whether `next` may be walked directly after `first`.
pub fn step_allowed(g: &SeparatedGraph, first: Sym, next: Sym) -> bool {
    if sym_source(g, next) != sym_range(g, first) {
        return false;
    }
    match (first.inverse, next.inverse) {
        (false, true) => g.group_of(first.edge) != g.group_of(next.edge),
        (true, false) => first.edge != next.edge,
        _ => true,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum PathError {
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("malformed word: {0}")]
    Malformed(String),
    #[error("endpoints do not match")]
    EndpointMismatch,
    #[error("word is not composable")]
    NotComposable,
    #[error("path is not admissible")]
    NotAdmissible,
}

fn check_edges(g: &SeparatedGraph, word: &[Sym]) -> Result<(), PathError> {
    match word.iter().find(|s| s.edge >= g.edge_count()) {
        Some(s) => Err(PathError::UnknownEdge(format!("#{}", s.edge))),
        None => Ok(()),
    }
}

pub fn is_composable(g: &SeparatedGraph, word: &[Sym]) -> bool {
    word.windows(2)
        .all(|w| sym_source(g, w[1]) == sym_range(g, w[0]))
}

/// Composable and free of the two forbidden letter pairs.
pub fn is_admissible(g: &SeparatedGraph, word: &[Sym]) -> Result<bool, PathError> {
    check_edges(g, word)?;
    Ok(word.windows(2).all(|w| step_allowed(g, w[0], w[1])))
}

pub fn word_inverse(word: &[Sym]) -> Word {
    word.iter().rev().map(|s| s.flip()).collect()
}

/// Freely reduced product `beta · alpha` (alpha is walked first).
pub fn word_mul(beta: &[Sym], alpha: &[Sym]) -> Word {
    let mut out: Word = alpha.to_vec();
    for &s in beta {
        if out.last() == Some(&s.flip()) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}

pub fn is_reduced(word: &[Sym]) -> bool {
    word.windows(2).all(|w| w[1] != w[0].flip())
}

pub fn initial(word: &[Sym]) -> Option<Sym> {
    word.first().copied()
}

pub fn terminal(word: &[Sym]) -> Option<Sym> {
    word.last().copied()
}

/// Longest common initial subpath.
pub fn meet(a: &[Sym], b: &[Sym]) -> Word {
    a.iter()
        .zip(b)
        .take_while(|(x, y)| x == y)
        .map(|(x, _)| *x)
        .collect()
}

/// `a ≤ b`: `a` is an initial subpath of `b`.
pub fn is_initial_subpath(a: &[Sym], b: &[Sym]) -> bool {
    a.len() <= b.len() && b[..a.len()] == *a
}

/// An admissible path together with its base vertex, which matters for the
/// trivial path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Path {
    pub start: usize,
    pub syms: Word,
}

impl Path {
    pub fn trivial(v: usize) -> Path {
        Path {
            start: v,
            syms: Vec::new(),
        }
    }

    pub fn from_word(g: &SeparatedGraph, syms: Word) -> Path {
        let start = syms
            .first()
            .map(|&s| sym_source(g, s))
            .expect("non-empty word");
        Path { start, syms }
    }

    pub fn end(&self, g: &SeparatedGraph) -> usize {
        self.syms
            .last()
            .map(|&s| sym_range(g, s))
            .unwrap_or(self.start)
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    /// Vertices met along the path, including both endpoints.
    pub fn vertices(&self, g: &SeparatedGraph) -> Vec<usize> {
        let mut vs = vec![self.start];
        vs.extend(self.syms.iter().map(|&s| sym_range(g, s)));
        vs
    }

    pub fn inverse(&self, g: &SeparatedGraph) -> Path {
        Path {
            start: self.end(g),
            syms: word_inverse(&self.syms),
        }
    }

    pub fn is_admissible(&self, g: &SeparatedGraph) -> bool {
        self.syms
            .first()
            .is_none_or(|&s| sym_source(g, s) == self.start)
            && is_admissible(g, &self.syms).unwrap_or(false)
    }

    pub fn is_closed(&self, g: &SeparatedGraph) -> bool {
        !self.syms.is_empty() && self.end(g) == self.start
    }

    /// Closed, and its square is admissible.
    pub fn is_cycle(&self, g: &SeparatedGraph) -> bool {
        self.is_closed(g)
            && self.is_admissible(g)
            && step_allowed(g, *self.syms.last().unwrap(), self.syms[0])
    }

    pub fn display(&self, g: &SeparatedGraph) -> String {
        if self.syms.is_empty() {
            g.vertex_id(self.start).to_string()
        } else {
            format_word(g, &self.syms)
        }
    }
}

/// Conventional right-to-left rendering; the identity is `1`.
pub fn format_word(g: &SeparatedGraph, word: &[Sym]) -> String {
    if word.is_empty() {
        return "1".to_string();
    }
    word.iter()
        .rev()
        .map(|&s| format_sym(g, s))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn format_sym(g: &SeparatedGraph, s: Sym) -> String {
    if s.inverse {
        format!("{}^-1", g.edge_id(s.edge))
    } else {
        g.edge_id(s.edge).to_string()
    }
}

pub struct WordDisplay<'a>(pub &'a SeparatedGraph, pub &'a [Sym]);

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_word(self.0, self.1))
    }
}

/// Parses whitespace-separated letters written right to left; `x^-1`,
/// `x^*` and `x*` denote inverses, and `1` or the empty string the identity.
pub fn parse_word(g: &SeparatedGraph, text: &str) -> Result<Word, PathError> {
    let text = text.trim();
    if text.is_empty() || text == "1" {
        return Ok(Vec::new());
    }
    let mut word = Vec::new();
    for token in text.split_whitespace().rev() {
        let (name, inverse) = if let Some(n) = token.strip_suffix("^-1") {
            (n, true)
        } else if let Some(n) = token.strip_suffix("^*") {
            (n, true)
        } else if let Some(n) = token.strip_suffix('*') {
            (n, true)
        } else {
            (token, false)
        };
        if name.is_empty() {
            return Err(PathError::Malformed(token.to_string()));
        }
        let e = g
            .edge_index(name)
            .ok_or_else(|| PathError::UnknownEdge(name.to_string()))?;
        word.push(Sym { edge: e, inverse });
    }
    Ok(word)
}

/// The symbol automaton: states are letters, with a transition wherever two
/// letters may be walked consecutively.
#[derive(Clone, Debug)]
pub struct Automaton {
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
}

impl Automaton {
    pub fn new(g: &SeparatedGraph) -> Automaton {
        let n = 2 * g.edge_count();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (i, out) in succ.iter_mut().enumerate() {
            let a = Sym::from_index(i);
            let v = sym_range(g, a);
            let nexts = g
                .out_edges(v)
                .iter()
                .map(|&e| Sym::plain(e))
                .chain(g.in_edges(v).iter().map(|&e| Sym::inv(e)));
            for b in nexts.filter(|&b| step_allowed(g, a, b)) {
                out.push(b.index());
                pred[b.index()].push(i);
            }
        }
        for s in succ.iter_mut().chain(pred.iter_mut()) {
            s.sort_unstable();
        }
        Automaton { succ, pred }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    /// Breadth-first search from `starts` over states accepted by `allow`;
    /// returns parent links (`usize::MAX` marks a start, `None` unreached).
    pub fn bfs(
        &self,
        starts: &[usize],
        allow: impl Fn(usize) -> bool,
        backward: bool,
    ) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for &s in starts {
            if allow(s) && parent[s].is_none() {
                parent[s] = Some(usize::MAX);
                queue.push_back(s);
            }
        }
        let adj = if backward { &self.pred } else { &self.succ };
        while let Some(q) = queue.pop_front() {
            for &n in &adj[q] {
                if parent[n].is_none() && allow(n) {
                    parent[n] = Some(q);
                    queue.push_back(n);
                }
            }
        }
        parent
    }

    /// Strongly connected components (iterative Tarjan), with a flag telling
    /// whether each component contains a cycle.
    pub fn components(&self, allow: &dyn Fn(usize) -> bool) -> (Vec<usize>, Vec<bool>) {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp = vec![usize::MAX; n];
        let mut cyclic = Vec::new();
        let mut counter = 0;
        for root in 0..n {
            if index[root] != usize::MAX || !allow(root) {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut i)) = call.last_mut() {
                if *i < self.succ[v].len() {
                    let w = self.succ[v][*i];
                    *i += 1;
                    if !allow(w) {
                        continue;
                    }
                    if index[w] == usize::MAX {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(p, _)) = call.last() {
                        low[p] = low[p].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let c = cyclic.len();
                        let mut size = 0;
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp[w] = c;
                            size += 1;
                            if w == v {
                                break;
                            }
                        }
                        let self_loop = self.succ[v].contains(&v);
                        cyclic.push(size > 1 || self_loop);
                    }
                }
            }
        }
        (comp, cyclic)
    }
}

/// Follows BFS parent links back to a start; the result runs start → `end`.
pub fn trace(parent: &[Option<usize>], end: usize) -> Vec<usize> {
    let mut out = vec![end];
    let mut cur = end;
    while let Some(p) = parent[cur] {
        if p == usize::MAX {
            break;
        }
        out.push(p);
        cur = p;
    }
    out.reverse();
    out
}

pub fn states_to_word(states: &[usize]) -> Word {
    states.iter().map(|&i| Sym::from_index(i)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Product {
    pub word: Word,
    pub admissible: bool,
}

/// Reduced product `beta · alpha` of two admissible paths with
/// `r(alpha) = s(beta)`.
pub fn reduced_product(
    g: &SeparatedGraph,
    beta: &Path,
    alpha: &Path,
) -> Result<Product, PathError> {
    check_edges(g, &alpha.syms)?;
    check_edges(g, &beta.syms)?;
    if alpha.end(g) != beta.start {
        return Err(PathError::EndpointMismatch);
    }
    let word = word_mul(&beta.syms, &alpha.syms);
    let admissible = is_admissible(g, &word)?;
    Ok(Product { word, admissible })
}

/// Forced paths only use inverse letters of singleton groups.
pub fn is_forced(g: &SeparatedGraph, word: &[Sym]) -> bool {
    word.iter().all(|s| !s.inverse || g.group_size(s.edge) == 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum ForcedError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error(transparent)]
    Closure(#[from] ClosureError),
}

/// Vertices that cannot be reached from `v` by a forced admissible path.
pub fn forced_unreachable(g: &SeparatedGraph, v: usize) -> VertexSet {
    let a = Automaton::new(g);
    let starts: Vec<usize> = g
        .out_edges(v)
        .iter()
        .map(|&e| Sym::plain(e))
        .chain(g.in_edges(v).iter().map(|&e| Sym::inv(e)))
        .filter(|s| is_forced(g, &[*s]))
        .map(Sym::index)
        .collect();
    let parent = a.bfs(&starts, |i| is_forced(g, &[Sym::from_index(i)]), false);
    let mut reached = vec![false; g.vertex_count()];
    reached[v] = true;
    for (i, p) in parent.iter().enumerate() {
        if p.is_some() {
            reached[sym_range(g, Sym::from_index(i))] = true;
        }
    }
    g.vertices().filter(|&u| !reached[u]).collect()
}

/// The hereditary and C-saturated set of vertices not reachable from `v` by
/// forced paths, for a vertex with exactly one choice and exactly one
/// base-simple cycle up to inversion. The result is checked: it is closed,
/// misses `v`, and in the quotient `v` sits on a cycle without choices.
pub fn forced_unreachable_set(
    g: &SeparatedGraph,
    v: usize,
) -> Result<HereditarySaturatedSet, ForcedError> {
    match base_simple_census(g, v) {
        BaseSimple::One(_) => {}
        BaseSimple::Zero => {
            return Err(ForcedError::HypothesisViolated(
                "vertex admits no base-simple cycle".into(),
            ));
        }
        BaseSimple::TwoOrMore(..) => {
            return Err(ForcedError::HypothesisViolated(
                "vertex admits two base-simple cycles".into(),
            ));
        }
    }
    let count = choice_report(g).vertices[v].count;
    if count != 1 {
        return Err(ForcedError::HypothesisViolated(format!(
            "vertex admits {count} choices, expected exactly one"
        )));
    }
    let h = forced_unreachable(g, v);
    let set = HereditarySaturatedSet::new(g, h.clone())?;
    let q = crate::model::quotient(g, &h)?;
    let qv = q
        .vertex_index(g.vertex_id(v))
        .expect("v survives the quotient");
    if choice_report(&q).vertices[qv].count != 0 || on_cycle(&q, qv).is_none() {
        return Err(ForcedError::HypothesisViolated(
            "quotient does not isolate a choice-free cycle".into(),
        ));
    }
    Ok(set)
}
