use serde::Serialize;

use super::{choice_report, is_admissible, step_allowed, sym_source, trace, Automaton, Sym, Word};
use crate::model::SeparatedGraph;

/// A choice connector: `x`, then `path`, then `y^-1`, with `|[x]|, |[y]| ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectorWitness {
    pub x: usize,
    pub path: Word,
    pub y: usize,
}

impl ConnectorWitness {
    pub fn verify(&self, g: &SeparatedGraph) -> bool {
        is_connector(g, self.x, &self.path, self.y)
    }
}

/// A connector route through an automaton cycle. The connector
/// `prefix · cycle^k · suffix` exists for every `k ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PumpWitness {
    pub x: usize,
    pub y: usize,
    pub prefix: Word,
    pub cycle: Word,
    pub suffix: Word,
}

impl PumpWitness {
    pub fn pumped(&self, k: usize) -> ConnectorWitness {
        let mut path = self.prefix.clone();
        for _ in 0..k {
            path.extend_from_slice(&self.cycle);
        }
        path.extend_from_slice(&self.suffix);
        ConnectorWitness {
            x: self.x,
            path,
            y: self.y,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum MaxChoiceDistance {
    NotApplicable,
    Finite(usize, ConnectorWitness),
    Infinite(PumpWitness),
}

impl MaxChoiceDistance {
    pub fn finite(&self) -> Option<usize> {
        match self {
            MaxChoiceDistance::Finite(n, _) => Some(*n),
            _ => None,
        }
    }
}

pub fn is_connector(g: &SeparatedGraph, x: usize, path: &[Sym], y: usize) -> bool {
    if x >= g.edge_count() || y >= g.edge_count() || g.group_size(x) < 2 || g.group_size(y) < 2 {
        return false;
    }
    let mut full = vec![Sym::plain(x)];
    full.extend_from_slice(path);
    full.push(Sym::inv(y));
    super::is_composable(g, &full) && is_admissible(g, &full).unwrap_or(false)
}

fn opener(g: &SeparatedGraph, s: Sym) -> Option<usize> {
    g.in_edges(sym_source(g, s))
        .iter()
        .copied()
        .find(|&x| g.group_size(x) >= 2 && step_allowed(g, Sym::plain(x), s))
}

fn closer(g: &SeparatedGraph, s: Sym) -> Option<usize> {
    g.in_edges(super::sym_range(g, s))
        .iter()
        .copied()
        .find(|&y| g.group_size(y) >= 2 && step_allowed(g, s, Sym::inv(y)))
}

/// Maximal length of a choice connector.
pub fn m_cd(g: &SeparatedGraph) -> MaxChoiceDistance {
    if choice_report(g).condition_c() {
        return MaxChoiceDistance::NotApplicable;
    }
    let a = Automaton::new(g);
    let n = a.len();
    let open: Vec<Option<usize>> = (0..n).map(|i| opener(g, Sym::from_index(i))).collect();
    let close: Vec<Option<usize>> = (0..n).map(|i| closer(g, Sym::from_index(i))).collect();
    let starts: Vec<usize> = (0..n).filter(|&i| open[i].is_some()).collect();
    let ends: Vec<usize> = (0..n).filter(|&i| close[i].is_some()).collect();
    let fwd = a.bfs(&starts, |_| true, false);
    let back = a.bfs(&ends, |_| true, true);
    let useful: Vec<bool> = (0..n)
        .map(|i| fwd[i].is_some() && back[i].is_some())
        .collect();

    let (comp, cyclic) = a.components(&|i| useful[i]);
    if let Some(q) = (0..n).find(|&q| useful[q] && cyclic[comp[q]]) {
        let prefix = trace(&fwd, q);
        let cycle = {
            let succ: Vec<usize> = a.succ[q]
                .iter()
                .copied()
                .filter(|&t| comp[t] == comp[q])
                .collect();
            let par = a.bfs(&succ, |i| useful[i] && comp[i] == comp[q], false);
            trace(&par, q)
        };
        let mut suffix = trace(&back, q);
        suffix.reverse();
        let x = open[prefix[0]].unwrap();
        let y = close[*suffix.last().unwrap()].unwrap();
        return MaxChoiceDistance::Infinite(PumpWitness {
            x,
            y,
            prefix: super::states_to_word(&prefix),
            cycle: super::states_to_word(&cycle),
            suffix: super::states_to_word(&suffix[1..]),
        });
    }

    // Longest walk to an end state, over the acyclic useful part.
    let mut best: Vec<Option<(usize, Option<usize>)>> = vec![None; n];
    fn longest(
        q: usize,
        a: &Automaton,
        useful: &[bool],
        close: &[Option<usize>],
        best: &mut Vec<Option<(usize, Option<usize>)>>,
    ) -> usize {
        if let Some((len, _)) = best[q] {
            return len;
        }
        let mut here = (1, None);
        for &t in &a.succ[q] {
            if useful[t] {
                let l = longest(t, a, useful, close, best) + 1;
                if l > here.0 {
                    here = (l, Some(t));
                }
            }
        }
        debug_assert!(here.1.is_some() || close[q].is_some());
        best[q] = Some(here);
        here.0
    }
    let mut top: Option<(usize, ConnectorWitness)> = None;
    for &s in starts.iter().filter(|&&s| useful[s]) {
        let len = longest(s, &a, &useful, &close, &mut best);
        if top.as_ref().is_none_or(|(l, _)| len > *l) {
            let mut states = vec![s];
            while let Some((_, Some(t))) = best[*states.last().unwrap()] {
                states.push(t);
            }
            let w = ConnectorWitness {
                x: open[s].unwrap(),
                path: super::states_to_word(&states),
                y: close[*states.last().unwrap()].unwrap(),
            };
            top = Some((len, w));
        }
    }
    if top.is_none() {
        'outer: for x in g.edges().filter(|&x| g.group_size(x) >= 2) {
            for &y in g.in_edges(g.range(x)) {
                if g.group_size(y) >= 2 && step_allowed(g, Sym::plain(x), Sym::inv(y)) {
                    top = Some((
                        0,
                        ConnectorWitness {
                            x,
                            path: Vec::new(),
                            y,
                        },
                    ));
                    break 'outer;
                }
            }
        }
    }
    match top {
        Some((len, w)) => MaxChoiceDistance::Finite(len, w),
        None => {
            debug_assert!(false, "Condition (C) fails without a choice connector");
            MaxChoiceDistance::NotApplicable
        }
    }
}
