use serde::Serialize;

use super::{step_allowed, sym_range, sym_source, trace, Automaton, Sym, Word};
use crate::model::SeparatedGraph;

/// Why a letter admits a choice: the choice path starting with it and the
/// edge `x` (with `|[x]| ≥ 2`) whose inverse may follow the path. An empty
/// path means the letter is `e^-1` with `|[e]| ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceWitness {
    pub path: Word,
    pub closing: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChoiceSubject {
    Edge(usize),
    Group(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceItem {
    pub subject: ChoiceSubject,
    pub symbol: Sym,
    pub witness: ChoiceWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexChoices {
    pub vertex: usize,
    pub count: usize,
    pub items: Vec<ChoiceItem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceReport {
    pub vertices: Vec<VertexChoices>,
}

impl ChoiceReport {
    pub fn count(&self, v: usize) -> usize {
        self.vertices[v].count
    }

    pub fn condition_c(&self) -> bool {
        self.vertices.iter().all(|v| v.count <= 1)
    }
}

/// Which letters admit a choice, with shortest witnesses.
#[derive(Clone, Debug)]
pub struct ChoiceAnalysis {
    pub admits: Vec<bool>,
    pub witness: Vec<Option<ChoiceWitness>>,
}

impl ChoiceAnalysis {
    pub fn new(g: &SeparatedGraph) -> ChoiceAnalysis {
        let a = Automaton::new(g);
        let n = a.len();
        // A closing edge for each state that may be followed by x^-1, |[x]| ≥ 2.
        let closing: Vec<Option<usize>> = (0..n)
            .map(|i| {
                let s = Sym::from_index(i);
                g.in_edges(sym_range(g, s))
                    .iter()
                    .copied()
                    .find(|&x| g.group_size(x) >= 2 && step_allowed(g, s, Sym::inv(x)))
            })
            .collect();
        let ends: Vec<usize> = (0..n).filter(|&i| closing[i].is_some()).collect();
        let next = a.bfs(&ends, |_| true, true);
        let mut admits = vec![false; n];
        let mut witness = vec![None; n];
        for i in 0..n {
            let s = Sym::from_index(i);
            if s.inverse && g.group_size(s.edge) >= 2 {
                admits[i] = true;
                witness[i] = Some(ChoiceWitness {
                    path: Vec::new(),
                    closing: s.edge,
                });
            } else if next[i].is_some() {
                // Backward BFS parents point one step closer to an end.
                let mut states = trace(&next, i);
                states.reverse();
                let last = *states.last().unwrap();
                admits[i] = true;
                witness[i] = Some(ChoiceWitness {
                    path: states.iter().map(|&k| Sym::from_index(k)).collect(),
                    closing: closing[last].unwrap(),
                });
            }
        }
        ChoiceAnalysis { admits, witness }
    }

    pub fn sym_admits(&self, s: Sym) -> bool {
        self.admits[s.index()]
    }

    pub fn report(&self, g: &SeparatedGraph) -> ChoiceReport {
        let vertices = g
            .vertices()
            .map(|v| {
                let mut items = Vec::new();
                for &e in g.out_edges(v) {
                    let s = Sym::plain(e);
                    if let Some(w) = &self.witness[s.index()] {
                        items.push(ChoiceItem {
                            subject: ChoiceSubject::Edge(e),
                            symbol: s,
                            witness: w.clone(),
                        });
                    }
                }
                for &x in g.groups_at(v) {
                    let hit = g
                        .group(x)
                        .members
                        .iter()
                        .map(|&e| Sym::inv(e))
                        .find(|s| self.admits[s.index()]);
                    if let Some(s) = hit {
                        items.push(ChoiceItem {
                            subject: ChoiceSubject::Group(x),
                            symbol: s,
                            witness: self.witness[s.index()].clone().unwrap(),
                        });
                    }
                }
                VertexChoices {
                    vertex: v,
                    count: items.len(),
                    items,
                }
            })
            .collect();
        ChoiceReport { vertices }
    }
}

pub fn choice_report(g: &SeparatedGraph) -> ChoiceReport {
    ChoiceAnalysis::new(g).report(g)
}

impl ChoiceItem {
    /// Replays the witness against the definition of a choice path.
    pub fn verify(&self, g: &SeparatedGraph) -> bool {
        let w = &self.witness;
        if g.group_size(w.closing) < 2 {
            return false;
        }
        let subject_ok = match self.subject {
            ChoiceSubject::Edge(e) => self.symbol == Sym::plain(e),
            ChoiceSubject::Group(x) => self.symbol.inverse && g.group_of(self.symbol.edge) == x,
        };
        if !subject_ok {
            return false;
        }
        if w.path.is_empty() {
            return self.symbol.inverse && self.symbol.edge == w.closing;
        }
        let mut full = w.path.clone();
        full.push(Sym::inv(w.closing));
        w.path[0] == self.symbol
            && sym_source(g, w.path[0]) == sym_source(g, self.symbol)
            && super::is_admissible(g, &full).unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn counts(g: &SeparatedGraph) -> Vec<(String, usize)> {
        choice_report(g)
            .vertices
            .iter()
            .map(|v| (g.vertex_id(v.vertex).to_string(), v.count))
            .collect()
    }

    #[test]
    fn fixture_counts() {
        let l1 = fixtures::l1();
        assert_eq!(
            counts(&l1),
            vec![("u1".into(), 2), ("u2".into(), 2), ("u3".into(), 2)]
        );
        assert_eq!(counts(&fixtures::k1()), vec![("v".into(), 1)]);
        assert_eq!(counts(&fixtures::z()), vec![("v".into(), 0)]);
        let k1 = fixtures::k1();
        let r = choice_report(&k1);
        assert!(matches!(
            r.vertices[0].items[0].subject,
            ChoiceSubject::Group(_)
        ));
    }

    #[test]
    fn witnesses_verify() {
        for g in fixtures::all() {
            for v in choice_report(&g).vertices {
                for item in v.items {
                    assert!(
                        item.verify(&g),
                        "{}: bad witness at {}",
                        g.name(),
                        g.vertex_id(v.vertex)
                    );
                }
            }
        }
    }

    #[test]
    fn l2_vertex_u4_has_three_choices() {
        let g = fixtures::l2();
        let r = choice_report(&g);
        assert_eq!(r.count(g.vertex_index("u4").unwrap()), 3);
    }
}
