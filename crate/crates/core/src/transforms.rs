//! Graph transformations: bipartite replacement, the multiresolution step,
//! non-separated orientations and degeneration to a directed graph.

use serde::Serialize;
use thiserror::Error;

use crate::model::{DirectedGraph, RawGraph, SeparatedGraph};
use crate::paths::{
    choice_report, m_cd, on_cycle, simple_closed_census, simple_cycles, Automaton, ChoiceAnalysis,
    MaxChoiceDistance, Path, Sym,
};

pub const DEFAULT_BLOWUP_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum TransformError {
    #[error("the graph is not bipartite")]
    NotBipartite,
    #[error("the construction would create {size} vertices, above the cap of {cap}")]
    BlowupCapExceeded { size: usize, cap: usize },
    #[error("path is not admissible in the refined graph")]
    NotAdmissible,
    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),
    #[error("not degenerable: {0}")]
    NotDegenerable(String),
    #[error("generated id `{0}` clashes with an existing id")]
    NameClash(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteReplacement {
    #[serde(skip)]
    pub graph: SeparatedGraph,
    /// Original vertex index to the indices of `v_0` and `v_1`.
    pub vertex_map: Vec<(usize, usize)>,
    pub edge_map: Vec<usize>,
    pub hooks: Vec<usize>,
}

pub fn bipartite_replacement(g: &SeparatedGraph) -> BipartiteReplacement {
    let v0 = |v: usize| format!("{}_0", g.vertex_id(v));
    let v1 = |v: usize| format!("{}_1", g.vertex_id(v));
    let mut raw = RawGraph::new(format!("B({})", g.name()));
    for v in g.vertices() {
        raw = raw.vertex(&v0(v)).vertex(&v1(v));
    }
    for e in g.edges() {
        raw = raw.edge(
            &format!("{}~", g.edge_id(e)),
            &v1(g.source(e)),
            &v0(g.range(e)),
        );
    }
    for v in g.vertices() {
        let hook = format!("h({})", g.vertex_id(v));
        raw = raw.edge(&hook, &v1(v), &v0(v)).group(&v0(v), "h", &[&hook]);
    }
    for x in g.groups() {
        let members: Vec<String> = x
            .members
            .iter()
            .map(|&e| format!("{}~", g.edge_id(e)))
            .collect();
        let refs: Vec<&str> = members.iter().map(String::as_str).collect();
        raw = raw.group(&v0(x.vertex), &format!("x:{}", x.label), &refs);
    }
    let graph = raw
        .validate()
        .expect("bipartite replacement of a valid graph");
    let idx = |id: String| graph.vertex_index(&id).unwrap();
    let vertex_map = g.vertices().map(|v| (idx(v0(v)), idx(v1(v)))).collect();
    let edge_map = g
        .edges()
        .map(|e| graph.edge_index(&format!("{}~", g.edge_id(e))).unwrap())
        .collect();
    let hooks = g
        .vertices()
        .map(|v| graph.edge_index(&format!("h({})", g.vertex_id(v))).unwrap())
        .collect();
    BipartiteReplacement {
        graph,
        vertex_map,
        edge_map,
        hooks,
    }
}

/// One multiresolution step of a bipartite graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiresolutionStep {
    #[serde(skip)]
    pub graph: SeparatedGraph,
    /// Vertex of the new graph to the vertex of the parent it refines.
    pub projection: Vec<usize>,
    /// New edge `α^x(…)` to the parent edge `x`.
    pub edge_origin: Vec<usize>,
}

/// Number of vertices the step adds: the sum over range vertices of the
/// product of their group sizes.
pub fn e1_blowup(g: &SeparatedGraph) -> usize {
    g.vertices()
        .filter(|&u| !g.groups_at(u).is_empty())
        .map(|u| {
            g.groups_at(u)
                .iter()
                .map(|&x| g.group(x).members.len())
                .fold(1usize, |a, b| a.saturating_mul(b))
        })
        .fold(0usize, |a, b| a.saturating_add(b))
}

fn one_step(g: &SeparatedGraph, cap: usize) -> Result<MultiresolutionStep, TransformError> {
    if !g.is_bipartite() {
        return Err(TransformError::NotBipartite);
    }
    let size = e1_blowup(g);
    if size > cap {
        return Err(TransformError::BlowupCapExceeded { size, cap });
    }
    let mut raw = RawGraph::new(g.name().to_string());
    let mut proj_ids: Vec<(String, usize)> = Vec::new();
    let mut origin_ids: Vec<(String, usize)> = Vec::new();
    for v in g.vertices().filter(|&v| g.in_edges(v).is_empty()) {
        raw = raw.vertex(g.vertex_id(v));
        proj_ids.push((g.vertex_id(v).to_string(), v));
    }
    for u in g.vertices().filter(|&u| !g.groups_at(u).is_empty()) {
        let groups: Vec<&[usize]> = g
            .groups_at(u)
            .iter()
            .map(|&x| g.group(x).members.as_slice())
            .collect();
        let mut tuple = vec![0usize; groups.len()];
        'odometer: loop {
            let picks: Vec<usize> = tuple.iter().zip(&groups).map(|(&i, x)| x[i]).collect();
            let name = format!(
                "v({})",
                picks
                    .iter()
                    .map(|&e| g.edge_id(e))
                    .collect::<Vec<_>>()
                    .join(",")
            );
            raw = raw.vertex(&name);
            proj_ids.push((name.clone(), u));
            for (i, &x) in picks.iter().enumerate() {
                let others: Vec<&str> = picks
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &e)| g.edge_id(e))
                    .collect();
                let id = format!("a^{}({})", g.edge_id(x), others.join(","));
                raw = raw.labelled_edge(&id, &name, g.vertex_id(g.source(x)), g.edge_id(x));
                origin_ids.push((id, x));
            }
            let mut k = groups.len();
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] < groups[k].len() {
                    break;
                }
                tuple[k] = 0;
            }
        }
    }
    let graph = raw
        .validate()
        .map_err(|e| TransformError::NameClash(e.to_string()))?;
    let mut projection = vec![0; graph.vertex_count()];
    for (id, v) in proj_ids {
        projection[graph.vertex_index(&id).unwrap()] = v;
    }
    let mut edge_origin = vec![0; graph.edge_count()];
    for (id, x) in origin_ids {
        edge_origin[graph.edge_index(&id).unwrap()] = x;
    }
    Ok(MultiresolutionStep {
        graph,
        projection,
        edge_origin,
    })
}

/// `iterate` successive multiresolution steps starting from `g`.
pub fn construct_e1(
    g: &SeparatedGraph,
    iterate: usize,
    cap: usize,
) -> Result<Vec<MultiresolutionStep>, TransformError> {
    let mut steps: Vec<MultiresolutionStep> = Vec::new();
    for _ in 0..iterate {
        let parent = steps.last().map_or(g, |s| &s.graph);
        let next = one_step(parent, cap)?;
        steps.push(next);
    }
    Ok(steps)
}

/// Transports a path of the refined graph to the parent: `α^x(…) ↦ x^-1`.
pub fn psi(step: &MultiresolutionStep, path: &Path) -> Result<Path, TransformError> {
    if !path.is_admissible(&step.graph) {
        return Err(TransformError::NotAdmissible);
    }
    let syms = path
        .syms
        .iter()
        .map(|s| Sym {
            edge: step.edge_origin[s.edge],
            inverse: !s.inverse,
        })
        .collect();
    Ok(Path {
        start: step.projection[path.start],
        syms,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orientation {
    /// `+1` or `-1` per edge.
    pub signs: Vec<i8>,
    /// Which step of the construction assigned each sign (1 to 4).
    pub types: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Obstruction {
    ConditionCFails { vertex: usize },
    SeveralClosedPaths { vertex: usize, count: usize },
}

impl Obstruction {
    pub fn describe(&self, g: &SeparatedGraph) -> String {
        match self {
            Obstruction::ConditionCFails { vertex } => {
                format!(
                    "Condition (C) fails at {}; no orientation is constructed",
                    g.vertex_id(*vertex)
                )
            }
            Obstruction::SeveralClosedPaths { vertex, count } => format!(
                "{} admits no choice but {count} simple closed paths up to inversion; \
                 the sufficient condition for an orientation does not apply",
                g.vertex_id(*vertex)
            ),
        }
    }
}

pub fn find_orientation(g: &SeparatedGraph) -> Result<Orientation, Obstruction> {
    let report = choice_report(g);
    if let Some(v) = report.vertices.iter().find(|v| v.count >= 2) {
        return Err(Obstruction::ConditionCFails { vertex: v.vertex });
    }
    let mut closed = vec![None; g.vertex_count()];
    for v in g.vertices().filter(|&v| report.count(v) == 0) {
        let census = simple_closed_census(g, v).expect("vertex admits no choice");
        if census.count >= 2 {
            return Err(Obstruction::SeveralClosedPaths {
                vertex: v,
                count: census.count,
            });
        }
        closed[v] = census.witnesses.into_iter().next();
    }

    let analysis = ChoiceAnalysis::new(g);
    let m = g.edge_count();
    let mut signs: Vec<Option<i8>> = vec![None; m];
    let mut types = vec![0u8; m];
    for e in g.edges() {
        if report.count(g.range(e)) > 0 {
            signs[e] = Some(if analysis.sym_admits(Sym::plain(e)) {
                1
            } else {
                -1
            });
            types[e] = 1;
        }
    }

    let cycles: Vec<Path> = g
        .vertices()
        .filter(|&v| report.count(v) == 0)
        .flat_map(|v| simple_cycles(g, v))
        .collect();
    for e in g.edges() {
        if signs[e].is_some() {
            continue;
        }
        let Some(c) = cycles.iter().find(|c| c.syms.iter().any(|s| s.edge == e)) else {
            continue;
        };
        let oriented = if c.syms.contains(&Sym::plain(e)) {
            c.clone()
        } else {
            c.inverse(g)
        };
        for s in &oriented.syms {
            if signs[s.edge].is_none() {
                signs[s.edge] = Some(s.sign());
                types[s.edge] = 2;
            }
        }
    }

    for alpha in closed.iter().flatten() {
        let first = alpha.syms[0];
        if signs[first.edge].is_none() {
            signs[first.edge] = Some(first.sign());
            types[first.edge] = 3;
        }
    }

    let rest: Vec<usize> = g.edges().filter(|&e| signs[e].is_none()).collect();
    if !rest.is_empty() {
        let free: Vec<bool> = signs.iter().map(Option::is_none).collect();
        let a = Automaton::new(g);
        let allowed = |i: usize| free[Sym::from_index(i).edge];
        // Classes of vertices joined by paths of remaining edges; the
        // representative is the least vertex of its class.
        let mut rep: Vec<usize> = (0..g.vertex_count()).collect();
        for u in g.vertices() {
            let starts: Vec<usize> = g
                .out_edges(u)
                .iter()
                .map(|&e| Sym::plain(e))
                .chain(g.in_edges(u).iter().map(|&e| Sym::inv(e)))
                .map(Sym::index)
                .filter(|&i| allowed(i))
                .collect();
            let reached = a.bfs(&starts, allowed, false);
            for (i, p) in reached.iter().enumerate() {
                if p.is_some() {
                    let w = crate::paths::sym_range(g, Sym::from_index(i));
                    rep[w] = rep[w].min(u);
                    rep[u] = rep[u].min(w);
                }
            }
        }
        for &e in &rest {
            let u = rep[g.range(e)];
            let mut sign = -1;
            for s in [Sym::plain(e), Sym::inv(e)] {
                let reached = a.bfs(&[s.index()], allowed, false);
                let hits = (0..a.len()).any(|i| {
                    reached[i].is_some() && crate::paths::sym_range(g, Sym::from_index(i)) == u
                });
                if hits {
                    sign = s.sign();
                    break;
                }
            }
            signs[e] = Some(sign);
            types[e] = 4;
        }
    }
    Ok(Orientation {
        signs: signs.into_iter().map(|s| s.unwrap_or(-1)).collect(),
        types,
    })
}

/// Checks the definition of a non-separated orientation at every vertex.
pub fn verify_orientation(g: &SeparatedGraph, signs: &[i8]) -> Result<(), String> {
    if signs.len() != g.edge_count() || signs.iter().any(|&s| s != 1 && s != -1) {
        return Err("one sign of ±1 per edge is required".into());
    }
    for e in g.edges().filter(|&e| signs[e] == 1) {
        if g.group_size(e) != 1 {
            return Err(format!(
                "positive edge `{}` lies in a group of size {}",
                g.edge_id(e),
                g.group_size(e)
            ));
        }
    }
    for v in g.vertices() {
        let mut minus_in: Vec<usize> = g
            .in_edges(v)
            .iter()
            .copied()
            .filter(|&e| signs[e] == -1)
            .collect();
        minus_in.sort_unstable();
        let plus_out = g.out_edges(v).iter().filter(|&&e| signs[e] == 1).count();
        let is_group = g
            .groups_at(v)
            .iter()
            .any(|&x| g.group(x).members == minus_in);
        let first = is_group && plus_out == 0;
        let second = minus_in.is_empty() && plus_out <= 1;
        if !first && !second {
            return Err(format!("neither clause holds at `{}`", g.vertex_id(v)));
        }
    }
    Ok(())
}

/// The directed graph of an orientation.
pub fn apply_orientation(
    g: &SeparatedGraph,
    o: &Orientation,
) -> Result<DirectedGraph, TransformError> {
    verify_orientation(g, &o.signs).map_err(TransformError::InvalidOrientation)?;
    let (src, rng) = g
        .edges()
        .map(|e| {
            if o.signs[e] == -1 {
                (g.source(e), g.range(e))
            } else {
                (g.range(e), g.source(e))
            }
        })
        .unzip();
    Ok(DirectedGraph {
        vertex_ids: g.vertices().map(|v| g.vertex_id(v).to_string()).collect(),
        edge_ids: g.edges().map(|e| g.edge_id(e).to_string()).collect(),
        src,
        rng,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationResult {
    pub steps: usize,
    #[serde(skip)]
    pub graph: SeparatedGraph,
    pub orientation: Orientation,
    pub directed: DirectedGraph,
    /// Vertex projections of each step, first step first.
    pub chain: Vec<Vec<usize>>,
    /// Set when the input was first replaced by its bipartite version; the
    /// result then describes the 2×2 matrix amplification.
    pub amplified: bool,
}

/// Checks the two hypotheses of the degeneration construction.
pub fn degeneration_hypotheses(g: &SeparatedGraph) -> Result<(), String> {
    let report = choice_report(g);
    for v in g.vertices() {
        let count = report.count(v);
        if count >= 2 && on_cycle(g, v).is_some() {
            return Err(format!(
                "a cycle through {} admits {count} choices",
                g.vertex_id(v)
            ));
        }
        if count == 0 {
            let c = simple_closed_census(g, v).expect("vertex admits no choice");
            if c.count >= 2 {
                return Err(format!(
                    "{} admits no choice but {} simple closed paths",
                    g.vertex_id(v),
                    c.count
                ));
            }
        }
    }
    Ok(())
}

pub fn degenerate(g: &SeparatedGraph, cap: usize) -> Result<DegenerationResult, TransformError> {
    degeneration_hypotheses(g).map_err(TransformError::NotDegenerable)?;
    let finish = |graph: SeparatedGraph, steps: usize, chain: Vec<Vec<usize>>| {
        let orientation = find_orientation(&graph)
            .map_err(|o| TransformError::NotDegenerable(o.describe(&graph)))?;
        let directed = apply_orientation(&graph, &orientation)?;
        Ok(DegenerationResult {
            steps,
            graph,
            orientation,
            directed,
            chain,
            amplified: false,
        })
    };
    let bound = match m_cd(g) {
        MaxChoiceDistance::NotApplicable => return finish(g.clone(), 0, Vec::new()),
        MaxChoiceDistance::Finite(n, _) => n.div_ceil(2) + 1,
        MaxChoiceDistance::Infinite(_) => {
            return Err(TransformError::NotDegenerable(
                "the maximal choice distance is infinite".into(),
            ))
        }
    };
    if !g.is_bipartite() {
        return Err(TransformError::NotBipartite);
    }
    let mut current = g.clone();
    let mut chain = Vec::new();
    for n in 1..=bound {
        let step = one_step(&current, cap)?;
        chain.push(step.projection.clone());
        current = step.graph;
        if choice_report(&current).condition_c() {
            return finish(current, n, chain);
        }
    }
    Err(TransformError::NotDegenerable(format!(
        "Condition (C) still fails after {bound} steps"
    )))
}

/// Degeneration through the bipartite replacement, for graphs that are not
/// bipartite and fail Condition (C).
pub fn degenerate_amplified(
    g: &SeparatedGraph,
    cap: usize,
) -> Result<DegenerationResult, TransformError> {
    let b = bipartite_replacement(g);
    let mut r = degenerate(&b.graph, cap)?;
    r.amplified = true;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::paths::parse_word;

    #[test]
    fn bipartite_replacement_examples() {
        let b = bipartite_replacement(&fixtures::z());
        assert_eq!((b.graph.vertex_count(), b.graph.edge_count()), (2, 2));
        let v0 = b.vertex_map[0].0;
        assert_eq!(b.graph.groups_at(v0).len(), 2);
        let s = bipartite_replacement(&fixtures::s5());
        assert_eq!((s.graph.vertex_count(), s.graph.edge_count()), (10, 9));
        let v0 = s.vertex_map[s.vertex_map.len() - 1].0;
        assert_eq!(s.graph.groups_at(v0).len(), 3);
        assert!(s.graph.is_bipartite());
        let e = bipartite_replacement(&SeparatedGraph::empty());
        assert_eq!(e.graph.vertex_count(), 0);
    }

    #[test]
    fn e1_of_s5() {
        let g = fixtures::s5();
        let step = &construct_e1(&g, 1, DEFAULT_BLOWUP_CAP).unwrap()[0];
        let h = &step.graph;
        assert_eq!((h.vertex_count(), h.edge_count()), (8, 8));
        assert!(h.is_trivially_separated() && h.is_bipartite());
        for u in ["u1", "u2", "u3", "u4"] {
            let v = h.vertex_index(u).unwrap();
            assert_eq!(h.groups_at(v).len(), 1);
            assert_eq!(h.in_edges(v).len(), 2);
        }
    }

    #[test]
    fn e1_small_cases() {
        let single = RawGraph::new("I")
            .vertices(&["u", "v"])
            .labelled_edge("e", "u", "v", "a")
            .validate()
            .unwrap();
        let h = construct_e1(&single, 1, 10).unwrap().remove(0).graph;
        assert_eq!((h.vertex_count(), h.edge_count()), (2, 1));
        let e = 0;
        assert_eq!(h.vertex_id(h.source(e)), "v(e)");
        assert_eq!(h.vertex_id(h.range(e)), "u");
        let bz = bipartite_replacement(&fixtures::z()).graph;
        let h = construct_e1(&bz, 1, 10).unwrap().remove(0).graph;
        assert_eq!((h.vertex_count(), h.edge_count()), (2, 2));
        assert_eq!(h.groups().len(), 2);
        assert!(matches!(
            construct_e1(&fixtures::z(), 1, 10),
            Err(TransformError::NotBipartite)
        ));
        assert!(matches!(
            construct_e1(&fixtures::s5(), 1, 3),
            Err(TransformError::BlowupCapExceeded { .. })
        ));
    }

    #[test]
    fn psi_examples() {
        let g = fixtures::s5();
        let step = construct_e1(&g, 1, 100).unwrap().remove(0);
        let h = &step.graph;
        let e = h.edge_index("a^f1(f2)").unwrap();
        let p = Path::from_word(h, vec![Sym::plain(e)]);
        assert_eq!(
            psi(&step, &p).unwrap().syms,
            parse_word(&g, "f1^-1").unwrap()
        );
        let v = h.vertex_index("v(f1,f2)").unwrap();
        assert_eq!(g.vertex_id(step.projection[v]), "v");
        let f = h.edge_index("a^f2(f1)").unwrap();
        let q = Path::from_word(h, vec![Sym::inv(f), Sym::plain(e)]);
        let image = psi(&step, &q).unwrap();
        assert_eq!(image.syms, parse_word(&g, "f1^-1 f2").unwrap());
        assert!(image.is_admissible(&g));
    }

    #[test]
    fn orientation_examples() {
        let k1 = fixtures::k1();
        let o = find_orientation(&k1).unwrap();
        assert_eq!(o.signs, vec![-1, -1]);
        let d = apply_orientation(&k1, &o).unwrap();
        assert_eq!(d.src, vec![0, 0]);
        let z = fixtures::z();
        let o = find_orientation(&z).unwrap();
        assert_eq!((o.signs[0], o.types[0]), (1, 2));
        assert!(matches!(
            find_orientation(&fixtures::f2()),
            Err(Obstruction::SeveralClosedPaths { count: 2, .. })
        ));
        for g in fixtures::all() {
            if let Ok(o) = find_orientation(&g) {
                assert_eq!(verify_orientation(&g, &o.signs), Ok(()), "{}", g.name());
            }
        }
    }

    #[test]
    fn mixed_signs_flip_positive_edges() {
        let g = RawGraph::new("P")
            .vertices(&["a", "b", "c"])
            .labelled_edge("e", "a", "b", "x")
            .labelled_edge("f", "b", "c", "x")
            .validate()
            .unwrap();
        let o = Orientation {
            signs: vec![1, -1],
            types: vec![0, 0],
        };
        let d = apply_orientation(&g, &o).unwrap();
        assert_eq!((d.src[0], d.rng[0]), (1, 0));
        assert_eq!((d.src[1], d.rng[1]), (1, 2));
    }

    #[test]
    fn degeneration_examples() {
        let r = degenerate(&fixtures::s5(), DEFAULT_BLOWUP_CAP).unwrap();
        assert_eq!(r.steps, 1);
        assert_eq!((r.directed.vertex_count(), r.directed.edge_count()), (8, 8));
        assert!(r.directed.is_acyclic());
        assert!(r.orientation.signs.iter().all(|&s| s == -1));
        let r = degenerate(&fixtures::k1(), DEFAULT_BLOWUP_CAP).unwrap();
        assert_eq!(r.steps, 0);
        assert!(matches!(
            degenerate(&fixtures::f2(), DEFAULT_BLOWUP_CAP),
            Err(TransformError::NotDegenerable(_))
        ));
    }
}
