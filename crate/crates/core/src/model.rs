//! Separated graphs, hereditary/C-saturated vertex sets and quotients.
//!
//! A separated graph is a finite directed multigraph in which the incoming
//! edges of every vertex are partitioned into non-empty groups. Vertices and
//! edges are addressed by dense indices assigned in id-lexicographic order, so
//! every iteration over indices is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unvalidated description of a separated graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGraph {
    pub name: String,
    pub vertices: Vec<String>,
    pub edges: Vec<RawEdge>,
    pub groups: Vec<RawGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawEdge {
    pub id: String,
    pub source: String,
    pub range: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawGroup {
    pub vertex: String,
    pub label: String,
    pub members: Vec<String>,
}

impl RawGraph {
    pub fn new(name: impl Into<String>) -> Self {
        RawGraph {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn vertex(mut self, id: &str) -> Self {
        self.vertices.push(id.to_string());
        self
    }

    pub fn vertices(mut self, ids: &[&str]) -> Self {
        self.vertices.extend(ids.iter().map(|s| s.to_string()));
        self
    }

    pub fn edge(mut self, id: &str, source: &str, range: &str) -> Self {
        self.edges.push(RawEdge {
            id: id.into(),
            source: source.into(),
            range: range.into(),
        });
        self
    }

    pub fn group(mut self, vertex: &str, label: &str, members: &[&str]) -> Self {
        self.groups.push(RawGroup {
            vertex: vertex.into(),
            label: label.into(),
            members: members.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    /// Adds an edge together with a group label at its range; edges sharing a
    /// label at the same range end up in the same group.
    pub fn labelled_edge(mut self, id: &str, source: &str, range: &str, label: &str) -> Self {
        self = self.edge(id, source, range);
        match self
            .groups
            .iter_mut()
            .find(|g| g.vertex == range && g.label == label)
        {
            Some(g) => g.members.push(id.to_string()),
            None => {
                self.groups.push(RawGroup {
                    vertex: range.into(),
                    label: label.into(),
                    members: vec![id.to_string()],
                });
            }
        }
        self
    }

    /// Puts every ungrouped incoming edge of each vertex into one group.
    pub fn trivially_separated(mut self) -> Self {
        let grouped: BTreeSet<String> = self
            .groups
            .iter()
            .flat_map(|g| g.members.iter().cloned())
            .collect();
        let pending: Vec<RawEdge> = self
            .edges
            .iter()
            .filter(|e| !grouped.contains(&e.id))
            .cloned()
            .collect();
        for e in pending {
            let label = "t".to_string();
            match self
                .groups
                .iter_mut()
                .find(|g| g.vertex == e.range && g.label == label)
            {
                Some(g) => g.members.push(e.id.clone()),
                None => self.groups.push(RawGroup {
                    vertex: e.range.clone(),
                    label,
                    members: vec![e.id.clone()],
                }),
            }
        }
        self
    }

    pub fn validate(&self) -> Result<SeparatedGraph, ValidationError> {
        validate(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DuplicateVertexId(String),
    MissingVertex { edge: String, vertex: String },
    DuplicateEdgeId(String),
    UnknownGroupVertex { vertex: String, label: String },
    EmptyGroup { vertex: String, label: String },
    GroupsNotAPartition { vertex: String, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId(v) => write!(f, "duplicate vertex id `{v}`"),
            Violation::MissingVertex { edge, vertex } => {
                write!(f, "edge `{edge}` references undeclared vertex `{vertex}`")
            }
            Violation::DuplicateEdgeId(e) => write!(f, "duplicate edge id `{e}`"),
            Violation::UnknownGroupVertex { vertex, label } => {
                write!(
                    f,
                    "group `{label}` is attached to undeclared vertex `{vertex}`"
                )
            }
            Violation::EmptyGroup { vertex, label } => {
                write!(f, "group `{label}` at `{vertex}` is empty")
            }
            Violation::GroupsNotAPartition { vertex, detail } => {
                write!(
                    f,
                    "groups at `{vertex}` do not partition its incoming edges: {detail}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid separated graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ValidationError(pub Vec<Violation>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Group {
    pub vertex: usize,
    pub label: String,
    pub members: Vec<usize>,
}

/// A validated finite separated graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatedGraph {
    name: String,
    vertex_ids: Vec<String>,
    edge_ids: Vec<String>,
    src: Vec<usize>,
    rng: Vec<usize>,
    groups: Vec<Group>,
    group_of: Vec<usize>,
    groups_at: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

pub fn validate(raw: &RawGraph) -> Result<SeparatedGraph, ValidationError> {
    let mut violations = Vec::new();

    let mut vertex_set = BTreeSet::new();
    for v in &raw.vertices {
        if !vertex_set.insert(v.clone()) {
            violations.push(Violation::DuplicateVertexId(v.clone()));
        }
    }
    let vertex_ids: Vec<String> = vertex_set.into_iter().collect();
    let vindex: BTreeMap<&str, usize> = vertex_ids
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();

    let mut edge_map: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for e in &raw.edges {
        let s = vindex.get(e.source.as_str()).copied();
        let r = vindex.get(e.range.as_str()).copied();
        if s.is_none() {
            violations.push(Violation::MissingVertex {
                edge: e.id.clone(),
                vertex: e.source.clone(),
            });
        }
        if r.is_none() && e.range != e.source {
            violations.push(Violation::MissingVertex {
                edge: e.id.clone(),
                vertex: e.range.clone(),
            });
        }
        if edge_map.contains_key(&e.id) {
            violations.push(Violation::DuplicateEdgeId(e.id.clone()));
            continue;
        }
        if let (Some(s), Some(r)) = (s, r) {
            edge_map.insert(e.id.clone(), (s, r));
        }
    }
    let edge_ids: Vec<String> = edge_map.keys().cloned().collect();
    let eindex: BTreeMap<&str, usize> = edge_ids
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let src: Vec<usize> = edge_map.values().map(|p| p.0).collect();
    let rng: Vec<usize> = edge_map.values().map(|p| p.1).collect();

    let mut assigned: Vec<Option<usize>> = vec![None; edge_ids.len()];
    let mut by_vertex: BTreeMap<usize, BTreeMap<String, Vec<usize>>> = BTreeMap::new();
    for (gi, grp) in raw.groups.iter().enumerate() {
        let Some(&v) = vindex.get(grp.vertex.as_str()) else {
            violations.push(Violation::UnknownGroupVertex {
                vertex: grp.vertex.clone(),
                label: grp.label.clone(),
            });
            continue;
        };
        if grp.members.is_empty() {
            violations.push(Violation::EmptyGroup {
                vertex: grp.vertex.clone(),
                label: grp.label.clone(),
            });
            continue;
        }
        if by_vertex
            .get(&v)
            .is_some_and(|m| m.contains_key(&grp.label))
        {
            violations.push(Violation::GroupsNotAPartition {
                vertex: grp.vertex.clone(),
                detail: format!("label `{}` used twice", grp.label),
            });
            continue;
        }
        let mut members = Vec::new();
        for m in &grp.members {
            let Some(&e) = eindex.get(m.as_str()) else {
                violations.push(Violation::GroupsNotAPartition {
                    vertex: grp.vertex.clone(),
                    detail: format!("unknown edge `{m}` in group `{}`", grp.label),
                });
                continue;
            };
            if rng[e] != v {
                violations.push(Violation::GroupsNotAPartition {
                    vertex: grp.vertex.clone(),
                    detail: format!("edge `{m}` does not end at `{}`", grp.vertex),
                });
                continue;
            }
            if assigned[e].is_some() {
                violations.push(Violation::GroupsNotAPartition {
                    vertex: grp.vertex.clone(),
                    detail: format!("edge `{m}` belongs to two groups"),
                });
                continue;
            }
            assigned[e] = Some(gi);
            members.push(e);
        }
        members.sort_unstable();
        by_vertex
            .entry(v)
            .or_default()
            .insert(grp.label.clone(), members);
    }
    for (e, a) in assigned.iter().enumerate() {
        if a.is_none() {
            violations.push(Violation::GroupsNotAPartition {
                vertex: vertex_ids[rng[e]].clone(),
                detail: format!("edge `{}` is in no group", edge_ids[e]),
            });
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError(violations));
    }

    let mut groups = Vec::new();
    for (v, labelled) in by_vertex {
        for (label, members) in labelled {
            if !members.is_empty() {
                groups.push(Group {
                    vertex: v,
                    label,
                    members,
                });
            }
        }
    }
    Ok(SeparatedGraph::assemble(
        raw.name.clone(),
        vertex_ids,
        edge_ids,
        src,
        rng,
        groups,
    ))
}

impl SeparatedGraph {
    fn assemble(
        name: String,
        vertex_ids: Vec<String>,
        edge_ids: Vec<String>,
        src: Vec<usize>,
        rng: Vec<usize>,
        groups: Vec<Group>,
    ) -> Self {
        let n = vertex_ids.len();
        let mut group_of = vec![0; edge_ids.len()];
        let mut groups_at = vec![Vec::new(); n];
        for (gi, g) in groups.iter().enumerate() {
            groups_at[g.vertex].push(gi);
            for &e in &g.members {
                group_of[e] = gi;
            }
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for e in 0..edge_ids.len() {
            out_edges[src[e]].push(e);
            in_edges[rng[e]].push(e);
        }
        SeparatedGraph {
            name,
            vertex_ids,
            edge_ids,
            src,
            rng,
            groups,
            group_of,
            groups_at,
            out_edges,
            in_edges,
        }
    }

    pub fn empty() -> Self {
        Self::assemble(String::new(), vec![], vec![], vec![], vec![], vec![])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn vertices(&self) -> std::ops::Range<usize> {
        0..self.vertex_ids.len()
    }

    pub fn edges(&self) -> std::ops::Range<usize> {
        0..self.edge_ids.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edge_ids[e]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids
            .binary_search_by(|v| v.as_str().cmp(id))
            .ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.binary_search_by(|e| e.as_str().cmp(id)).ok()
    }

    pub fn source(&self, e: usize) -> usize {
        self.src[e]
    }

    pub fn range(&self, e: usize) -> usize {
        self.rng[e]
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &Group {
        &self.groups[g]
    }

    /// Index of the group `[e]`.
    pub fn group_of(&self, e: usize) -> usize {
        self.group_of[e]
    }

    /// Size of the group `[e]`.
    pub fn group_size(&self, e: usize) -> usize {
        self.groups[self.group_of[e]].members.len()
    }

    pub fn groups_at(&self, v: usize) -> &[usize] {
        &self.groups_at[v]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.out_edges[v].is_empty() && self.in_edges[v].is_empty()
    }

    pub fn is_source_vertex(&self, v: usize) -> bool {
        self.in_edges[v].is_empty()
    }

    /// Every group has exactly one member set per vertex.
    pub fn is_trivially_separated(&self) -> bool {
        self.groups_at.iter().all(|gs| gs.len() <= 1)
    }

    /// No vertex is both the source of an edge and the range of an edge.
    pub fn is_bipartite(&self) -> bool {
        self.edges().all(|e| self.in_edges[self.src[e]].is_empty())
    }

    pub fn to_raw(&self) -> RawGraph {
        RawGraph {
            name: self.name.clone(),
            vertices: self.vertex_ids.clone(),
            edges: self
                .edges()
                .map(|e| RawEdge {
                    id: self.edge_ids[e].clone(),
                    source: self.vertex_ids[self.src[e]].clone(),
                    range: self.vertex_ids[self.rng[e]].clone(),
                })
                .collect(),
            groups: self
                .groups
                .iter()
                .map(|g| RawGroup {
                    vertex: self.vertex_ids[g.vertex].clone(),
                    label: g.label.clone(),
                    members: g
                        .members
                        .iter()
                        .map(|&e| self.edge_ids[e].clone())
                        .collect(),
                })
                .collect(),
        }
    }

    /// The same directed graph with one group per non-source vertex.
    pub fn trivial_separation(&self) -> SeparatedGraph {
        let mut raw = self.to_raw();
        raw.groups.clear();
        raw.trivially_separated()
            .validate()
            .expect("relabelling a valid graph")
    }

    pub fn vertex_set(&self, ids: &[&str]) -> Option<VertexSet> {
        ids.iter().map(|id| self.vertex_index(id)).collect()
    }

    pub fn vertex_names(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|&v| self.vertex_ids[v].clone()).collect()
    }
}

pub type VertexSet = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum ClosureError {
    #[error("vertex index {0} is out of range")]
    UnknownVertex(usize),
    #[error("the set is not hereditary: edge `{0}` enters the set from outside")]
    NotHereditary(String),
    #[error("the set is not C-saturated at vertex `{0}`")]
    NotSaturated(String),
    #[error("the graph has no vertices")]
    EmptyGraph,
}

/// A vertex set closed under the hereditary and C-saturation rules.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HereditarySaturatedSet {
    pub members: VertexSet,
}

impl HereditarySaturatedSet {
    pub fn new(g: &SeparatedGraph, members: VertexSet) -> Result<Self, ClosureError> {
        check_closed(g, &members)?;
        Ok(HereditarySaturatedSet { members })
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }
}

pub fn is_hereditary(g: &SeparatedGraph, h: &VertexSet) -> bool {
    first_hereditary_violation(g, h).is_none()
}

fn first_hereditary_violation(g: &SeparatedGraph, h: &VertexSet) -> Option<usize> {
    g.edges()
        .find(|&e| h.contains(&g.range(e)) && !h.contains(&g.source(e)))
}

pub fn is_c_saturated(g: &SeparatedGraph, h: &VertexSet) -> bool {
    first_saturation_violation(g, h).is_none()
}

fn first_saturation_violation(g: &SeparatedGraph, h: &VertexSet) -> Option<usize> {
    g.groups()
        .iter()
        .find(|x| !h.contains(&x.vertex) && x.members.iter().all(|&e| h.contains(&g.source(e))))
        .map(|x| x.vertex)
}

pub fn check_closed(g: &SeparatedGraph, h: &VertexSet) -> Result<(), ClosureError> {
    if let Some(&v) = h.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(ClosureError::UnknownVertex(v));
    }
    if let Some(e) = first_hereditary_violation(g, h) {
        return Err(ClosureError::NotHereditary(g.edge_id(e).to_string()));
    }
    if let Some(v) = first_saturation_violation(g, h) {
        return Err(ClosureError::NotSaturated(g.vertex_id(v).to_string()));
    }
    Ok(())
}

/// Smallest hereditary and C-saturated set containing `seed`.
pub fn hs_closure(
    g: &SeparatedGraph,
    seed: &VertexSet,
) -> Result<HereditarySaturatedSet, ClosureError> {
    if let Some(&v) = seed.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(ClosureError::UnknownVertex(v));
    }
    let mut inside = vec![false; g.vertex_count()];
    for &v in seed {
        inside[v] = true;
    }
    loop {
        let mut changed = false;
        // Hereditary rule to a fixpoint; a worklist keeps it linear.
        let mut stack: Vec<usize> = (0..inside.len()).filter(|&v| inside[v]).collect();
        while let Some(v) = stack.pop() {
            for &e in g.in_edges(v) {
                let s = g.source(e);
                if !inside[s] {
                    inside[s] = true;
                    changed = true;
                    stack.push(s);
                }
            }
        }
        for x in g.groups() {
            if !inside[x.vertex] && x.members.iter().all(|&e| inside[g.source(e)]) {
                inside[x.vertex] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let members = (0..inside.len()).filter(|&v| inside[v]).collect();
    Ok(HereditarySaturatedSet { members })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HsTriviality {
    pub trivial: bool,
    /// A proper non-empty hereditary and C-saturated set when not trivial.
    pub witness: Option<VertexSet>,
}

pub fn hs_is_trivial(g: &SeparatedGraph) -> Result<HsTriviality, ClosureError> {
    if g.vertex_count() == 0 {
        return Err(ClosureError::EmptyGraph);
    }
    for v in g.vertices() {
        let c = hs_closure(g, &VertexSet::from([v]))?;
        if c.members.len() != g.vertex_count() {
            return Ok(HsTriviality {
                trivial: false,
                witness: Some(c.members),
            });
        }
    }
    Ok(HsTriviality {
        trivial: true,
        witness: None,
    })
}

/// The quotient graph: vertices outside `h`, edges whose source lies outside
/// `h`, and each group cut down to its surviving edges.
pub fn quotient(g: &SeparatedGraph, h: &VertexSet) -> Result<SeparatedGraph, ClosureError> {
    check_closed(g, h)?;
    let mut raw = RawGraph::new(g.name());
    raw.vertices = g
        .vertices()
        .filter(|v| !h.contains(v))
        .map(|v| g.vertex_id(v).to_string())
        .collect();
    let keep = |e: usize| !h.contains(&g.source(e));
    for e in g.edges().filter(|&e| keep(e)) {
        raw = raw.edge(
            g.edge_id(e),
            g.vertex_id(g.source(e)),
            g.vertex_id(g.range(e)),
        );
    }
    for x in g.groups() {
        if h.contains(&x.vertex) {
            continue;
        }
        let members: Vec<&str> = x
            .members
            .iter()
            .copied()
            .filter(|&e| keep(e))
            .map(|e| g.edge_id(e))
            .collect();
        raw = raw.group(g.vertex_id(x.vertex), &x.label, &members);
    }
    Ok(raw
        .validate()
        .expect("C-saturation keeps every surviving group non-empty"))
}

/// All hereditary and C-saturated sets by subset enumeration; exponential,
/// intended for small graphs and cross-checks.
pub fn all_hs_sets(g: &SeparatedGraph) -> Vec<VertexSet> {
    let n = g.vertex_count();
    assert!(n <= 20, "subset enumeration is limited to 20 vertices");
    (0u32..(1u32 << n))
        .map(|mask| {
            (0..n)
                .filter(|&v| mask & (1 << v) != 0)
                .collect::<VertexSet>()
        })
        .filter(|h| is_hereditary(g, h) && is_c_saturated(g, h))
        .collect()
}

/// A plain directed multigraph, used for orientation outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirectedGraph {
    pub vertex_ids: Vec<String>,
    pub edge_ids: Vec<String>,
    pub src: Vec<usize>,
    pub rng: Vec<usize>,
}

impl DirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn in_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edge_count())
            .filter(|&e| self.rng[e] == v)
            .collect()
    }

    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edge_count())
            .filter(|&e| self.src[e] == v)
            .collect()
    }

    /// The graph as a trivially separated graph.
    pub fn to_separated(&self) -> SeparatedGraph {
        let mut raw = RawGraph::new("directed");
        raw.vertices = self.vertex_ids.clone();
        for e in 0..self.edge_count() {
            raw = raw.edge(
                &self.edge_ids[e],
                &self.vertex_ids[self.src[e]],
                &self.vertex_ids[self.rng[e]],
            );
        }
        raw.trivially_separated()
            .validate()
            .expect("directed graph is well formed")
    }

    pub fn is_acyclic(&self) -> bool {
        let n = self.vertex_count();
        let mut indeg = vec![0usize; n];
        for e in 0..self.edge_count() {
            indeg[self.rng[e]] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for e in self.out_edges(v) {
                indeg[self.rng[e]] -= 1;
                if indeg[self.rng[e]] == 0 {
                    stack.push(self.rng[e]);
                }
            }
        }
        seen == n
    }
}
