//! Graph generators and brute-force oracles shared by the integration tests.
//! The oracles work from the raw edge and group data of a graph and do not
//! call the path or ball machinery of the crate.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sepgraph::model::{RawGraph, SeparatedGraph};
use sepgraph::paths::{Sym, Word};

/// Splits `items` into groups: every set partition, in a fixed order.
pub fn partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for p in partitions(rest) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].insert(0, first);
            out.push(q);
        }
        let mut q = p;
        q.push(vec![first]);
        out.push(q);
    }
    out
}

/// Builds a graph from `(source, range)` pairs and, per vertex, a partition
/// of its incoming edges.
pub fn build(n: usize, edges: &[(usize, usize)], groups: &[Vec<Vec<usize>>]) -> SeparatedGraph {
    let mut raw = RawGraph::new("g");
    for v in 0..n {
        raw = raw.vertex(&format!("v{v}"));
    }
    for (i, &(s, r)) in edges.iter().enumerate() {
        raw = raw.edge(&format!("e{i}"), &format!("v{s}"), &format!("v{r}"));
    }
    for (v, parts) in groups.iter().enumerate() {
        for (k, part) in parts.iter().enumerate() {
            let members: Vec<String> = part.iter().map(|e| format!("e{e}")).collect();
            let refs: Vec<&str> = members.iter().map(|s| s.as_str()).collect();
            raw = raw.group(&format!("v{v}"), &format!("x{k}"), &refs);
        }
    }
    raw.validate().expect("generated graphs are valid")
}

fn in_edges(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut ins = vec![Vec::new(); n];
    for (i, &(_, r)) in edges.iter().enumerate() {
        ins[r].push(i);
    }
    ins
}

/// Every separation of every multigraph on `1..=max_v` vertices with at
/// most `max_e` edges (edge lists taken as sorted multisets).
pub fn exhaustive(max_v: usize, max_e: usize) -> Vec<SeparatedGraph> {
    let mut out = Vec::new();
    for n in 1..=max_v {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|s| (0..n).map(move |r| (s, r))).collect();
        let mut lists: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier = lists.clone();
        for _ in 0..max_e {
            let mut next = Vec::new();
            for l in &frontier {
                let from = l.last().copied().unwrap_or(0);
                for p in from..pairs.len() {
                    let mut m = l.clone();
                    m.push(p);
                    next.push(m);
                }
            }
            lists.extend(next.iter().cloned());
            frontier = next;
        }
        for l in lists {
            let edges: Vec<(usize, usize)> = l.iter().map(|&p| pairs[p]).collect();
            let ins = in_edges(n, &edges);
            let per_vertex: Vec<Vec<Vec<Vec<usize>>>> = ins.iter().map(|i| partitions(i)).collect();
            let mut idx = vec![0usize; n];
            loop {
                let groups: Vec<Vec<Vec<usize>>> =
                    (0..n).map(|v| per_vertex[v][idx[v]].clone()).collect();
                out.push(build(n, &edges, &groups));
                let mut k = 0;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < per_vertex[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
    }
    out
}

fn random_partition(rng: &mut ChaCha8Rng, items: &[usize]) -> Vec<Vec<usize>> {
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for &e in items {
        let k = rng.gen_range(0..=parts.len());
        if k == parts.len() {
            parts.push(vec![e]);
        } else {
            parts[k].push(e);
        }
    }
    parts
}

/// A random separated graph with `1..=max_v` vertices and `0..=max_e` edges.
pub fn random_graph(rng: &mut ChaCha8Rng, max_v: usize, max_e: usize) -> SeparatedGraph {
    let n = rng.gen_range(1..=max_v);
    let m = rng.gen_range(0..=max_e);
    let edges: Vec<(usize, usize)> = (0..m)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let groups: Vec<Vec<Vec<usize>>> = in_edges(n, &edges)
        .iter()
        .map(|i| random_partition(rng, i))
        .collect();
    build(n, &edges, &groups)
}

/// Each item joins one of at most two groups.
fn random_pair_partition(rng: &mut ChaCha8Rng, items: &[usize]) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(), Vec::new()];
    for &e in items {
        parts[rng.gen_range(0..2)].push(e);
    }
    parts.retain(|p| !p.is_empty());
    parts
}

/// A random bipartite graph: `1..=max_r` range vertices, each with at least
/// one incoming edge from `1..=max_s` sources, and at most two groups at
/// every range vertex.
pub fn random_bipartite(
    rng: &mut ChaCha8Rng,
    max_s: usize,
    max_r: usize,
    max_e: usize,
) -> SeparatedGraph {
    let s = rng.gen_range(1..=max_s);
    let r = rng.gen_range(1..=max_r);
    let n = s + r;
    let m = rng.gen_range(r..=max_e.max(r));
    let edges: Vec<(usize, usize)> = (0..m)
        .map(|i| {
            let range = if i < r {
                s + i
            } else {
                s + rng.gen_range(0..r)
            };
            (rng.gen_range(0..s), range)
        })
        .collect();
    let groups: Vec<Vec<Vec<usize>>> = in_edges(n, &edges)
        .iter()
        .map(|i| random_pair_partition(rng, i))
        .collect();
    build(n, &edges, &groups)
}

/// A random bipartite graph whose underlying undirected graph is a tree on
/// `2..=max_n` vertices. Each tree edge is doubled with probability one
/// half, the copy sharing its group, and the edge bundles at every range
/// vertex are split into at most two groups.
pub fn random_bipartite_tree(rng: &mut ChaCha8Rng, max_n: usize) -> SeparatedGraph {
    let n = rng.gen_range(2..=max_n);
    // Vertex 0 is a source; sides alternate along the tree.
    let mut side = vec![0usize];
    let mut edges = Vec::new();
    let mut bundles: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for v in 1..n {
        // Attaching to range vertices more often gives them several groups.
        let ranges: Vec<usize> = (0..v).filter(|&u| side[u] == 1).collect();
        let u = if !ranges.is_empty() && rng.gen_bool(0.6) {
            ranges[rng.gen_range(0..ranges.len())]
        } else {
            rng.gen_range(0..v)
        };
        side.push(1 - side[u]);
        let (s, r) = if side[u] == 0 { (u, v) } else { (v, u) };
        let copies = rng.gen_range(1..=2);
        let bundle: Vec<usize> = (0..copies).map(|i| edges.len() + i).collect();
        for _ in 0..copies {
            edges.push((s, r));
        }
        bundles[r].push(bundle);
    }
    let groups: Vec<Vec<Vec<usize>>> = bundles
        .iter()
        .map(|b| {
            let mut parts = vec![Vec::new(), Vec::new()];
            for bundle in b {
                parts[rng.gen_range(0..2)].extend_from_slice(bundle);
            }
            parts.retain(|p: &Vec<usize>| !p.is_empty());
            parts
        })
        .collect();
    build(n, &edges, &groups)
}

fn same_group(g: &SeparatedGraph, e: usize, f: usize) -> bool {
    g.groups()
        .iter()
        .any(|x| x.members.contains(&e) && x.members.contains(&f))
}

fn letter_start(g: &SeparatedGraph, s: Sym) -> usize {
    if s.inverse {
        g.range(s.edge)
    } else {
        g.source(s.edge)
    }
}

fn letter_end(g: &SeparatedGraph, s: Sym) -> usize {
    if s.inverse {
        g.source(s.edge)
    } else {
        g.range(s.edge)
    }
}

/// Two letters may follow each other in an admissible path: they compose,
/// do not cancel, and an edge followed by an inverse edge never stays inside
/// one group.
pub fn oracle_step(g: &SeparatedGraph, a: Sym, b: Sym) -> bool {
    letter_end(g, a) == letter_start(g, b)
        && !(a.edge == b.edge && a.inverse != b.inverse)
        && !(!a.inverse && b.inverse && same_group(g, a.edge, b.edge))
}

pub fn oracle_admissible(g: &SeparatedGraph, w: &[Sym]) -> bool {
    w.windows(2).all(|p| oracle_step(g, p[0], p[1]))
}

pub fn letters(g: &SeparatedGraph) -> Vec<Sym> {
    (0..g.edge_count())
        .flat_map(|e| {
            [
                Sym {
                    edge: e,
                    inverse: false,
                },
                Sym {
                    edge: e,
                    inverse: true,
                },
            ]
        })
        .collect()
}

fn group_size(g: &SeparatedGraph, e: usize) -> usize {
    g.groups()
        .iter()
        .find(|x| x.members.contains(&e))
        .map_or(0, |x| x.members.len())
}

/// Lengths of all choice connectors `x · α · y^-1` with `|α| ≤ max_len`.
/// Admissibility only looks at neighbouring letters, so the words of each
/// length are tracked by their last letter.
pub fn connector_lengths(g: &SeparatedGraph, max_len: usize) -> BTreeSet<usize> {
    let wide: Vec<usize> = (0..g.edge_count())
        .filter(|&e| group_size(g, e) >= 2)
        .collect();
    let mut found = BTreeSet::new();
    let mut layer: BTreeSet<Sym> = wide
        .iter()
        .map(|&x| Sym {
            edge: x,
            inverse: false,
        })
        .collect();
    for len in 0..=max_len {
        if layer.iter().any(|&last| {
            wide.iter().any(|&y| {
                oracle_step(
                    g,
                    last,
                    Sym {
                        edge: y,
                        inverse: true,
                    },
                )
            })
        }) {
            found.insert(len);
        }
        layer = layer
            .iter()
            .flat_map(|&last| {
                letters(g)
                    .into_iter()
                    .filter(move |&s| oracle_step(g, last, s))
            })
            .collect();
    }
    found
}

/// `x · path · y^-1` is a choice connector.
pub fn oracle_connector(g: &SeparatedGraph, x: usize, path: &[Sym], y: usize) -> bool {
    let mut w = vec![Sym {
        edge: x,
        inverse: false,
    }];
    w.extend_from_slice(path);
    w.push(Sym {
        edge: y,
        inverse: true,
    });
    group_size(g, x) >= 2 && group_size(g, y) >= 2 && oracle_admissible(g, &w)
}

/// A set of letters is a full local configuration at some vertex: all edges
/// leaving it plus exactly one inverse from each group there.
fn config_vertex(g: &SeparatedGraph, set: &BTreeSet<Sym>) -> Vec<usize> {
    (0..g.vertex_count())
        .filter(|&v| {
            let plain: BTreeSet<usize> =
                set.iter().filter(|s| !s.inverse).map(|s| s.edge).collect();
            let outs: BTreeSet<usize> = (0..g.edge_count()).filter(|&e| g.source(e) == v).collect();
            if plain != outs {
                return false;
            }
            let inv: Vec<usize> = set.iter().filter(|s| s.inverse).map(|s| s.edge).collect();
            let groups: Vec<&Vec<usize>> = g
                .groups()
                .iter()
                .filter(|x| x.vertex == v)
                .map(|x| &x.members)
                .collect();
            inv.len() == groups.len()
                && groups
                    .iter()
                    .all(|m| inv.iter().filter(|e| m.contains(e)).count() == 1)
                && inv.iter().all(|&e| g.range(e) == v)
        })
        .collect()
}

fn is_isolated(g: &SeparatedGraph, v: usize) -> bool {
    (0..g.edge_count()).all(|e| g.source(e) != v && g.range(e) != v)
}

fn subsets(items: &[Sym]) -> Vec<BTreeSet<Sym>> {
    (0u32..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &s)| s)
                .collect()
        })
        .collect()
}

/// Radius-`r` balls as `(root, elements)`, by search over prefix-closed sets
/// of reduced words: every element shorter than `r` must see exactly a full
/// local configuration, with the letter leading back included.
pub fn brute_balls(g: &SeparatedGraph, r: usize) -> BTreeSet<(usize, BTreeSet<Word>)> {
    let all = letters(g);
    let mut out = BTreeSet::new();
    for v in 0..g.vertex_count() {
        if is_isolated(g, v) {
            out.insert((v, BTreeSet::from([Vec::new()])));
        }
    }
    // Each state is a prefix-closed set with a queue of elements still to be
    // given their children, shortest first.
    fn extend(
        g: &SeparatedGraph,
        all: &[Sym],
        r: usize,
        root: usize,
        set: BTreeSet<Word>,
        mut queue: Vec<Word>,
        out: &mut BTreeSet<(usize, BTreeSet<Word>)>,
    ) {
        let Some(alpha) = queue.pop() else {
            out.insert((root, set));
            return;
        };
        let back = alpha.last().map(|s| Sym {
            edge: s.edge,
            inverse: !s.inverse,
        });
        let open: Vec<Sym> = all.iter().copied().filter(|&s| Some(s) != back).collect();
        for children in subsets(&open) {
            let mut seen = children.clone();
            seen.extend(back);
            let vs = config_vertex(g, &seen);
            if vs.is_empty() || (alpha.is_empty() && !vs.contains(&root)) {
                continue;
            }
            let mut set = set.clone();
            let mut queue = queue.clone();
            for &s in &children {
                let mut w = alpha.clone();
                w.push(s);
                set.insert(w.clone());
                if w.len() < r {
                    queue.insert(0, w);
                }
            }
            extend(g, all, r, root, set, queue, out);
        }
    }
    for v in (0..g.vertex_count()).filter(|&v| !is_isolated(g, v)) {
        let start = BTreeSet::from([Vec::new()]);
        if r == 0 {
            out.insert((v, start));
        } else {
            extend(g, &all, r, v, start, vec![Vec::new()], &mut out);
        }
    }
    out
}

/// `σ` admits a choice: it begins an admissible path that can be followed
/// by `x^-1` with `|[x]| ≥ 2`; an inverse `e^-1` also admits one when
/// `|[e]| ≥ 2`.
pub fn oracle_admits(g: &SeparatedGraph, s: Sym) -> bool {
    if s.inverse && group_size(g, s.edge) >= 2 {
        return true;
    }
    let wide: Vec<usize> = (0..g.edge_count())
        .filter(|&e| group_size(g, e) >= 2)
        .collect();
    // Paths longer than the number of letters repeat a letter and can be
    // shortened, so this bound is exhaustive.
    let limit = 2 * g.edge_count();
    let mut seen = BTreeSet::new();
    let mut stack = vec![(s, 1usize)];
    while let Some((last, len)) = stack.pop() {
        if wide.iter().any(|&x| {
            oracle_step(
                g,
                last,
                Sym {
                    edge: x,
                    inverse: true,
                },
            )
        }) {
            return true;
        }
        if len < limit {
            for t in letters(g) {
                if oracle_step(g, last, t) && seen.insert(t) {
                    stack.push((t, len + 1));
                }
            }
        }
    }
    false
}

pub fn oracle_choices(g: &SeparatedGraph, v: usize) -> usize {
    let edges = (0..g.edge_count()).filter(|&e| {
        g.source(e) == v
            && oracle_admits(
                g,
                Sym {
                    edge: e,
                    inverse: false,
                },
            )
    });
    let groups = g.groups().iter().filter(|x| {
        x.vertex == v
            && x.members.iter().any(|&e| {
                oracle_admits(
                    g,
                    Sym {
                        edge: e,
                        inverse: true,
                    },
                )
            })
    });
    edges.count() + groups.count()
}

/// Simple cycles based at `v`: admissible closed words meeting no vertex
/// twice before returning, whose square is admissible.
pub fn oracle_simple_cycles(g: &SeparatedGraph, v: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut stack: Vec<(Word, Vec<usize>)> = vec![(Vec::new(), vec![v])];
    while let Some((w, visited)) = stack.pop() {
        for s in letters(g) {
            if letter_start(g, s) != *visited.last().unwrap() {
                continue;
            }
            if let Some(&last) = w.last() {
                if !oracle_step(g, last, s) {
                    continue;
                }
            }
            let end = letter_end(g, s);
            let mut next = w.clone();
            next.push(s);
            if end == v {
                if oracle_step(g, s, next[0]) {
                    out.push(next);
                }
            } else if !visited.contains(&end) {
                let mut vis = visited.clone();
                vis.push(end);
                stack.push((next, vis));
            }
        }
    }
    out
}

/// Some simple cycle passes through a vertex without choices.
pub fn oracle_choice_free_cycle(g: &SeparatedGraph) -> bool {
    (0..g.vertex_count())
        .any(|v| oracle_choices(g, v) == 0 && !oracle_simple_cycles(g, v).is_empty())
}
