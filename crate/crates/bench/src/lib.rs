//! Scalable graph families for the benchmarks.

use sepgraph::model::{RawGraph, SeparatedGraph};

/// One vertex with `loops` loops dealt round-robin into `groups` groups.
pub fn bouquet(loops: usize, groups: usize) -> SeparatedGraph {
    let mut raw = RawGraph::new(format!("bouquet{loops}x{groups}")).vertex("v");
    for i in 0..loops {
        raw = raw.labelled_edge(
            &format!("e{i}"),
            "v",
            "v",
            &format!("x{}", i % groups.max(1)),
        );
    }
    raw.validate().expect("bouquets are valid")
}

/// A bipartite fan: `sources` source vertices each sending one edge to a
/// single range vertex, the edges split evenly into `groups` groups.
pub fn fan(sources: usize, groups: usize) -> SeparatedGraph {
    let mut raw = RawGraph::new(format!("fan{sources}x{groups}")).vertex("v");
    for i in 0..sources {
        let u = format!("u{i}");
        raw = raw.vertex(&u).labelled_edge(
            &format!("f{i}"),
            &u,
            "v",
            &format!("x{}", i % groups.max(1)),
        );
    }
    raw.validate().expect("fans are valid")
}

/// A directed cycle on `n` vertices where every vertex also receives a
/// second edge from its successor, grouped with the cycle edge. Every
/// vertex then admits exactly one choice.
pub fn ladder(n: usize) -> SeparatedGraph {
    let n = n.max(1);
    let v = |i: usize| format!("v{}", i % n);
    let mut raw = RawGraph::new(format!("ladder{n}"));
    for i in 0..n {
        raw = raw.vertex(&v(i));
    }
    for i in 0..n {
        raw = raw
            .labelled_edge(&format!("c{i}"), &v(i), &v(i + 1), "a")
            .labelled_edge(&format!("d{i}"), &v(i + 2), &v(i + 1), "a");
    }
    raw.validate().expect("ladders are valid")
}
