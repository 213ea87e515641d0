//! Small named graphs used throughout the tests, benches and docs.

use crate::model::{RawGraph, SeparatedGraph};

fn build(raw: RawGraph) -> SeparatedGraph {
    raw.validate().expect("fixture graphs are valid")
}

/// One vertex with a single loop.
pub fn z() -> SeparatedGraph {
    build(
        RawGraph::new("Z")
            .vertex("v")
            .labelled_edge("e", "v", "v", "a"),
    )
}

/// One vertex, two loops in one group.
pub fn k1() -> SeparatedGraph {
    build(
        RawGraph::new("K1")
            .vertex("v")
            .labelled_edge("e", "v", "v", "a")
            .labelled_edge("f", "v", "v", "a"),
    )
}

/// One vertex, two loops in separate groups.
pub fn f2() -> SeparatedGraph {
    build(
        RawGraph::new("F2")
            .vertex("v")
            .labelled_edge("e", "v", "v", "a")
            .labelled_edge("f", "v", "v", "b"),
    )
}

/// Four sources feeding `v`, split into the groups {f1, f4} and {f2, f3}.
pub fn s5() -> SeparatedGraph {
    build(
        RawGraph::new("S5")
            .vertices(&["u1", "u2", "u3", "u4", "v"])
            .labelled_edge("f1", "u1", "v", "a")
            .labelled_edge("f2", "u2", "v", "b")
            .labelled_edge("f3", "u3", "v", "b")
            .labelled_edge("f4", "u4", "v", "a"),
    )
}

pub fn l1() -> SeparatedGraph {
    build(
        RawGraph::new("L1")
            .vertices(&["u1", "u2", "u3"])
            .labelled_edge("x", "u1", "u2", "a")
            .labelled_edge("x'", "u1", "u2", "a")
            .labelled_edge("y", "u3", "u2", "b")
            .labelled_edge("y'", "u3", "u2", "b"),
    )
}

pub fn l2() -> SeparatedGraph {
    build(
        RawGraph::new("L2")
            .vertices(&["u1", "u2", "u3", "u4", "u5"])
            .labelled_edge("g", "u4", "u2", "a")
            .labelled_edge("h", "u5", "u2", "a")
            .labelled_edge("x", "u1", "u2", "b")
            .labelled_edge("x'", "u3", "u2", "b")
            .labelled_edge("e", "u4", "u5", "a")
            .labelled_edge("f", "u5", "u4", "a"),
    )
}

/// A loop at `v` sharing its group with two edges from `w`; `v` has one
/// choice and one base-simple cycle.
pub fn oc() -> SeparatedGraph {
    build(
        RawGraph::new("OC")
            .vertices(&["v", "w"])
            .labelled_edge("e", "v", "v", "a")
            .labelled_edge("a", "w", "v", "a")
            .labelled_edge("b", "w", "v", "a"),
    )
}

/// A loop at `w` reached from `v` by a tail `t`.
pub fn tail_loop() -> SeparatedGraph {
    build(
        RawGraph::new("TailLoop")
            .vertices(&["v", "w"])
            .labelled_edge("e", "w", "w", "a")
            .labelled_edge("t", "v", "w", "b"),
    )
}

pub fn all() -> Vec<SeparatedGraph> {
    vec![z(), k1(), f2(), s5(), l1(), l2(), oc(), tail_loop()]
}
