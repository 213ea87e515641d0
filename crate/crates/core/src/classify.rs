//! Simplicity and exchange verdicts, assembled from the other modules.

use serde::Serialize;
use thiserror::Error;

use crate::conditions::{
    classical_condition_k, classical_simple, condition_c, condition_k, ConditionVerdict,
};
use crate::model::{hs_is_trivial, DirectedGraph, HsTriviality, SeparatedGraph, VertexSet};
use crate::omega::{
    fixed_point, isolated_witness, FixedBallCertificate, IsolationCertificate, PeriodicConfig,
};
use crate::paths::{
    base_simple_census, choice_report, forced_unreachable_set, on_cycle, simple_closed_census,
    BaseSimple, Path,
};
use crate::transforms::{
    apply_orientation, degenerate, degenerate_amplified, find_orientation, DegenerationResult,
    Orientation, DEFAULT_BLOWUP_CAP,
};

/// Radius of the fixed-ball certificates attached to category (i) failures.
pub const WITNESS_RADIUS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
pub enum ClassifyError {
    #[error("the graph has no vertices")]
    EmptyGraph,
}

/// Simplicity flags for the five algebras attached to the graph: the
/// Leavitt path algebra, its abelianized (tame) quotient, the full
/// C*-algebra, the tame C*-algebra and its reduced version.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlgebraFlags {
    pub leavitt: bool,
    pub leavitt_tame: bool,
    pub full_cstar: bool,
    pub tame_cstar: bool,
    pub reduced_tame_cstar: bool,
}

impl AlgebraFlags {
    fn all(b: bool) -> Self {
        AlgebraFlags {
            leavitt: b,
            leavitt_tame: b,
            full_cstar: b,
            tame_cstar: b,
            reduced_tame_cstar: b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SimplicityCase {
    NotSimpleOrUnknown {
        reasons: Vec<String>,
    },
    /// Every cycle admits exactly one choice.
    Case1 {
        orientation: Orientation,
        directed: DirectedGraph,
        classical_simple: bool,
    },
    /// A vertex without choices and exactly one simple closed path.
    Case2 {
        vertex: usize,
        closed_path: Path,
        orientation: Option<Orientation>,
        directed: Option<DirectedGraph>,
    },
    /// A vertex without choices and at least two simple closed paths.
    Case3 {
        vertex: usize,
        rank_class: usize,
        closed_paths: Vec<Path>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicityReport {
    pub condition_c: ConditionVerdict,
    pub hs_trivial: HsTriviality,
    pub case: SimplicityCase,
    pub flags: AlgebraFlags,
    pub notes: Vec<String>,
}

impl SimplicityReport {
    pub fn case_number(&self) -> Option<u8> {
        match self.case {
            SimplicityCase::NotSimpleOrUnknown { .. } => None,
            SimplicityCase::Case1 { .. } => Some(1),
            SimplicityCase::Case2 { .. } => Some(2),
            SimplicityCase::Case3 { .. } => Some(3),
        }
    }
}

/// The least vertex without choices that carries a closed path.
fn no_choice_cycle_vertex(g: &SeparatedGraph) -> Option<usize> {
    let report = choice_report(g);
    g.vertices()
        .find(|&v| report.count(v) == 0 && on_cycle(g, v).is_some())
}

pub fn classify_simplicity(g: &SeparatedGraph) -> Result<SimplicityReport, ClassifyError> {
    if g.vertex_count() == 0 {
        return Err(ClassifyError::EmptyGraph);
    }
    let c = condition_c(g);
    let hs = hs_is_trivial(g).map_err(|_| ClassifyError::EmptyGraph)?;
    let mut notes = Vec::new();
    if !c.holds || !hs.trivial {
        let mut reasons = Vec::new();
        if !c.holds {
            reasons.push(c.describe(g));
        }
        if let Some(w) = &hs.witness {
            reasons.push(format!(
                "non-trivial hereditary C-saturated set {{{}}}",
                g.vertex_names(w).join(", ")
            ));
        }
        notes.push("the partial action is not minimal, so none of the algebras is simple".into());
        return Ok(SimplicityReport {
            condition_c: c,
            hs_trivial: hs,
            case: SimplicityCase::NotSimpleOrUnknown { reasons },
            flags: AlgebraFlags::all(false),
            notes,
        });
    }
    let (case, flags) = match no_choice_cycle_vertex(g) {
        None => {
            let orientation = find_orientation(g)
                .expect("Condition (C) holds and no vertex without choices lies on a cycle");
            let directed = apply_orientation(g, &orientation).expect("orientation was verified");
            let simple = classical_simple(&directed);
            notes.push("isomorphic to the graph algebras of the oriented graph".into());
            if !simple {
                notes.push(
                    "consistency check failed: the oriented graph is not classically simple".into(),
                );
            }
            (
                SimplicityCase::Case1 {
                    orientation,
                    directed,
                    classical_simple: simple,
                },
                AlgebraFlags::all(simple),
            )
        }
        Some(v) => {
            let census = simple_closed_census(g, v).expect("vertex admits no choices");
            if census.count == 1 {
                let orientation = find_orientation(g).ok();
                let directed = orientation
                    .as_ref()
                    .and_then(|o| apply_orientation(g, o).ok());
                notes.push("Morita equivalent to Laurent polynomials, respectively C(T)".into());
                let closed_path = census.witnesses[0].clone();
                (
                    SimplicityCase::Case2 {
                        vertex: v,
                        closed_path,
                        orientation,
                        directed,
                    },
                    AlgebraFlags::all(false),
                )
            } else {
                notes.push("Morita equivalent to the full and reduced group algebras of a free group of rank at least two".into());
                let flags = AlgebraFlags {
                    reduced_tame_cstar: true,
                    ..AlgebraFlags::all(false)
                };
                (
                    SimplicityCase::Case3 {
                        vertex: v,
                        rank_class: census.rank_class(),
                        closed_paths: census.witnesses,
                    },
                    flags,
                )
            }
        }
    };
    Ok(SimplicityReport {
        condition_c: c,
        hs_trivial: hs,
        case,
        flags,
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExchangeWitness {
    /// (i) A vertex without choices on a cycle, with the rank class of its
    /// group of closed paths and the unique ball there.
    NoChoice {
        vertex: usize,
        cycle: Path,
        rank_class: usize,
        fixed_ball: Option<FixedBallCertificate>,
    },
    /// (ii) A hereditary C-saturated set whose quotient puts the vertex on a
    /// cycle without choices.
    Quotient {
        vertex: usize,
        hereditary: Option<VertexSet>,
        error: Option<String>,
    },
    /// (iii) A periodic configuration isolated in its orbit closure, up to
    /// the certificate radius.
    Isolated {
        vertex: usize,
        config: Option<PeriodicConfig>,
        certificate: Option<IsolationCertificate>,
    },
}

impl ExchangeWitness {
    pub fn verify(&self, g: &SeparatedGraph) -> bool {
        let report = choice_report(g);
        match self {
            ExchangeWitness::NoChoice {
                vertex,
                cycle,
                rank_class,
                fixed_ball,
            } => {
                report.count(*vertex) == 0
                    && cycle.start == *vertex
                    && cycle.is_cycle(g)
                    && simple_closed_census(g, *vertex).is_ok_and(|c| c.rank_class() == *rank_class)
                    && fixed_ball
                        .as_ref()
                        .is_none_or(|f| f.vertex == *vertex && f.verify(g))
            }
            ExchangeWitness::Quotient {
                vertex, hereditary, ..
            } => match hereditary {
                Some(h) => {
                    let Ok(q) = crate::model::quotient(g, h) else {
                        return false;
                    };
                    let Some(qv) = q.vertex_index(g.vertex_id(*vertex)) else {
                        return false;
                    };
                    report.count(*vertex) == 1
                        && choice_report(&q).count(qv) == 0
                        && on_cycle(&q, qv).is_some()
                }
                None => false,
            },
            ExchangeWitness::Isolated {
                vertex,
                config,
                certificate,
            } => {
                report.count(*vertex) >= 2
                    && match (config, certificate) {
                        (Some(p), Some(c)) => p
                            .certificate(g, c.radius)
                            .is_ok_and(|again| again == *c && c.holds),
                        _ => false,
                    }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExchangeFailure {
    /// 1, 2 or 3 for categories (i), (ii), (iii).
    pub category: u8,
    /// Every vertex on a cycle that violates Condition (K), with its category.
    pub applicable: Vec<(usize, u8)>,
    pub witness: ExchangeWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExchangeReport {
    pub condition_k: ConditionVerdict,
    pub holds: bool,
    pub essentially_free: bool,
    pub exchange: bool,
    pub real_rank_zero: bool,
    pub degeneration: Option<DegenerationResult>,
    pub degeneration_error: Option<String>,
    /// Whether the degenerate graph satisfies classical Condition (K).
    pub classical_k: Option<bool>,
    pub failure: Option<ExchangeFailure>,
    pub notes: Vec<String>,
}

fn category(g: &SeparatedGraph, count: usize, v: usize) -> Option<u8> {
    match count {
        0 => Some(1),
        1 => match base_simple_census(g, v) {
            BaseSimple::TwoOrMore(..) => None,
            _ => Some(2),
        },
        _ => Some(3),
    }
}

fn witness(g: &SeparatedGraph, v: usize, cat: u8) -> ExchangeWitness {
    match cat {
        1 => {
            let cycle = on_cycle(g, v).expect("vertex lies on a cycle");
            let rank_class = simple_closed_census(g, v)
                .map(|c| c.rank_class())
                .unwrap_or(0);
            let fixed_ball =
                fixed_point(g, Some(v), WITNESS_RADIUS).map(|ball| FixedBallCertificate {
                    vertex: v,
                    cycle: cycle.clone(),
                    ball,
                });
            ExchangeWitness::NoChoice {
                vertex: v,
                cycle,
                rank_class,
                fixed_ball,
            }
        }
        2 => match forced_unreachable_set(g, v) {
            Ok(h) => ExchangeWitness::Quotient {
                vertex: v,
                hereditary: Some(h.members),
                error: None,
            },
            Err(e) => ExchangeWitness::Quotient {
                vertex: v,
                hereditary: None,
                error: Some(e.to_string()),
            },
        },
        _ => {
            let (config, certificate) = isolated_witness(g).unzip();
            ExchangeWitness::Isolated {
                vertex: v,
                config,
                certificate,
            }
        }
    }
}

pub fn classify_exchange(g: &SeparatedGraph) -> ExchangeReport {
    classify_exchange_with_cap(g, DEFAULT_BLOWUP_CAP)
}

pub fn classify_exchange_with_cap(g: &SeparatedGraph, cap: usize) -> ExchangeReport {
    let k = condition_k(g);
    let mut notes = Vec::new();
    if k.holds {
        let direct = g.is_bipartite() || choice_report(g).condition_c();
        let result = if direct {
            degenerate(g, cap)
        } else {
            degenerate_amplified(g, cap)
        };
        if !direct {
            notes.push("degeneration runs through the bipartite replacement; the result describes the 2x2 matrix amplification".into());
        }
        notes.push("the tame algebras are separative".into());
        let (degeneration, degeneration_error) = match result {
            Ok(d) => (Some(d), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let classical_k = degeneration
            .as_ref()
            .map(|d| classical_condition_k(&d.directed).is_ok());
        return ExchangeReport {
            condition_k: k,
            holds: true,
            essentially_free: true,
            exchange: true,
            real_rank_zero: true,
            degeneration,
            degeneration_error,
            classical_k,
            failure: None,
            notes,
        };
    }
    let report = choice_report(g);
    let applicable: Vec<(usize, u8)> = g
        .vertices()
        .filter(|&v| on_cycle(g, v).is_some())
        .filter_map(|v| category(g, report.count(v), v).map(|c| (v, c)))
        .collect();
    let &(v, cat) = applicable
        .iter()
        .min_by_key(|(v, c)| (*c, *v))
        .expect("Condition (K) fails at some cycle vertex");
    let witness = witness(g, v, cat);
    if let ExchangeWitness::Isolated { config: None, .. } = &witness {
        notes.push("no isolated periodic configuration was certified at the default radius".into());
    }
    ExchangeReport {
        condition_k: k,
        holds: false,
        essentially_free: false,
        exchange: false,
        real_rank_zero: false,
        degeneration: None,
        degeneration_error: None,
        classical_k: None,
        failure: Some(ExchangeFailure {
            category: cat,
            applicable,
            witness,
        }),
        notes,
    }
}
