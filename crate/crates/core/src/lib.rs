//! Decision procedures and constructions for finite separated graphs.
//!
//! A separated graph is a directed multigraph whose incoming edges are
//! partitioned into groups at every vertex. The crate validates such graphs,
//! works with their admissible paths, decides Conditions (C), (L) and (K),
//! builds orientations and degenerations to plain directed graphs, explores
//! finite-radius balls of the configuration space and combines all of this
//! into simplicity and exchange verdicts.
//!
//! ```
//! use sepgraph::{classify_exchange, fixtures};
//!
//! let report = classify_exchange(&fixtures::s5());
//! assert!(report.holds);
//! assert_eq!(report.degeneration.unwrap().steps, 1);
//! ```

pub mod classify;
pub mod conditions;
pub mod document;
pub mod fixtures;
pub mod model;
pub mod omega;
pub mod paths;
pub mod transforms;

pub use classify::{classify_exchange, classify_simplicity, ExchangeReport, SimplicityReport};
pub use conditions::{condition_c, condition_k, condition_l, ConditionVerdict};
pub use model::{RawGraph, SeparatedGraph};
pub use omega::{act, enumerate_balls, Ball};
pub use paths::{Path, Sym, Word};
