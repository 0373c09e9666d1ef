//! Equality-saturation optimizer for a stateful streaming-dataflow term
//! language.
//!
//! Programs are trees of dataflow operators (`persist`, `delta`, `old`,
//! `prev`, `chain`, `cross`, `join`, `map`, `filter`) over named source
//! streams. Local rewrite rules are saturated in an e-graph, and a
//! delta-weighted cost model extracts an incremental form. The [`interp`]
//! module gives the operators a reference tick-by-tick semantics that every
//! rewrite is checked against.

pub mod diamond;
pub mod egraph;
pub mod extract;
pub mod interp;
pub mod ir;
pub mod optimize;
pub mod rules;
pub mod sexp;

pub use egraph::{EGraph, Id, Limits, Pattern, Rewrite, SaturationReport, StopReason};
pub use extract::{extract_best, term_cost, CostModel};
pub use interp::{equivalent, random_trace, run, Mode, TickTrace, UdfRegistry};
pub use ir::{parse_program, parse_term, print_term, Op, ProgramFile, Term, Value};
pub use rules::RuleSet;
