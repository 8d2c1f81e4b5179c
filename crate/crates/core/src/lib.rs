//! Sequence-to-sequence AMR parsing toolkit.
//!
//! The crate covers the whole path from annotated corpus to evaluated parse:
//! Penman I/O ([`penman`]), bracket-paired linearization ([`linearize`]),
//! re-categorization and recovery ([`categorize`]), reference attention from
//! hard alignments ([`align`]), a from-scratch bi-LSTM attention model trained
//! with supervised attention ([`neural`]), and Smatch scoring ([`smatch`]).

pub mod align;
pub mod categorize;
pub mod corpus;
pub mod graph;
pub mod linearize;
pub mod neural;
pub mod penman;
pub mod smatch;
pub mod synth;

pub use graph::{graph_triples, AmrGraph, Edge, GraphElement, Node, NodeId, Target, Triple};
pub use linearize::{delinearize, linearize, repair_brackets, LinToken, TokenSeq};
pub use penman::{emit_penman, parse_penman};
