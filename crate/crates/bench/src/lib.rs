//! Criterion benchmarks for the parser; see `benches/pipeline.rs`.
