//! Criterion benchmarks for the core crate; see `benches/weil.rs`.
