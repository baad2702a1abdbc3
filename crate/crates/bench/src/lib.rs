//! Criterion benchmarks for the evaluation pipeline live in `benches/`.
