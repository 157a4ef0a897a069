//! Criterion benchmarks for `jetsuita-core`; see `benches/`.
