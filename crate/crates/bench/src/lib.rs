//! Criterion benchmarks for dualhead-core live under `benches/`.
