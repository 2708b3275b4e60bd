//! Criterion benchmarks for the analytic trainer live under `benches/`.
