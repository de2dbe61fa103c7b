//! Criterion benchmarks for the correlation-tensor and trace-identity engines; see `benches/`.
