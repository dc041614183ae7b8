//! Criterion benchmarks for `arclosure`; run `cargo bench -p arclosure-bench`.
