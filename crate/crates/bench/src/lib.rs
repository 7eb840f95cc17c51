//! Criterion benchmarks for `qet-core` live in `benches/`; run them with
//! `cargo bench -p qet-bench`.
