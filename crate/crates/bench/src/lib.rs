//! Criterion benchmarks for `antiphase-core`; see `benches/stability.rs`.
//! Run with `cargo bench -p antiphase-bench`.
