//! Criterion benchmarks for `udisc`; see `benches/kernels.rs`.
