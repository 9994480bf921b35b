//! Benchmark-only crate; see `benches/skg.rs`.
