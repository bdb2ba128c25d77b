//! Criterion benchmarks for gelfand-core live in `benches/`; this library is empty.
