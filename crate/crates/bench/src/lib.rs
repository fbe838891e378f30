//! Criterion benchmarks for the equivariance checks and the protocol
//! simulator live in `benches/`.
