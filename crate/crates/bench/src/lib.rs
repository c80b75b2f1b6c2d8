//! Criterion benchmarks for the parse, select and codegen phases live in
//! `benches/pipeline.rs`; run them with `cargo bench -p slo-broker-bench`.
//! For the full scaling sweeps with CSV output use `slo-broker bench`.
