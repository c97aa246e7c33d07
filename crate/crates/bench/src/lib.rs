//! Criterion benchmarks for the solver, dictionary and theory kernels; run
//! with `cargo bench -p robustfit-bench`.
