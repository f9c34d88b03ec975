//! Benchmark harness for the `digits` search engine: benchmark spec files,
//! generators for the shipped benchmark suites, and the experiment runner
//! that produces the report/CSV artifacts.

pub mod bench;
