//! Problem-file model, bundled fixture corpus, and report formatting
//! shared by the `pareto-tame` binary and its integration tests.

pub mod fixtures;
pub mod problem;
pub mod report;
