pub mod algolib;
pub mod dsl;
pub mod harness;
pub mod metrics;
pub mod prompting;
pub mod taskgen;
