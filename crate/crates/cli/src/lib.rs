//! Batch front end: problem files in, canonical reports out.

pub mod emit;
pub mod problem;
pub mod run;

pub use emit::{canonical_json, emit, render, Format};
pub use problem::{parse_problem, parse_problem_str, resolve, ProblemFile, Resolved, ValidationError};
pub use run::{run, Report, RunError, RunOptions};
