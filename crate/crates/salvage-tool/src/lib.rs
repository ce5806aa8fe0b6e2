//! Library surface of the CLI: problem files, the built-in gallery, the
//! pipeline runners, and the report shapes. The binary in `main.rs` is a
//! thin argument-parsing layer over these.

pub mod fixtures;
pub mod pipeline;
pub mod problem;
pub mod report;
