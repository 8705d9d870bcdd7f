//! File formats, execution modes and command-line plumbing for the
//! `zakgross-core` simulator.

pub mod circuit;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

pub use circuit::{emit_circuit, parse_circuit, CircuitSpec, SchemaError, SchemaErrors};
pub use run::{run, Mode, RunError, RunOptions, RunResult};
