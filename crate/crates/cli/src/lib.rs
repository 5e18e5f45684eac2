//! Problem-spec ingestion, task dispatch and report output for the
//! `sipframe` command-line tool.

pub mod emit;
pub mod error;
pub mod report;
pub mod run;
pub mod spec;

pub use emit::{emit, render, Format};
pub use error::CliError;
pub use report::Report;
pub use run::{run, RunOptions};
pub use spec::{ProblemSpec, Task};
