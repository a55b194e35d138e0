//! Workflow files, CLI plumbing, the conformance suite and leakage demos on
//! top of [`leakguard_core`].

pub mod conformance;
pub mod demo;
pub mod io;
pub mod report;
pub mod run;
pub mod spec;
pub mod synth;

pub use conformance::{run_conformance, run_conformance_with, Check, ConformanceReport};
pub use demo::{demo_leakage, Arm, DemoKind, DemoReport};
pub use report::{exit_code, GuardEvent, Mode, Output, RunError, RunReport, EXIT_DATA, EXIT_GUARD, EXIT_OK, EXIT_SPEC};
pub use run::{run_text, run_text_on, run_workflow, run_workflow_in};
pub use spec::WorkflowSpec;
