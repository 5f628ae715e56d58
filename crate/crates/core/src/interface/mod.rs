//! External surfaces: DIMACS, TPTP, the JSON report and the CLI.

pub mod cli;
pub mod dimacs;
pub mod report;
pub mod tptp;

pub use dimacs::{emit_dimacs, parse_dimacs, DimacsError};
pub use report::{render_text, verify_report, Report, ReportError, Verification, SCHEMA_VERSION};
pub use tptp::{emit_tptp, emit_tptp_problem, TptpError, TptpMode};
