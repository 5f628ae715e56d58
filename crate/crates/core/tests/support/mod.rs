//! Helpers shared by the integration tests. Nothing here calls into the
//! library's solver or generator.
#![allow(dead_code)]

pub mod oracle;
pub mod tptp_grammar;
