//! Library half of the command-line front end: the input document model,
//! report bodies, and error-to-exit-code mapping. The `biasbound` binary is
//! a thin clap wrapper over these.

pub mod error;
pub mod input;
pub mod report;
