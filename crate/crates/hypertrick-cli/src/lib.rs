//! Standard-library companion to `hypertrick-core`: file formats, the
//! subprocess orchestrator, and the command implementations behind the
//! `hypertrick` binary.

pub mod commands;
pub mod io;
pub mod orchestrator;
