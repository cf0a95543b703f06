//! File formats and batch machinery behind the `jrp` binary.

pub mod bench;
pub mod format;
