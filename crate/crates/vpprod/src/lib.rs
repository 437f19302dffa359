//! Visibly pushdown product programs for relational verification of recursive programs.

pub mod chc;
pub mod concurrency;
pub mod frontend;
pub mod gen;
pub mod oracle;
pub mod orders;
pub mod pipeline;
pub mod reductions;
pub mod vpl;
