//! Translation of constrained English descriptions of timed systems into
//! UPPAAL timed automata networks and verification queries.

pub mod builder;
pub mod diagnostics;
pub mod emitter;
pub mod frontend;
pub mod model;
pub mod reduction;
pub mod spec_compiler;
pub mod validate;
pub mod generate;
pub mod pipeline;
