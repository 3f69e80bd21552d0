//! Instance generators, reference fixtures, batch runner and diagnostics.

pub mod batch;
pub mod fixtures;
pub mod gen;
pub mod svg;
