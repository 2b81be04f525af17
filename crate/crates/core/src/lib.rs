//! Critical points of the oriented area on planar linkage configuration
//! spaces.

pub mod cli;
pub mod config;
pub mod critical;
pub mod geom;
pub mod graph;
pub mod morse;
pub mod oracle;
