//! Simple random walks on graphs: exact return-time laws, electrical
//! network quantities, random regular expanders and Monte Carlo
//! experiments on the constructions that show the return-time bounds are
//! sharp.

pub mod electrical;
pub mod error;
pub mod exact;
pub mod expander;
pub mod graph;
pub mod montecarlo;

pub use error::{Error, Result};
pub use graph::{Graph, Vertex};
