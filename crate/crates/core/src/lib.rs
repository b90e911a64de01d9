//! Counting, bounding and sampling tools for copies of a fixed regular
//! pattern graph in sparse random graphs.

// negated float comparisons are used on purpose so that NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cores;
pub mod counting;
pub mod error;
pub mod graph;
pub mod pattern;
pub mod sampling;
pub mod spanned;
pub mod tail;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{edge, Edge, SimpleGraph};
pub use pattern::Pattern;
pub use sampling::{threshold_probability, GnpModel};
