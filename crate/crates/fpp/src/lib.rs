//! A laboratory for Bernoulli first-passage percolation on the integer
//! lattice: each edge of `Z^d` carries a passage time that is 0 with
//! probability `p` and 1 otherwise, and the time constant is the asymptotic
//! cost per unit distance of crossing large boxes.
//!
//! The crate has two halves. [`estimate`] measures the time constant by
//! Monte Carlo over box-crossing times, with common-random-number coupling
//! across `p` so that monotonicity checks are pathwise exact. [`enumerate`]
//! works on boxes small enough to enumerate every configuration and verifies,
//! with exact integer polynomial arithmetic, the derivative identity for
//! increasing events, its pointwise pivotal-edge bounds, and the resulting
//! monotonicity of the normalized expected crossing time.
//!
//! Note the sign convention: `p` is the probability of a **zero** passage
//! time, so crossing gets cheaper as `p` grows.

pub mod cli;
pub mod enumerate;
pub mod estimate;
pub mod lattice;
pub mod passage;

pub use lattice::{
    build_geometry, sample_configuration, BoxGeometry, Configuration, EdgeId, LatticeError,
    RandomPlan, VertexId, Window,
};
pub use passage::{phi, shortest_passage, truncated_time, PassageQuery, PassageResult, QueryKind};
