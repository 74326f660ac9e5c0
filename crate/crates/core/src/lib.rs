//! Sparse embedding-layer training primitives and the performance models
//! built around them.
//!
//! The crate is split by concern:
//!
//! * [`kernels`]: gather-reduce, gradient expand/coalesce, tensor casting,
//!   casted gather-reduce and gradient scatter.
//! * [`optim`]: sparse SGD, Adagrad and RMSprop row updates.
//! * [`traffic`]: analytical byte accounting per primitive, plus the counter
//!   probe the kernels report into.
//! * [`nmpsim`]: rank-interleaved near-memory gather/scatter timing.
//! * [`pipeline`]: per-iteration execution timelines for the four system
//!   designs.
//! * [`workload`]: model configurations, lookup distributions and index
//!   generation.

pub mod error;
pub mod kernels;
pub mod nmpsim;
pub mod optim;
pub mod pipeline;
pub mod tensor;
pub mod traffic;
pub mod workload;

pub use error::{Error, Result};
pub use kernels::{CastedIndex, CoalescedGradients, LookupIndex};
pub use tensor::{EmbeddingTable, GradientBatch, Matrix};
