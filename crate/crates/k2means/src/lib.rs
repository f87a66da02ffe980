//! Fast and accurate large-scale k-means clustering.
//!
//! The crate provides four clustering engines over dense f64 data — Lloyd,
//! Elkan (triangle-inequality accelerated, exact), MiniBatch, and k2-means
//! (neighborhood-restricted assignment with triangle-inequality bounds) —
//! together with three initializers (uniform random, k-means++ D^2 seeding,
//! and greedy divisive initialization built on projective splits).
//!
//! Every engine and initializer charges its work to an [`OpCounter`] in
//! whole vector operations (distances, inner products, additions, plus a
//! fractional sort charge), so methods implemented with different inner
//! loops can be compared by counted work rather than wall time. The
//! [`bench`] module builds on that: it measures how many counted operations
//! each method needs to reach a reference energy and emits machine-readable
//! reports.

pub mod bench;
pub mod counter;
pub mod data;
pub mod engines;
pub mod init;
pub mod io;
pub mod metric;
pub mod state;
pub mod trace;

pub use counter::OpCounter;
pub use data::{DataError, Dataset};
pub use engines::{EngineConfig, EngineError, EngineRun, IterOps};
pub use init::{InitError, SplitResult};
pub use metric::{cluster_energy, energy, squared_distance};
pub use state::ClusterState;
pub use trace::{Trace, TraceSample};
