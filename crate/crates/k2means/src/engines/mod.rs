//! Clustering engines: Lloyd, Elkan, MiniBatch and k2-means.
//!
//! Every engine consumes an initialized [`ClusterState`], charges its work to
//! an [`OpCounter`] and emits a per-iteration [`Trace`]. Lloyd, Elkan and
//! k2-means share one iteration contract: a full iteration is an assignment
//! step followed by a mean update, the run stops once an iteration neither
//! reassigns a point nor moves a center, and the trace energy is exact and
//! non-increasing. Elkan is an exact acceleration of Lloyd; k2-means with
//! `k_n = k` degenerates to Lloyd as well.

mod elkan;
mod k2;
mod lloyd;
mod minibatch;

pub use elkan::run_elkan;
pub use k2::run_k2means;
pub use lloyd::run_lloyd;
pub use minibatch::run_minibatch;

use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::state::ClusterState;
use crate::trace::Trace;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("k_n = {k_n} must satisfy 1 <= k_n <= k = {k}")]
    InvalidNeighborhood { k_n: usize, k: usize },
    #[error("max_iters must be at least 1")]
    ZeroIters,
    #[error("batch size must be at least 1")]
    ZeroBatch,
}

/// Run parameters shared by all engines.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Iteration cap for Lloyd, Elkan and k2-means.
    pub max_iters: usize,
    /// Neighborhood size for k2-means; must be set to a value in `1..=k`
    /// before calling [`run_k2means`].
    pub k_n: usize,
    /// Samples per MiniBatch batch.
    pub batch_size: usize,
    /// Number of MiniBatch batches; `None` means `n / 2`.
    pub batch_iters: Option<usize>,
    /// Seed for engines that sample (MiniBatch).
    pub rng_seed: u64,
    /// When set, k2-means re-derives every true distance after each
    /// assignment and update step (uncounted) and panics on any bound that
    /// fails its inequality.
    pub audit_bounds: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            k_n: 0,
            batch_size: 100,
            batch_iters: None,
            rng_seed: 0,
            audit_bounds: false,
        }
    }
}

impl EngineConfig {
    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_k_n(mut self, k_n: usize) -> Self {
        self.k_n = k_n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_audit_bounds(mut self, audit: bool) -> Self {
        self.audit_bounds = audit;
        self
    }
}

/// Counted work of one iteration, split by what the distances were spent on.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IterOps {
    /// Distances between points and candidate centers.
    pub point_center_distances: u64,
    /// Distances among centers: pair matrix construction plus drifts.
    pub center_graph_distances: u64,
    /// Points that changed cluster this iteration.
    pub moved: usize,
}

/// Result of an engine run. `iter_ops` has one entry per full iteration
/// (MiniBatch leaves it empty; its totals live in the counter).
#[derive(Debug, Clone)]
pub struct EngineRun {
    pub state: ClusterState,
    pub trace: Trace,
    pub iter_ops: Vec<IterOps>,
}

/// Uncounted energy of the optimal assignment to `centers`; measurement
/// helper for MiniBatch traces.
pub(crate) fn nearest_center_energy(data: &Dataset, centers: &[f64], k: usize) -> f64 {
    let d = data.d();
    let mut total = 0.0;
    for i in 0..data.n() {
        let row = data.row(i);
        let mut best = f64::INFINITY;
        for j in 0..k {
            let d2 = crate::metric::sq_dist(row, &centers[j * d..(j + 1) * d]);
            if d2 < best {
                best = d2;
            }
        }
        total += best;
    }
    total
}

/// Push the end-of-iteration sample: cumulative counted ops and the exact,
/// uncounted energy of the current state.
pub(crate) fn push_sample(
    trace: &mut Trace,
    iteration: usize,
    counter: &OpCounter,
    data: &Dataset,
    state: &ClusterState,
) {
    trace.push(iteration, counter.total(), crate::metric::energy(data, state));
}
