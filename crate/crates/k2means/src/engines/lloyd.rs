//! Standard Lloyd iterations: full nearest-center assignment, then mean
//! update.

use super::{push_sample, EngineConfig, EngineError, EngineRun, IterOps};
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::squared_distance;
use crate::state::ClusterState;
use crate::trace::Trace;

/// Run Lloyd to convergence or `max_iters`.
///
/// Each iteration assigns every point to its nearest center (exactly n*k
/// counted distances; ties to the lowest index), then updates every
/// non-empty center to the mean of its members via add/subtract deltas.
/// The run stops once an iteration neither moves a point nor changes a
/// center coordinate.
pub fn run_lloyd(
    data: &Dataset,
    init: ClusterState,
    cfg: &EngineConfig,
    counter: &mut OpCounter,
) -> Result<EngineRun, EngineError> {
    if cfg.max_iters == 0 {
        return Err(EngineError::ZeroIters);
    }
    let n = data.n();
    let k = init.k();
    let mut state = init;
    let mut trace = Trace::new();
    push_sample(&mut trace, 0, counter, data, &state);
    let mut iter_ops = Vec::new();

    for iteration in 1..=cfg.max_iters {
        let distances_before = counter.distances;
        let mut moved = 0usize;
        for i in 0..n {
            let row = data.row(i);
            let mut best = 0usize;
            let mut best_d2 = squared_distance(row, state.center(0), counter);
            for j in 1..k {
                let d2 = squared_distance(row, state.center(j), counter);
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = j;
                }
            }
            if best != state.assignment(i) {
                state.move_point(data, i, best, counter);
                moved += 1;
            }
        }
        let centers_changed = state.refresh_centers();

        iter_ops.push(IterOps {
            point_center_distances: counter.distances - distances_before,
            center_graph_distances: 0,
            moved,
        });
        push_sample(&mut trace, iteration, counter, data, &state);

        if moved == 0 && !centers_changed {
            break;
        }
    }

    Ok(EngineRun { state, trace, iter_ops })
}
