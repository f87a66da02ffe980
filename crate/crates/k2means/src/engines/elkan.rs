//! Elkan's exact acceleration of Lloyd: n x k lower bounds, one upper bound
//! per point and center-pair distances prune provably unnecessary distance
//! computations. Final assignments and centers are identical to Lloyd run
//! from the same initialization.

use super::{push_sample, EngineConfig, EngineError, EngineRun, IterOps};
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::squared_distance;
use crate::state::ClusterState;
use crate::trace::Trace;

/// True (not squared) distance, charged as one distance computation.
#[inline]
fn distance(x: &[f64], y: &[f64], counter: &mut OpCounter) -> f64 {
    squared_distance(x, y, counter).sqrt()
}

pub fn run_elkan(
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

    // Bounds live in true-distance space. `stale` marks upper bounds that
    // have drifted since they were last tightened.
    let mut lower = vec![0.0f64; n * k];
    let mut upper = vec![f64::INFINITY; n];
    let mut stale = vec![true; n];
    let mut pair = vec![0.0f64; k * k];
    let mut half_nearest = vec![0.0f64; k];
    let mut drift = vec![0.0f64; k];

    for iteration in 1..=cfg.max_iters {
        let distances_before = counter.distances;

        // Center-pair distances and s(c) = half the distance to the nearest
        // other center: k(k-1)/2 counted evaluations.
        for a in 0..k {
            for b in (a + 1)..k {
                let dist = distance(state.center(a), state.center(b), counter);
                pair[a * k + b] = dist;
                pair[b * k + a] = dist;
            }
        }
        for a in 0..k {
            let mut nearest = f64::INFINITY;
            for b in 0..k {
                if b != a && pair[a * k + b] < nearest {
                    nearest = pair[a * k + b];
                }
            }
            half_nearest[a] = 0.5 * nearest;
        }
        let center_graph = counter.distances - distances_before;

        let mut moved = 0usize;
        if iteration == 1 {
            // Initial full pass: every bound is set from a real distance,
            // exactly as Lloyd's first assignment would compute them.
            for i in 0..n {
                let row = data.row(i);
                let mut best = 0usize;
                let mut best_dist = distance(row, state.center(0), counter);
                lower[i * k] = best_dist;
                for j in 1..k {
                    let dist = distance(row, state.center(j), counter);
                    lower[i * k + j] = dist;
                    if dist < best_dist {
                        best_dist = dist;
                        best = j;
                    }
                }
                upper[i] = best_dist;
                stale[i] = false;
                if best != state.assignment(i) {
                    state.move_point(data, i, best, counter);
                    moved += 1;
                }
            }
        } else {
            for i in 0..n {
                let a0 = state.assignment(i);
                let mut u = upper[i];
                if u <= half_nearest[a0] {
                    continue;
                }
                let row = data.row(i);
                let mut best = a0;
                let mut is_stale = stale[i];
                for j in 0..k {
                    if j == best {
                        continue;
                    }
                    if u <= lower[i * k + j] || u <= 0.5 * pair[best * k + j] {
                        continue;
                    }
                    if is_stale {
                        u = distance(row, state.center(best), counter);
                        lower[i * k + best] = u;
                        is_stale = false;
                        if u <= lower[i * k + j] || u <= 0.5 * pair[best * k + j] {
                            continue;
                        }
                    }
                    let dist = distance(row, state.center(j), counter);
                    lower[i * k + j] = dist;
                    if dist < u || (dist == u && j < best) {
                        best = j;
                        u = dist;
                    }
                }
                upper[i] = u;
                stale[i] = is_stale;
                if best != a0 {
                    state.move_point(data, i, best, counter);
                    moved += 1;
                }
            }
        }
        let point_center = counter.distances - distances_before - center_graph;

        // Mean update, then bound adjustment by center drifts (k counted
        // distances).
        let old_centers = state.centers().to_vec();
        state.refresh_centers();
        let mut max_drift = 0.0f64;
        for j in 0..k {
            let d = data.d();
            drift[j] = distance(
                &old_centers[j * d..(j + 1) * d],
                state.center(j),
                counter,
            );
            if drift[j] > max_drift {
                max_drift = drift[j];
            }
        }
        for i in 0..n {
            let dj = drift[state.assignment(i)];
            if dj > 0.0 {
                upper[i] += dj;
                stale[i] = true;
            }
            for j in 0..k {
                if drift[j] > 0.0 {
                    lower[i * k + j] = (lower[i * k + j] - drift[j]).max(0.0);
                }
            }
        }

        iter_ops.push(IterOps {
            point_center_distances: point_center,
            center_graph_distances: center_graph + k as u64,
            moved,
        });
        push_sample(&mut trace, iteration, counter, data, &state);

        if moved == 0 && max_drift == 0.0 {
            break;
        }
    }

    Ok(EngineRun { state, trace, iter_ops })
}
