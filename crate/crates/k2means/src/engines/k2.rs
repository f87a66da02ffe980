//! k2-means: assignment restricted to the k_n nearest centers of a point's
//! current center, pruned further by triangle-inequality bounds.
//!
//! Per iteration:
//! 1. build the k_n-NN graph of the centers (k(k-1)/2 counted distances,
//!    full pair matrix kept for the pruning tests);
//! 2. reassign every point within its cluster's candidate list, skipping a
//!    candidate whenever a lower bound or the half-center-distance test
//!    proves it cannot win, and tightening bounds with true distances when
//!    pruning fails;
//! 3. update means by deltas and adjust all bounds by the center drifts;
//! 4. remap lower bounds onto the next iteration's candidate lists: carried
//!    centers keep their adjusted bounds, new arrivals start at zero.
//!
//! Only `n * k_n` lower bounds are kept, against n * k for Elkan.

use super::{push_sample, EngineConfig, EngineError, EngineRun, IterOps};
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::{sq_dist, squared_distance};
use crate::state::ClusterState;
use crate::trace::Trace;

#[inline]
fn distance(x: &[f64], y: &[f64], counter: &mut OpCounter) -> f64 {
    squared_distance(x, y, counter).sqrt()
}

const AUDIT_SLACK: f64 = 1e-9;

struct Bounds {
    /// Upper bound on d(x, c_a(x)) per point.
    upper: Vec<f64>,
    /// Whether the upper bound has drifted since it was last tightened.
    stale: Vec<bool>,
    /// n x k_n lower bounds, slot-aligned with the candidate list of the
    /// point's cluster.
    lower: Vec<f64>,
    /// Center id behind each lower-bound slot; usize::MAX before the first
    /// remap.
    slot_center: Vec<usize>,
}

/// Audit helper: verify every maintained bound against true, uncounted
/// distances. Panics on violation.
fn audit(data: &Dataset, state: &ClusterState, bounds: &Bounds, k_n: usize, phase: &str) {
    for i in 0..data.n() {
        let row = data.row(i);
        let true_dist = sq_dist(row, state.center(state.assignment(i))).sqrt();
        assert!(
            bounds.upper[i] >= true_dist - AUDIT_SLACK * true_dist.max(1.0),
            "{phase}: upper bound {} below true distance {} for point {i}",
            bounds.upper[i],
            true_dist
        );
        for s in 0..k_n {
            let j = bounds.slot_center[i * k_n + s];
            if j == usize::MAX {
                continue;
            }
            let dist = sq_dist(row, state.center(j)).sqrt();
            assert!(
                bounds.lower[i * k_n + s] <= dist + AUDIT_SLACK * dist.max(1.0),
                "{phase}: lower bound {} above true distance {} for point {i}, center {j}",
                bounds.lower[i * k_n + s],
                dist
            );
        }
    }
}

pub fn run_k2means(
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
    let d = data.d();
    let k_n = cfg.k_n;
    if k_n < 1 || k_n > k {
        return Err(EngineError::InvalidNeighborhood { k_n, k });
    }

    let mut state = init;
    let mut trace = Trace::new();
    push_sample(&mut trace, 0, counter, data, &state);
    let mut iter_ops = Vec::new();

    let mut bounds = Bounds {
        upper: vec![f64::INFINITY; n],
        stale: vec![true; n],
        lower: vec![0.0f64; n * k_n],
        slot_center: vec![usize::MAX; n * k_n],
    };
    let mut pair = vec![0.0f64; k * k];
    let mut lists = vec![0usize; k * k_n];
    let mut drift = vec![0.0f64; k];

    // Scratch for O(k_n) per-point bound remapping: carried[j] holds the
    // adjusted bound for center j, valid when tag[j] == generation.
    let mut carried = vec![0.0f64; k];
    let mut tag = vec![0u64; k];
    let mut generation = 0u64;

    for iteration in 1..=cfg.max_iters {
        let distances_before = counter.distances;

        // (1) k_n-NN graph of the centers: brute-force pair matrix, then
        // per-center selection of the k_n nearest with self pinned first.
        for a in 0..k {
            for b in (a + 1)..k {
                let dist = distance(state.center(a), state.center(b), counter);
                pair[a * k + b] = dist;
                pair[b * k + a] = dist;
            }
        }
        let mut order: Vec<usize> = Vec::with_capacity(k);
        for l in 0..k {
            order.clear();
            order.extend((0..k).filter(|&j| j != l));
            order.sort_unstable_by(|&a, &b| {
                pair[l * k + a].total_cmp(&pair[l * k + b]).then(a.cmp(&b))
            });
            lists[l * k_n] = l;
            for s in 1..k_n {
                lists[l * k_n + s] = order[s - 1];
            }
        }
        let center_graph = counter.distances - distances_before;

        // Remap lower bounds onto the (possibly new) candidate list of each
        // point's cluster. Scalar work only.
        for i in 0..n {
            generation += 1;
            for s in 0..k_n {
                let j = bounds.slot_center[i * k_n + s];
                if j != usize::MAX {
                    carried[j] = bounds.lower[i * k_n + s];
                    tag[j] = generation;
                }
            }
            let list = &lists[state.assignment(i) * k_n..(state.assignment(i) + 1) * k_n];
            for (s, &j) in list.iter().enumerate() {
                bounds.lower[i * k_n + s] = if tag[j] == generation { carried[j] } else { 0.0 };
                bounds.slot_center[i * k_n + s] = j;
            }
        }

        // (2) Assignment within candidate lists.
        let mut moved = 0usize;
        for i in 0..n {
            let l0 = state.assignment(i);
            let row = data.row(i);
            let mut u = bounds.upper[i];
            let mut is_stale = bounds.stale[i];
            let mut best = l0;
            let base = i * k_n;
            for s in 0..k_n {
                let j = bounds.slot_center[base + s];
                if j == best {
                    continue;
                }
                if u <= bounds.lower[base + s] || u <= 0.5 * pair[best * k + j] {
                    continue;
                }
                if is_stale {
                    // First failed prune: tighten against the current
                    // center. Self sits at slot 0 of its own list.
                    u = distance(row, state.center(best), counter);
                    bounds.lower[base] = u;
                    is_stale = false;
                    if u <= bounds.lower[base + s] || u <= 0.5 * pair[best * k + j] {
                        continue;
                    }
                }
                let dist = distance(row, state.center(j), counter);
                bounds.lower[base + s] = dist;
                if dist < u || (dist == u && j < best) {
                    best = j;
                    u = dist;
                }
            }
            bounds.upper[i] = u;
            bounds.stale[i] = is_stale;
            if best != l0 {
                state.move_point(data, i, best, counter);
                moved += 1;
            }
        }
        let point_center = counter.distances - distances_before - center_graph;

        if cfg.audit_bounds {
            audit(data, &state, &bounds, k_n, "post-assignment");
        }

        // (3) Mean update and drift-based bound adjustment (k counted
        // distances for the drifts).
        let old_centers = state.centers().to_vec();
        state.refresh_centers();
        let mut max_drift = 0.0f64;
        for j in 0..k {
            drift[j] = distance(&old_centers[j * d..(j + 1) * d], state.center(j), counter);
            if drift[j] > max_drift {
                max_drift = drift[j];
            }
        }
        if max_drift > 0.0 {
            for i in 0..n {
                let dj = drift[state.assignment(i)];
                if dj > 0.0 {
                    bounds.upper[i] += dj;
                    bounds.stale[i] = true;
                }
                for s in 0..k_n {
                    let j = bounds.slot_center[i * k_n + s];
                    if drift[j] > 0.0 {
                        bounds.lower[i * k_n + s] =
                            (bounds.lower[i * k_n + s] - drift[j]).max(0.0);
                    }
                }
            }
        }

        if cfg.audit_bounds {
            audit(data, &state, &bounds, k_n, "post-update");
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
