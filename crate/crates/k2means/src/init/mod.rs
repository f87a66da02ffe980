//! Initializers: uniform random sampling, k-means++ D^2 seeding and greedy
//! divisive initialization.

mod gdi;
mod split;

pub use gdi::gdi;
pub use split::{projective_split, scan_energies, ScanEnergies, SplitResult};

use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::squared_distance;
use crate::state::ClusterState;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InitError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("k = {k} exceeds the number of points n = {n}")]
    KExceedsPoints { k: usize, n: usize },
    #[error("cluster has fewer than 2 members")]
    TooFewMembers,
    #[error("cluster is unsplittable (points are identical)")]
    Unsplittable,
    #[error("fewer than k = {k} distinct points; no splittable cluster left")]
    NotEnoughDistinctPoints { k: usize },
}

fn check_k(k: usize, n: usize) -> Result<(), InitError> {
    if k == 0 {
        return Err(InitError::ZeroK);
    }
    if k > n {
        return Err(InitError::KExceedsPoints { k, n });
    }
    Ok(())
}

/// Nearest-center assignment over all k centers; ties go to the lowest
/// center index. Charges k distances per point.
pub fn assign_nearest(
    data: &Dataset,
    centers: &[f64],
    k: usize,
    counter: &mut OpCounter,
) -> Vec<usize> {
    let d = data.d();
    let mut assignments = vec![0usize; data.n()];
    for (i, out) in assignments.iter_mut().enumerate() {
        let row = data.row(i);
        let mut best = 0usize;
        let mut best_d2 = squared_distance(row, &centers[..d], counter);
        for j in 1..k {
            let d2 = squared_distance(row, &centers[j * d..(j + 1) * d], counter);
            if d2 < best_d2 {
                best_d2 = d2;
                best = j;
            }
        }
        *out = best;
    }
    assignments
}

/// k distinct points sampled uniformly without replacement, followed by one
/// full nearest-center pass (n*k counted distances).
pub fn random(
    data: &Dataset,
    k: usize,
    rng_seed: u64,
    counter: &mut OpCounter,
) -> Result<ClusterState, InitError> {
    let n = data.n();
    check_k(k, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // Partial Fisher-Yates for k distinct indices.
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let d = data.d();
    let mut centers = Vec::with_capacity(k * d);
    for &idx in &pool[..k] {
        centers.extend_from_slice(data.row(idx));
    }

    let assignments = assign_nearest(data, &centers, k, counter);
    Ok(ClusterState::assemble(data, centers, k, assignments, counter))
}

/// D^2 seeding: the first center is uniform, each further center is sampled
/// with probability proportional to the squared distance to the nearest
/// already-chosen center. Nearest-center distances are maintained
/// incrementally (n counted distances per chosen center), and the final
/// assignments are the maintained nearest indices.
pub fn kmeans_pp(
    data: &Dataset,
    k: usize,
    rng_seed: u64,
    counter: &mut OpCounter,
) -> Result<ClusterState, InitError> {
    let n = data.n();
    check_k(k, n)?;
    let d = data.d();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let mut chosen = Vec::with_capacity(k);
    let mut is_chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    is_chosen[first] = true;

    let mut best_d2 = vec![0.0f64; n];
    let mut best_idx = vec![0usize; n];
    for (i, slot) in best_d2.iter_mut().enumerate() {
        *slot = squared_distance(data.row(i), data.row(first), counter);
    }

    for c in 1..k {
        let total: f64 = best_d2.iter().sum();
        let next = if total > 0.0 {
            // Inverse-CDF walk over the D^2 weights.
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in best_d2.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding at the tail: fall back to the last positive weight.
            pick.unwrap_or_else(|| {
                best_d2.iter().rposition(|&w| w > 0.0).expect("total > 0")
            })
        } else {
            // All weights zero (duplicate data): uniform among the points
            // not yet chosen.
            let remaining: Vec<usize> = (0..n).filter(|&i| !is_chosen[i]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        chosen.push(next);
        is_chosen[next] = true;

        let new_row = data.row(next);
        for i in 0..n {
            let d2 = squared_distance(data.row(i), new_row, counter);
            if d2 < best_d2[i] {
                best_d2[i] = d2;
                best_idx[i] = c;
            }
        }
    }

    let mut centers = Vec::with_capacity(k * d);
    for &idx in &chosen {
        centers.extend_from_slice(data.row(idx));
    }
    Ok(ClusterState::assemble(data, centers, k, best_idx, counter))
}
