//! MiniBatch k-means: per-batch nearest-center assignment with per-center
//! running-mean gradient steps. Trades converged energy for work; the energy
//! is not monotone.

use super::{nearest_center_energy, EngineConfig, EngineError, EngineRun};
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::squared_distance;
use crate::state::ClusterState;
use crate::trace::Trace;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Run `t` batches of `b` uniformly sampled points (with replacement).
///
/// Each batch caches nearest centers against the batch-start centers
/// (b*k counted distances), then applies one gradient step per sample:
/// v[c] += 1, c <- (1 - 1/v[c]) c + (1/v[c]) x (one counted addition).
/// Counts `v` persist across batches. The trace is sampled every
/// ceil(t/100) batches; trace energies and the final packaged assignments
/// are measurement and stay uncounted.
pub fn run_minibatch(
    data: &Dataset,
    init: ClusterState,
    cfg: &EngineConfig,
    counter: &mut OpCounter,
) -> Result<EngineRun, EngineError> {
    if cfg.batch_size == 0 {
        return Err(EngineError::ZeroBatch);
    }
    let n = data.n();
    let k = init.k();
    let d = data.d();
    let b = cfg.batch_size;
    let t = cfg.batch_iters.unwrap_or(n / 2).max(1);
    let sample_every = t.div_ceil(100);

    let mut trace = Trace::new();
    trace.push(0, counter.total(), crate::metric::energy(data, &init));

    let mut centers = init.centers().to_vec();
    let mut counts = vec![0u64; k];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut cached = vec![0usize; b];

    for batch in 1..=t {
        for slot in cached.iter_mut() {
            let i = rng.random_range(0..n);
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
            *slot = i * k + best; // pack (point, center)
        }
        for &packed in &cached {
            let (i, c) = (packed / k, packed % k);
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            counter.count_additions(1);
            let row = data.row(i);
            for tdim in 0..d {
                let cv = &mut centers[c * d + tdim];
                *cv = (1.0 - eta) * *cv + eta * row[tdim];
            }
        }
        if batch % sample_every == 0 || batch == t {
            trace.push(batch, counter.total(), nearest_center_energy(data, &centers, k));
        }
    }

    // Package the final state: assignments and sums are reporting artifacts,
    // computed without charging the counter.
    let mut assignments = vec![0usize; n];
    for (i, slot) in assignments.iter_mut().enumerate() {
        let row = data.row(i);
        let mut best = 0usize;
        let mut best_d2 = crate::metric::sq_dist(row, &centers[..d]);
        for j in 1..k {
            let d2 = crate::metric::sq_dist(row, &centers[j * d..(j + 1) * d]);
            if d2 < best_d2 {
                best_d2 = d2;
                best = j;
            }
        }
        *slot = best;
    }
    let state = ClusterState::from_parts(centers, k, assignments, data);

    Ok(EngineRun { state, trace, iter_ops: Vec::new() })
}
