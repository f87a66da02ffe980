//! Greedy divisive initialization: start from one all-points cluster and
//! repeatedly split the highest-energy splittable cluster until k clusters
//! exist.

use super::split::projective_split;
use super::InitError;
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::add_assign;
use crate::state::ClusterState;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Projective splits run this many iterations unless the partition repeats
/// earlier.
pub const SPLIT_ITERS: usize = 2;

struct Cluster {
    members: Vec<usize>,
    center: Vec<f64>,
    energy: f64,
    splittable: bool,
}

/// Max-heap entry ordered by energy; equal energies go to the lower cluster
/// index for determinism.
struct HeapEntry {
    energy: f64,
    index: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Greedy divisive initialization.
///
/// The all-points cluster is split first unconditionally; afterwards the
/// heap is keyed by the exact energies of the halves produced by each split,
/// so picking the next cluster costs no vector operations. A cluster whose
/// split attempt fails is marked unsplittable and never retried; if no
/// splittable cluster remains before k clusters exist, the data had fewer
/// than k distinct points.
pub fn gdi(
    data: &Dataset,
    k: usize,
    rng_seed: u64,
    counter: &mut OpCounter,
) -> Result<ClusterState, InitError> {
    let n = data.n();
    let d = data.d();
    if k == 0 {
        return Err(InitError::ZeroK);
    }
    if k > n {
        return Err(InitError::KExceedsPoints { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // Root center mu(X): fold all points into one sum.
    let mut root_sum = vec![0.0; d];
    for i in 0..n {
        add_assign(&mut root_sum, data.row(i), counter);
    }
    let root_center: Vec<f64> = root_sum.iter().map(|v| v / n as f64).collect();

    let mut clusters = vec![Cluster {
        members: (0..n).collect(),
        center: root_center,
        energy: f64::INFINITY, // root is split first; its energy is never compared
        splittable: n >= 2,
    }];

    let mut heap = BinaryHeap::new();
    if clusters[0].splittable {
        heap.push(HeapEntry { energy: clusters[0].energy, index: 0 });
    }

    while clusters.len() < k {
        let Some(entry) = heap.pop() else {
            return Err(InitError::NotEnoughDistinctPoints { k });
        };
        let j = entry.index;
        if !clusters[j].splittable {
            continue;
        }
        let child_seed = rng.next_u64();
        match projective_split(data, &clusters[j].members, child_seed, SPLIT_ITERS, counter) {
            Err(InitError::Unsplittable) => {
                clusters[j].splittable = false;
                // The popped entry is simply not re-pushed.
            }
            Err(e) => return Err(e),
            Ok(split) => {
                let new_index = clusters.len();
                let right = Cluster {
                    splittable: split.right_members.len() >= 2,
                    members: split.right_members,
                    center: split.right_center,
                    energy: split.right_energy,
                };
                let left = Cluster {
                    splittable: split.left_members.len() >= 2,
                    members: split.left_members,
                    center: split.left_center,
                    energy: split.left_energy,
                };
                clusters[j] = left;
                clusters.push(right);
                if clusters[j].splittable {
                    heap.push(HeapEntry { energy: clusters[j].energy, index: j });
                }
                if clusters[new_index].splittable {
                    heap.push(HeapEntry {
                        energy: clusters[new_index].energy,
                        index: new_index,
                    });
                }
            }
        }
    }

    // Assemble the state without re-folding: sums are the exact means scaled
    // back by the sizes.
    let mut centers = Vec::with_capacity(k * d);
    let mut assignments = vec![0usize; n];
    let mut sizes = vec![0usize; k];
    let mut member_sums = vec![0.0; k * d];
    for (j, cluster) in clusters.iter().enumerate() {
        centers.extend_from_slice(&cluster.center);
        sizes[j] = cluster.members.len();
        for &i in &cluster.members {
            assignments[i] = j;
        }
        for t in 0..d {
            member_sums[j * d + t] = cluster.center[t] * cluster.members.len() as f64;
        }
    }
    Ok(ClusterState::from_sums(centers, k, d, assignments, sizes, member_sums))
}
