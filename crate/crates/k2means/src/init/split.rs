//! Optimal two-way split of a cluster along the direction between its two
//! current centers.
//!
//! Each iteration projects the members onto `c_a - c_b`, sorts by projection
//! and scans every split position, maintaining prefix and suffix energies
//! incrementally: extending a set S by a point y costs one mean update and
//! one distance evaluation, since
//!
//!   phi(S + y) = phi(S) + |S| * ||mu' - mu||^2 + ||y - mu'||^2
//!
//! with mu' = (|S| mu + y) / (|S| + 1), and both norm terms are scalar
//! multiples of ||y - mu||^2. Charged work per iteration is the projection
//! pass (one inner product per member plus the direction subtraction) and
//! the sort charge; the scalar scan bookkeeping is free.

use super::InitError;
use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::{inner_product, sq_dist};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of resampling attempts before a cluster whose sampled pairs keep
/// colliding is declared unsplittable.
const SAMPLE_ATTEMPTS: usize = 32;

/// A two-way partition of a member list with exact means and energies of
/// both halves. Member lists are in scan order.
#[derive(Debug, Clone)]
pub struct SplitResult {
    pub left_members: Vec<usize>,
    pub right_members: Vec<usize>,
    pub left_center: Vec<f64>,
    pub right_center: Vec<f64>,
    pub left_energy: f64,
    pub right_energy: f64,
}

impl SplitResult {
    /// phi(left) + phi(right).
    pub fn split_energy(&self) -> f64 {
        self.left_energy + self.right_energy
    }
}

/// Prefix and suffix energies of an ordered point sequence.
///
/// `prefix[i]` is phi of the first `i + 1` elements, `suffix[i]` is phi of
/// the elements from `i` to the end. A split with left size `l` has energy
/// `prefix[l - 1] + suffix[l]`.
#[derive(Debug, Clone)]
pub struct ScanEnergies {
    pub prefix: Vec<f64>,
    pub suffix: Vec<f64>,
}

impl ScanEnergies {
    /// Split position with minimal total energy; lowest position wins ties.
    /// Returns (left size, energy).
    pub fn best_split(&self) -> (usize, f64) {
        let m = self.prefix.len();
        let mut best_l = 1;
        let mut best = self.prefix[0] + self.suffix[1];
        for l in 2..m {
            let total = self.prefix[l - 1] + self.suffix[l];
            if total < best {
                best = total;
                best_l = l;
            }
        }
        (best_l, best)
    }
}

/// Compute prefix and suffix energies of `order` by the incremental update.
/// Scalar bookkeeping; does not charge any counter.
pub fn scan_energies(data: &Dataset, order: &[usize]) -> ScanEnergies {
    let m = order.len();
    assert!(m >= 2, "scan needs at least two points");
    let d = data.d();

    let mut prefix = vec![0.0; m];
    let mut mean = data.row(order[0]).to_vec();
    let mut phi = 0.0;
    for i in 1..m {
        let y = data.row(order[i]);
        let s = i as f64;
        // phi(S + y) - phi(S) = ||y - mu(S)||^2 * |S| / (|S| + 1)
        let gap = sq_dist(y, &mean);
        phi += gap * s / (s + 1.0);
        for t in 0..d {
            mean[t] += (y[t] - mean[t]) / (s + 1.0);
        }
        prefix[i] = phi;
    }

    let mut suffix = vec![0.0; m];
    let mut mean = data.row(order[m - 1]).to_vec();
    let mut phi = 0.0;
    for i in (0..m - 1).rev() {
        let y = data.row(order[i]);
        let s = (m - 1 - i) as f64;
        let gap = sq_dist(y, &mean);
        phi += gap * s / (s + 1.0);
        for t in 0..d {
            mean[t] += (y[t] - mean[t]) / (s + 1.0);
        }
        suffix[i] = phi;
    }

    ScanEnergies { prefix, suffix }
}

fn rows_equal(data: &Dataset, a: usize, b: usize) -> bool {
    data.row(a) == data.row(b)
}

/// Sample two members with distinct values, or declare the cluster
/// unsplittable after repeated collisions.
fn sample_pair(
    data: &Dataset,
    members: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<(usize, usize), InitError> {
    let m = members.len();
    for _ in 0..SAMPLE_ATTEMPTS {
        let a = rng.random_range(0..m);
        let mut b = rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        if !rows_equal(data, members[a], members[b]) {
            return Ok((members[a], members[b]));
        }
    }
    Err(InitError::Unsplittable)
}

fn mean_of(data: &Dataset, members: &[usize]) -> Vec<f64> {
    let d = data.d();
    let mut mean = vec![0.0; d];
    for &i in members {
        let row = data.row(i);
        for t in 0..d {
            mean[t] += row[t];
        }
    }
    let inv = 1.0 / members.len() as f64;
    for v in mean.iter_mut() {
        *v *= inv;
    }
    mean
}

/// Split `members` into two non-empty halves by scanning all hyperplane
/// positions along the direction between the two current centers.
///
/// Runs at most `max_iters` iterations and stops early once the partition
/// repeats. Ties in the projection order are broken by point index; a
/// degenerate direction (equal centers, or zero variance along it) falls
/// back to the median position of the sorted order.
pub fn projective_split(
    data: &Dataset,
    members: &[usize],
    rng_seed: u64,
    max_iters: usize,
    counter: &mut OpCounter,
) -> Result<SplitResult, InitError> {
    let m = members.len();
    if m < 2 {
        return Err(InitError::TooFewMembers);
    }
    let d = data.d();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (sa, sb) = sample_pair(data, members, &mut rng)?;
    let mut center_a = data.row(sa).to_vec();
    let mut center_b = data.row(sb).to_vec();

    let mut result: Option<SplitResult> = None;
    let mut prev_left: Option<Vec<usize>> = None;

    for _ in 0..max_iters.max(1) {
        // Direction c_a - c_b: one vector subtraction.
        counter.count_additions(1);
        let direction: Vec<f64> =
            center_a.iter().zip(&center_b).map(|(a, b)| a - b).collect();

        // One inner product per member.
        let mut keyed: Vec<(f64, usize)> = members
            .iter()
            .map(|&i| (inner_product(data.row(i), &direction, counter), i))
            .collect();
        keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        counter.charge_sort(m, d);

        let order: Vec<usize> = keyed.iter().map(|&(_, i)| i).collect();
        let scan = scan_energies(data, &order);

        let degenerate = keyed[0].0 == keyed[m - 1].0;
        let l = if degenerate { m / 2 } else { scan.best_split().0 };

        let left = order[..l].to_vec();
        let right = order[l..].to_vec();
        center_a = mean_of(data, &left);
        center_b = mean_of(data, &right);
        let split = SplitResult {
            left_energy: scan.prefix[l - 1],
            right_energy: scan.suffix[l],
            left_center: center_a.clone(),
            right_center: center_b.clone(),
            left_members: left,
            right_members: right,
        };

        let mut left_set = split.left_members.clone();
        left_set.sort_unstable();
        let repeated = prev_left.as_deref() == Some(&left_set);
        prev_left = Some(left_set);
        result = Some(split);
        if repeated {
            break;
        }
    }

    Ok(result.expect("at least one split iteration runs"))
}
