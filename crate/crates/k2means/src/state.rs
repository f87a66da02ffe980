//! Cluster state: centers, assignments and the running per-cluster sums that
//! make mean retrieval O(1).

use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::metric::{add_assign, sq_dist};

/// Centers, assignments, per-cluster sizes and coordinate sums.
///
/// `member_sums[j] / sizes[j]` is always the exact mean of cluster j's
/// members, which lets the engines update centers by add/subtract deltas
/// instead of full recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub(crate) centers: Vec<f64>,
    pub(crate) k: usize,
    pub(crate) d: usize,
    pub(crate) assignments: Vec<usize>,
    pub(crate) sizes: Vec<usize>,
    pub(crate) member_sums: Vec<f64>,
}

impl ClusterState {
    /// Assemble a state from centers and assignments, folding every point
    /// into its cluster's sum. The fold is real work and charges n vector
    /// additions; engines afterwards maintain the sums by deltas.
    pub fn assemble(
        data: &Dataset,
        centers: Vec<f64>,
        k: usize,
        assignments: Vec<usize>,
        counter: &mut OpCounter,
    ) -> Self {
        let d = data.d();
        assert_eq!(centers.len(), k * d);
        assert_eq!(assignments.len(), data.n());
        let mut sizes = vec![0usize; k];
        let mut member_sums = vec![0.0; k * d];
        for (i, &j) in assignments.iter().enumerate() {
            assert!(j < k, "assignment out of range");
            sizes[j] += 1;
            add_assign(&mut member_sums[j * d..(j + 1) * d], data.row(i), counter);
        }
        Self { centers, k, d, assignments, sizes, member_sums }
    }

    /// Assemble without charging the counter. For measurement, tests and
    /// callers whose sums were already paid for elsewhere.
    pub fn from_parts(centers: Vec<f64>, k: usize, assignments: Vec<usize>, data: &Dataset) -> Self {
        let mut scratch = OpCounter::new();
        Self::assemble(data, centers, k, assignments, &mut scratch)
    }

    /// Build directly from known sizes and sums (no fold at all). Used by
    /// initializers that already know exact cluster means.
    pub(crate) fn from_sums(
        centers: Vec<f64>,
        k: usize,
        d: usize,
        assignments: Vec<usize>,
        sizes: Vec<usize>,
        member_sums: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(centers.len(), k * d);
        debug_assert_eq!(sizes.len(), k);
        debug_assert_eq!(member_sums.len(), k * d);
        Self { centers, k, d, assignments, sizes, member_sums }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.d..(j + 1) * self.d]
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    #[inline]
    pub fn assignment(&self, i: usize) -> usize {
        self.assignments[i]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Exact mean of cluster j from the running sums. Panics on empty j.
    pub fn mean(&self, j: usize) -> Vec<f64> {
        assert!(self.sizes[j] > 0, "mean of empty cluster {j}");
        let inv = 1.0 / self.sizes[j] as f64;
        self.member_sums[j * self.d..(j + 1) * self.d]
            .iter()
            .map(|v| v * inv)
            .collect()
    }

    /// Move point i from its current cluster to `to`, maintaining sizes and
    /// sums by one subtract and one add (2 counted vector additions).
    pub(crate) fn move_point(&mut self, data: &Dataset, i: usize, to: usize, counter: &mut OpCounter) {
        let from = self.assignments[i];
        debug_assert_ne!(from, to);
        let d = self.d;
        let row = data.row(i);
        crate::metric::sub_assign(&mut self.member_sums[from * d..(from + 1) * d], row, counter);
        add_assign(&mut self.member_sums[to * d..(to + 1) * d], row, counter);
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        self.assignments[i] = to;
    }

    /// Set every non-empty center to the mean of its members; empty clusters
    /// keep their previous center. Returns true if any coordinate changed.
    /// The division is scalar bookkeeping and is not charged.
    pub(crate) fn refresh_centers(&mut self) -> bool {
        let mut changed = false;
        for j in 0..self.k {
            if self.sizes[j] == 0 {
                continue;
            }
            let inv = 1.0 / self.sizes[j] as f64;
            for t in 0..self.d {
                let new = self.member_sums[j * self.d + t] * inv;
                if new != self.centers[j * self.d + t] {
                    self.centers[j * self.d + t] = new;
                    changed = true;
                }
            }
        }
        changed
    }

    /// Verify sizes and member_sums against the assignments by full
    /// recomputation. Measurement only; used by audits and tests.
    pub fn check_consistency(&self, data: &Dataset, tol: f64) -> bool {
        let mut sizes = vec![0usize; self.k];
        let mut sums = vec![0.0; self.k * self.d];
        for (i, &j) in self.assignments.iter().enumerate() {
            if j >= self.k {
                return false;
            }
            sizes[j] += 1;
            for t in 0..self.d {
                sums[j * self.d + t] += data.row(i)[t];
            }
        }
        if sizes != self.sizes {
            return false;
        }
        for j in 0..self.k {
            let scale = sq_dist(
                &sums[j * self.d..(j + 1) * self.d],
                &self.member_sums[j * self.d..(j + 1) * self.d],
            );
            let norm: f64 = sums[j * self.d..(j + 1) * self.d].iter().map(|v| v * v).sum();
            if scale > tol * tol * norm.max(1.0) {
                return false;
            }
        }
        true
    }
}
