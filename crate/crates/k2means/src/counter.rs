//! Vector-operation accounting.
//!
//! All engines and initializers report their work as whole vector operations:
//! squared-distance evaluations, inner products and vector additions each
//! count 1, scalar bookkeeping is free, and sorting m keys is charged
//! `m*log2(m)/d` fractional operations. Measurement (exact energy evaluation
//! for traces and reports) never touches the counter.

/// Tally of vector operations performed by one run.
///
/// Counts are monotone within a run; `total` is the single "distance
/// computations" figure used by the benchmark reports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpCounter {
    pub distances: u64,
    pub inner_products: u64,
    pub additions: u64,
    pub sort_charge: f64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn count_distances(&mut self, n: u64) {
        self.distances += n;
    }

    #[inline]
    pub fn count_inner_products(&mut self, n: u64) {
        self.inner_products += n;
    }

    #[inline]
    pub fn count_additions(&mut self, n: u64) {
        self.additions += n;
    }

    /// Charge a sort of `keys` keys on `dim`-dimensional data as
    /// `keys * log2(keys) / dim` fractional vector operations.
    pub fn charge_sort(&mut self, keys: usize, dim: usize) {
        if keys > 1 {
            self.sort_charge += keys as f64 * (keys as f64).log2() / dim as f64;
        }
    }

    /// Grand total, fractional sort charge included.
    pub fn total(&self) -> f64 {
        self.distances as f64
            + self.inner_products as f64
            + self.additions as f64
            + self.sort_charge
    }
}
