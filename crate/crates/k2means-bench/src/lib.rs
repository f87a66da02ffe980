//! Shared fixtures for the criterion benches.

use k2means::io::gen_gmm;
use k2means::Dataset;

/// Blob fixture sized for quick wall-clock comparisons.
pub fn bench_fixture(n: usize, d: usize, blobs: usize) -> Dataset {
    gen_gmm(n, d, blobs, 8.0, 7).expect("fixture generates").0
}
