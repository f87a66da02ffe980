//! Distance and energy primitives.
//!
//! Counted variants (`squared_distance`, `inner_product`, `add_assign`,
//! `sub_assign`) are the units the engines charge to an [`OpCounter`]. The
//! raw variants are for measurement and audits and never count.

use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::state::ClusterState;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("cluster energy of an empty member set is undefined")]
    EmptyMemberSet,
}

/// Uncounted squared Euclidean distance.
#[inline]
pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 0..x.len() {
        let diff = x[i] - y[i];
        acc += diff * diff;
    }
    acc
}

/// Squared Euclidean distance, charged as one distance computation.
#[inline]
pub fn squared_distance(x: &[f64], y: &[f64], counter: &mut OpCounter) -> f64 {
    counter.count_distances(1);
    sq_dist(x, y)
}

/// Inner product, charged as one vector operation.
#[inline]
pub fn inner_product(x: &[f64], y: &[f64], counter: &mut OpCounter) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    counter.count_inner_products(1);
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += x[i] * y[i];
    }
    acc
}

/// `acc += x`, charged as one vector addition.
#[inline]
pub fn add_assign(acc: &mut [f64], x: &[f64], counter: &mut OpCounter) {
    debug_assert_eq!(acc.len(), x.len());
    counter.count_additions(1);
    for i in 0..acc.len() {
        acc[i] += x[i];
    }
}

/// `acc -= x`, charged as one vector addition.
#[inline]
pub fn sub_assign(acc: &mut [f64], x: &[f64], counter: &mut OpCounter) {
    debug_assert_eq!(acc.len(), x.len());
    counter.count_additions(1);
    for i in 0..acc.len() {
        acc[i] -= x[i];
    }
}

/// Exact clustering energy: the sum of squared distances from every point to
/// its assigned center.
///
/// This is measurement, not algorithm work, and does not increment any
/// counter.
pub fn energy(data: &Dataset, state: &ClusterState) -> f64 {
    let mut total = 0.0;
    for i in 0..data.n() {
        total += sq_dist(data.row(i), state.center(state.assignment(i)));
    }
    total
}

/// Energy of a member set about its own mean: phi(S) = sum ||x - mu(S)||^2.
/// Uncounted two-pass evaluation, used for measurement and oracles.
pub fn cluster_energy(data: &Dataset, members: &[usize]) -> Result<f64, MetricError> {
    if members.is_empty() {
        return Err(MetricError::EmptyMemberSet);
    }
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
    let mut phi = 0.0;
    for &i in members {
        phi += sq_dist(data.row(i), &mean);
    }
    Ok(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ClusterState;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn squared_distance_identity_and_pythagorean() {
        let mut c = OpCounter::new();
        assert_eq!(squared_distance(&[1.0, 2.0], &[1.0, 2.0], &mut c), 0.0);
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0], &mut c), 25.0);
        assert_eq!(c.distances, 2);
    }

    #[test]
    fn squared_distance_matches_scalar_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let y: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let mut expected = 0.0;
        for i in 0..5 {
            expected += (x[i] - y[i]) * (x[i] - y[i]);
        }
        let mut c = OpCounter::new();
        let got = squared_distance(&x, &y, &mut c);
        assert!((got - expected).abs() <= 1e-15 * expected.abs());
    }

    #[test]
    fn energy_symmetric_pair() {
        // 1-D points {0, 2}, one cluster with center 1 -> energy 2.
        let data = Dataset::new(vec![0.0, 2.0], 2, 1).unwrap();
        let state = ClusterState::from_parts(vec![1.0], 1, vec![0, 0], &data);
        assert_eq!(energy(&data, &state), 2.0);
    }

    #[test]
    fn energy_zero_at_self_centers() {
        let data = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, 2).unwrap();
        let state =
            ClusterState::from_parts(data.values().to_vec(), 3, vec![0, 1, 2], &data);
        assert_eq!(energy(&data, &state), 0.0);
    }

    #[test]
    fn energy_matches_brute_force_on_random_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..30).map(|_| rng.random::<f64>() * 10.0).collect();
        let data = Dataset::new(values, 10, 3).unwrap();
        let assignments: Vec<usize> = (0..10).map(|_| rng.random_range(0..2)).collect();
        let centers: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 10.0).collect();
        let state = ClusterState::from_parts(centers.clone(), 2, assignments.clone(), &data);

        // Independent double-loop recomputation.
        let mut expected = 0.0;
        for i in 0..10 {
            let c = &centers[assignments[i] * 3..assignments[i] * 3 + 3];
            for (t, cv) in c.iter().enumerate() {
                let diff = data.row(i)[t] - cv;
                expected += diff * diff;
            }
        }
        let got = energy(&data, &state);
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn cluster_energy_singleton_is_zero() {
        let data = Dataset::new(vec![3.0, -1.0], 1, 2).unwrap();
        assert_eq!(cluster_energy(&data, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn cluster_energy_symmetric_pair() {
        let data = Dataset::new(vec![0.0, 1.0], 2, 1).unwrap();
        assert_eq!(cluster_energy(&data, &[0, 1]).unwrap(), 0.5);
    }

    #[test]
    fn cluster_energy_empty_set_errors() {
        let data = Dataset::new(vec![0.0], 1, 1).unwrap();
        assert_eq!(cluster_energy(&data, &[]).unwrap_err(), MetricError::EmptyMemberSet);
    }

    #[test]
    fn cluster_energy_matches_two_pass_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let values: Vec<f64> = (0..16).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
        let data = Dataset::new(values, 8, 2).unwrap();
        let members: Vec<usize> = (0..8).collect();

        let mut mean = [0.0; 2];
        for &i in &members {
            mean[0] += data.row(i)[0];
            mean[1] += data.row(i)[1];
        }
        mean[0] /= 8.0;
        mean[1] /= 8.0;
        let mut expected = 0.0;
        for &i in &members {
            expected += (data.row(i)[0] - mean[0]).powi(2) + (data.row(i)[1] - mean[1]).powi(2);
        }

        let got = cluster_energy(&data, &members).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    /// For any point set S and vector z:
    /// sum ||x - z||^2 = phi(S) + |S| * ||z - mu(S)||^2.
    #[test]
    fn mean_shift_identity_holds_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(1..12);
            let d = rng.random_range(1..6);
            let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();
            let data = Dataset::new(values, n, d).unwrap();
            let members: Vec<usize> = (0..n).collect();
            let z: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 8.0 - 4.0).collect();

            let lhs: f64 = members.iter().map(|&i| sq_dist(data.row(i), &z)).sum();

            let mut mean = vec![0.0; d];
            for &i in &members {
                for (slot, v) in mean.iter_mut().zip(data.row(i)) {
                    *slot += v;
                }
            }
            for v in mean.iter_mut() {
                *v /= n as f64;
            }
            let rhs = cluster_energy(&data, &members).unwrap() + n as f64 * sq_dist(&z, &mean);
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "identity violated: lhs {lhs} rhs {rhs}"
            );
        }
    }
}
