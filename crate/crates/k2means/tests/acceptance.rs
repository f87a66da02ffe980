//! Acceptance suite: one test per criterion, each printing a PASS line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use k2means::bench::{
    compare_inits, run_bench, speedup_at_reference, BenchSpec, EngineKind, InitKind, MethodSpec,
    ReportRow,
};
use k2means::engines::{run_elkan, run_k2means, run_lloyd, run_minibatch, EngineConfig};
use k2means::init::{projective_split, scan_energies};
use k2means::io::gen_gmm;
use k2means::{cluster_energy, init, ClusterState, Dataset, OpCounter};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shared fixture for the quantitative criteria: 200 moderately overlapping
/// unit-variance blobs in 64 dimensions.
const FIXTURE_N: usize = 20_000;
const FIXTURE_D: usize = 64;
const FIXTURE_BLOBS: usize = 200;
const FIXTURE_SEPARATION: f64 = 6.0;
const FIXTURE_SEED: u64 = 42;

fn big_fixture() -> Dataset {
    gen_gmm(FIXTURE_N, FIXTURE_D, FIXTURE_BLOBS, FIXTURE_SEPARATION, FIXTURE_SEED)
        .expect("fixture generates")
        .0
}

/// Randomized small fixture: blob-structured or uniform, sized within the
/// exactness-suite limits.
fn small_fixture(rng: &mut ChaCha8Rng, big: bool) -> (Dataset, usize) {
    let (n, d, k) = if big {
        (2000, 32, 32)
    } else {
        (
            rng.random_range(40..600),
            rng.random_range(2..16),
            rng.random_range(2..16),
        )
    };
    let data = if rng.random::<f64>() < 0.7 {
        let blobs = k.min(rng.random_range(2..20));
        gen_gmm(n, d, blobs, rng.random_range(2..20) as f64, rng.random::<u64>())
            .unwrap()
            .0
    } else {
        let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * 10.0).collect();
        Dataset::new(values, n, d).unwrap()
    };
    (data, k)
}

fn build_init(
    data: &Dataset,
    k: usize,
    kind: usize,
    seed: u64,
    counter: &mut OpCounter,
) -> ClusterState {
    match kind % 3 {
        0 => init::random(data, k, seed, counter).unwrap(),
        1 => init::kmeans_pp(data, k, seed, counter).unwrap(),
        _ => init::gdi(data, k, seed, counter).unwrap(),
    }
}

#[test]
fn criterion_01_exactness_elkan_and_full_neighborhood_k2means_match_lloyd() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let cfg = EngineConfig::default();
    for fixture_idx in 0..22 {
        let (data, k) = small_fixture(&mut rng, fixture_idx >= 20);
        let mut c = OpCounter::new();
        let state = build_init(&data, k, fixture_idx, rng.random::<u64>(), &mut c);

        let mut c1 = OpCounter::new();
        let lloyd = run_lloyd(&data, state.clone(), &cfg, &mut c1).unwrap();
        let mut c2 = OpCounter::new();
        let elkan = run_elkan(&data, state.clone(), &cfg, &mut c2).unwrap();
        assert_eq!(
            lloyd.state.assignments(),
            elkan.state.assignments(),
            "fixture {fixture_idx}: elkan assignments diverge from lloyd"
        );
        assert_eq!(
            lloyd.state.centers(),
            elkan.state.centers(),
            "fixture {fixture_idx}: elkan centers diverge from lloyd"
        );

        let mut c3 = OpCounter::new();
        let k2_cfg = EngineConfig::default().with_k_n(k);
        let k2 = run_k2means(&data, state, &k2_cfg, &mut c3).unwrap();
        assert_eq!(
            lloyd.state.assignments(),
            k2.state.assignments(),
            "fixture {fixture_idx}: k2means(k_n=k) assignments diverge from lloyd"
        );
        assert_eq!(
            lloyd.state.centers(),
            k2.state.centers(),
            "fixture {fixture_idx}: k2means(k_n=k) centers diverge from lloyd"
        );
    }
    println!("[PASS] criterion 1: elkan and k2means(k_n=k) match lloyd on 22 fixtures");
}

#[test]
fn criterion_02_trace_energies_are_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for fixture_idx in 0..12 {
        let (data, k) = small_fixture(&mut rng, false);
        let mut c = OpCounter::new();
        let state = build_init(&data, k, fixture_idx, rng.random::<u64>(), &mut c);

        let cfg = EngineConfig::default();
        let mut scratch = OpCounter::new();
        let lloyd = run_lloyd(&data, state.clone(), &cfg, &mut scratch).unwrap();
        assert!(lloyd.trace.is_monotone(1e-9), "fixture {fixture_idx}: lloyd trace increased");
        let elkan = run_elkan(&data, state.clone(), &cfg, &mut scratch).unwrap();
        assert!(elkan.trace.is_monotone(1e-9), "fixture {fixture_idx}: elkan trace increased");
        let k_n = 1 + fixture_idx % k;
        let k2_cfg = EngineConfig::default().with_k_n(k_n);
        let k2 = run_k2means(&data, state, &k2_cfg, &mut scratch).unwrap();
        assert!(k2.trace.is_monotone(1e-9), "fixture {fixture_idx}: k2means trace increased");
    }
    println!("[PASS] criterion 2: lloyd/elkan/k2means traces non-increasing on 12 fixtures");
}

#[test]
fn criterion_03_split_scan_matches_quadratic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut checked = 0;
    while checked < 200 {
        let m = rng.random_range(2..=64);
        let d = rng.random_range(1..8);
        let values: Vec<f64> = (0..m * d).map(|_| rng.random::<f64>() * 12.0 - 6.0).collect();
        let data = Dataset::new(values, m, d).unwrap();
        let members: Vec<usize> = (0..m).collect();

        // Incremental prefix/suffix energies against direct recomputation
        // at every position.
        let scan = scan_energies(&data, &members);
        for l in 1..m {
            let pre = cluster_energy(&data, &members[..l]).unwrap();
            let suf = cluster_energy(&data, &members[l..]).unwrap();
            assert!(
                (scan.prefix[l - 1] - pre).abs() <= 1e-9 * pre.max(1.0),
                "prefix energy mismatch at l = {l}"
            );
            assert!(
                (scan.suffix[l] - suf).abs() <= 1e-9 * suf.max(1.0),
                "suffix energy mismatch at l = {l}"
            );
        }

        // Chosen split position against an O(m^2) recompute-all-positions
        // oracle over the returned order.
        let mut c = OpCounter::new();
        let split = match projective_split(&data, &members, rng.random::<u64>(), 1, &mut c) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let order: Vec<usize> = split
            .left_members
            .iter()
            .chain(split.right_members.iter())
            .copied()
            .collect();
        let mut oracle_best = f64::INFINITY;
        for l in 1..m {
            let total = cluster_energy(&data, &order[..l]).unwrap()
                + cluster_energy(&data, &order[l..]).unwrap();
            if total < oracle_best {
                oracle_best = total;
            }
        }
        let got = split.split_energy();
        assert!(
            (got - oracle_best).abs() <= 1e-6 * oracle_best.max(1e-12),
            "split energy {got} differs from oracle {oracle_best}"
        );
        checked += 1;
    }
    println!("[PASS] criterion 3: split scan matches the quadratic oracle on 200 instances");
}

#[test]
fn criterion_04_mean_shift_identity() {
    // For any point set S and vector z:
    // sum ||x - z||^2 = phi(S) + |S| ||z - mu(S)||^2.
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    for trial in 0..1000 {
        let m = rng.random_range(1..40);
        let d = rng.random_range(1..10);
        let values: Vec<f64> = (0..m * d).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();
        let data = Dataset::new(values, m, d).unwrap();
        let members: Vec<usize> = (0..m).collect();
        let z: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();

        let mut lhs = 0.0;
        for &i in &members {
            let row = data.row(i);
            let mut acc = 0.0;
            for t in 0..d {
                acc += (row[t] - z[t]) * (row[t] - z[t]);
            }
            lhs += acc;
        }

        let mut mean = vec![0.0; d];
        for &i in &members {
            for (slot, v) in mean.iter_mut().zip(data.row(i)) {
                *slot += v;
            }
        }
        for v in mean.iter_mut() {
            *v /= m as f64;
        }
        let mut shift = 0.0;
        for t in 0..d {
            shift += (z[t] - mean[t]) * (z[t] - mean[t]);
        }
        let rhs = cluster_energy(&data, &members).unwrap() + m as f64 * shift;
        assert!(
            (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
            "trial {trial}: lhs {lhs} != rhs {rhs}"
        );
    }
    println!("[PASS] criterion 4: mean-shift identity holds on 1000 instances");
}

#[test]
fn criterion_05_k2means_bounds_survive_audit() {
    // audit_bounds recomputes every true distance after the assignment and
    // update steps and panics on any violated bound.
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    for fixture_idx in 0..10 {
        let (data, k) = small_fixture(&mut rng, false);
        let mut c = OpCounter::new();
        let state = build_init(&data, k, fixture_idx, rng.random::<u64>(), &mut c);
        let k_n = 1 + rng.random_range(0..k);
        let cfg = EngineConfig::default().with_k_n(k_n).with_audit_bounds(true);
        let run = run_k2means(&data, state, &cfg, &mut c).unwrap();
        assert!(run.state.check_consistency(&data, 1e-9));
    }
    println!("[PASS] criterion 5: bound audit clean on 10 fixtures");
}

#[test]
fn criterion_06_op_count_complexity_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let (data, _) = small_fixture(&mut rng, true); // n = 2000, d = 32
    let n = data.n() as u64;
    let k = 24usize;
    let k_n = 6usize;

    let mut c = OpCounter::new();
    let state = init::kmeans_pp(&data, k, 3, &mut c).unwrap();

    // Lloyd: exactly n*k point-center distances per iteration.
    let mut c1 = OpCounter::new();
    let lloyd = run_lloyd(&data, state.clone(), &EngineConfig::default(), &mut c1).unwrap();
    for ops in &lloyd.iter_ops {
        assert_eq!(ops.point_center_distances, n * k as u64);
        assert_eq!(ops.center_graph_distances, 0);
    }

    // k2means: point-center <= n*k_n, center-graph <= k^2 per iteration.
    let mut c2 = OpCounter::new();
    let k2_cfg = EngineConfig::default().with_k_n(k_n);
    let k2 = run_k2means(&data, state.clone(), &k2_cfg, &mut c2).unwrap();
    for ops in &k2.iter_ops {
        assert!(ops.point_center_distances <= n * k_n as u64);
        assert!(ops.center_graph_distances <= (k * k) as u64);
    }

    // MiniBatch: exactly t*b*k counted distances over the whole run.
    let (b, t) = (100usize, 40usize);
    let mut c3 = OpCounter::new();
    let mb_state = init::random(&data, k, 1, &mut c3).unwrap();
    let before = c3.distances;
    let mb_cfg = EngineConfig {
        batch_size: b,
        batch_iters: Some(t),
        ..EngineConfig::default()
    };
    run_minibatch(&data, mb_state, &mb_cfg, &mut c3).unwrap();
    assert_eq!(c3.distances - before, (t * b * k) as u64);

    println!("[PASS] criterion 6: per-iteration op budgets hold (lloyd exact, k2means bounded, minibatch exact)");
}

#[test]
fn criterion_07_desk_scale_speedups_at_one_percent() {
    let data = big_fixture();
    let spec = BenchSpec {
        dataset: "acceptance-fixture".into(),
        name: None,
        k: vec![200],
        methods: vec![
            MethodSpec { engine: EngineKind::Lloyd, init: InitKind::Kmeanspp, kn_grid: None },
            MethodSpec { engine: EngineKind::Elkan, init: InitKind::Kmeanspp, kn_grid: None },
            MethodSpec { engine: EngineKind::K2Means, init: InitKind::Gdi, kn_grid: None },
        ],
        seeds: vec![0, 1, 2],
        levels: vec![0.01],
        max_iters: None,
    };
    let report = run_bench(&data, &spec).unwrap();
    let rows: Vec<ReportRow> = report.rows.iter().filter(|r| r.level == 0.01).cloned().collect();
    let speedups = speedup_at_reference(&rows).unwrap();

    let get = |method: &str| {
        speedups
            .iter()
            .find(|s| s.method == method)
            .unwrap_or_else(|| panic!("{method} missing from speedups"))
    };
    let k2 = get("k2means");
    let elkan = get("elkan");
    let k2_speedup = k2.speedup.expect("k2means must reach the 1% level");
    let elkan_speedup = elkan.speedup.expect("elkan++ must reach the 1% level");
    assert!(
        k2_speedup >= 5.0,
        "k2means speedup {k2_speedup:.2} below 5.0 (best k_n {:?})",
        k2.best_param
    );
    assert!(elkan_speedup >= 1.5, "elkan++ speedup {elkan_speedup:.2} below 1.5");
    println!(
        "[PASS] criterion 7: at 1% reference, k2means {k2_speedup:.1}x (k_n = {}), elkan++ {elkan_speedup:.1}x over lloyd++",
        k2.best_param.map(|p| p.to_string()).unwrap_or_default()
    );
}

#[test]
fn criterion_08_init_comparison_direction() {
    let data = big_fixture();
    for &k in &[100usize, 200] {
        let rows = compare_inits(&data, k, 10, 100).unwrap();
        let gdi = rows.iter().find(|r| r.init == "gdi").unwrap();
        assert!(
            gdi.avg_init_ops <= 0.3,
            "k = {k}: gdi init ops ratio {} above 0.3",
            gdi.avg_init_ops
        );
        assert!(
            (gdi.avg_energy - 1.0).abs() <= 0.02,
            "k = {k}: gdi avg energy ratio {} outside +/-2%",
            gdi.avg_energy
        );
        println!(
            "[PASS] criterion 8 (k = {k}): gdi init ops {:.3}x, avg energy {:.4}x of kmeans++",
            gdi.avg_init_ops, gdi.avg_energy
        );
    }
}

#[test]
fn criterion_09_kmeans_pp_second_seed_distribution() {
    // Fixed 1-D instance; the exact marginal of the second seed is
    // P(j) = (1/5) sum_c d2(j,c) / sum_i d2(i,c).
    let points = [0.0, 1.0, 3.0, 7.0, 12.0];
    let n = points.len();
    let data = Dataset::new(points.to_vec(), n, 1).unwrap();

    let d2 = |a: f64, b: f64| (a - b) * (a - b);
    let mut expected = vec![0.0f64; n];
    for c in 0..n {
        let total: f64 = points.iter().map(|&p| d2(p, points[c])).sum();
        for j in 0..n {
            expected[j] += d2(points[j], points[c]) / total / n as f64;
        }
    }

    let trials = 100_000u64;
    let mut counts = vec![0u64; n];
    for seed in 0..trials {
        let mut c = OpCounter::new();
        let state = init::kmeans_pp(&data, 2, seed, &mut c).unwrap();
        let second = state.center(1)[0];
        let idx = points
            .iter()
            .position(|&p| p == second)
            .expect("second center is a data point");
        counts[idx] += 1;
    }

    for j in 0..n {
        let freq = counts[j] as f64 / trials as f64;
        let sigma = (expected[j] * (1.0 - expected[j]) / trials as f64).sqrt();
        assert!(
            (freq - expected[j]).abs() <= 3.0 * sigma,
            "outcome {j}: freq {freq:.5} vs expected {:.5} (3 sigma = {:.5})",
            expected[j],
            3.0 * sigma
        );
    }
    println!("[PASS] criterion 9: second-seed frequencies within 3 sigma of exact D^2 law");
}
