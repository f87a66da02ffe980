//! Dataset ingestion, preprocessing and fixture generation.
//!
//! Binary `.k2mx` layout, all little-endian:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `K2MX`                  |
//! | 4      | 4    | version, u32 = 1              |
//! | 8      | 8    | n, u64                        |
//! | 16     | 8    | d, u64                        |
//! | 24     | 1    | dtype: 1 = f32, 2 = f64       |
//! | 25     | n*d* | row-major values              |
//!
//! `.csv` files are header-less rows of d comma-separated numbers. Values
//! from either format are widened to f64 and rejected if non-finite.

use crate::data::{DataError, Dataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"K2MX";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 25;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic; not a k2mx file")]
    BadMagic,
    #[error("unsupported k2mx version {0}")]
    BadVersion(u32),
    #[error("unknown dtype code {0}")]
    BadDtype(u8),
    #[error("file truncated: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("ragged csv: row {row} has {found} values, expected {expected}")]
    RaggedCsv { row: usize, expected: usize, found: usize },
    #[error("csv parse error at row {row}, column {col}: {value:?}")]
    CsvParse { row: usize, col: usize, value: String },
    #[error("empty dataset in {0}")]
    EmptyFile(String),
    #[error("unsupported extension for {0}; expected .k2mx or .csv")]
    UnknownExtension(String),
    #[error("target dimension {target_d} exceeds data dimension {d}")]
    BadProjection { target_d: usize, d: usize },
    #[error("invalid data: {0}")]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixDtype {
    F32,
    F64,
}

impl MatrixDtype {
    fn code(self) -> u8 {
        match self {
            MatrixDtype::F32 => 1,
            MatrixDtype::F64 => 2,
        }
    }

    fn width(self) -> usize {
        match self {
            MatrixDtype::F32 => 4,
            MatrixDtype::F64 => 8,
        }
    }
}

/// Load a dataset, dispatching on the file extension: `.k2mx` binary or
/// `.csv` text.
pub fn load_matrix(path: &Path) -> Result<Dataset, IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("k2mx") => load_binary(path),
        Some("csv") => load_csv(path),
        _ => Err(IoError::UnknownExtension(path.display().to_string())),
    }
}

fn load_binary(path: &Path) -> Result<Dataset, IoError> {
    let bytes = fs::read(path)?;
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(IoError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(IoError::BadVersion(version));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let dtype = match bytes[24] {
        1 => MatrixDtype::F32,
        2 => MatrixDtype::F64,
        other => return Err(IoError::BadDtype(other)),
    };
    let payload = &bytes[HEADER_LEN..];
    let expected = n * d * dtype.width();
    if payload.len() != expected {
        return Err(IoError::Truncated { expected, found: payload.len() });
    }

    let mut values = Vec::with_capacity(n * d);
    match dtype {
        MatrixDtype::F32 => {
            for chunk in payload.chunks_exact(4) {
                values.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
            }
        }
        MatrixDtype::F64 => {
            for chunk in payload.chunks_exact(8) {
                values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
            }
        }
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(IoError::NonFinite { row: i / d, col: i % d });
        }
    }
    if n == 0 || d == 0 {
        return Err(IoError::EmptyFile(path.display().to_string()));
    }
    Ok(Dataset::new(values, n, d)?)
}

fn load_csv(path: &Path) -> Result<Dataset, IoError> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut d = 0usize;
    let mut n = 0usize;
    for (row, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if n == 0 {
            d = fields.len();
        } else if fields.len() != d {
            return Err(IoError::RaggedCsv { row, expected: d, found: fields.len() });
        }
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| IoError::CsvParse {
                row,
                col,
                value: field.trim().to_string(),
            })?;
            if !v.is_finite() {
                return Err(IoError::NonFinite { row, col });
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(IoError::EmptyFile(path.display().to_string()));
    }
    Ok(Dataset::new(values, n, d)?)
}

/// Write a dataset, dispatching on extension like [`load_matrix`]. Binary
/// writes honor the requested dtype; CSV always writes full-precision f64.
/// The file is written atomically (temp file + rename).
pub fn save_matrix(path: &Path, data: &Dataset, dtype: MatrixDtype) -> Result<(), IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("k2mx") => {
            let mut bytes =
                Vec::with_capacity(HEADER_LEN + data.n() * data.d() * dtype.width());
            bytes.extend_from_slice(&MAGIC);
            bytes.extend_from_slice(&VERSION.to_le_bytes());
            bytes.extend_from_slice(&(data.n() as u64).to_le_bytes());
            bytes.extend_from_slice(&(data.d() as u64).to_le_bytes());
            bytes.push(dtype.code());
            match dtype {
                MatrixDtype::F32 => {
                    for v in data.values() {
                        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
                    }
                }
                MatrixDtype::F64 => {
                    for v in data.values() {
                        bytes.extend_from_slice(&v.to_le_bytes());
                    }
                }
            }
            atomic_write(path, &bytes)
        }
        Some("csv") => {
            let mut out = String::new();
            for i in 0..data.n() {
                let row = data.row(i);
                for (t, v) in row.iter().enumerate() {
                    if t > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!("{v}"));
                }
                out.push('\n');
            }
            atomic_write(path, out.as_bytes())
        }
        _ => Err(IoError::UnknownExtension(path.display().to_string())),
    }
}

/// Write bytes to a sibling temp file and rename into place so interrupted
/// runs never leave partial files.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    {
        let mut file = fs::File::create(tmp_path)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(tmp_path, path)?;
    Ok(())
}

/// Project onto `target_d` dimensions using a matrix of i.i.d. Gaussian
/// entries with variance `1/target_d`. With `identity_override`, a
/// projection to the same dimensionality returns the input unchanged.
pub fn random_project(
    data: &Dataset,
    target_d: usize,
    rng_seed: u64,
    identity_override: bool,
) -> Result<Dataset, IoError> {
    let d = data.d();
    if target_d > d || target_d == 0 {
        return Err(IoError::BadProjection { target_d, d });
    }
    if identity_override && target_d == d {
        return Ok(data.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = 1.0 / (target_d as f64).sqrt();
    let projection: Vec<f64> = (0..d * target_d)
        .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * scale)
        .collect();

    let n = data.n();
    let mut values = vec![0.0; n * target_d];
    for i in 0..n {
        let row = data.row(i);
        for (j, x) in row.iter().enumerate() {
            let proj_row = &projection[j * target_d..(j + 1) * target_d];
            let out = &mut values[i * target_d..(i + 1) * target_d];
            for t in 0..target_d {
                out[t] += x * proj_row[t];
            }
        }
    }
    Ok(Dataset::new(values, n, target_d)?)
}

/// Generate `k_true` unit-variance Gaussian blobs whose means sit at mutual
/// distance >= `separation`, with points assigned round-robin. Returns the
/// data and the ground-truth labels.
pub fn gen_gmm(
    n: usize,
    d: usize,
    k_true: usize,
    separation: f64,
    rng_seed: u64,
) -> Result<(Dataset, Vec<usize>), IoError> {
    assert!(n >= k_true && k_true >= 1, "need n >= k_true >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let normal = StandardNormal;

    // Mean placement: rejection-sample from a Gaussian envelope scaled so
    // typical pairwise distances sit just above the separation floor; widen
    // the envelope whenever placement stalls.
    let mut means: Vec<f64> = vec![0.0; k_true * d];
    let mut sigma = if separation > 0.0 {
        1.2 * separation / (2.0 * d as f64).sqrt()
    } else {
        1.0
    };
    let mut placed = 1; // first mean pinned at the origin
    let mut attempts = 0usize;
    while placed < k_true {
        let candidate: Vec<f64> = (0..d)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng) * sigma)
            .collect();
        let ok = (0..placed).all(|m| {
            crate::metric::sq_dist(&candidate, &means[m * d..(m + 1) * d])
                >= separation * separation
        });
        if ok {
            means[placed * d..(placed + 1) * d].copy_from_slice(&candidate);
            placed += 1;
            attempts = 0;
        } else {
            attempts += 1;
            if attempts > 1000 {
                sigma *= 1.3;
                attempts = 0;
            }
        }
    }

    let mut values = vec![0.0; n * d];
    let mut labels = vec![0usize; n];
    for i in 0..n {
        let blob = i % k_true;
        labels[i] = blob;
        for t in 0..d {
            values[i * d + t] = means[blob * d + t]
                + <StandardNormal as Distribution<f64>>::sample(&normal, &mut rng);
        }
    }
    Ok((Dataset::new(values, n, d)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn binary_round_trip_is_bit_identical() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.k2mx");
        let data = Dataset::new(vec![1.5, -2.25, 3.0, 0.5, 1e-12, 7.0], 3, 2).unwrap();
        save_matrix(&path, &data, MatrixDtype::F64).unwrap();
        let loaded = load_matrix(&path).unwrap();
        assert_eq!(loaded, data);
    }

    #[test]
    fn f32_round_trip_widens() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.k2mx");
        let data = Dataset::new(vec![1.5, -2.25, 3.0, 0.5], 2, 2).unwrap();
        save_matrix(&path, &data, MatrixDtype::F32).unwrap();
        let loaded = load_matrix(&path).unwrap();
        // These values are exactly representable in f32.
        assert_eq!(loaded, data);
    }

    #[test]
    fn csv_parses_rows() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,2\n3,4\n").unwrap();
        let loaded = load_matrix(&path).unwrap();
        assert_eq!(loaded.n(), 2);
        assert_eq!(loaded.d(), 2);
        assert_eq!(loaded.row(0), &[1.0, 2.0]);
        assert_eq!(loaded.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        let data = Dataset::new(vec![0.1, -7.25, 1e300, 3.5], 2, 2).unwrap();
        save_matrix(&path, &data, MatrixDtype::F64).unwrap();
        assert_eq!(load_matrix(&path).unwrap(), data);
    }

    #[test]
    fn nan_is_rejected_with_position() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,2\n3,nan\n").unwrap();
        match load_matrix(&path) {
            Err(IoError::NonFinite { row: 1, col: 1 }) => {}
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn ragged_csv_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "1,2\n3\n").unwrap();
        assert!(matches!(
            load_matrix(&path),
            Err(IoError::RaggedCsv { row: 1, expected: 2, found: 1 })
        ));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.k2mx");
        fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
        assert!(matches!(load_matrix(&path), Err(IoError::BadMagic)));
    }

    #[test]
    fn projection_identity_override() {
        let data = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, 2).unwrap();
        let out = random_project(&data, 2, 0, true).unwrap();
        assert_eq!(out, data);
    }

    #[test]
    fn projection_is_deterministic() {
        let data = Dataset::new((0..40).map(|v| v as f64).collect(), 10, 4).unwrap();
        let a = random_project(&data, 2, 9, false).unwrap();
        let b = random_project(&data, 2, 9, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projection_rejects_expansion() {
        let data = Dataset::new(vec![1.0, 2.0], 1, 2).unwrap();
        assert!(matches!(
            random_project(&data, 3, 0, false),
            Err(IoError::BadProjection { target_d: 3, d: 2 })
        ));
    }

    #[test]
    fn projection_distortion_is_moderate() {
        use rand::Rng;
        // 100 random points, 784 -> 50 dims: mean relative distortion of
        // pairwise squared distances stays well under 0.5.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let values: Vec<f64> = (0..100 * 784).map(|_| rng.random::<f64>()).collect();
        let data = Dataset::new(values, 100, 784).unwrap();
        let projected = random_project(&data, 50, 3, false).unwrap();

        let mut total = 0.0;
        let mut count = 0usize;
        for i in 0..100 {
            for j in (i + 1)..100 {
                let orig = crate::metric::sq_dist(data.row(i), data.row(j));
                let proj = crate::metric::sq_dist(projected.row(i), projected.row(j));
                total += (proj - orig).abs() / orig;
                count += 1;
            }
        }
        let mean_distortion = total / count as f64;
        assert!(mean_distortion < 0.5, "mean distortion {mean_distortion}");
    }

    #[test]
    fn gmm_single_blob_centers_near_origin() {
        let (data, labels) = gen_gmm(2000, 3, 1, 0.0, 5).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        let mut mean = [0.0; 3];
        for i in 0..2000 {
            for (t, slot) in mean.iter_mut().enumerate() {
                *slot += data.row(i)[t];
            }
        }
        for v in mean.iter_mut() {
            *v /= 2000.0;
        }
        let bound = 3.0 / (2000.0f64).sqrt();
        for (t, v) in mean.iter().enumerate() {
            assert!(v.abs() < bound, "mean[{t}] = {v} exceeds {bound}");
        }
    }

    #[test]
    fn gmm_means_respect_separation() {
        let (data, labels) = gen_gmm(300, 4, 6, 8.0, 2).unwrap();
        // Reconstruct blob means from labels.
        let mut sums = [0.0; 6 * 4];
        let mut counts = [0usize; 6];
        for i in 0..300 {
            counts[labels[i]] += 1;
            for t in 0..4 {
                sums[labels[i] * 4 + t] += data.row(i)[t];
            }
        }
        for b in 0..6 {
            for t in 0..4 {
                sums[b * 4 + t] /= counts[b] as f64;
            }
        }
        // Empirical means sit near the true means, which are >= 8 apart;
        // allow sampling noise.
        for a in 0..6 {
            for b in (a + 1)..6 {
                let dist =
                    crate::metric::sq_dist(&sums[a * 4..a * 4 + 4], &sums[b * 4..b * 4 + 4])
                        .sqrt();
                assert!(dist > 6.0, "blobs {a},{b} too close: {dist}");
            }
        }
    }

    #[test]
    fn gmm_is_deterministic() {
        let (a, la) = gen_gmm(100, 5, 4, 3.0, 7).unwrap();
        let (b, lb) = gen_gmm(100, 5, 4, 3.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
    }
}
