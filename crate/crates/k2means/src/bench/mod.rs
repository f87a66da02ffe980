//! Benchmark harness: counted-operation speedups at reference energy levels
//! and initializer comparisons, with machine-readable reports.
//!
//! The protocol: run k-means++ followed by Lloyd to convergence for every
//! seed and take the minimum converged energy as the reference E_ref. Each
//! (method, parameter, seed) cell then records the cumulative counted ops —
//! initialization included — at the first trace sample whose energy falls
//! within the given level of E_ref. Speedups divide the Lloyd++ figure by
//! the best parameter's figure per method, averaging over seeds before the
//! ratio.

use crate::counter::OpCounter;
use crate::data::Dataset;
use crate::engines::{run_elkan, run_k2means, run_lloyd, run_minibatch, EngineConfig};
use crate::init;
use crate::io::{atomic_write, IoError};
use crate::metric::energy;
use crate::state::ClusterState;
use crate::trace::Trace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Reference levels the protocol understands: 0%, 0.5%, 1% and 2%.
pub const REFERENCE_LEVELS: [f64; 4] = [0.0, 0.005, 0.01, 0.02];

/// Parameter grid tried for k_n; entries above k are skipped.
pub const KN_GRID: [usize; 8] = [3, 5, 10, 20, 30, 50, 100, 200];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("reference level {0} is not one of 0, 0.005, 0.01, 0.02")]
    BadLevel(f64),
    #[error("no lloyd++ baseline reached the reference level")]
    MissingBaseline,
    #[error("spec has no {0}")]
    EmptySpec(&'static str),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("init failed: {0}")]
    Init(#[from] crate::init::InitError),
    #[error("engine failed: {0}")]
    Engine(#[from] crate::engines::EngineError),
    #[error("trace csv parse error at line {0}")]
    TraceParse(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Lloyd,
    Elkan,
    MiniBatch,
    K2Means,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Lloyd => "lloyd",
            EngineKind::Elkan => "elkan",
            EngineKind::MiniBatch => "minibatch",
            EngineKind::K2Means => "k2means",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Random,
    Kmeanspp,
    Gdi,
}

impl InitKind {
    pub fn name(self) -> &'static str {
        match self {
            InitKind::Random => "random",
            InitKind::Kmeanspp => "kmeanspp",
            InitKind::Gdi => "gdi",
        }
    }

    pub fn build(
        self,
        data: &Dataset,
        k: usize,
        seed: u64,
        counter: &mut OpCounter,
    ) -> Result<ClusterState, crate::init::InitError> {
        match self {
            InitKind::Random => init::random(data, k, seed, counter),
            InitKind::Kmeanspp => init::kmeans_pp(data, k, seed, counter),
            InitKind::Gdi => init::gdi(data, k, seed, counter),
        }
    }
}

/// One engine/init pairing to benchmark. `kn_grid` applies to k2means only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSpec {
    pub engine: EngineKind,
    pub init: InitKind,
    #[serde(default)]
    pub kn_grid: Option<Vec<usize>>,
}

impl MethodSpec {
    /// Conventional display label: "++" marks a k-means++ initialization.
    pub fn label(&self) -> String {
        match self.init {
            InitKind::Kmeanspp if self.engine != EngineKind::K2Means => {
                format!("{}++", self.engine.name())
            }
            _ => self.engine.name().to_string(),
        }
    }
}

/// Grid description consumed by `run_bench`; serializable as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSpec {
    /// Dataset path (.k2mx or .csv).
    pub dataset: String,
    /// Report id; defaults to the dataset file stem.
    #[serde(default)]
    pub name: Option<String>,
    pub k: Vec<usize>,
    pub methods: Vec<MethodSpec>,
    pub seeds: Vec<u64>,
    /// Subset of [`REFERENCE_LEVELS`].
    pub levels: Vec<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
}

impl BenchSpec {
    pub fn dataset_id(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            Path::new(&self.dataset)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.dataset.clone())
        })
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.k.is_empty() {
            return Err(BenchError::EmptySpec("k list"));
        }
        if self.methods.is_empty() {
            return Err(BenchError::EmptySpec("method list"));
        }
        if self.seeds.is_empty() {
            return Err(BenchError::EmptySpec("seed list"));
        }
        if self.levels.is_empty() {
            return Err(BenchError::EmptySpec("level list"));
        }
        for &level in &self.levels {
            if !REFERENCE_LEVELS.contains(&level) {
                return Err(BenchError::BadLevel(level));
            }
        }
        Ok(())
    }
}

/// One report entry per (method, parameter, seed, level).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub k: usize,
    pub method: String,
    pub init: String,
    pub param: Option<usize>,
    pub seed: u64,
    pub level: f64,
    pub ops: Option<f64>,
    pub reached: bool,
    pub energy_ref: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<ReportRow>,
}

impl BenchReport {
    pub fn write_json(&self, path: &Path) -> Result<(), IoError> {
        let mut bytes = serde_json::to_vec_pretty(&self.rows).expect("report serializes");
        bytes.push(b'\n');
        atomic_write(path, &bytes)
    }
}

/// Best converged Lloyd++ energy over the given seeds. Counter-free: these
/// runs define the measurement target and their work is not part of any
/// method's cost.
pub fn reference_energy(data: &Dataset, k: usize, seeds: &[u64], max_iters: usize) -> f64 {
    seeds
        .iter()
        .map(|&seed| {
            let mut scratch = OpCounter::new();
            let state = init::kmeans_pp(data, k, seed, &mut scratch)
                .expect("reference init must be valid");
            let cfg = EngineConfig { max_iters, ..EngineConfig::default() };
            let run = run_lloyd(data, state, &cfg, &mut scratch).expect("reference lloyd");
            run.trace.last_energy().expect("trace has samples")
        })
        .fold(f64::INFINITY, f64::min)
}

/// Cumulative counted ops at the first trace sample whose energy is within
/// `level` of the reference, or None if the run never got there.
pub fn ops_to_reference(trace: &Trace, energy_ref: f64, level: f64) -> Option<f64> {
    let target = (1.0 + level) * energy_ref;
    trace.samples.iter().find(|s| s.energy <= target).map(|s| s.ops)
}

/// Run one (engine, init, param, seed) cell and return its trace with init
/// ops included.
pub fn run_cell(
    data: &Dataset,
    k: usize,
    method: &MethodSpec,
    param: Option<usize>,
    seed: u64,
    max_iters: usize,
) -> Result<(Trace, OpCounter), BenchError> {
    let mut counter = OpCounter::new();
    let state = method.init.build(data, k, seed, &mut counter)?;
    let cfg = EngineConfig {
        max_iters,
        k_n: param.unwrap_or(0),
        rng_seed: seed,
        ..EngineConfig::default()
    };
    let run = match method.engine {
        EngineKind::Lloyd => run_lloyd(data, state, &cfg, &mut counter)?,
        EngineKind::Elkan => run_elkan(data, state, &cfg, &mut counter)?,
        EngineKind::MiniBatch => run_minibatch(data, state, &cfg, &mut counter)?,
        EngineKind::K2Means => run_k2means(data, state, &cfg, &mut counter)?,
    };
    Ok((run.trace, counter))
}

/// Execute the whole grid. Cells run in parallel on the current rayon pool;
/// the report row order is a pure function of the grid description.
pub fn run_bench(data: &Dataset, spec: &BenchSpec) -> Result<BenchReport, BenchError> {
    spec.validate()?;
    let max_iters = spec.max_iters.unwrap_or(100);
    let dataset_id = spec.dataset_id();

    struct Cell {
        k: usize,
        method: MethodSpec,
        param: Option<usize>,
        seed: u64,
        energy_ref: f64,
    }

    let mut cells = Vec::new();
    for &k in &spec.k {
        let energy_ref = reference_energy(data, k, &spec.seeds, max_iters);
        for method in &spec.methods {
            let params: Vec<Option<usize>> = match method.engine {
                EngineKind::K2Means => method
                    .kn_grid
                    .clone()
                    .unwrap_or_else(|| KN_GRID.to_vec())
                    .into_iter()
                    .filter(|&kn| kn <= k)
                    .map(Some)
                    .collect(),
                _ => vec![None],
            };
            for param in params {
                for &seed in &spec.seeds {
                    cells.push(Cell { k, method: method.clone(), param, seed, energy_ref });
                }
            }
        }
    }

    let per_cell: Vec<Result<Vec<ReportRow>, BenchError>> = cells
        .par_iter()
        .map(|cell| {
            let (trace, _counter) =
                run_cell(data, cell.k, &cell.method, cell.param, cell.seed, max_iters)?;
            Ok(spec
                .levels
                .iter()
                .map(|&level| {
                    let ops = ops_to_reference(&trace, cell.energy_ref, level);
                    ReportRow {
                        dataset: dataset_id.clone(),
                        k: cell.k,
                        method: cell.method.engine.name().to_string(),
                        init: cell.method.init.name().to_string(),
                        param: cell.param,
                        seed: cell.seed,
                        level,
                        reached: ops.is_some(),
                        ops,
                        energy_ref: cell.energy_ref,
                    }
                })
                .collect())
        })
        .collect();

    let mut rows = Vec::new();
    for cell_rows in per_cell {
        rows.extend(cell_rows?);
    }
    Ok(BenchReport { rows })
}

/// Per-method speedup at one reference level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSpeedup {
    pub method: String,
    pub init: String,
    pub best_param: Option<usize>,
    /// None marks "did not reach".
    pub speedup: Option<f64>,
}

/// Compute speedups from the rows of one (dataset, k, level) group.
///
/// Per (method, param): average ops over the seeds that reached the level.
/// Per method: the best (lowest) parameter average. Speedup divides the
/// Lloyd++ average by that. Methods with no reaching run report None.
pub fn speedup_at_reference(rows: &[ReportRow]) -> Result<Vec<MethodSpeedup>, BenchError> {
    let avg_ops = |group: &[&ReportRow]| -> Option<f64> {
        let reached: Vec<f64> = group.iter().filter_map(|r| r.ops).collect();
        if reached.is_empty() {
            None
        } else {
            Some(reached.iter().sum::<f64>() / reached.len() as f64)
        }
    };

    let baseline_rows: Vec<&ReportRow> = rows
        .iter()
        .filter(|r| r.method == "lloyd" && r.init == "kmeanspp")
        .collect();
    let baseline = avg_ops(&baseline_rows).ok_or(BenchError::MissingBaseline)?;

    let mut keys: Vec<(String, String)> = Vec::new();
    for row in rows {
        let key = (row.method.clone(), row.init.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }

    let mut out = Vec::new();
    for (method, init) in keys {
        let mut params: Vec<Option<usize>> = Vec::new();
        for row in rows.iter().filter(|r| r.method == method && r.init == init) {
            if !params.contains(&row.param) {
                params.push(row.param);
            }
        }
        let mut best: Option<(Option<usize>, f64)> = None;
        for param in params {
            let group: Vec<&ReportRow> = rows
                .iter()
                .filter(|r| r.method == method && r.init == init && r.param == param)
                .collect();
            if let Some(avg) = avg_ops(&group) {
                if best.is_none() || avg < best.unwrap().1 {
                    best = Some((param, avg));
                }
            }
        }
        out.push(MethodSpeedup {
            method,
            init,
            best_param: best.and_then(|(p, _)| p),
            speedup: best.map(|(_, avg)| baseline / avg),
        });
    }
    Ok(out)
}

/// Initializer comparison: average and minimum converged energy of
/// init + Lloyd, and average init-only counted ops, all relative to
/// k-means++.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitComparisonRow {
    pub init: String,
    pub avg_energy: f64,
    pub min_energy: f64,
    pub avg_init_ops: f64,
}

/// Run `trials` seeds of init + Lloyd per initializer. Random initialization
/// is reported with zero init ops: its nearest-center pass is attributed to
/// the engine for this comparison.
pub fn compare_inits(
    data: &Dataset,
    k: usize,
    trials: usize,
    max_iters: usize,
) -> Result<Vec<InitComparisonRow>, BenchError> {
    let kinds = [InitKind::Random, InitKind::Kmeanspp, InitKind::Gdi];
    let cells: Vec<(InitKind, u64)> = kinds
        .iter()
        .flat_map(|&kind| (0..trials as u64).map(move |seed| (kind, seed)))
        .collect();

    let results: Vec<Result<(InitKind, f64, f64), BenchError>> = cells
        .par_iter()
        .map(|&(kind, seed)| {
            let mut counter = OpCounter::new();
            let state = kind.build(data, k, seed, &mut counter)?;
            let init_ops = match kind {
                InitKind::Random => 0.0,
                _ => counter.total(),
            };
            let cfg = EngineConfig { max_iters, ..EngineConfig::default() };
            let run = run_lloyd(data, state, &cfg, &mut counter)?;
            Ok((kind, energy(data, &run.state), init_ops))
        })
        .collect();

    let mut per_kind: Vec<(f64, f64, f64)> = vec![(0.0, f64::INFINITY, 0.0); kinds.len()];
    for result in results {
        let (kind, run_energy, init_ops) = result?;
        let slot = kinds.iter().position(|&x| x == kind).unwrap();
        per_kind[slot].0 += run_energy;
        per_kind[slot].1 = per_kind[slot].1.min(run_energy);
        per_kind[slot].2 += init_ops;
    }
    for entry in per_kind.iter_mut() {
        entry.0 /= trials as f64;
        entry.2 /= trials as f64;
    }

    let pp = kinds.iter().position(|&x| x == InitKind::Kmeanspp).unwrap();
    let (pp_avg, pp_min, pp_ops) = per_kind[pp];
    Ok(kinds
        .iter()
        .zip(per_kind.iter())
        .map(|(&kind, &(avg, min, ops))| InitComparisonRow {
            init: kind.name().to_string(),
            avg_energy: avg / pp_avg,
            min_energy: min / pp_min,
            avg_init_ops: ops / pp_ops,
        })
        .collect())
}

/// Write a trace as `iteration,cumulative_ops,energy` CSV, atomically.
pub fn emit_trace_csv(trace: &Trace, path: &Path) -> Result<(), IoError> {
    let mut out = String::from("iteration,cumulative_ops,energy\n");
    for s in &trace.samples {
        out.push_str(&format!("{},{},{}\n", s.iteration, s.ops, s.energy));
    }
    atomic_write(path, out.as_bytes())
}

/// Parse a trace CSV written by [`emit_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Trace, BenchError> {
    let text = std::fs::read_to_string(path).map_err(IoError::Io)?;
    let mut trace = Trace::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line != "iteration,cumulative_ops,energy" {
                return Err(BenchError::TraceParse(0));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(BenchError::TraceParse(idx));
        }
        let iteration = fields[0].parse().map_err(|_| BenchError::TraceParse(idx))?;
        let ops = fields[1].parse().map_err(|_| BenchError::TraceParse(idx))?;
        let sample_energy = fields[2].parse().map_err(|_| BenchError::TraceParse(idx))?;
        trace.push(iteration, ops, sample_energy);
    }
    Ok(trace)
}
