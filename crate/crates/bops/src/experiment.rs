//! Replicated runs of one algorithm on one benchmark, and their CSV/JSON output.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bops_core::engine::{self, Algorithm, BoConfig, BoTrace, Clock};
use bops_core::optimizers::SearchBudget;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{Benchmark, BenchmarkSpec};
use crate::error::BopsError;

/// Monotonic wall clock started at construction.
#[derive(Debug, Clone, Copy)]
pub struct SystemClock {
    start: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { start: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock::new()
    }
}

impl Clock for SystemClock {
    fn seconds(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRequest {
    pub benchmark: String,
    pub algorithm: String,
    pub init: usize,
    pub iters: usize,
    pub reps: usize,
    pub restarts: usize,
    pub seed: u64,
    pub jobs: usize,
}

/// Seeds for one replication: the algorithm's stream and the objective's
/// hidden state. Independent of the algorithm, so runs are paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplicationSeeds {
    pub run: u64,
    pub objective: u64,
}

pub fn replication_seeds(seed: u64, reps: usize) -> Vec<ReplicationSeeds> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..reps).map(|_| ReplicationSeeds { run: master.next_u64(), objective: master.next_u64() }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub iter: usize,
    pub mean_best: f64,
    pub stderr_best: f64,
    pub median_best: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRow {
    pub rep: usize,
    pub phase: String,
    pub iter: usize,
    pub permutation: String,
    pub value: f64,
    pub best_so_far: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub request: RunRequest,
    pub dim: usize,
    pub seeds: Vec<ReplicationSeeds>,
    pub traces: Vec<BoTrace>,
    pub aggregate: Vec<AggregateRow>,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-iteration mean, standard error (sample standard deviation over
/// `sqrt(reps)`, 0 for one replication) and median of `best_so_far`.
pub fn aggregate(traces: &[BoTrace]) -> Vec<AggregateRow> {
    let len = traces.iter().map(|t| t.records.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let mut v: Vec<f64> = traces.iter().map(|t| t.records[i].best_so_far).collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let stderr = if v.len() > 1 {
                (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
            } else {
                0.0
            };
            AggregateRow { iter: i, mean_best: mean, stderr_best: stderr, median_best: median(&mut v) }
        })
        .collect()
}

pub(crate) fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, BopsError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BopsError::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

pub fn run_experiment(request: &RunRequest) -> Result<ExperimentResult, BopsError> {
    let usage = |e: bops_core::Error| BopsError::Usage(e.to_string());
    let spec: BenchmarkSpec = request.benchmark.parse().map_err(BopsError::Usage)?;
    let algorithm: Algorithm = request.algorithm.parse().map_err(usage)?;
    if request.reps == 0 || request.jobs == 0 {
        return Err(BopsError::Usage("--reps and --jobs must be >= 1".into()));
    }
    let bench = Benchmark::load(&spec)?;
    let d = bench.dim();
    let mut cfg = BoConfig::new(algorithm, d, request.iters, 0).map_err(usage)?;
    cfg.n_init = request.init;
    cfg.budget = SearchBudget::for_dimension(d, request.restarts).map_err(usage)?;
    cfg.validate().map_err(usage)?;

    let seeds = replication_seeds(request.seed, request.reps);
    let pool = thread_pool(request.jobs)?;
    let traces: Vec<BoTrace> = pool.install(|| {
        seeds
            .par_iter()
            .map(|s| {
                let cfg = BoConfig { seed: s.run, ..cfg.clone() };
                let objective = bench.instantiate(s.objective)?;
                Ok(engine::run(&cfg, objective, &SystemClock::new())?)
            })
            .collect::<Result<_, BopsError>>()
    })?;
    let aggregate = aggregate(&traces);
    Ok(ExperimentResult { request: request.clone(), dim: d, seeds, traces, aggregate })
}

pub fn raw_rows(traces: &[BoTrace]) -> impl Iterator<Item = RawRow> + '_ {
    traces.iter().enumerate().flat_map(|(rep, t)| {
        t.records.iter().map(move |r| RawRow {
            rep,
            phase: r.phase.name().to_string(),
            iter: r.iteration,
            permutation: r.permutation.to_string(),
            value: r.value,
            best_so_far: r.best_so_far,
            seconds: r.seconds,
        })
    })
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<(), BopsError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    #[serde(flatten)]
    request: &'a RunRequest,
    dim: usize,
    max_steps_per_restart: usize,
    ga_population: usize,
    ga_offspring: usize,
    replication_seeds: &'a [ReplicationSeeds],
}

/// Output paths for `algorithm` in `dir`: raw CSV, aggregate CSV, config JSON.
pub fn output_paths(dir: &Path, algorithm: &str) -> [PathBuf; 3] {
    [
        dir.join(format!("{algorithm}-raw.csv")),
        dir.join(format!("{algorithm}-aggregate.csv")),
        dir.join(format!("{algorithm}-config.json")),
    ]
}

fn create(path: &Path) -> Result<BufWriter<File>, BopsError> {
    File::create(path).map(BufWriter::new).map_err(|source| BopsError::Io { path: path.to_path_buf(), source })
}

pub fn write_outputs(dir: &Path, result: &ExperimentResult) -> Result<[PathBuf; 3], BopsError> {
    fs::create_dir_all(dir).map_err(|source| BopsError::Io { path: dir.to_path_buf(), source })?;
    let algorithm: Algorithm = result.request.algorithm.parse()?;
    let paths = output_paths(dir, algorithm.name());
    write_csv(create(&paths[0])?, raw_rows(&result.traces))?;
    write_csv(create(&paths[1])?, &result.aggregate)?;
    let cfg = result.traces.first().map(|t| &t.config);
    let echo = ConfigEcho {
        request: &result.request,
        dim: result.dim,
        max_steps_per_restart: cfg.map_or(0, |c| c.budget.max_steps_per_restart),
        ga_population: cfg.map_or(0, |c| c.ga_population),
        ga_offspring: cfg.map_or(0, |c| c.ga_offspring),
        replication_seeds: &result.seeds,
    };
    let mut json = create(&paths[2])?;
    serde_json::to_writer_pretty(&mut json, &echo)?;
    writeln!(json).and_then(|_| json.flush()).map_err(|source| BopsError::Io { path: paths[2].clone(), source })?;
    Ok(paths)
}
