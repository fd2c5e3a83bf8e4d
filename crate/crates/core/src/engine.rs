//! The BO loop (BOPS-T and BOPS-H), the random-search and GA baselines, and
//! regret and information-gain diagnostics.
//!
//! Every algorithm first evaluates `n_init` distinct uniform permutations drawn
//! from the front of the run's random stream, so runs with the same seed share
//! their initial design. A BO iteration refits the surrogate from scratch
//! (hyperparameters included), optimizes the acquisition, and never spends an
//! evaluation on an already evaluated permutation: a duplicate argmin falls
//! back to the best unevaluated restart result, then to a uniform unevaluated
//! permutation.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{build_qap, expected_improvement_from_moments, log_expected_improvement_from_moments};
use crate::error::{Error, Result};
use crate::ga;
use crate::gp::GpModel;
use crate::kernels::{gram_matrix, KernelSpec};
use crate::linalg::{self, Matrix};
use crate::objectives::{objective_error, Objective};
use crate::optimizers::{multi_restart_search, MultiRestartQap, QapSolver, SearchBudget, MAX_EXHAUSTIVE_DIM};
use crate::perm::{LexicographicPermutations, Permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Kendall GP, Thompson sampling through the QAP.
    BopsT,
    /// Mallows GP, expected improvement by multi-restart local search.
    BopsH,
    Random,
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::BopsT, Algorithm::BopsH, Algorithm::Random, Algorithm::Ga];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BopsT => "bops-t",
            Algorithm::BopsH => "bops-h",
            Algorithm::Random => "random",
            Algorithm::Ga => "ga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidConfig("unknown algorithm (expected bops-t, bops-h, random or ga)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoConfig {
    pub algorithm: Algorithm,
    pub d: usize,
    pub n_init: usize,
    pub n_iters: usize,
    pub budget: SearchBudget,
    pub seed: u64,
    pub ga_population: usize,
    pub ga_offspring: usize,
    /// Random candidates scored against each BOPS-H selection; 0 disables the audit.
    pub ei_audit_candidates: usize,
}

impl BoConfig {
    /// Defaults: 20 initial points, 10 restarts with a `10·C(d,2)` step cap,
    /// GA population 20 and 10 offspring per generation.
    pub fn new(algorithm: Algorithm, d: usize, n_iters: usize, seed: u64) -> Result<Self> {
        let cfg = BoConfig {
            algorithm,
            d,
            n_init: 20,
            n_iters,
            budget: SearchBudget::for_dimension(d, 10)?,
            seed,
            ga_population: 20,
            ga_offspring: 10,
            ei_audit_candidates: 100,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::DimensionTooSmall(self.d));
        }
        if self.n_init == 0 {
            return Err(Error::InvalidConfig("n_init must be >= 1"));
        }
        if self.n_iters == 0 {
            return Err(Error::InvalidConfig("n_iters must be >= 1"));
        }
        SearchBudget::new(self.budget.restarts, self.budget.max_steps_per_restart)?;
        if self.ga_population == 0 || self.ga_offspring == 0 {
            return Err(Error::InvalidConfig("GA population and offspring must be >= 1"));
        }
        Ok(())
    }

    pub fn total_evaluations(&self) -> usize {
        self.n_init + self.n_iters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Init,
    Bo,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Init => "init",
            Phase::Bo => "bo",
        }
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    /// 0-based evaluation index over the whole run.
    pub iteration: usize,
    pub phase: Phase,
    pub permutation: Permutation,
    pub value: f64,
    pub best_so_far: f64,
    /// Wall-clock time spent selecting and evaluating this point.
    pub seconds: f64,
}

/// How a BO iteration arrived at its point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// The acquisition optimizer's best point.
    Acquisition,
    /// Best unevaluated point among the other restart results.
    RestartCandidate,
    /// Uniform unevaluated permutation.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    Thompson {
        /// The sampled weight vector (standardized units).
        weights: Vec<f64>,
        /// QAP objective of the solver's best point.
        solver_value: f64,
        selection: Selection,
    },
    ExpectedImprovement {
        selected_ei: f64,
        /// Largest EI over the unevaluated audit candidates, when the audit is enabled.
        audit_max_ei: Option<f64>,
        selection: Selection,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoTrace {
    pub config: BoConfig,
    pub records: Vec<Record>,
    /// One entry per model-guided iteration (BOPS-T and BOPS-H only).
    pub diagnostics: Vec<Diagnostic>,
}

impl BoTrace {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn best(&self) -> Option<&Record> {
        self.records.iter().min_by(|a, b| a.value.total_cmp(&b.value))
    }

    pub fn final_best(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.best_so_far)
    }

    pub fn permutations(&self) -> Vec<Permutation> {
        self.records.iter().map(|r| r.permutation.clone()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }
}

/// Source of wall-clock time for trace timing.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// Reports zero for every reading.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

struct Recorder<'a, O, C> {
    objective: O,
    clock: &'a C,
    records: Vec<Record>,
    seen: BTreeSet<Permutation>,
    best: f64,
}

impl<'a, O: Objective, C: Clock> Recorder<'a, O, C> {
    fn new(objective: O, clock: &'a C, capacity: usize) -> Self {
        Recorder { objective, clock, records: Vec::with_capacity(capacity), seen: BTreeSet::new(), best: f64::INFINITY }
    }

    fn evaluate(&mut self, p: Permutation, phase: Phase, started: f64) -> Result<f64> {
        let iteration = self.records.len();
        let value = self.objective.evaluate(&p).map_err(|e| objective_error(iteration, e))?;
        if !value.is_finite() {
            return Err(Error::Objective { iteration, message: String::from("non-finite value") });
        }
        self.best = self.best.min(value);
        self.seen.insert(p.clone());
        self.records.push(Record {
            iteration,
            phase,
            permutation: p,
            value,
            best_so_far: self.best,
            seconds: self.clock.seconds() - started,
        });
        Ok(value)
    }

    fn xs(&self) -> Vec<Permutation> {
        self.records.iter().map(|r| r.permutation.clone()).collect()
    }

    fn ys(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    fn initial_design<R: Rng + ?Sized>(&mut self, cfg: &BoConfig, rng: &mut R) -> Result<()> {
        for _ in 0..cfg.n_init {
            let t0 = self.clock.seconds();
            let p = random_unevaluated(cfg.d, &self.seen, rng)?;
            self.evaluate(p, Phase::Init, t0)?;
        }
        Ok(())
    }
}

/// Uniform draw among permutations not in `seen`; a uniform draw from all of
/// S_d once everything has been seen.
pub fn random_unevaluated<R: Rng + ?Sized>(d: usize, seen: &BTreeSet<Permutation>, rng: &mut R) -> Result<Permutation> {
    for _ in 0..256 {
        let p = Permutation::random(d, rng)?;
        if !seen.contains(&p) {
            return Ok(p);
        }
    }
    if d <= MAX_EXHAUSTIVE_DIM {
        let unseen: Vec<Permutation> = LexicographicPermutations::new(d)?.filter(|p| !seen.contains(p)).collect();
        if !unseen.is_empty() {
            return Ok(unseen[rng.random_range(0..unseen.len())].clone());
        }
    }
    Permutation::random(d, rng)
}

fn pick_unevaluated<R: Rng + ?Sized>(
    mut ranked: Vec<(Permutation, f64)>,
    seen: &BTreeSet<Permutation>,
    d: usize,
    rng: &mut R,
) -> Result<(Permutation, Selection)> {
    // stable: equal values keep restart order
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut iter = ranked.into_iter();
    let Some((first, _)) = iter.next() else {
        return Ok((random_unevaluated(d, seen, rng)?, Selection::Random));
    };
    if !seen.contains(&first) {
        return Ok((first, Selection::Acquisition));
    }
    if let Some((p, _)) = iter.find(|(p, _)| !seen.contains(p)) {
        return Ok((p, Selection::RestartCandidate));
    }
    Ok((random_unevaluated(d, seen, rng)?, Selection::Random))
}

fn check_objective<O: Objective>(cfg: &BoConfig, objective: &O, expected: Algorithm) -> Result<()> {
    cfg.validate()?;
    if cfg.algorithm != expected {
        return Err(Error::InvalidConfig("configuration names a different algorithm"));
    }
    if objective.dim() != cfg.d {
        return Err(Error::DimensionMismatch { expected: cfg.d, found: objective.dim() });
    }
    Ok(())
}

fn kendall_template() -> KernelSpec {
    KernelSpec::kendall(1.0, 1e-4).expect("valid")
}

fn mallows_template() -> KernelSpec {
    KernelSpec::mallows(1.0, 1.0, 1e-4).expect("valid")
}

/// Runs `cfg.algorithm` with a stream seeded from `cfg.seed`.
pub fn run<O: Objective, C: Clock>(cfg: &BoConfig, objective: O, clock: &C) -> Result<BoTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.algorithm {
        Algorithm::BopsT => run_bops_t(cfg, objective, &mut rng, clock),
        Algorithm::BopsH => run_bops_h(cfg, objective, &mut rng, clock),
        Algorithm::Random => run_random(cfg, objective, &mut rng, clock),
        Algorithm::Ga => run_ga(cfg, objective, &mut rng, clock),
    }
}

/// BOPS-T with the multi-restart swap-search QAP backend.
pub fn run_bops_t<O: Objective, R: RngCore, C: Clock>(
    cfg: &BoConfig,
    objective: O,
    rng: &mut R,
    clock: &C,
) -> Result<BoTrace> {
    run_bops_t_with_solver(cfg, objective, rng, clock, &MultiRestartQap { budget: cfg.budget })
}

/// BOPS-T with an explicit QAP backend.
pub fn run_bops_t_with_solver<O: Objective, R: RngCore, C: Clock>(
    cfg: &BoConfig,
    objective: O,
    rng: &mut R,
    clock: &C,
    solver: &dyn QapSolver,
) -> Result<BoTrace> {
    check_objective(cfg, &objective, Algorithm::BopsT)?;
    let mut rec = Recorder::new(objective, clock, cfg.total_evaluations());
    rec.initial_design(cfg, rng)?;
    let mut diagnostics = Vec::with_capacity(cfg.n_iters);
    for _ in 0..cfg.n_iters {
        let t0 = clock.seconds();
        let model = GpModel::fit(&kendall_template(), &rec.xs(), &rec.ys())?;
        let posterior = model.weight_posterior()?;
        let weights = posterior.sample(rng);
        let qap = build_qap(&weights, cfg.d)?;
        let solution = solver.solve(&qap, rng)?;
        let (next, selection) = pick_unevaluated(solution.candidates, &rec.seen, cfg.d, rng)?;
        diagnostics.push(Diagnostic::Thompson { weights, solver_value: solution.value, selection });
        rec.evaluate(next, Phase::Bo, t0)?;
    }
    Ok(BoTrace { config: cfg.clone(), records: rec.records, diagnostics })
}

fn moments_at(model: &GpModel, p: &Permutation) -> (f64, f64) {
    let z = model.predict_standardized_unchecked(p);
    (model.y_mean() + model.y_std() * z.mean, model.y_std() * libm::sqrt(z.variance))
}

fn ei_at(model: &GpModel, p: &Permutation, incumbent: f64) -> f64 {
    let (mean, std) = moments_at(model, p);
    expected_improvement_from_moments(mean, std, incumbent)
}

/// BOPS-H: Mallows GP with EI maximized by multi-restart swap local search.
pub fn run_bops_h<O: Objective, R: RngCore, C: Clock>(
    cfg: &BoConfig,
    objective: O,
    rng: &mut R,
    clock: &C,
) -> Result<BoTrace> {
    check_objective(cfg, &objective, Algorithm::BopsH)?;
    let mut rec = Recorder::new(objective, clock, cfg.total_evaluations());
    rec.initial_design(cfg, rng)?;
    let mut audit_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut diagnostics = Vec::with_capacity(cfg.n_iters);
    for _ in 0..cfg.n_iters {
        let t0 = clock.seconds();
        let model = GpModel::fit(&mallows_template(), &rec.xs(), &rec.ys())?;
        let incumbent = rec.best;
        // search unevaluated points only, ranked by log EI so the landscape
        // stays informative where EI underflows
        let seen = &rec.seen;
        let neg_log_ei = |p: &Permutation| {
            if seen.contains(p) {
                return f64::INFINITY;
            }
            let (mean, std) = moments_at(&model, p);
            -log_expected_improvement_from_moments(mean, std, incumbent)
        };
        let results = multi_restart_search(neg_log_ei, cfg.d, &cfg.budget, rng)?;
        let (next, selection) = pick_unevaluated(results, &rec.seen, cfg.d, rng)?;
        let selected_ei = ei_at(&model, &next, incumbent);
        let audit_max_ei = (cfg.ei_audit_candidates > 0).then(|| {
            (0..cfg.ei_audit_candidates)
                .map(|_| {
                    let q = Permutation::random(cfg.d, &mut audit_rng).expect("d >= 2");
                    if rec.seen.contains(&q) {
                        0.0
                    } else {
                        ei_at(&model, &q, incumbent)
                    }
                })
                .fold(0.0, f64::max)
        });
        diagnostics.push(Diagnostic::ExpectedImprovement { selected_ei, audit_max_ei, selection });
        rec.evaluate(next, Phase::Bo, t0)?;
    }
    Ok(BoTrace { config: cfg.clone(), records: rec.records, diagnostics })
}

/// Uniform random search over permutations not yet evaluated.
pub fn run_random<O: Objective, R: RngCore, C: Clock>(
    cfg: &BoConfig,
    objective: O,
    rng: &mut R,
    clock: &C,
) -> Result<BoTrace> {
    check_objective(cfg, &objective, Algorithm::Random)?;
    let mut rec = Recorder::new(objective, clock, cfg.total_evaluations());
    rec.initial_design(cfg, rng)?;
    for _ in 0..cfg.n_iters {
        let t0 = clock.seconds();
        let next = random_unevaluated(cfg.d, &rec.seen, rng)?;
        rec.evaluate(next, Phase::Bo, t0)?;
    }
    Ok(BoTrace { config: cfg.clone(), records: rec.records, diagnostics: Vec::new() })
}

/// Steady-state GA: binary tournaments, order crossover, swap mutation with
/// probability `1/d`, and (μ+λ) truncation after each generation of
/// `ga_offspring` children. The initial population is the best
/// `ga_population` points of the initial design.
pub fn run_ga<O: Objective, R: RngCore, C: Clock>(
    cfg: &BoConfig,
    objective: O,
    rng: &mut R,
    clock: &C,
) -> Result<BoTrace> {
    check_objective(cfg, &objective, Algorithm::Ga)?;
    let mut rec = Recorder::new(objective, clock, cfg.total_evaluations());
    rec.initial_design(cfg, rng)?;
    let mut population: Vec<(Permutation, f64)> =
        rec.records.iter().map(|r| (r.permutation.clone(), r.value)).collect();
    ga::truncate_population(&mut population, cfg.ga_population);
    let mutation_rate = 1.0 / cfg.d as f64;
    let mut remaining = cfg.n_iters;
    while remaining > 0 {
        let brood = cfg.ga_offspring.min(remaining);
        let mut children = Vec::with_capacity(brood);
        for _ in 0..brood {
            let t0 = clock.seconds();
            let a = ga::tournament(&population, rng);
            let b = ga::tournament(&population, rng);
            let mut child = ga::order_crossover(&population[a].0, &population[b].0, rng)?;
            if rng.random_bool(mutation_rate) {
                child = ga::swap_mutation(&child, rng);
            }
            let v = rec.evaluate(child.clone(), Phase::Bo, t0)?;
            children.push((child, v));
        }
        remaining -= brood;
        population.extend(children);
        ga::truncate_population(&mut population, cfg.ga_population);
    }
    Ok(BoTrace { config: cfg.clone(), records: rec.records, diagnostics: Vec::new() })
}

/// `½·log|I + K/σ²|` by Cholesky; fails if `I + K/σ²` is not positive definite.
pub fn info_gain(k: &Matrix, noise_variance: f64) -> Result<f64> {
    if k.rows() != k.cols() {
        return Err(Error::DimensionMismatch { expected: k.rows(), found: k.cols() });
    }
    if !(noise_variance > 0.0) {
        return Err(Error::InvalidHyperparameter("noise variance must be > 0"));
    }
    let n = k.rows();
    let mut m = Matrix::from_fn(n, n, |i, j| k[(i, j)] / noise_variance);
    m.add_to_diagonal(1.0);
    let l = linalg::cholesky(&m)?;
    Ok((0.5 * linalg::log_det_from_cholesky(&l)).max(0.0))
}

/// Empirical information gain `γ̂_T` of the first `t` points for each `t` in
/// `checkpoints`, under `spec`'s kernel (signal scale included).
pub fn info_gain_curve(
    points: &[Permutation],
    spec: &KernelSpec,
    noise_variance: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    checkpoints
        .iter()
        .map(|&t| {
            if t == 0 || t > points.len() {
                return Err(Error::InvalidConfig("checkpoint outside the trace"));
            }
            info_gain(&gram_matrix(spec, &points[..t])?, noise_variance)
        })
        .collect()
}

/// `Σ_t (y_t − f*)` over every evaluation in the trace.
pub fn empirical_regret(trace: &BoTrace, f_star: f64) -> f64 {
    trace.records.iter().map(|r| r.value - f_star).sum()
}

/// Cumulative regret after each evaluation.
pub fn regret_curve(trace: &BoTrace, f_star: f64) -> Vec<f64> {
    trace
        .records
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r.value - f_star;
            Some(*acc)
        })
        .collect()
}
