//! Black-box objectives over S_d: QAP and Euclidean TSP instances, a synthetic
//! hidden-optimum objective, and a lazily sampled Mallows-GP sample path.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::perm::{check_same_dim, discordant_unchecked, pair_count, Permutation};

/// An expensive function to minimize.
pub trait Objective {
    fn dim(&self) -> usize;
    fn evaluate(&mut self, p: &Permutation) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for &mut T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        (**self).evaluate(p)
    }
}

impl<T: Objective + ?Sized> Objective for alloc::boxed::Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        (**self).evaluate(p)
    }
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    d: usize,
    f: F,
}

impl<F: FnMut(&Permutation) -> f64> FnObjective<F> {
    pub fn new(d: usize, f: F) -> Self {
        FnObjective { d, f }
    }
}

impl<F: FnMut(&Permutation) -> f64> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.d
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        if p.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: p.dim() });
        }
        Ok((self.f)(p))
    }
}

fn check_dim(expected: usize, p: &Permutation) -> Result<()> {
    if p.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: p.dim() });
    }
    Ok(())
}

/// Koopmans–Beckmann QAP with flow matrix `a` and distance matrix `b`, both
/// row-major `n×n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl QapInstance {
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        for m in [&a, &b] {
            if m.len() != n * n {
                return Err(Error::LengthMismatch { expected: n * n, found: m.len() });
            }
        }
        Ok(QapInstance { n, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `Σ_{i,j} A[i][j] · B[π(i)][π(j)]`.
    pub fn value(&self, p: &Permutation) -> Result<f64> {
        check_dim(self.n, p)?;
        let n = self.n;
        let pi = p.as_slice();
        let mut total = 0.0;
        for i in 0..n {
            let brow = &self.b[pi[i] * n..(pi[i] + 1) * n];
            for j in 0..n {
                total += self.a[i * n + j] * brow[pi[j]];
            }
        }
        Ok(total)
    }
}

impl Objective for QapInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        self.value(p)
    }
}

/// Symmetric TSP on 2-D points with TSPLIB `EUC_2D` edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    coords: Vec<(f64, f64)>,
}

impl TspInstance {
    pub fn new(coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::InvalidConfig("a TSP instance needs at least 3 nodes"));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidConfig("TSP coordinates must be finite"));
        }
        Ok(TspInstance { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    /// The first `k` nodes.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k > self.n() {
            return Err(Error::InvalidConfig("subset larger than the instance"));
        }
        TspInstance::new(self.coords[..k].to_vec())
    }

    /// TSPLIB nearest-integer Euclidean distance.
    pub fn edge_length(&self, u: usize, v: usize) -> f64 {
        let (x1, y1) = self.coords[u];
        let (x2, y2) = self.coords[v];
        libm::floor(libm::hypot(x1 - x2, y1 - y2) + 0.5)
    }

    /// Closed tour visiting `π(0), π(1), …, π(n−1)` and back.
    pub fn tour_length(&self, p: &Permutation) -> Result<f64> {
        check_dim(self.n(), p)?;
        let t = p.as_slice();
        let n = t.len();
        Ok((0..n).map(|i| self.edge_length(t[i], t[(i + 1) % n])).sum())
    }
}

impl Objective for TspInstance {
    fn dim(&self) -> usize {
        self.n()
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        self.tour_length(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairWeights {
    /// Same weight on every pair.
    Uniform(f64),
    /// One weight per pair, in pair-index order.
    PerPair(Vec<f64>),
}

/// Weighted discordance from a hidden target plus Gaussian observation noise.
///
/// The noise-free value is `Σ_pairs w_ij · [pair (i,j) discordant with target]`;
/// with uniform weight `s` this is `s · n_d(π, target)`. With nonnegative
/// weights the global minimum 0 is attained at the target.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticObjective {
    target: Permutation,
    weights: PairWeights,
    noise_sd: f64,
}

impl SyntheticObjective {
    pub fn new(target: Permutation, weights: PairWeights, noise_sd: f64) -> Result<Self> {
        let finite = match &weights {
            PairWeights::Uniform(s) => s.is_finite(),
            PairWeights::PerPair(w) => {
                let m = pair_count(target.dim());
                if w.len() != m {
                    return Err(Error::LengthMismatch { expected: m, found: w.len() });
                }
                w.iter().all(|x| x.is_finite())
            }
        };
        if !finite {
            return Err(Error::InvalidConfig("synthetic weights must be finite"));
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(Error::InvalidConfig("noise standard deviation must be finite and >= 0"));
        }
        Ok(SyntheticObjective { target, weights, noise_sd })
    }

    /// Unit-weight Kendall distance to `target`, noise-free.
    pub fn hidden_target(target: Permutation) -> Self {
        SyntheticObjective { target, weights: PairWeights::Uniform(1.0), noise_sd: 0.0 }
    }

    /// Random target with independent `|N(0,1)|` pair weights.
    pub fn random_weighted<R: Rng + ?Sized>(d: usize, noise_sd: f64, rng: &mut R) -> Result<Self> {
        let target = Permutation::random(d, rng)?;
        let w = (0..pair_count(d)).map(|_| libm::fabs(rng.sample::<f64, _>(StandardNormal))).collect();
        SyntheticObjective::new(target, PairWeights::PerPair(w), noise_sd)
    }

    pub fn target(&self) -> &Permutation {
        &self.target
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn noise_free(&self, p: &Permutation) -> Result<f64> {
        check_same_dim(&self.target, p)?;
        match &self.weights {
            PairWeights::Uniform(s) => Ok(s * discordant_unchecked(p.as_slice(), self.target.as_slice()) as f64),
            PairWeights::PerPair(w) => {
                let (a, t) = (p.as_slice(), self.target.as_slice());
                let d = a.len();
                let mut k = 0;
                let mut total = 0.0;
                for i in 0..d {
                    for j in (i + 1)..d {
                        if (a[i] < a[j]) != (t[i] < t[j]) {
                            total += w[k];
                        }
                        k += 1;
                    }
                }
                Ok(total)
            }
        }
    }

    /// Noise-free value plus `N(0, noise_sd²)` drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, p: &Permutation, rng: &mut R) -> Result<f64> {
        let base = self.noise_free(p)?;
        if self.noise_sd == 0.0 {
            return Ok(base);
        }
        Ok(base + self.noise_sd * rng.sample::<f64, _>(StandardNormal))
    }

    /// Binds a noise stream so the objective can be used as an [`Objective`].
    pub fn with_noise_stream(self, rng: ChaCha8Rng) -> NoisySynthetic {
        NoisySynthetic { objective: self, rng }
    }
}

pub struct NoisySynthetic {
    objective: SyntheticObjective,
    rng: ChaCha8Rng,
}

impl NoisySynthetic {
    pub fn objective(&self) -> &SyntheticObjective {
        &self.objective
    }
}

impl Objective for NoisySynthetic {
    fn dim(&self) -> usize {
        self.objective.dim()
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        self.objective.sample(p, &mut self.rng)
    }
}

/// A function drawn from a zero-mean Mallows-kernel GP, sampled lazily.
///
/// Each new query is drawn from its conditional given every value drawn so
/// far (incremental Cholesky), so any set of queries is jointly distributed
/// as the GP prior. Repeated queries return the stored latent value; optional
/// observation noise comes from a separate stream.
pub struct GpSamplePath {
    d: usize,
    lengthscale: f64,
    signal_variance: f64,
    nugget: f64,
    noise_sd: f64,
    index: BTreeMap<Permutation, usize>,
    points: Vec<Permutation>,
    values: Vec<f64>,
    /// Rows of the lower Cholesky factor of `K + nugget·I` over `points`.
    chol_rows: Vec<Vec<f64>>,
    /// `L⁻¹·values`.
    whitened: Vec<f64>,
    path_rng: ChaCha8Rng,
    noise_rng: ChaCha8Rng,
}

impl GpSamplePath {
    pub fn new(
        d: usize,
        lengthscale: f64,
        signal_variance: f64,
        noise_sd: f64,
        path_rng: ChaCha8Rng,
        noise_rng: ChaCha8Rng,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if !(lengthscale >= 0.0) || !(signal_variance > 0.0) || !(noise_sd >= 0.0) {
            return Err(Error::InvalidHyperparameter("GP sample path hyperparameters out of range"));
        }
        Ok(GpSamplePath {
            d,
            lengthscale,
            signal_variance,
            nugget: 1e-8 * signal_variance,
            noise_sd,
            index: BTreeMap::new(),
            points: Vec::new(),
            values: Vec::new(),
            chol_rows: Vec::new(),
            whitened: Vec::new(),
            path_rng,
            noise_rng,
        })
    }

    /// Latent function value at `p`, drawing it if unseen.
    pub fn latent(&mut self, p: &Permutation) -> Result<f64> {
        check_dim(self.d, p)?;
        if let Some(&k) = self.index.get(p) {
            return Ok(self.values[k]);
        }
        let n = self.points.len();
        let cross: Vec<f64> = self
            .points
            .iter()
            .map(|x| {
                let nd = discordant_unchecked(p.as_slice(), x.as_slice()) as f64;
                self.signal_variance * libm::exp(-self.lengthscale * nd)
            })
            .collect();
        let mut l = vec![0.0; n];
        for i in 0..n {
            let row = &self.chol_rows[i];
            let s = linalg::dot(&row[..i], &l[..i]);
            l[i] = (cross[i] - s) / row[i];
        }
        let cond_var = (self.signal_variance + self.nugget - linalg::dot(&l, &l)).max(self.nugget);
        let diag = libm::sqrt(cond_var);
        let mean = linalg::dot(&l, &self.whitened);
        let eps: f64 = self.path_rng.sample(StandardNormal);
        let value = mean + diag * eps;

        self.whitened.push(eps);
        l.push(diag);
        self.chol_rows.push(l);
        self.index.insert(p.clone(), n);
        self.points.push(p.clone());
        self.values.push(value);
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Objective for GpSamplePath {
    fn dim(&self) -> usize {
        self.d
    }

    fn evaluate(&mut self, p: &Permutation) -> Result<f64> {
        let f = self.latent(p)?;
        if self.noise_sd == 0.0 {
            return Ok(f);
        }
        Ok(f + self.noise_sd * self.noise_rng.sample::<f64, _>(StandardNormal))
    }
}

pub(crate) fn objective_error(iteration: usize, e: Error) -> Error {
    match e {
        Error::Objective { .. } => e,
        other => Error::Objective { iteration, message: other.to_string() },
    }
}
