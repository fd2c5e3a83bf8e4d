//! Kendall and Mallows kernels on S_d and Gram-matrix construction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::perm::{check_same_dim, discordant_unchecked, pair_count, Permutation};

/// Relative diagonal jitter added before any Gram factorization.
pub const JITTER: f64 = 1e-6;

/// Largest relative jitter tried before a factorization is declared failed.
pub const MAX_JITTER: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Kendall,
    Mallows,
}

/// Kernel family with its scalar hyperparameters.
///
/// `lengthscale` is only read for [`KernelFamily::Mallows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn kendall(signal_variance: f64, noise_variance: f64) -> Result<Self> {
        KernelSpec { family: KernelFamily::Kendall, lengthscale: 0.0, signal_variance, noise_variance }.validated()
    }

    pub fn mallows(lengthscale: f64, signal_variance: f64, noise_variance: f64) -> Result<Self> {
        KernelSpec { family: KernelFamily::Mallows, lengthscale, signal_variance, noise_variance }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.lengthscale >= 0.0) || !self.lengthscale.is_finite() {
            return Err(Error::InvalidHyperparameter("lengthscale must be finite and >= 0"));
        }
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return Err(Error::InvalidHyperparameter("signal variance must be finite and > 0"));
        }
        if !(self.noise_variance > 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidHyperparameter("noise variance must be finite and > 0"));
        }
        Ok(self)
    }

    /// Unscaled kernel value from a discordant-pair count at dimension `d`.
    #[inline]
    pub fn correlation(&self, discordant: usize, d: usize) -> f64 {
        match self.family {
            KernelFamily::Kendall => kendall_from_count(discordant, d),
            KernelFamily::Mallows => libm::exp(-self.lengthscale * discordant as f64),
        }
    }

    /// `signal_variance · k(a, b)`.
    pub fn covariance(&self, a: &Permutation, b: &Permutation) -> Result<f64> {
        check_same_dim(a, b)?;
        let nd = discordant_unchecked(a.as_slice(), b.as_slice());
        Ok(self.signal_variance * self.correlation(nd, a.dim()))
    }
}

#[inline]
fn kendall_from_count(discordant: usize, d: usize) -> f64 {
    let total = pair_count(d) as f64;
    (total - 2.0 * discordant as f64) / total
}

/// `(n_c − n_d)/C(d,2)`.
pub fn kendall_kernel(a: &Permutation, b: &Permutation) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(kendall_from_count(discordant_unchecked(a.as_slice(), b.as_slice()), a.dim()))
}

/// `exp(−l · n_d)`.
pub fn mallows_kernel(a: &Permutation, b: &Permutation, lengthscale: f64) -> Result<f64> {
    check_same_dim(a, b)?;
    if !(lengthscale >= 0.0) {
        return Err(Error::InvalidHyperparameter("lengthscale must be >= 0"));
    }
    Ok(libm::exp(-lengthscale * discordant_unchecked(a.as_slice(), b.as_slice()) as f64))
}

/// Pairwise discordant counts of a point set, computed once and reused across
/// hyperparameter settings.
#[derive(Debug, Clone)]
pub struct DiscordanceTable {
    d: usize,
    n: usize,
    counts: Vec<u32>,
}

impl DiscordanceTable {
    pub fn new(points: &[Permutation]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let d = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
        }
        let n = points.len();
        let mut counts = alloc::vec![0u32; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let c = discordant_unchecked(points[i].as_slice(), points[j].as_slice()) as u32;
                counts[i * n + j] = c;
                counts[j * n + i] = c;
            }
        }
        Ok(DiscordanceTable { d, n, counts })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.counts[i * self.n + j] as usize
    }

    /// Gram matrix under `spec`, without jitter or noise.
    pub fn gram(&self, spec: &KernelSpec) -> Matrix {
        let n = self.n;
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            k[(i, i)] = spec.signal_variance;
            for j in (i + 1)..n {
                let v = spec.signal_variance * spec.correlation(self.get(i, j), self.d);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }
}

/// `K[i][j] = signal_variance · k(π_i, π_j)`, before jitter.
pub fn gram_matrix(spec: &KernelSpec, points: &[Permutation]) -> Result<Matrix> {
    Ok(DiscordanceTable::new(points)?.gram(spec))
}

/// [`gram_matrix`] with `JITTER · signal_variance` on the diagonal, the matrix
/// every factorization starts from.
pub fn jittered_gram_matrix(spec: &KernelSpec, points: &[Permutation]) -> Result<Matrix> {
    let mut k = gram_matrix(spec, points)?;
    k.add_to_diagonal(JITTER * spec.signal_variance);
    Ok(k)
}
