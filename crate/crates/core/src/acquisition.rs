//! Acquisition functions: expected improvement, and the quadratic assignment
//! form of the Thompson-sampling objective `min_π wᵀφ(π)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::linalg::Matrix;
use crate::perm::{pair_count, pair_index, Permutation};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard deviation below which expected improvement is reported as zero.
pub const EI_MIN_STD: f64 = 1e-12;

pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Expected improvement below `incumbent` of `N(mean, std²)`.
pub fn expected_improvement_from_moments(mean: f64, std: f64, incumbent: f64) -> f64 {
    if !(std >= EI_MIN_STD) {
        return 0.0;
    }
    let gap = incumbent - mean;
    let z = gap / std;
    (gap * normal_cdf(z) + std * normal_pdf(z)).max(0.0)
}

/// Natural log of [`expected_improvement_from_moments`], finite far into the
/// tail where EI itself underflows to zero. Ranking by it is ranking by EI.
pub fn log_expected_improvement_from_moments(mean: f64, std: f64, incumbent: f64) -> f64 {
    let gap = incumbent - mean;
    if !(std >= EI_MIN_STD) {
        return if gap > 0.0 { libm::log(gap) } else { f64::NEG_INFINITY };
    }
    let z = gap / std;
    if z >= -20.0 {
        return libm::log(std) + libm::log(z * normal_cdf(z) + normal_pdf(z));
    }
    // zΦ(z) + φ(z) = φ(z)/z² · (1 − 3/z² + 15/z⁴ − 105/z⁶ + 945/z⁸ − …)
    let u = 1.0 / (z * z);
    let series = 1.0 - u * (3.0 - u * (15.0 - u * (105.0 - u * 945.0)));
    libm::log(std) + libm::log(INV_SQRT_2PI) - 0.5 * z * z + libm::log(u) + libm::log(series)
}

/// EI of `p` under the model's latent posterior, for minimization; `incumbent`
/// is the best observed value so far.
pub fn expected_improvement(model: &GpModel, p: &Permutation, incumbent: f64) -> Result<f64> {
    let pred = model.predict(p)?;
    Ok(expected_improvement_from_moments(pred.mean, libm::sqrt(pred.variance), incumbent))
}

/// Matrices of the QAP `min_P Tr(W·P·A·Pᵀ)` equivalent to minimizing `wᵀφ(π)`.
///
/// `W` carries the pair weights strictly above the diagonal and `A[i][j]` is
/// `sign(j − i)`. With `P` oriented as in [`crate::perm::PermutationMatrix`],
/// `Tr(W·P·A·Pᵀ) = sqrt(C(d,2)) · wᵀφ(π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QapMatrices {
    pub w: Matrix,
    pub a: Matrix,
}

pub fn build_qap(weights: &[f64], d: usize) -> Result<QapMatrices> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    let m = pair_count(d);
    if weights.len() != m {
        return Err(Error::LengthMismatch { expected: m, found: weights.len() });
    }
    let w = Matrix::from_fn(d, d, |i, j| if i < j { weights[pair_index(d, i, j)] } else { 0.0 });
    let a = Matrix::from_fn(d, d, |i, j| match i.cmp(&j) {
        core::cmp::Ordering::Less => 1.0,
        core::cmp::Ordering::Greater => -1.0,
        core::cmp::Ordering::Equal => 0.0,
    });
    Ok(QapMatrices { w, a })
}

impl QapMatrices {
    pub fn dim(&self) -> usize {
        self.w.rows()
    }

    /// `Tr(W·P·A·Pᵀ) = Σ_i Σ_j W[i][j]·A[π(j)][π(i)]`, recomputed in full.
    pub fn objective(&self, p: &Permutation) -> Result<f64> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.dim() });
        }
        Ok(self.objective_unchecked(p))
    }

    pub(crate) fn objective_unchecked(&self, p: &Permutation) -> f64 {
        let d = self.dim();
        let pi = p.as_slice();
        let mut total = 0.0;
        for i in 0..d {
            let wi = self.w.row(i);
            for j in 0..d {
                let wij = wi[j];
                if wij != 0.0 {
                    total += wij * self.a[(pi[j], pi[i])];
                }
            }
        }
        total
    }

    /// Pair weights read back from `W`.
    pub fn weights(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = Vec::with_capacity(pair_count(d));
        for i in 0..d {
            for j in (i + 1)..d {
                out.push(self.w[(i, j)]);
            }
        }
        out
    }
}
