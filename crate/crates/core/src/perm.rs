//! Permutations of `d` objects, pair statistics and the Kendall feature map.
//!
//! A [`Permutation`] stores `π(i)` at position `i`, zero-based. Pair statistics
//! range over object pairs `(i, j)` with `i < j`; the pair `(i, j)` has linear
//! index `i·(2d−i−1)/2 + (j−i−1)` everywhere in this crate (feature vectors,
//! Thompson-sampling weights, QAP matrices).

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// Validates `map` as a bijection on `0..map.len()` with at least two objects.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let d = map.len();
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        let mut seen = vec![false; d];
        for &v in &map {
            if v >= d || seen[v] {
                return Err(Error::NotABijection);
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Permutation::new((0..d).collect())
    }

    /// Uniform draw from S_d by Fisher–Yates.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        let mut map: Vec<usize> = (0..d).collect();
        for i in (1..d).rev() {
            let j = rng.random_range(0..=i);
            map.swap(i, j);
        }
        Ok(Permutation { map })
    }

    /// Caller guarantees `map` is a bijection on `0..map.len()`, `len ≥ 2`.
    pub(crate) fn from_vec_unchecked(map: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(map.clone()).is_ok());
        Permutation { map }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }

    /// `(self ∘ other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        check_same_dim(self, other)?;
        Ok(Permutation { map: other.map.iter().map(|&x| self.map[x]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.dim()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// The permutation with positions `i` and `j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Permutation {
        let mut map = self.map.clone();
        map.swap(i, j);
        Permutation { map }
    }

    /// Every pair ordered oppositely: `d−1−π(i)` at each position.
    pub fn reversed(&self) -> Permutation {
        let d = self.dim();
        Permutation { map: self.map.iter().map(|&v| d - 1 - v).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.map.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let map = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::ParsePermutation(t.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(map)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

pub(crate) fn check_same_dim(a: &Permutation, b: &Permutation) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `C(d, 2)`, the number of object pairs.
#[inline]
pub const fn pair_count(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Linear index of the pair `(i, j)`, `i < j < d`.
#[inline]
pub const fn pair_index(d: usize, i: usize, j: usize) -> usize {
    i * (2 * d - i - 1) / 2 + (j - i - 1)
}

/// Number of object pairs the two permutations order oppositely (Kendall tau distance).
pub fn discordant_pairs(a: &Permutation, b: &Permutation) -> Result<usize> {
    check_same_dim(a, b)?;
    Ok(discordant_unchecked(a.as_slice(), b.as_slice()))
}

pub(crate) fn discordant_unchecked(a: &[usize], b: &[usize]) -> usize {
    let d = a.len();
    let mut count = 0;
    for i in 0..d {
        let (ai, bi) = (a[i], b[i]);
        for j in (i + 1)..d {
            if (ai < a[j]) != (bi < b[j]) {
                count += 1;
            }
        }
    }
    count
}

pub fn concordant_pairs(a: &Permutation, b: &Permutation) -> Result<usize> {
    Ok(pair_count(a.dim()) - discordant_pairs(a, b)?)
}

/// Kendall feature vector: for each pair `(i, j)`, `i < j`, the entry is
/// `+c` when `π(i) > π(j)` and `−c` otherwise, with `c = sqrt(1/C(d,2))`.
pub fn kendall_feature_map(p: &Permutation) -> Vec<f64> {
    let d = p.dim();
    let c = libm::sqrt(1.0 / pair_count(d) as f64);
    let m = p.as_slice();
    let mut phi = Vec::with_capacity(pair_count(d));
    for i in 0..d {
        for j in (i + 1)..d {
            phi.push(if m[i] > m[j] { c } else { -c });
        }
    }
    phi
}

/// All `C(d,2)` permutations one transposition away, pairs in lexicographic order.
pub fn swap_neighbors(p: &Permutation) -> Vec<Permutation> {
    let d = p.dim();
    let mut out = Vec::with_capacity(pair_count(d));
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(p.swapped(i, j));
        }
    }
    out
}

/// 0/1 matrix with `entries[i][π(i)] = 1`.
///
/// With this orientation `(P·A·Pᵀ)[j][i] = A[π(j)][π(i)]`, which is the form the
/// Thompson-sampling QAP objective is written in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMatrix {
    d: usize,
    entries: Vec<u8>,
}

impl PermutationMatrix {
    pub fn from_permutation(p: &Permutation) -> Self {
        let d = p.dim();
        let mut entries = vec![0u8; d * d];
        for (i, &v) in p.as_slice().iter().enumerate() {
            entries[i * d + v] = 1;
        }
        PermutationMatrix { d, entries }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.d + col]
    }

    pub fn to_permutation(&self) -> Permutation {
        let map = (0..self.d).map(|i| (0..self.d).position(|j| self.get(i, j) == 1).expect("row has a 1")).collect();
        Permutation { map }
    }
}

/// Iterates S_d in lexicographic order of the mapping, starting at the identity.
pub struct LexicographicPermutations {
    current: Option<Vec<usize>>,
}

impl LexicographicPermutations {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        Ok(LexicographicPermutations { current: Some((0..d).collect()) })
    }
}

impl Iterator for LexicographicPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        if next_lexicographic(&mut next) {
            self.current = Some(next);
        }
        Some(Permutation { map: cur })
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let n = v.len();
    let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| v[j] > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}
