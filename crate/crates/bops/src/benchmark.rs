//! Benchmark URIs and per-replication objective construction.
//!
//! ```text
//! synthetic:d=N[,noise=S]            Kendall distance to a hidden target
//! gpdraw:d=N[,l=L][,noise=S]         sample path of a Mallows-kernel GP prior
//! qaplib:PATH                        QAPLIB instance
//! tsplib:PATH[,subset=K]             EUC_2D TSPLIB instance, first K nodes
//! ```
//!
//! Randomized benchmarks draw their hidden state from the replication's
//! objective seed, so every algorithm sees the same function in replication `r`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bops_core::objectives::{GpSamplePath, Objective, QapInstance, SyntheticObjective, TspInstance};
use bops_core::{PairWeights, Permutation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::BopsError;
use crate::formats::{parse_qaplib, parse_tsplib};

#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkSpec {
    Synthetic { d: usize, noise: f64 },
    GpDraw { d: usize, lengthscale: f64, noise: f64 },
    Qaplib { path: PathBuf },
    Tsplib { path: PathBuf, subset: Option<usize> },
}

fn parse_options(body: &str) -> Result<Vec<(&str, &str)>, String> {
    body.split(',')
        .filter(|s| !s.is_empty())
        .map(|kv| kv.split_once('=').ok_or_else(|| format!("expected key=value, got {kv:?}")))
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value {value:?} for {key}"))
}

impl FromStr for BenchmarkSpec {
    type Err = String;

    fn from_str(uri: &str) -> Result<Self, String> {
        let (scheme, body) = uri.split_once(':').ok_or_else(|| format!("benchmark {uri:?} has no scheme"))?;
        match scheme {
            "synthetic" | "gpdraw" => {
                let (mut d, mut noise, mut lengthscale) = (None, 0.0, 0.1);
                for (key, value) in parse_options(body)? {
                    match key {
                        "d" => d = Some(number(key, value)?),
                        "noise" => noise = number(key, value)?,
                        "l" if scheme == "gpdraw" => lengthscale = number(key, value)?,
                        _ => return Err(format!("unknown option {key:?} for {scheme}")),
                    }
                }
                let d: usize = d.ok_or_else(|| format!("{scheme} needs d=N"))?;
                if d < 2 {
                    return Err("d must be >= 2".into());
                }
                if !(noise >= 0.0) || !f64::is_finite(noise) {
                    return Err("noise must be finite and >= 0".into());
                }
                if scheme == "synthetic" {
                    Ok(BenchmarkSpec::Synthetic { d, noise })
                } else if lengthscale > 0.0 && f64::is_finite(lengthscale) {
                    Ok(BenchmarkSpec::GpDraw { d, lengthscale, noise })
                } else {
                    Err("l must be finite and > 0".into())
                }
            }
            "qaplib" if !body.is_empty() => Ok(BenchmarkSpec::Qaplib { path: body.into() }),
            "tsplib" if !body.is_empty() => {
                // options trail the path after the last comma
                match body.rsplit_once(",subset=") {
                    Some((path, k)) => {
                        Ok(BenchmarkSpec::Tsplib { path: path.into(), subset: Some(number("subset", k)?) })
                    }
                    None => Ok(BenchmarkSpec::Tsplib { path: body.into(), subset: None }),
                }
            }
            "qaplib" | "tsplib" => Err(format!("{scheme} needs a file path")),
            _ => Err(format!("unknown benchmark {scheme:?} (expected synthetic, gpdraw, qaplib or tsplib)")),
        }
    }
}

impl fmt::Display for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchmarkSpec::Synthetic { d, noise } => write!(f, "synthetic:d={d},noise={noise}"),
            BenchmarkSpec::GpDraw { d, lengthscale, noise } => write!(f, "gpdraw:d={d},l={lengthscale},noise={noise}"),
            BenchmarkSpec::Qaplib { path } => write!(f, "qaplib:{}", path.display()),
            BenchmarkSpec::Tsplib { path, subset: None } => write!(f, "tsplib:{}", path.display()),
            BenchmarkSpec::Tsplib { path, subset: Some(k) } => write!(f, "tsplib:{},subset={k}", path.display()),
        }
    }
}

/// A benchmark with its files read and parsed.
#[derive(Debug, Clone)]
pub enum Benchmark {
    Synthetic { d: usize, noise: f64 },
    GpDraw { d: usize, lengthscale: f64, noise: f64 },
    Qap(QapInstance),
    Tsp(TspInstance),
}

impl Benchmark {
    pub fn load(spec: &BenchmarkSpec) -> Result<Self, BopsError> {
        let read = |path: &PathBuf| {
            std::fs::read_to_string(path).map_err(|source| BopsError::Io { path: path.clone(), source })
        };
        let parsed = |path: &PathBuf, e| BopsError::Format { path: path.clone(), source: e };
        Ok(match spec {
            BenchmarkSpec::Synthetic { d, noise } => Benchmark::Synthetic { d: *d, noise: *noise },
            BenchmarkSpec::GpDraw { d, lengthscale, noise } => {
                Benchmark::GpDraw { d: *d, lengthscale: *lengthscale, noise: *noise }
            }
            BenchmarkSpec::Qaplib { path } => Benchmark::Qap(parse_qaplib(&read(path)?).map_err(|e| parsed(path, e))?),
            BenchmarkSpec::Tsplib { path, subset } => {
                Benchmark::Tsp(parse_tsplib(&read(path)?, *subset).map_err(|e| parsed(path, e))?)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Benchmark::Synthetic { d, .. } | Benchmark::GpDraw { d, .. } => *d,
            Benchmark::Qap(q) => q.n(),
            Benchmark::Tsp(t) => t.n(),
        }
    }

    /// Known global minimum of the noise-free objective, if any.
    pub fn optimum(&self) -> Option<f64> {
        matches!(self, Benchmark::Synthetic { .. }).then_some(0.0)
    }

    /// Fresh objective for one replication; hidden state comes from `seed`.
    pub fn instantiate(&self, seed: u64) -> Result<Box<dyn Objective + Send>, BopsError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise_rng = ChaCha8Rng::seed_from_u64(rand::RngCore::next_u64(&mut rng));
        Ok(match self {
            Benchmark::Synthetic { d, noise } => {
                let target = Permutation::random(*d, &mut rng)?;
                let obj = SyntheticObjective::new(target, PairWeights::Uniform(1.0), *noise)?;
                Box::new(obj.with_noise_stream(noise_rng))
            }
            Benchmark::GpDraw { d, lengthscale, noise } => {
                let path_rng = ChaCha8Rng::seed_from_u64(rand::RngCore::next_u64(&mut rng));
                Box::new(GpSamplePath::new(*d, *lengthscale, 1.0, *noise, path_rng, noise_rng)?)
            }
            Benchmark::Qap(q) => Box::new(q.clone()),
            Benchmark::Tsp(t) => Box::new(t.clone()),
        })
    }
}
