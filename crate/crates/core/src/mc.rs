//! Monte Carlo estimates of `P(F > nabla)` and `P(F < nabla)` for real
//! matrices, by sampling `S_H ~ W_m(nu_H, I)` and `S_E ~ W_m(nu_E, I)`.
//!
//! Samples are drawn in blocks of `BLOCK` from ChaCha8 streams: block `j`
//! uses `ChaCha8Rng::seed_from_u64(seed)` with stream `j`. Counts are summed,
//! so the result does not depend on how blocks are scheduled.

use crate::error::{Error, Result};
use crate::symmat::{loewner_gt, SymMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream = block index";
pub const BLOCK: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub nu_h: u32,
    pub nu_e: u32,
    pub m: usize,
}

impl McConfig {
    pub fn new(m: usize, nu_h: u32, nu_e: u32, samples: u64, seed: u64) -> Result<Self> {
        let cfg = McConfig { samples, seed, nu_h, nu_e, m };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::InvalidInput(format!("need at least 1000 samples, got {}", self.samples)));
        }
        if self.m == 0 || self.nu_h == 0 || (self.nu_e as usize) < self.m {
            return Err(Error::InvalidInput(format!(
                "need m >= 1, nu_H >= 1 and nu_E >= m (m = {}, nu_H = {}, nu_E = {})",
                self.m, self.nu_h, self.nu_e
            )));
        }
        Ok(())
    }
}

/// `W_m(nu, I)`. For `nu >= m` this is the Bartlett construction `T T'` with
/// `T_ii^2 ~ chi^2(nu - i)` (i from 0) and standard normal entries below the
/// diagonal; chi-square deviates come from `rand_distr`'s gamma sampler
/// (Marsaglia-Tsang). For `nu < m` the matrix is `Z'Z` with `Z` a `nu x m`
/// Gaussian matrix, which has rank `nu`.
pub fn sample_wishart<R: rand::Rng + ?Sized>(m: usize, nu: u32, rng: &mut R) -> SymMatrix {
    let mut out = vec![0.0; m * m];
    if (nu as usize) >= m {
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            let chi = ChiSquared::new((nu as usize - i) as f64).expect("positive degrees of freedom");
            t[i * m + i] = chi.sample(rng).sqrt();
            for j in 0..i {
                t[i * m + j] = StandardNormal.sample(rng);
            }
        }
        for i in 0..m {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| t[i * m + k] * t[j * m + k]).sum();
                out[i * m + j] = s;
                out[j * m + i] = s;
            }
        }
    } else {
        for _ in 0..nu {
            let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] += z[i] * z[j];
                }
            }
        }
    }
    SymMatrix::new(m, out).expect("square by construction")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub upper: f64,
    pub upper_stderr: f64,
    pub lower: f64,
    pub lower_stderr: f64,
    pub samples: u64,
}

fn stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn run_block(cfg: &McConfig, nabla: &SymMatrix, block: u64, count: u64) -> Result<(u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block);
    let (mut up, mut lo) = (0, 0);
    for _ in 0..count {
        let sh = sample_wishart(cfg.m, cfg.nu_h, &mut rng);
        let se = sample_wishart(cfg.m, cfg.nu_e, &mut rng);
        let f = match se.inv_sqrt() {
            Ok(r) => sh.sandwich(&r)?,
            // Singular S_E has probability zero for nu_E >= m; skip it like an incomparable draw.
            Err(_) => continue,
        };
        if loewner_gt(&f, nabla, 0.0)? {
            up += 1;
        } else if loewner_gt(nabla, &f, 0.0)? {
            lo += 1;
        }
    }
    Ok((up, lo))
}

/// Both tail fractions from one pass over the samples.
pub fn estimate_probs(cfg: &McConfig, nabla: &SymMatrix) -> Result<McEstimate> {
    cfg.validate()?;
    if nabla.dim() != cfg.m {
        return Err(Error::ShapeError(format!("nabla is {0}x{0}, m = {1}", nabla.dim(), cfg.m)));
    }
    let ev = nabla.eigenvalues()?;
    if !(ev[ev.len() - 1] > 0.0) {
        return Err(Error::NotPd { min_eigenvalue: ev[ev.len() - 1] });
    }
    let blocks = cfg.samples.div_ceil(BLOCK);
    let size = |b: u64| BLOCK.min(cfg.samples - b * BLOCK);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(blocks as usize).max(1);
    let parts: Vec<Result<(u64, u64)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let (mut up, mut lo) = (0, 0);
                    for b in (w as u64..blocks).step_by(workers) {
                        let (u, l) = run_block(cfg, nabla, b, size(b))?;
                        up += u;
                        lo += l;
                    }
                    Ok((up, lo))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
    });
    let (mut up, mut lo) = (0, 0);
    for p in parts {
        let (u, l) = p?;
        up += u;
        lo += l;
    }
    let n = cfg.samples;
    let (pu, pl) = (up as f64 / n as f64, lo as f64 / n as f64);
    Ok(McEstimate { upper: pu, upper_stderr: stderr(pu, n), lower: pl, lower_stderr: stderr(pl, n), samples: n })
}

/// `P(F > nabla)` and its standard error.
pub fn estimate_upper_prob(cfg: &McConfig, nabla: &SymMatrix) -> Result<(f64, f64)> {
    let e = estimate_probs(cfg, nabla)?;
    Ok((e.upper, e.upper_stderr))
}

/// `P(F < nabla)` and its standard error.
pub fn estimate_lower_prob(cfg: &McConfig, nabla: &SymMatrix) -> Result<(f64, f64)> {
    let e = estimate_probs(cfg, nabla)?;
    Ok((e.lower, e.lower_stderr))
}
