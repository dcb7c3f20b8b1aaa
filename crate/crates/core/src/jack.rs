//! Jack polynomials `C_kappa` evaluated at a real eigenvalue vector.
//!
//! Values are built degree by degree with the branching rule
//! `P_kappa(x_1..x_n) = sum_mu psi_{kappa/mu} P_mu(x_1..x_{n-1}) x_n^{|kappa|-|mu|}`
//! in the monic P normalization, then rescaled to the C normalization in
//! which the degree-k values sum to `(x_1 + ... + x_m)^k`.
//!
//! The arguments are divided by a power of two `s` with `max |x_i| <= s`,
//! so every stored mantissa stays moderate; a value of degree k is
//! `mantissa * s^k`.

use crate::error::{Error, Result};
use crate::partitions::{self, Partition};
use crate::specfun::AlgebraParam;
use rustc_hash::FxHashMap;

pub const DEFAULT_DEGREE_CAP: usize = 300;

/// `mantissa * 2^exp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledReal {
    pub mantissa: f64,
    pub exp2: i64,
}

impl ScaledReal {
    pub fn to_f64(self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        let e = self.exp2.clamp(-4000, 4000) as i32;
        // Split the power so intermediate factors stay finite.
        self.mantissa * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }

    pub fn ln_abs(self) -> f64 {
        self.mantissa.abs().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }
}

/// Incremental evaluator. Each call to [`JackEvaluator::advance`] adds one degree.
#[derive(Debug, Clone)]
pub struct JackEvaluator {
    alpha: f64,
    m: usize,
    cap: usize,
    x: Vec<f64>,
    exp2: i64,
    /// Parts of every stored partition, zero padded to length m.
    parts: Vec<u16>,
    index: FxHashMap<Box<[u16]>, u32>,
    /// First index of each degree; `starts[k]..starts[k+1]` holds degree k.
    starts: Vec<usize>,
    /// `P_kappa` in the first n variables at slot `idx*m + n-1`.
    levels: Vec<f64>,
    /// `C_kappa / s^k`.
    c_hat: Vec<f64>,
    /// `g[l][t] = prod_{u<t} (alpha u + l + 1) / (alpha u + l + alpha)`.
    g: Vec<Vec<f64>>,
    /// `h[l][t] = sum_{u=1..t} ln(l + alpha u)`.
    h: Vec<Vec<f64>>,
    ln_fact: Vec<f64>,
    pow: Vec<Vec<f64>>,
    /// `binom[n][j]` for the dense rank of short partitions.
    binom: Vec<Vec<usize>>,
    /// `dense[r]` holds `P_mu` in r variables at the rank of `mu` (empty when too large).
    dense: Vec<Vec<f64>>,
    work: u64,
}

/// Largest dense level table, in entries.
const DENSE_LIMIT: usize = 20_000_000;

impl JackEvaluator {
    pub fn new(x: &[f64], beta: AlgebraParam, cap: usize) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("empty eigenvalue vector".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        if cap > u16::MAX as usize {
            return Err(Error::InvalidInput(format!("degree cap {cap} too large")));
        }
        let m = x.len();
        let alpha = beta.alpha();
        let big = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let exp2 = if big > 0.0 { big.log2().ceil() as i64 } else { 0 };
        let scale = 2f64.powi(-exp2 as i32);
        let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();

        let n = cap + 2;
        let g = (0..=m)
            .map(|l| {
                let l = l as f64;
                let mut row = Vec::with_capacity(n);
                let mut acc = 1.0;
                row.push(acc);
                for u in 0..n - 1 {
                    let u = u as f64;
                    acc *= (alpha * u + l + 1.0) / (alpha * u + l + alpha);
                    row.push(acc);
                }
                row
            })
            .collect();
        let h = (0..=m)
            .map(|l| {
                let l = l as f64;
                let mut row = Vec::with_capacity(n);
                let mut acc = 0.0;
                row.push(acc);
                for u in 1..n {
                    acc += (l + alpha * u as f64).ln();
                    row.push(acc);
                }
                row
            })
            .collect();
        let mut ln_fact = vec![0.0; n];
        for k in 1..n {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let pow = xs
            .iter()
            .map(|&v| {
                let mut row = Vec::with_capacity(n);
                let mut acc = 1.0;
                for _ in 0..n {
                    row.push(acc);
                    acc *= v;
                }
                row
            })
            .collect();

        let mut binom = vec![vec![0usize; m + 1]; n + m + 1];
        for (i, row) in binom.iter_mut().enumerate() {
            row[0] = 1;
            for j in 1..=m.min(i) {
                row[j] = 0;
            }
        }
        for i in 1..n + m + 1 {
            for j in 1..=m {
                binom[i][j] = binom[i - 1][j - 1].saturating_add(binom[i - 1][j]);
            }
        }
        let dense = (0..m)
            .map(|r| {
                let size = if r == 0 { 0 } else { binom[cap + r][r].saturating_add(1) };
                if r > 0 && size <= DENSE_LIMIT {
                    vec![0.0; size]
                } else {
                    Vec::new()
                }
            })
            .collect();

        let mut ev = JackEvaluator {
            alpha,
            m,
            cap,
            x: xs,
            exp2,
            parts: Vec::new(),
            index: FxHashMap::default(),
            starts: vec![0],
            levels: Vec::new(),
            c_hat: Vec::new(),
            g,
            h,
            ln_fact,
            pow,
            binom,
            dense,
            work: 0,
        };
        ev.push_partition(&vec![0; m], &vec![1.0; m], 1.0);
        ev.starts.push(1);
        Ok(ev)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Highest degree evaluated so far.
    pub fn degree(&self) -> usize {
        self.starts.len() - 2
    }

    /// Base-2 exponent `e` of the argument scale `s = 2^e`.
    pub fn scale_exp2(&self) -> i64 {
        self.exp2
    }

    /// Number of branching terms evaluated so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    /// Partitions of degree k as zero-padded rows of length m, with their `C / s^k` values.
    pub fn degree_slice(&self, k: usize) -> (&[u16], &[f64]) {
        let (a, b) = (self.starts[k], self.starts[k + 1]);
        (&self.parts[a * self.m..b * self.m], &self.c_hat[a..b])
    }

    pub fn value(&self, kappa: &Partition) -> Option<ScaledReal> {
        if kappa.len() > self.m || kappa.weight() > self.degree() {
            return None;
        }
        let key: Vec<u16> = kappa.parts().iter().map(|&p| p as u16).collect();
        let idx = *self.index.get(key.as_slice())? as usize;
        Some(ScaledReal { mantissa: self.c_hat[idx], exp2: self.exp2 * kappa.weight() as i64 })
    }

    fn push_partition(&mut self, padded: &[u16], levels: &[f64], c: f64) {
        let idx = self.c_hat.len() as u32;
        self.parts.extend_from_slice(padded);
        self.levels.extend_from_slice(levels);
        self.c_hat.push(c);
        let len = padded.iter().take_while(|&&p| p > 0).count();
        self.index.insert(padded[..len].into(), idx);
        for r in len.max(1)..self.m {
            if !self.dense[r].is_empty() {
                let rank = (0..r).map(|j| self.rank_term(r, j, padded[j] as usize)).sum::<usize>();
                self.dense[r][rank] = levels[r - 1];
            }
        }
    }

    /// Contribution of row j to the rank of an r-row partition.
    #[inline]
    fn rank_term(&self, r: usize, j: usize, part: usize) -> usize {
        self.binom[part + r - 1 - j][r - j]
    }

    fn level_of(&self, key: &[u16], n: usize) -> f64 {
        let len = key.iter().take_while(|&&p| p > 0).count();
        match self.index.get(&key[..len]) {
            Some(&i) => self.levels[i as usize * self.m + n - 1],
            None => 0.0,
        }
    }

    /// Evaluate the next degree.
    pub fn advance(&mut self) -> Result<()> {
        let k = self.degree() + 1;
        if k > self.cap {
            return Err(Error::TruncationCapExceeded { requested: k, cap: self.cap });
        }
        let m = self.m;
        let mut levels = vec![0.0; m];
        let mut mu = vec![0u16; m];
        let mut key = vec![0u16; m];
        for kappa in partitions::enumerate(k, m) {
            let mut padded = vec![0u16; m];
            for (i, &p) in kappa.parts().iter().enumerate() {
                padded[i] = p as u16;
            }
            let len = kappa.len();
            levels.iter_mut().for_each(|v| *v = 0.0);
            levels[0] = if len == 1 { self.pow[0][k] } else { 0.0 };
            for n in 2..=m {
                if len > n {
                    continue;
                }
                levels[n - 1] = if len == n {
                    // Full length: factor out x_1 ... x_n.
                    let prod: f64 = self.x[..n].iter().product();
                    for i in 0..m {
                        key[i] = if i < n { padded[i] - 1 } else { 0 };
                    }
                    prod * self.level_of(&key, n)
                } else {
                    let mut acc = 0.0;
                    self.branch(&padded, n, k, n - 2, 1.0, 0, 0, &mut mu, &mut levels, &mut acc);
                    acc
                };
            }
            let c = self.c_factor(&padded, k).exp() * levels[m - 1];
            self.push_partition(&padded, &levels, c);
        }
        self.starts.push(self.c_hat.len());
        Ok(())
    }

    /// Depth-first sum over `mu` interlacing `kappa`, bottom row first.
    #[allow(clippy::too_many_arguments)]
    fn branch(
        &mut self,
        kappa: &[u16],
        n: usize,
        k: usize,
        row: usize,
        psi: f64,
        mu_weight: usize,
        rank: usize,
        mu: &mut [u16],
        same_degree: &mut [f64],
        acc: &mut f64,
    ) {
        let rows = n - 1;
        let ki = kappa[row] as usize;
        let lo_i = kappa[row + 1] as usize;
        for mi in lo_i..=ki {
            let mut f = psi;
            if mi < ki {
                for t in row..rows {
                    let lo = kappa[t + 1] as usize;
                    let hi = if t == row { mi } else { mu[t] as usize };
                    if hi > lo {
                        let g = &self.g[t - row];
                        f *= g[mi - lo] / g[mi - hi] * g[ki - hi] / g[ki - lo];
                    }
                }
            }
            mu[row] = mi as u16;
            let rank = rank + self.rank_term(rows, row, mi);
            if row == 0 {
                self.work += 1;
                let w = mu_weight + mi;
                let p = if w == k {
                    // mu == kappa, evaluated at the previous level of this degree.
                    same_degree[n - 2]
                } else if !self.dense[rows].is_empty() {
                    self.dense[rows][rank]
                } else {
                    self.level_of(&mu[..rows], n - 1)
                };
                *acc += f * p * self.pow[n - 1][k - w];
            } else {
                self.branch(kappa, n, k, row - 1, f, mu_weight + mi, rank, mu, same_degree, acc);
            }
        }
    }

    /// `ln(alpha^k k! / prod_cells (leg + alpha (arm + 1)))`.
    fn c_factor(&self, kappa: &[u16], k: usize) -> f64 {
        let len = kappa.iter().take_while(|&&p| p > 0).count();
        let mut s = k as f64 * self.alpha.ln() + self.ln_fact[k];
        for i in 0..len {
            let ki = kappa[i] as usize;
            for t in i..len {
                let kt = kappa[t] as usize;
                let next = if t + 1 < len { kappa[t + 1] as usize } else { 0 };
                if kt == next {
                    continue;
                }
                // Columns (next, kt] have leg t - i; arm + 1 runs over [ki - kt + 1, ki - next].
                let h = &self.h[t - i];
                s -= h[ki - next] - h[ki - kt];
            }
        }
        s
    }
}

/// All `C_kappa(x)` with `|kappa| <= K` and at most m parts.
#[derive(Debug, Clone)]
pub struct JackTable {
    eval: JackEvaluator,
}

impl JackTable {
    pub fn max_degree(&self) -> usize {
        self.eval.degree()
    }

    pub fn get(&self, kappa: &Partition) -> f64 {
        self.get_scaled(kappa).map_or(0.0, ScaledReal::to_f64)
    }

    /// `None` for partitions outside the table; partitions longer than m vanish.
    pub fn get_scaled(&self, kappa: &Partition) -> Option<ScaledReal> {
        if kappa.len() > self.eval.dim() {
            return Some(ScaledReal { mantissa: 0.0, exp2: 0 });
        }
        self.eval.value(kappa)
    }

    /// `(partition, C_kappa(x))` pairs for one degree, in reverse-lexicographic order.
    pub fn degree(&self, k: usize) -> Vec<(Partition, f64)> {
        let (parts, vals) = self.eval.degree_slice(k);
        let m = self.eval.dim();
        parts
            .chunks(m)
            .zip(vals)
            .map(|(p, &v)| {
                let kappa = Partition::new(p.iter().map(|&x| x as usize).collect());
                let s = ScaledReal { mantissa: v, exp2: self.eval.scale_exp2() * k as i64 };
                (kappa, s.to_f64())
            })
            .collect()
    }
}

pub fn jack_table(x: &[f64], beta: AlgebraParam, max_degree: usize) -> Result<JackTable> {
    jack_table_with_cap(x, beta, max_degree, DEFAULT_DEGREE_CAP)
}

pub fn jack_table_with_cap(
    x: &[f64],
    beta: AlgebraParam,
    max_degree: usize,
    cap: usize,
) -> Result<JackTable> {
    if max_degree > cap {
        return Err(Error::TruncationCapExceeded { requested: max_degree, cap });
    }
    let mut eval = JackEvaluator::new(x, beta, cap)?;
    for _ in 0..max_degree {
        eval.advance()?;
    }
    Ok(JackTable { eval })
}

pub fn jack_single(kappa: &Partition, x: &[f64], beta: AlgebraParam) -> Result<f64> {
    if kappa.len() > x.len() {
        return Ok(0.0);
    }
    Ok(jack_table(x, beta, kappa.weight())?.get(kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::new(v.to_vec())
    }

    #[test]
    fn weight_two_at_beta_one() {
        let t = jack_table(&[1.0, 1.0], AlgebraParam::REAL, 2).unwrap();
        assert!((t.get(&p(&[2])) - 8.0 / 3.0).abs() < 1e-14);
        assert!((t.get(&p(&[1, 1])) - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(t.get(&p(&[])), 1.0);
    }

    #[test]
    fn degree_one_is_trace() {
        let x = [0.3, -1.2, 2.5];
        let t = jack_table(&x, AlgebraParam::QUATERNION, 1).unwrap();
        assert!((t.get(&p(&[1])) - 1.6).abs() < 1e-14);
    }

    #[test]
    fn single_variable_is_power() {
        let t = jack_table(&[0.7], AlgebraParam::OCTONION, 12).unwrap();
        assert!((t.get(&p(&[12])) - 0.7f64.powi(12)).abs() < 1e-15);
    }

    #[test]
    fn too_long_partitions_vanish() {
        assert_eq!(jack_single(&p(&[1, 1, 1]), &[1.0, 2.0], AlgebraParam::REAL).unwrap(), 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let r = jack_table_with_cap(&[0.5, 0.5], AlgebraParam::REAL, 11, 10);
        assert!(matches!(r, Err(Error::TruncationCapExceeded { requested: 11, cap: 10 })));
    }

    #[test]
    fn sum_identity_positive_arguments() {
        let x = [1.9, 0.8, 0.3, 0.05];
        for beta in [1, 2, 4, 8] {
            let t = jack_table(&x, AlgebraParam::new(beta).unwrap(), 30).unwrap();
            let tr: f64 = x.iter().sum();
            for k in 0..=30 {
                let s: f64 = t.degree(k).iter().map(|(_, v)| v).sum();
                assert!((s - tr.powi(k as i32)).abs() <= 1e-12 * tr.powi(k as i32), "beta {beta} k {k}");
            }
        }
    }
}
