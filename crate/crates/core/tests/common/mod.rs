//! Reference implementations used only by the tests. None of them share code
//! with the library.
#![allow(dead_code)]

use rand::Rng;

/// Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, &c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    // Modified Lentz evaluation of the continued fraction for I_x(a, b).
    let tiny = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn ln_front(a: f64, b: f64, x: f64) -> f64 {
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front(a, b, x).exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front(a, b, x).exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Upper tail `1 - I_x(a, b)` without forming the difference when it is small.
pub fn inc_beta_upper(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x >= 1.0 {
        return 0.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        1.0 - ln_front(a, b, x).exp() * beta_cf(a, b, x) / a
    } else {
        ln_front(a, b, x).exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Scalar Gauss series for `2F1(a, b; c; x)`, |x| < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for n in 0..100_000 {
        let n = n as f64;
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Partition numbers by Euler's pentagonal recurrence.
pub fn partition_numbers(n: usize) -> Vec<u64> {
    let mut p = vec![0i64; n + 1];
    p[0] = 1;
    for i in 1..=n {
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            p[i] += sign * p[i - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= i {
                p[i] += sign * p[i - g2];
            }
            k += 1;
        }
    }
    p.into_iter().map(|v| v as u64).collect()
}

/// Partitions of `k` with at most `m` parts, zero padded, lexicographically decreasing.
pub fn padded_partitions(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cap: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (0..=cap.min(rest)).rev() {
            cur.push(p);
            go(rest - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, k, m, &mut Vec::new(), &mut out);
    out
}

fn sorted_desc(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

/// Monomial symmetric polynomial `m_mu(x)` by summing over distinct permutations.
pub fn monomial(mu: &[usize], x: &[f64]) -> f64 {
    fn go(rem: &mut Vec<(usize, usize)>, pos: usize, x: &[f64], acc: f64) -> f64 {
        if pos == x.len() {
            return acc;
        }
        let mut s = 0.0;
        for i in 0..rem.len() {
            if rem[i].1 == 0 {
                continue;
            }
            rem[i].1 -= 1;
            s += go(rem, pos + 1, x, acc * x[pos].powi(rem[i].0 as i32));
            rem[i].1 += 1;
        }
        s
    }
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for &p in mu {
        match counts.iter_mut().find(|c| c.0 == p) {
            Some(c) => c.1 += 1,
            None => counts.push((p, 1)),
        }
    }
    go(&mut counts, 0, x, 1.0)
}

/// Jack polynomials of degree k in m variables in the monomial basis, from the
/// eigen-equation of the Laplace-Beltrami type operator
/// `(alpha/2) sum x_i^2 d_i^2 + sum_{i != j} x_i^2 / (x_i - x_j) d_i`,
/// normalized so that the polynomials sum to `(x_1 + ... + x_m)^k`.
/// Returns (partition, value at x) pairs.
pub fn jack_c_by_monomials(k: usize, x: &[f64], alpha: f64) -> Vec<(Vec<usize>, f64)> {
    let m = x.len();
    let parts = padded_partitions(k, m);
    let n = parts.len();
    let eps: Vec<f64> = parts
        .iter()
        .map(|l| {
            let mut e = 0.0;
            for i in 0..m {
                e += alpha / 2.0 * (l[i] * l[i]) as f64 - alpha / 2.0 * l[i] as f64;
                for j in (i + 1)..m {
                    e += l[i].max(l[j]) as f64;
                }
            }
            e
        })
        .collect();
    let pos = |v: &Vec<usize>| parts.iter().position(|p| p == v);
    // op[src][dst]: coefficient of m_dst in D(m_src), off-diagonal.
    let mut op = vec![vec![0.0; n]; n];
    for (dst, mu) in parts.iter().enumerate() {
        for i in 0..m {
            for j in (i + 1)..m {
                let (hi, lo) = (mu[i].max(mu[j]), mu[i].min(mu[j]));
                for t in 1..=lo {
                    let mut src = mu.clone();
                    src[i] = hi + t;
                    src[j] = lo - t;
                    let src = sorted_desc(src);
                    let s = pos(&src).expect("source partition");
                    op[s][dst] += (hi - lo + 2 * t) as f64;
                }
            }
        }
    }
    // coef[kappa][mu]
    let mut coef = vec![vec![0.0; n]; n];
    for kap in 0..n {
        coef[kap][kap] = 1.0;
        for mu in (kap + 1)..n {
            let s: f64 = (kap..mu).map(|l| coef[kap][l] * op[l][mu]).sum();
            // Partitions not dominated by kappa are unreachable and keep a zero coefficient.
            coef[kap][mu] = if s == 0.0 { 0.0 } else { s / (eps[kap] - eps[mu]) };
        }
    }
    // Triangular solve for the normalization against p_1^k.
    let ln_fact = |v: usize| (1..=v).map(|i| (i as f64).ln()).sum::<f64>();
    let mut d = vec![0.0; n];
    for nu in 0..n {
        let multi = (ln_fact(k) - parts[nu].iter().map(|&p| ln_fact(p)).sum::<f64>()).exp();
        let s: f64 = (0..nu).map(|kap| d[kap] * coef[kap][nu]).sum();
        d[nu] = multi - s;
    }
    let mono: Vec<f64> = parts.iter().map(|p| monomial(p, x)).collect();
    (0..n)
        .map(|kap| {
            let p: f64 = (kap..n).map(|mu| coef[kap][mu] * mono[mu]).sum();
            (parts[kap].iter().copied().filter(|&v| v > 0).collect(), d[kap] * p)
        })
        .collect()
}

/// Uniform point in the Euclidean ball of radius `r` in `m` dimensions.
pub fn in_ball(rng: &mut impl Rng, m: usize, r: f64) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = r * rng.gen::<f64>().powf(1.0 / m as f64) / n;
    v.into_iter().map(|a| a * scale).collect()
}

/// Random symmetric positive definite matrix with eigenvalues drawn from `eig`.
pub fn random_spd(rng: &mut impl Rng, m: usize, eig: impl Fn(&mut dyn rand::RngCore) -> f64) -> Vec<Vec<f64>> {
    let mut rng_dyn: &mut dyn rand::RngCore = rng;
    let q = random_orthogonal(&mut rng_dyn, m);
    let lam: Vec<f64> = (0..m).map(|_| eig(&mut rng_dyn)).collect();
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = (0..m).map(|k| q[i][k] * lam[k] * q[j][k]).sum();
        }
    }
    a
}

/// Orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut impl Rng, m: usize) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        for c in &cols {
            let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
        }
        let n: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.iter().map(|a| a / n).collect());
        }
    }
    (0..m).map(|i| (0..m).map(|j| cols[j][i]).collect()).collect()
}
