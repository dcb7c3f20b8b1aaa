//! Hypergeometric functions of one matrix argument, `pFq(a; b; X)`.
//!
//! The series `sum_k sum_{|kappa|=k} [a]_kappa / [b]_kappa * C_kappa(X) / k!`
//! is summed degree by degree over the eigenvalues of X. Every term is kept
//! as sign and log-magnitude so results near 1e-300 survive.

use crate::error::{Error, Result};
use crate::jack::{JackEvaluator, DEFAULT_DEGREE_CAP};
use crate::specfun::{AlgebraParam, SignedLog, ZERO_FACTOR_TOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Half-width of the band around radius 1 where neither convergence rule applies.
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub beta: AlgebraParam,
}

impl HyperParams {
    pub fn new(upper: Vec<f64>, lower: Vec<f64>, beta: AlgebraParam) -> Self {
        HyperParams { upper, lower, beta }
    }

    /// Rejects lower parameters with `b - (j-1) beta/2` a non-positive integer for some `j <= m`.
    pub fn validate(&self, m: usize) -> Result<()> {
        for (index, &b) in self.lower.iter().enumerate() {
            if !b.is_finite() {
                return Err(Error::BadLowerParameter { index, value: b });
            }
            for j in 0..m {
                let c = b - j as f64 * self.beta.beta() / 2.0;
                let r = c.round();
                if r <= 0.0 && (c - r).abs() <= 1e-9 {
                    return Err(Error::BadLowerParameter { index, value: b });
                }
            }
        }
        if self.upper.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite upper parameter".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub max_degree: usize,
    pub rel_tol: f64,
    pub stall_window: usize,
    pub divergence_window: usize,
    /// Budget on branching terms spent in Jack evaluation; the series stops as Truncated past it.
    pub max_work: u64,
    /// A result whose absolute term sum exceeds this multiple of its value is rejected.
    pub cancellation_limit: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_degree: 200,
            rel_tol: 1e-12,
            stall_window: 3,
            divergence_window: 10,
            max_work: 200_000_000,
            cancellation_limit: 1e6,
        }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree < 1 || !(self.rel_tol > 0.0) || self.stall_window < 1 {
            return Err(Error::InvalidInput("invalid series control".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesStatus {
    Converged,
    Terminated,
    Truncated,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceReason {
    /// `p = q + 1` and the spectral radius exceeds 1.
    Radius,
    /// `p > q + 1` without termination.
    NonTerminating,
    /// Degree contributions kept growing up to the truncation degree.
    Growth,
    /// Terms far larger than their sum; the value carries no correct digits.
    Cancellation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceClass {
    AlwaysConverges,
    ConvergesInUnitBall,
    DivergesUnlessTerminating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub log_value: SignedLog,
    pub status: SeriesStatus,
    pub degree_used: usize,
    /// Magnitude of the last degree contribution; a heuristic, not a bound.
    #[serde(with = "crate::serde_float")]
    pub tail_estimate: f64,
    pub divergence: Option<DivergenceReason>,
    pub spectral_radius: f64,
    pub termination_degree: Option<usize>,
    /// `sum |terms| / |value|`; `None` when no sum was formed.
    #[serde(with = "crate::serde_float::option")]
    pub cancellation_ratio: Option<f64>,
    pub work: u64,
}

impl SeriesResult {
    pub fn value(&self) -> f64 {
        self.log_value.to_f64()
    }

    pub fn is_diverged(&self) -> bool {
        self.status == SeriesStatus::Diverged
    }
}

pub fn classify(p: usize, q: usize, _spectral_radius: f64) -> ConvergenceClass {
    if p <= q {
        ConvergenceClass::AlwaysConverges
    } else if p == q + 1 {
        ConvergenceClass::ConvergesInUnitBall
    } else {
        ConvergenceClass::DivergesUnlessTerminating
    }
}

/// Highest degree with non-zero terms when an upper parameter is 0 or a negative integer.
pub fn detect_termination(params: &HyperParams, m: usize) -> Option<usize> {
    params
        .upper
        .iter()
        .filter_map(|&a| {
            let r = a.round();
            (r <= 0.0 && (a - r).abs() <= ZERO_FACTOR_TOL).then(|| (-r) as usize * m)
        })
        .min()
}

/// Prefix tables of `(c)_t` for `c = a - i beta / 2`.
struct RisingTable {
    ln_abs: Vec<f64>,
    negatives: Vec<u32>,
    /// Smallest t with `(c)_t == 0`.
    zero_at: Option<usize>,
}

impl RisingTable {
    fn new(c: f64, len: usize) -> Self {
        let mut ln_abs = Vec::with_capacity(len + 1);
        let mut negatives = Vec::with_capacity(len + 1);
        let (mut s, mut n) = (0.0, 0u32);
        let mut zero_at = None;
        ln_abs.push(s);
        negatives.push(n);
        for t in 0..len {
            let f = c + t as f64;
            if f.abs() <= ZERO_FACTOR_TOL && zero_at.is_none() {
                zero_at = Some(t + 1);
            }
            if f != 0.0 {
                s += f.abs().ln();
            }
            if f < 0.0 {
                n += 1;
            }
            ln_abs.push(s);
            negatives.push(n);
        }
        RisingTable { ln_abs, negatives, zero_at }
    }
}

/// `[a]_kappa` over all parameters as one table per (parameter, row).
struct CoefficientTables {
    upper: Vec<Vec<RisingTable>>,
    lower: Vec<Vec<RisingTable>>,
}

impl CoefficientTables {
    fn new(params: &HyperParams, m: usize, len: usize) -> Self {
        let build = |v: &[f64]| {
            v.iter()
                .map(|&a| {
                    (0..m).map(|i| RisingTable::new(a - i as f64 * params.beta.beta() / 2.0, len)).collect()
                })
                .collect()
        };
        CoefficientTables { upper: build(&params.upper), lower: build(&params.lower) }
    }

    /// `prod [a]_kappa / prod [b]_kappa`.
    fn ratio(&self, kappa: &[u16]) -> SignedLog {
        let mut ln = 0.0;
        let mut neg = 0u32;
        for rows in &self.upper {
            for (t, &k) in rows.iter().zip(kappa) {
                let k = k as usize;
                if t.zero_at.is_some_and(|z| k >= z) {
                    return SignedLog::ZERO;
                }
                ln += t.ln_abs[k];
                neg += t.negatives[k];
            }
        }
        for rows in &self.lower {
            for (t, &k) in rows.iter().zip(kappa) {
                let k = k as usize;
                ln -= t.ln_abs[k];
                neg += t.negatives[k];
            }
        }
        SignedLog { ln_abs: ln, sign: if neg.is_multiple_of(2) { 1 } else { -1 } }
    }
}

fn diverged(reason: DivergenceReason, radius: f64, termination: Option<usize>) -> SeriesResult {
    SeriesResult {
        log_value: SignedLog::ZERO,
        status: SeriesStatus::Diverged,
        degree_used: 0,
        tail_estimate: f64::INFINITY,
        divergence: Some(reason),
        spectral_radius: radius,
        termination_degree: termination,
        cancellation_ratio: None,
        work: 0,
    }
}

/// Evaluate `pFq(upper; lower; X)` at the eigenvalues `x` of X.
pub fn hyp_pfq(params: &HyperParams, x: &[f64], ctrl: &SeriesControl) -> Result<SeriesResult> {
    ctrl.validate()?;
    let m = x.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty eigenvalue vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    params.validate(m)?;
    let radius = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let termination = detect_termination(params, m);
    let class = classify(params.upper.len(), params.lower.len(), radius);
    if termination.is_none() {
        match class {
            ConvergenceClass::DivergesUnlessTerminating => {
                return Ok(diverged(DivergenceReason::NonTerminating, radius, None));
            }
            ConvergenceClass::ConvergesInUnitBall if radius > 1.0 + BOUNDARY_BAND => {
                return Ok(diverged(DivergenceReason::Radius, radius, None));
            }
            _ => {}
        }
    }
    let boundary = termination.is_none()
        && class == ConvergenceClass::ConvergesInUnitBall
        && (radius - 1.0).abs() <= BOUNDARY_BAND;

    if ctrl.max_degree > DEFAULT_DEGREE_CAP {
        return Err(Error::TruncationCapExceeded { requested: ctrl.max_degree, cap: DEFAULT_DEGREE_CAP });
    }
    let last = termination.map_or(ctrl.max_degree, |t| t.min(ctrl.max_degree));
    let cap = last;
    let mut sum = SignedLog::ONE;
    let mut acc = ScaledSum::new();
    let mut abs_sum = SignedLog::ONE;
    let mut contributions: Vec<f64> = vec![0.0];
    let mut status = None;
    let mut degree = 0;
    let mut stalls = 0;
    let mut tail = 0.0;

    if termination != Some(0) {
        let mut jack = JackEvaluator::new(x, params.beta, cap)?;
        let coeffs = CoefficientTables::new(params, m, cap + 1);
        let ln_scale = jack.scale_exp2() as f64 * LN_2;
        let mut ln_fact = 0.0;
        let mut terms: Vec<(f64, i8)> = Vec::new();
        for k in 1..=last {
            if jack.work() > ctrl.max_work {
                break;
            }
            jack.advance()?;
            ln_fact += (k as f64).ln();
            let (parts, values) = jack.degree_slice(k);
            terms.clear();
            for (kappa, &c) in parts.chunks(m).zip(values) {
                if c == 0.0 {
                    continue;
                }
                let q = coeffs.ratio(kappa);
                if q.is_zero() {
                    continue;
                }
                let sign = q.sign * if c > 0.0 { 1 } else { -1 };
                terms.push((q.ln_abs + c.abs().ln() + k as f64 * ln_scale - ln_fact, sign));
            }
            let (contrib, abs_contrib) = log_sum(&terms);
            acc.add(contrib);
            sum = acc.value();
            abs_sum = abs_sum.add(abs_contrib);
            degree = k;
            let mag = if contrib.is_zero() { 0.0 } else { contrib.ln_abs.exp() };
            contributions.push(mag);
            tail = mag;
            if termination.is_none() && !boundary {
                let small = contrib.is_zero()
                    || (!sum.is_zero() && contrib.ln_abs < sum.ln_abs + ctrl.rel_tol.ln());
                stalls = if small { stalls + 1 } else { 0 };
                if stalls >= ctrl.stall_window {
                    status = Some(SeriesStatus::Converged);
                    break;
                }
            }
        }
        if status.is_none() && termination.is_some_and(|t| degree >= t) {
            status = Some(SeriesStatus::Terminated);
            tail = 0.0;
        }
        let result_work = jack.work();
        let status = status.unwrap_or(SeriesStatus::Truncated);
        let mut out = SeriesResult {
            log_value: sum,
            status,
            degree_used: degree,
            tail_estimate: tail,
            divergence: None,
            spectral_radius: radius,
            termination_degree: termination,
            cancellation_ratio: Some(ratio(abs_sum, sum)),
            work: result_work,
        };
        if status == SeriesStatus::Truncated && growing(&contributions, ctrl.divergence_window) {
            out.status = SeriesStatus::Diverged;
            out.divergence = Some(DivergenceReason::Growth);
        } else if !out.cancellation_ratio.is_some_and(|r| r <= ctrl.cancellation_limit) {
            out.status = SeriesStatus::Diverged;
            out.divergence = Some(DivergenceReason::Cancellation);
        }
        return Ok(out);
    }

    Ok(SeriesResult {
        log_value: sum,
        status: SeriesStatus::Terminated,
        degree_used: 0,
        tail_estimate: 0.0,
        divergence: None,
        spectral_radius: radius,
        termination_degree: termination,
        cancellation_ratio: Some(1.0),
        work: 0,
    })
}

/// Running sum kept as `s * exp(scale)` so that adding does not round through logarithms.
struct ScaledSum {
    s: f64,
    scale: f64,
}

impl ScaledSum {
    const HEADROOM: f64 = 300.0;

    fn new() -> Self {
        ScaledSum { s: 1.0, scale: 0.0 }
    }

    fn add(&mut self, t: SignedLog) {
        if t.is_zero() {
            return;
        }
        if t.ln_abs > self.scale + Self::HEADROOM {
            self.s *= (self.scale - t.ln_abs).exp();
            self.scale = t.ln_abs;
        }
        self.s += t.sign as f64 * (t.ln_abs - self.scale).exp();
    }

    fn value(&self) -> SignedLog {
        SignedLog::from_f64(self.s).scale_ln(self.scale)
    }
}

fn ratio(abs_sum: SignedLog, sum: SignedLog) -> f64 {
    if sum.is_zero() {
        return f64::INFINITY;
    }
    (abs_sum.ln_abs - sum.ln_abs).exp()
}

/// Strictly increasing magnitudes over the last `window` degrees.
fn growing(contributions: &[f64], window: usize) -> bool {
    if window == 0 || contributions.len() < window + 1 {
        return false;
    }
    let tail = &contributions[contributions.len() - window - 1..];
    tail.windows(2).all(|w| w[1] > w[0])
}

/// Signed sum and absolute sum of terms given as (ln|t|, sign), in their given order.
fn log_sum(terms: &[(f64, i8)]) -> (SignedLog, SignedLog) {
    let max = terms.iter().fold(f64::NEG_INFINITY, |a, t| a.max(t.0));
    if max == f64::NEG_INFINITY {
        return (SignedLog::ZERO, SignedLog::ZERO);
    }
    let (mut s, mut a) = (0.0, 0.0);
    for &(l, sign) in terms {
        let e = (l - max).exp();
        s += sign as f64 * e;
        a += e;
    }
    (SignedLog::from_f64(s).scale_ln(max), SignedLog::from_f64(a).scale_ln(max))
}

/// `pFq` as a plain number; `None` when the series diverged.
pub fn hyp_pfq_value(params: &HyperParams, x: &[f64], ctrl: &SeriesControl) -> Result<Option<f64>> {
    let r = hyp_pfq(params, x, ctrl)?;
    Ok((!r.is_diverged()).then(|| r.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(upper: &[f64], lower: &[f64]) -> HyperParams {
        HyperParams::new(upper.to_vec(), lower.to_vec(), AlgebraParam::REAL)
    }

    #[test]
    fn classification() {
        assert_eq!(classify(1, 0, 0.5), ConvergenceClass::ConvergesInUnitBall);
        assert_eq!(classify(0, 1, 100.0), ConvergenceClass::AlwaysConverges);
        assert_eq!(classify(3, 1, 0.1), ConvergenceClass::DivergesUnlessTerminating);
    }

    #[test]
    fn termination_degrees() {
        assert_eq!(detect_termination(&real(&[0.0, 2.0], &[1.0]), 3), Some(0));
        assert_eq!(detect_termination(&real(&[-2.0, 2.0], &[1.0]), 3), Some(6));
        assert_eq!(detect_termination(&real(&[1.5, 2.0], &[1.0]), 3), None);
    }

    #[test]
    fn zero_parameter_sums_to_one() {
        let r = hyp_pfq(&real(&[0.0, 3.0], &[2.0]), &[40.0, 2.0], &SeriesControl::default()).unwrap();
        assert_eq!(r.status, SeriesStatus::Terminated);
        assert_eq!(r.value(), 1.0);
        assert_eq!(r.tail_estimate, 0.0);
    }

    #[test]
    fn exponential() {
        let r = hyp_pfq(&real(&[], &[]), &[0.3, -0.2], &SeriesControl::default()).unwrap();
        assert_eq!(r.status, SeriesStatus::Converged);
        assert!((r.value() - 0.1f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn binomial_series() {
        let r = hyp_pfq(&real(&[2.5], &[]), &[0.4, 0.1], &SeriesControl::default()).unwrap();
        let want = (0.6f64 * 0.9).powf(-2.5);
        assert!((r.value() - want).abs() < 1e-12 * want, "{} vs {want}", r.value());
    }

    #[test]
    fn radius_and_nontermination() {
        let r = hyp_pfq(&real(&[1.0, 2.0], &[3.0]), &[38.5, 0.1], &SeriesControl::default()).unwrap();
        assert_eq!(r.divergence, Some(DivergenceReason::Radius));
        let r = hyp_pfq(&real(&[1.0, 2.0, 1.0], &[3.0]), &[0.1], &SeriesControl::default()).unwrap();
        assert_eq!(r.divergence, Some(DivergenceReason::NonTerminating));
        let r = hyp_pfq(&real(&[-1.0, 2.0, 1.0], &[3.0]), &[0.1, 0.2], &SeriesControl::default()).unwrap();
        assert_eq!(r.status, SeriesStatus::Terminated);
    }

    #[test]
    fn boundary_is_never_converged() {
        let r = hyp_pfq(&real(&[0.5, 0.5], &[3.0]), &[1.0], &SeriesControl::default()).unwrap();
        assert_eq!(r.status, SeriesStatus::Truncated);
    }

    #[test]
    fn bad_lower_parameter() {
        let e = hyp_pfq(&real(&[1.0], &[0.5]), &[0.1, 0.1], &SeriesControl::default());
        assert!(matches!(e, Err(Error::BadLowerParameter { index: 0, .. })));
    }
}
