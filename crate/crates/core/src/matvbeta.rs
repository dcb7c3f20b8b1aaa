//! Matrix-variate beta distributions of type I (support `0 < U < I`) and
//! type II (support `F > 0`): densities, lower and upper probabilities.
//!
//! Each probability has three algebraically equivalent series forms with
//! different convergence behavior. All of them depend on the argument matrix
//! only through its eigenvalues.

use crate::error::{Error, Result};
use crate::hyper::{hyp_pfq, HyperParams, SeriesControl, SeriesResult, SeriesStatus};
use crate::specfun::{ln_mv_beta, AlgebraParam};
use crate::symmat::SymMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Slack allowed outside [0, 1] before a probability counts as unreliable.
pub const CLAMP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub m: usize,
    pub beta: AlgebraParam,
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(m: usize, beta: AlgebraParam, a: f64, b: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let bound = (m as f64 - 1.0) * beta.beta() / 2.0;
        if !(a > bound && b > bound) {
            return Err(Error::InvalidInput(format!(
                "parameters a = {a}, b = {b} must exceed (m-1)beta/2 = {bound}"
            )));
        }
        Ok(BetaParams { m, beta, a, b })
    }

    /// `(m - 1) beta / 2 + 1`.
    pub fn d(&self) -> f64 {
        self.beta.d(self.m)
    }

    pub fn swapped(&self) -> BetaParams {
        BetaParams { a: self.b, b: self.a, ..*self }
    }

    pub fn ln_norm(&self) -> Result<f64> {
        ln_mv_beta(self.m, self.beta, self.a, self.b)
    }
}

/// Distribution with `nu_h` and `nu_e` degrees of freedom: `a = beta nu_h / 2`, `b = beta nu_e / 2`.
pub fn df_to_params(m: usize, beta: AlgebraParam, nu_h: f64, nu_e: f64) -> Result<BetaParams> {
    BetaParams::new(m, beta, beta.beta() * nu_h / 2.0, beta.beta() * nu_e / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    One,
    Two,
    Three,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::One, Variant::Two, Variant::Three];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    I,
    II,
}

/// The six upper-probability expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExpressionId {
    PvBI1,
    PvBI2,
    PvBI3,
    PvBII1,
    PvBII2,
    PvBII3,
}

impl ExpressionId {
    pub const ALL: [ExpressionId; 6] = [
        ExpressionId::PvBI1,
        ExpressionId::PvBI2,
        ExpressionId::PvBI3,
        ExpressionId::PvBII1,
        ExpressionId::PvBII2,
        ExpressionId::PvBII3,
    ];

    pub fn kind(self) -> Kind {
        match self {
            ExpressionId::PvBI1 | ExpressionId::PvBI2 | ExpressionId::PvBI3 => Kind::I,
            _ => Kind::II,
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            ExpressionId::PvBI1 | ExpressionId::PvBII1 => Variant::One,
            ExpressionId::PvBI2 | ExpressionId::PvBII2 => Variant::Two,
            _ => Variant::Three,
        }
    }
}

impl fmt::Display for ExpressionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExpressionId::PvBI1 => "pvBI1",
            ExpressionId::PvBI2 => "pvBI2",
            ExpressionId::PvBI3 => "pvBI3",
            ExpressionId::PvBII1 => "pvBII1",
            ExpressionId::PvBII2 => "pvBII2",
            ExpressionId::PvBII3 => "pvBII3",
        };
        f.write_str(s)
    }
}

fn sum_ln(v: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    v.iter().map(|&x| f(x).ln()).sum()
}

fn beta1_spectrum(omega: &SymMatrix, p: &BetaParams) -> Result<Vec<f64>> {
    check_dim(omega, p)?;
    let w = omega.eigenvalues()?;
    let (lo, hi) = (w[w.len() - 1], w[0]);
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::OutsideSupport(format!(
            "need 0 < Omega < I, eigenvalues span [{lo}, {hi}]"
        )));
    }
    Ok(w)
}

fn beta2_spectrum(nabla: &SymMatrix, p: &BetaParams) -> Result<Vec<f64>> {
    check_dim(nabla, p)?;
    let v = nabla.eigenvalues()?;
    let lo = v[v.len() - 1];
    if !(lo > 0.0) {
        return Err(Error::NotPd { min_eigenvalue: lo });
    }
    Ok(v)
}

fn check_dim(x: &SymMatrix, p: &BetaParams) -> Result<()> {
    if x.dim() != p.m {
        return Err(Error::ShapeError(format!("matrix is {0}x{0}, parameters are for m = {1}", x.dim(), p.m)));
    }
    Ok(())
}

/// Log-density of the type I distribution at `0 < U < I`.
pub fn log_density_beta1(u: &SymMatrix, p: &BetaParams) -> Result<f64> {
    let w = beta1_spectrum(u, p)?;
    let d = p.d();
    Ok(-p.ln_norm()? + (p.a - d) * sum_ln(&w, |x| x) + (p.b - d) * sum_ln(&w, |x| 1.0 - x))
}

/// Log-density of the type II distribution at `F > 0`.
pub fn log_density_beta2(f: &SymMatrix, p: &BetaParams) -> Result<f64> {
    let v = beta2_spectrum(f, p)?;
    let d = p.d();
    Ok(-p.ln_norm()? + (p.a - d) * sum_ln(&v, |x| x) - (p.a + p.b) * sum_ln(&v, |x| 1.0 + x))
}

/// Multiply a 2F1 result by `exp(ln_factor)`, giving a probability.
fn scaled(
    p: &BetaParams,
    upper: [f64; 2],
    lower: f64,
    arg: &[f64],
    ln_factor: f64,
    ctrl: &SeriesControl,
) -> Result<SeriesResult> {
    let params = HyperParams::new(upper.to_vec(), vec![lower], p.beta);
    let mut r = hyp_pfq(&params, arg, ctrl)?;
    if r.status != SeriesStatus::Diverged {
        r.log_value = r.log_value.scale_ln(ln_factor);
    }
    Ok(r)
}

/// `P(U < Omega)` for the type I distribution.
pub fn lower_prob_beta1_spectrum(w: &[f64], p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    let (a, b, d) = (p.a, p.b, p.d());
    let c = ln_mv_beta(p.m, p.beta, a, d)? - p.ln_norm()? + a * sum_ln(w, |x| x);
    let ln_i_minus = sum_ln(w, |x| 1.0 - x);
    match variant {
        Variant::One => scaled(p, [a, d - b], a + d, w, c, ctrl),
        Variant::Two => scaled(p, [d, a + b], a + d, w, c + b * ln_i_minus, ctrl),
        Variant::Three => {
            let arg: Vec<f64> = w.iter().map(|&x| -x / (1.0 - x)).collect();
            scaled(p, [d, d - b], a + d, &arg, c + (b - d) * ln_i_minus, ctrl)
        }
    }
}

/// `P(U > Omega)` for the type I distribution.
pub fn upper_prob_beta1_spectrum(w: &[f64], p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    let (a, b, d) = (p.a, p.b, p.d());
    let c = ln_mv_beta(p.m, p.beta, b, d)? - p.ln_norm()? + b * sum_ln(w, |x| 1.0 - x);
    let ln_omega = sum_ln(w, |x| x);
    let refl: Vec<f64> = w.iter().map(|&x| 1.0 - x).collect();
    match variant {
        Variant::One => scaled(p, [b, d - a], b + d, &refl, c, ctrl),
        Variant::Two => scaled(p, [d, a + b], b + d, &refl, c + a * ln_omega, ctrl),
        Variant::Three => {
            let arg: Vec<f64> = w.iter().map(|&x| -(1.0 - x) / x).collect();
            scaled(p, [d, d - a], b + d, &arg, c + (a - d) * ln_omega, ctrl)
        }
    }
}

/// `P(F < nabla)` for the type II distribution.
pub fn lower_prob_beta2_spectrum(v: &[f64], p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    let (a, b, d) = (p.a, p.b, p.d());
    let c = ln_mv_beta(p.m, p.beta, a, d)? - p.ln_norm()?;
    let ln_nabla = sum_ln(v, |x| x);
    let neg: Vec<f64> = v.iter().map(|&x| -x).collect();
    match variant {
        Variant::One => scaled(p, [a + b, a], a + d, &neg, c + a * ln_nabla, ctrl),
        Variant::Two => {
            let f = c + a * ln_nabla - (a + b - d) * sum_ln(v, |x| 1.0 + x);
            scaled(p, [d - b, d], a + d, &neg, f, ctrl)
        }
        Variant::Three => {
            let arg: Vec<f64> = v.iter().map(|&x| x / (1.0 + x)).collect();
            scaled(p, [d - b, a], a + d, &arg, c - a * sum_ln(v, |x| 1.0 + 1.0 / x), ctrl)
        }
    }
}

/// `P(F > nabla)` for the type II distribution.
pub fn upper_prob_beta2_spectrum(v: &[f64], p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    let (a, b, d) = (p.a, p.b, p.d());
    let c = ln_mv_beta(p.m, p.beta, b, d)? - p.ln_norm()?;
    let ln_nabla = sum_ln(v, |x| x);
    let neg_inv: Vec<f64> = v.iter().map(|&x| -1.0 / x).collect();
    match variant {
        Variant::One => scaled(p, [a + b, b], b + d, &neg_inv, c - b * ln_nabla, ctrl),
        Variant::Two => {
            let f = c - b * ln_nabla - (a + b - d) * sum_ln(v, |x| 1.0 + 1.0 / x);
            scaled(p, [d - a, d], b + d, &neg_inv, f, ctrl)
        }
        Variant::Three => {
            let arg: Vec<f64> = v.iter().map(|&x| 1.0 / (1.0 + x)).collect();
            scaled(p, [d - a, b], b + d, &arg, c - b * sum_ln(v, |x| 1.0 + x), ctrl)
        }
    }
}

pub fn lower_prob_beta1(omega: &SymMatrix, p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    lower_prob_beta1_spectrum(&beta1_spectrum(omega, p)?, p, variant, ctrl)
}

pub fn upper_prob_beta1(omega: &SymMatrix, p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    upper_prob_beta1_spectrum(&beta1_spectrum(omega, p)?, p, variant, ctrl)
}

pub fn lower_prob_beta2(nabla: &SymMatrix, p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    lower_prob_beta2_spectrum(&beta2_spectrum(nabla, p)?, p, variant, ctrl)
}

pub fn upper_prob_beta2(nabla: &SymMatrix, p: &BetaParams, variant: Variant, ctrl: &SeriesControl) -> Result<SeriesResult> {
    upper_prob_beta2_spectrum(&beta2_spectrum(nabla, p)?, p, variant, ctrl)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressionOutcome {
    pub id: ExpressionId,
    pub series: SeriesResult,
    /// Unclamped probability; `None` when the series diverged.
    pub raw: Option<f64>,
    /// Used in the consensus. Converged and terminated sums are used; truncated
    /// ones only when nothing else is available.
    pub accepted: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbResult {
    pub outcomes: Vec<ExpressionOutcome>,
    pub consensus: f64,
    pub raw_consensus: f64,
    pub agreement_spread: f64,
    pub chosen_expressions: Vec<ExpressionId>,
}

impl ProbResult {
    pub fn outcome(&self, id: ExpressionId) -> &ExpressionOutcome {
        self.outcomes.iter().find(|o| o.id == id).expect("all six expressions are present")
    }
}

fn evaluate(id: ExpressionId, v: &[f64], w: &[f64], p: &BetaParams, ctrl: &SeriesControl) -> Result<ExpressionOutcome> {
    let series = match id.kind() {
        Kind::I => upper_prob_beta1_spectrum(w, p, id.variant(), ctrl)?,
        Kind::II => upper_prob_beta2_spectrum(v, p, id.variant(), ctrl)?,
    };
    let raw = (!series.is_diverged()).then(|| series.value());
    let (accepted, note) = match raw {
        None => (false, series.divergence.map(|r| format!("diverged: {r:?}"))),
        Some(x) if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x) => {
            (false, Some(format!("value {x:e} outside [0, 1]")))
        }
        Some(_) if series.status == SeriesStatus::Truncated => {
            (false, Some(format!("truncated at degree {}", series.degree_used)))
        }
        Some(_) => (true, None),
    };
    Ok(ExpressionOutcome { id, series, raw, accepted, note })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Upper probability from all six expressions.
///
/// For kind II the argument is `nabla` and the type I forms are evaluated at
/// `nabla (I + nabla)^{-1}`; for kind I the argument is `Omega` and the type II
/// forms use `Omega (I - Omega)^{-1}`. Both describe the same event because
/// `F > nabla` exactly when `F (I + F)^{-1} > nabla (I + nabla)^{-1}`.
pub fn upper_prob_auto(x: &SymMatrix, p: &BetaParams, kind: Kind, ctrl: &SeriesControl) -> Result<ProbResult> {
    let (v, w) = match kind {
        Kind::II => {
            let v = beta2_spectrum(x, p)?;
            let w = v.iter().map(|&l| l / (1.0 + l)).collect::<Vec<_>>();
            (v, w)
        }
        Kind::I => {
            let w = beta1_spectrum(x, p)?;
            let v = w.iter().map(|&l| l / (1.0 - l)).collect::<Vec<_>>();
            (v, w)
        }
    };
    upper_prob_auto_spectrum(&v, &w, p, ctrl)
}

/// Six-expression evaluation from the type II spectrum `v` and type I spectrum `w`.
pub fn upper_prob_auto_spectrum(v: &[f64], w: &[f64], p: &BetaParams, ctrl: &SeriesControl) -> Result<ProbResult> {
    let results: Vec<Result<ExpressionOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = ExpressionId::ALL
            .iter()
            .map(|&id| s.spawn(move || evaluate(id, v, w, p, ctrl)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("expression worker panicked")).collect()
    });
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut outcomes = outcomes;
    if !outcomes.iter().any(|o| o.accepted) {
        // Nothing converged: fall back on truncated sums that stay in range.
        for o in outcomes.iter_mut() {
            let in_range = o.raw.is_some_and(|x| x.is_finite() && (-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&x));
            if o.series.status == SeriesStatus::Truncated && in_range {
                o.accepted = true;
            }
        }
    }
    let mut vals: Vec<f64> = outcomes.iter().filter(|o| o.accepted).filter_map(|o| o.raw).collect();
    if vals.is_empty() {
        let reasons = outcomes
            .iter()
            .map(|o| format!("{}: {}", o.id, o.note.clone().unwrap_or_default()))
            .collect();
        return Err(Error::AllDiverged(reasons));
    }
    vals.sort_by(f64::total_cmp);
    let raw_consensus = median(&vals);
    let chosen_expressions = outcomes.iter().filter(|o| o.accepted).map(|o| o.id).collect();
    Ok(ProbResult {
        consensus: raw_consensus.clamp(0.0, 1.0),
        raw_consensus,
        agreement_spread: vals[vals.len() - 1] - vals[0],
        chosen_expressions,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn rank_one_closed_form() {
        // a = 1 at m = 1 gives P(F > x) = (1 + x)^{-b}.
        let p = BetaParams::new(1, AlgebraParam::REAL, 1.0, 11.5).unwrap();
        let r = upper_prob_auto(&SymMatrix::diag(&[1.109875]), &p, Kind::II, &ctrl()).unwrap();
        let want = 2.109875f64.powf(-11.5);
        assert!((r.consensus - want).abs() < 1e-14, "{} vs {want}", r.consensus);
    }

    #[test]
    fn degenerate_b_gives_power() {
        // b = d: P(U < Omega) = |Omega|^a.
        let beta = AlgebraParam::REAL;
        let p = BetaParams::new(2, beta, 2.2, beta.d(2)).unwrap();
        let omega = SymMatrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap();
        let r = lower_prob_beta1(&omega, &p, Variant::One, &ctrl()).unwrap();
        let want = omega.det().unwrap().powf(2.2);
        assert_eq!(r.status, SeriesStatus::Terminated);
        assert!((r.value() - want).abs() < 1e-13);
    }

    #[test]
    fn support_errors() {
        let p = BetaParams::new(2, AlgebraParam::REAL, 2.0, 3.0).unwrap();
        let bad = SymMatrix::diag(&[1.2, 0.5]);
        assert!(matches!(lower_prob_beta1(&bad, &p, Variant::One, &ctrl()), Err(Error::OutsideSupport(_))));
        assert!(matches!(log_density_beta2(&SymMatrix::diag(&[1.0, -0.1]), &p), Err(Error::NotPd { .. })));
        assert!(BetaParams::new(3, AlgebraParam::REAL, 0.9, 3.0).is_err());
    }

    #[test]
    fn density_symmetry_under_reflection() {
        let p = BetaParams::new(2, AlgebraParam::REAL, 3.0, 3.0).unwrap();
        let u = SymMatrix::from_rows(&[vec![0.3, 0.1], vec![0.1, 0.6]]).unwrap();
        let r = SymMatrix::identity(2).sub(&u).unwrap();
        let (x, y) = (log_density_beta1(&u, &p).unwrap(), log_density_beta1(&r, &p).unwrap());
        assert!((x - y).abs() < 1e-12);
    }
}
