//! Multivariate linear model `Y = XB + E`, the hypothesis `CBM = H`, the
//! classical test criteria and the matrix p-value `P(F > F_c)`.

use crate::error::{Error, Result};
use crate::hyper::SeriesControl;
use crate::matvbeta::{df_to_params, upper_prob_auto_spectrum, BetaParams, ProbResult};
use crate::specfun::AlgebraParam;
use crate::symmat::{pinv, rank, Matrix, SymMatrix};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

/// Relative threshold below which an eigenvalue or singular value counts as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub y: Matrix,
    pub x: Matrix,
    rank: usize,
}

impl LinearModel {
    pub fn new(y: Matrix, x: Matrix) -> Result<Self> {
        if y.rows() != x.rows() {
            return Err(Error::ShapeError(format!("Y has {} rows, X has {}", y.rows(), x.rows())));
        }
        if !(y.is_finite() && x.is_finite()) {
            return Err(Error::InvalidInput("non-finite data".into()));
        }
        let r = rank(&x);
        if y.rows() < y.cols() + r {
            return Err(Error::InvalidInput(format!(
                "need n >= m + rank(X): n = {}, m = {}, rank = {r}",
                y.rows(),
                y.cols()
            )));
        }
        Ok(LinearModel { y, x, rank: r })
    }

    pub fn n(&self) -> usize {
        self.y.rows()
    }

    pub fn m(&self) -> usize {
        self.y.cols()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// `H0: C B M = H`. `M` defaults to the identity and `H` to zero.
#[derive(Debug, Clone)]
pub struct HypothesisSpec {
    pub c: Matrix,
    pub m: Option<Matrix>,
    pub h: Option<Matrix>,
}

impl HypothesisSpec {
    pub fn new(c: Matrix) -> Self {
        HypothesisSpec { c, m: None, h: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsMatrices {
    pub sh: SymMatrix,
    pub se: SymMatrix,
    pub nu_h: u32,
    pub nu_e: u32,
}

impl SsMatrices {
    pub fn new(sh: SymMatrix, se: SymMatrix, nu_h: u32, nu_e: u32) -> Result<Self> {
        if sh.dim() != se.dim() {
            return Err(Error::ShapeError(format!("S_H is {0}x{0}, S_E is {1}x{1}", sh.dim(), se.dim())));
        }
        if nu_h == 0 || nu_e == 0 {
            return Err(Error::InvalidInput("degrees of freedom must be positive".into()));
        }
        let e = se.eigenvalues()?;
        let min = e[e.len() - 1];
        if min <= 1e-12 * se.max_abs() || min <= 0.0 {
            return Err(Error::NotPd { min_eigenvalue: min });
        }
        let h = sh.eigenvalues()?;
        let min = h[h.len() - 1];
        if min < -RANK_TOL * sh.max_abs() {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(SsMatrices { sh, se, nu_h, nu_e })
    }

    pub fn dim(&self) -> usize {
        self.se.dim()
    }
}

/// `B = X^+ Y`.
pub fn fit(model: &LinearModel) -> Result<Matrix> {
    pinv(&model.x).matmul(&model.y)
}

pub fn sums_of_squares(model: &LinearModel, hyp: &HypothesisSpec) -> Result<SsMatrices> {
    let (n, m, p) = (model.n(), model.m(), model.p());
    let c = &hyp.c;
    if c.cols() != p {
        return Err(Error::ShapeError(format!("C has {} columns, X has {p}", c.cols())));
    }
    let mm = hyp.m.clone().unwrap_or_else(|| Matrix::identity(m));
    if mm.rows() != m {
        return Err(Error::ShapeError(format!("M has {} rows, Y has {m} columns", mm.rows())));
    }
    let q = c.rows();
    if rank(c) != q {
        return Err(Error::InvalidInput(format!("C must have full row rank {q}")));
    }
    if rank(&mm) != mm.cols() {
        return Err(Error::InvalidInput("M must have full column rank".into()));
    }
    let h = match &hyp.h {
        Some(h) => h.clone(),
        None => Matrix::zeros(q, mm.cols()),
    };
    if h.rows() != q || h.cols() != mm.cols() {
        return Err(Error::ShapeError(format!("H must be {q}x{}", mm.cols())));
    }
    let xp = pinv(&model.x);
    // C must lie in the row space of X for CB to be estimable.
    let proj = xp.matmul(&model.x)?;
    let resid = c.matmul(&proj)?.sub(c)?;
    if resid.max_abs() > 1e-8 * c.max_abs().max(1.0) {
        return Err(Error::NotEstimable);
    }
    let b = xp.matmul(&model.y)?;
    let d = c.matmul(&b)?.matmul(&mm)?.sub(&h)?;
    let gram = xp.matmul(&xp.transpose())?; // (X'X)^+
    let w = c.matmul(&gram)?.matmul(&c.transpose())?.to_sym(1e-8)?;
    let w_inv = w.inv().map_err(|_| Error::NotEstimable)?;
    let sh = w_inv.congruence(&d)?;
    let hat = model.x.matmul(&xp)?;
    let resid_maker = Matrix::identity(n).sub(&hat)?;
    let ym = model.y.matmul(&mm)?;
    let se = ym.transpose().matmul(&resid_maker)?.matmul(&ym)?.to_sym(1e-6 * ym.max_abs().powi(2).max(1.0))?;
    SsMatrices::new(sh, se, q as u32, (n - model.rank()) as u32)
}

/// `F_c = S_E^{-1/2} S_H S_E^{-1/2}`.
pub fn f_statistic(ss: &SsMatrices) -> Result<SymMatrix> {
    ss.sh.sandwich(&ss.se.inv_sqrt().map_err(|_| not_pd(&ss.se))?)
}

/// `U_c = S_H^{1/2} (S_H + S_E)^{-1} S_H^{1/2}`.
pub fn u_statistic(ss: &SsMatrices) -> Result<SymMatrix> {
    let total = ss.sh.add(&ss.se)?;
    let inv = total.inv().map_err(|_| not_pd(&total))?;
    inv.sandwich(&ss.sh.sqrt_psd()?)
}

fn not_pd(a: &SymMatrix) -> Error {
    let min = a.eigenvalues().map(|e| e[e.len() - 1]).unwrap_or(f64::NAN);
    Error::NotPd { min_eigenvalue: min }
}

/// `(nu_H, m, nu_E + nu_H - m)` when `m > nu_H`, otherwise unchanged.
pub fn swap_parameters(m: u32, nu_h: u32, nu_e: u32) -> Result<(u32, u32, u32)> {
    if m == 0 || nu_h == 0 || nu_e == 0 {
        return Err(Error::InvalidInput("dimension and degrees of freedom must be positive".into()));
    }
    if m <= nu_h {
        return Ok((m, nu_h, nu_e));
    }
    let e = nu_e as i64 + nu_h as i64 - m as i64;
    if e <= 0 {
        return Err(Error::DegenerateDesign(e));
    }
    Ok((nu_h, m, e as u32))
}

/// Roy's largest root turned into an F statistic; exact when `s = 1`, an upper bound otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoyApproxF {
    pub f: f64,
    pub df1: u32,
    pub df2: u32,
    pub p_value: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criteria {
    pub m: usize,
    pub nu_h: u32,
    pub nu_e: u32,
    pub s: usize,
    /// The `s` largest eigenvalues of `S_E^{-1} S_H`, descending.
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub wilks_lambda: f64,
    pub wilks_u: f64,
    pub wilks_v: Option<f64>,
    pub lawley_hotelling_u: f64,
    pub pillai_v: f64,
    pub pillai_w: f64,
    pub pillai_h: f64,
    pub pillai_r: Option<f64>,
    pub pillai_t: Option<f64>,
    pub roy_lambda_max: f64,
    pub roy_theta_max: f64,
    pub anderson_lambda_min: Option<f64>,
    pub roy_theta_min: Option<f64>,
    pub dempster_td: f64,
    pub roy_f: Option<RoyApproxF>,
}

pub fn classical_criteria(ss: &SsMatrices) -> Result<Criteria> {
    let m = ss.dim();
    let s = m.min(ss.nu_h as usize);
    let all = f_statistic(ss)?.eigenvalues()?;
    let top = all[0].max(0.0);
    let lambda: Vec<f64> = all[..s].iter().map(|&l| if l <= RANK_TOL * top { 0.0 } else { l }).collect();
    let theta: Vec<f64> = lambda.iter().map(|l| l / (1.0 + l)).collect();
    let sh_rank = all.iter().filter(|&&l| l > RANK_TOL * top && l > 0.0).count();
    // rank(S_H) <= nu_H whatever the rounding in the data.
    let singular = sh_rank < m || (ss.nu_h as usize) < m;
    let sf = s as f64;
    let lh: f64 = lambda.iter().sum();
    let pillai_v: f64 = theta.iter().sum();
    let all_positive = lambda.iter().all(|&l| l > 0.0);
    let pillai_r = all_positive.then(|| sf / theta.iter().map(|t| 1.0 / t).sum::<f64>());
    let pillai_t = all_positive.then(|| sf / lambda.iter().map(|l| 1.0 / l).sum::<f64>());
    let lmax = lambda.first().copied().unwrap_or(0.0);
    let lmin = lambda.last().copied().unwrap_or(0.0);
    let roy_f = roy_approx_f(lmax, m as u32, ss.nu_h, ss.nu_e, s);
    Ok(Criteria {
        m,
        nu_h: ss.nu_h,
        nu_e: ss.nu_e,
        s,
        wilks_lambda: lambda.iter().map(|l| 1.0 / (1.0 + l)).product(),
        wilks_u: theta.iter().product(),
        wilks_v: (!singular).then(|| lambda.iter().product()),
        lawley_hotelling_u: lh,
        pillai_v,
        pillai_w: theta.iter().map(|t| 1.0 - t).sum(),
        pillai_h: sf / lambda.iter().map(|l| 1.0 + l).sum::<f64>(),
        pillai_r,
        pillai_t,
        roy_lambda_max: lmax,
        roy_theta_max: lmax / (1.0 + lmax),
        anderson_lambda_min: (!singular).then_some(lmin),
        roy_theta_min: (!singular).then(|| lmin / (1.0 + lmin)),
        dempster_td: ss.sh.trace() / ss.se.trace(),
        roy_f,
        lambda,
        theta,
    })
}

fn roy_approx_f(lmax: f64, m: u32, nu_h: u32, nu_e: u32, s: usize) -> Option<RoyApproxF> {
    let df1 = m.max(nu_h);
    let df2 = (nu_e + nu_h).checked_sub(df1).filter(|&d| d > 0)?;
    let f = lmax * df2 as f64 / df1 as f64;
    let dist = FisherSnedecor::new(df1 as f64, df2 as f64).ok()?;
    Some(RoyApproxF { f, df1, df2, p_value: dist.sf(f), exact: s == 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Reject,
    Retain,
}

impl Decision {
    pub fn at(p_value: f64, alpha: f64) -> Decision {
        if p_value < alpha {
            Decision::Reject
        } else {
            Decision::Retain
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixPValue {
    /// `(m, nu_H, nu_E)` after the parameter swap.
    pub effective: (u32, u32, u32),
    pub swapped: bool,
    pub params: BetaParams,
    /// Spectrum the probability was evaluated at.
    pub argument: Vec<f64>,
    /// `None` when `S_H = 0` and the p-value is 1 without any series.
    pub prob: Option<ProbResult>,
    pub p_value: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub decision_05: Decision,
    pub decision_01: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub criteria: Criteria,
    pub test: MatrixPValue,
}

/// Matrix p-value from the eigenvalues of `F_c`, with the swap rule applied.
pub fn matrix_p_value_from_spectrum(
    eigenvalues: &[f64],
    nu_h: u32,
    nu_e: u32,
    beta: AlgebraParam,
    alpha: f64,
    ctrl: &SeriesControl,
) -> Result<MatrixPValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let m = eigenvalues.len() as u32;
    let effective = swap_parameters(m, nu_h, nu_e)?;
    let (m2, h2, e2) = effective;
    let params = df_to_params(m2 as usize, beta, h2 as f64, e2 as f64)?;
    let mut v: Vec<f64> = eigenvalues.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let top = v[0].max(0.0);
    v.truncate(m2 as usize);
    let zero = |l: f64| l <= RANK_TOL * top || l <= 0.0;
    let (prob, p_value) = if v.iter().all(|&l| zero(l)) {
        (None, 1.0)
    } else if v.iter().any(|&l| zero(l)) {
        return Err(Error::InvalidInput(format!(
            "F_c has rank below min(m, nu_H) = {m2}; the probability needs a positive definite argument"
        )));
    } else {
        let w: Vec<f64> = v.iter().map(|l| l / (1.0 + l)).collect();
        let r = upper_prob_auto_spectrum(&v, &w, &params, ctrl)?;
        let p = r.consensus;
        (Some(r), p)
    };
    Ok(MatrixPValue {
        effective,
        swapped: m2 != m,
        params,
        argument: v,
        prob,
        p_value,
        alpha,
        decision: Decision::at(p_value, alpha),
        decision_05: Decision::at(p_value, 0.05),
        decision_01: Decision::at(p_value, 0.01),
    })
}

pub fn matrix_p_value(ss: &SsMatrices, beta: AlgebraParam, alpha: f64, ctrl: &SeriesControl) -> Result<CriteriaReport> {
    let criteria = classical_criteria(ss)?;
    let ev = f_statistic(ss)?.eigenvalues()?;
    let test = matrix_p_value_from_spectrum(&ev, ss.nu_h, ss.nu_e, beta, alpha, ctrl)?;
    Ok(CriteriaReport { criteria, test })
}

/// Two-sample test of `Sigma_1 = Sigma_2` with `F_c = S_2^{-1/2} S_1 S_2^{-1/2}`.
pub fn cov_equality_test(
    s1: &SymMatrix,
    s2: &SymMatrix,
    nu1: u32,
    nu2: u32,
    beta: AlgebraParam,
    alpha: f64,
    ctrl: &SeriesControl,
) -> Result<CriteriaReport> {
    matrix_p_value(&SsMatrices::new(s1.clone(), s2.clone(), nu1, nu2)?, beta, alpha, ctrl)
}
