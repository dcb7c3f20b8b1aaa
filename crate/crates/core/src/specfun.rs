//! Multivariate gamma and beta functions and the generalized Pochhammer symbol.

use crate::error::{Error, Result};
use crate::partitions::Partition;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Tolerance used to decide that a Pochhammer factor is an exact zero.
pub const ZERO_FACTOR_TOL: f64 = 1e-12;

/// Dimension of the underlying real division algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraParam {
    beta: f64,
    extended: bool,
}

impl AlgebraParam {
    pub const REAL: AlgebraParam = AlgebraParam { beta: 1.0, extended: false };
    pub const COMPLEX: AlgebraParam = AlgebraParam { beta: 2.0, extended: false };
    pub const QUATERNION: AlgebraParam = AlgebraParam { beta: 4.0, extended: false };
    pub const OCTONION: AlgebraParam = AlgebraParam { beta: 8.0, extended: false };

    /// Accepts 1, 2, 4 or 8.
    pub fn new(beta: u32) -> Result<Self> {
        match beta {
            1 | 2 | 4 | 8 => Ok(AlgebraParam { beta: beta as f64, extended: false }),
            _ => Err(Error::InvalidInput(format!("beta must be one of 1, 2, 4, 8 (got {beta})"))),
        }
    }

    /// Any positive real beta, outside the four division algebras.
    pub fn extended(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be positive (got {beta})")));
        }
        Ok(AlgebraParam { beta, extended: true })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Jack parameter `2 / beta`.
    pub fn alpha(&self) -> f64 {
        2.0 / self.beta
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// `(m - 1) beta / 2 + 1`, the shift that recurs in every distribution formula.
    pub fn d(&self, m: usize) -> f64 {
        (m as f64 - 1.0) * self.beta / 2.0 + 1.0
    }
}

/// Real number stored as sign and log-magnitude. `sign == 0` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    #[serde(with = "crate::serde_float")]
    pub ln_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { ln_abs: f64::NEG_INFINITY, sign: 0 };
    pub const ONE: SignedLog = SignedLog { ln_abs: 0.0, sign: 1 };

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog { ln_abs: x.abs().ln(), sign: if x > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.ln_abs.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 || other.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog { ln_abs: self.ln_abs + other.ln_abs, sign: self.sign * other.sign }
    }

    pub fn div(self, other: SignedLog) -> SignedLog {
        debug_assert!(other.sign != 0);
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog { ln_abs: self.ln_abs - other.ln_abs, sign: self.sign * other.sign }
    }

    /// Multiply by `exp(s)`.
    pub fn scale_ln(self, s: f64) -> SignedLog {
        if self.sign == 0 {
            self
        } else {
            SignedLog { ln_abs: self.ln_abs + s, sign: self.sign }
        }
    }

    pub fn add(self, other: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (hi, lo) = if self.ln_abs >= other.ln_abs { (self, other) } else { (other, self) };
        let r = (lo.ln_abs - hi.ln_abs).exp();
        let f = if hi.sign == lo.sign { 1.0 + r } else { 1.0 - r };
        if f <= 0.0 {
            return SignedLog::ZERO;
        }
        SignedLog { ln_abs: hi.ln_abs + f.ln(), sign: hi.sign }
    }
}

/// `ln Gamma_m^beta[a]` from the product form.
pub fn ln_mv_gamma(m: usize, beta: AlgebraParam, a: f64) -> Result<f64> {
    let b = beta.beta();
    let mut s = (m * (m.saturating_sub(1))) as f64 * b / 4.0 * PI.ln();
    for i in 0..m {
        let arg = a - i as f64 * b / 2.0;
        if !(arg > 0.0) {
            return Err(Error::DomainError { index: i + 1, value: arg });
        }
        s += ln_gamma(arg);
    }
    Ok(s)
}

/// `ln B_m^beta[a, b]`.
pub fn ln_mv_beta(m: usize, beta: AlgebraParam, a: f64, b: f64) -> Result<f64> {
    Ok(ln_mv_gamma(m, beta, a)? + ln_mv_gamma(m, beta, b)? - ln_mv_gamma(m, beta, a + b)?)
}

fn shifted(a: f64, row: usize, beta: AlgebraParam) -> f64 {
    a - row as f64 * beta.beta() / 2.0
}

/// True when `(c)_n` has a factor within `ZERO_FACTOR_TOL` of zero.
pub fn rising_has_zero(c: f64, n: usize) -> bool {
    let r = c.round();
    r <= 0.0 && (c - r).abs() <= ZERO_FACTOR_TOL && ((-r) as usize) < n
}

/// `[a]_kappa = prod_i (a - (i-1) beta/2)_{kappa_i}` as a plain product.
pub fn gen_pochhammer(a: f64, kappa: &Partition, beta: AlgebraParam) -> f64 {
    if gen_pochhammer_is_zero(a, kappa, beta) {
        return 0.0;
    }
    let mut p = 1.0;
    for (i, &k) in kappa.parts().iter().enumerate() {
        let c = shifted(a, i, beta);
        for j in 0..k {
            p *= c + j as f64;
        }
    }
    p
}

pub fn gen_pochhammer_is_zero(a: f64, kappa: &Partition, beta: AlgebraParam) -> bool {
    kappa.parts().iter().enumerate().any(|(i, &k)| rising_has_zero(shifted(a, i, beta), k))
}

/// Log-domain `[a]_kappa` with sign; exact zero when a factor vanishes.
pub fn gen_pochhammer_signed(a: f64, kappa: &Partition, beta: AlgebraParam) -> SignedLog {
    if gen_pochhammer_is_zero(a, kappa, beta) {
        return SignedLog::ZERO;
    }
    let mut out = SignedLog::ONE;
    for (i, &k) in kappa.parts().iter().enumerate() {
        let c = shifted(a, i, beta);
        for j in 0..k {
            out = out.mul(SignedLog::from_f64(c + j as f64));
        }
    }
    out
}
