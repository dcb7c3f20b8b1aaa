//! Dense real matrices with a symmetric specialization.
//!
//! `SymMatrix` carries every matrix argument of the probability engine. The
//! spectral routines use cyclic Jacobi rotations, which are slow for large
//! dimensions but deterministic and accurate to a few ulps for the sizes
//! this crate deals with.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeError(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeError("ragged rows".into()));
        }
        Matrix::new(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeError(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeError("operands differ in shape".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Symmetric part, or an error when the asymmetry exceeds `tol` relative to the largest entry.
    pub fn to_sym(&self, tol: f64) -> Result<SymMatrix> {
        if self.rows != self.cols {
            return Err(Error::ShapeError(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let scale = self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in 0..i {
                if (self.get(i, j) - self.get(j, i)).abs() > tol * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        SymMatrix::new(self.rows, self.data.clone())
    }
}

/// Singular value decomposition `A = U diag(s) V'` of an n x p matrix, thin form.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v: Matrix,
}

/// One-sided Jacobi SVD. Singular values come back in descending order.
pub fn svd(a: &Matrix) -> Svd {
    // Work on the orientation with at least as many rows as columns.
    if a.rows < a.cols {
        let t = svd(&a.transpose());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let (n, p) = (a.rows, a.cols);
    let mut u = a.clone();
    let mut v = Matrix::identity(p);
    for _sweep in 0..80 {
        let mut rotated = false;
        for j in 0..p {
            for k in (j + 1)..p {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..n {
                    let (x, y) = (u.get(i, j), u.get(i, k));
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let (x, y) = (u.get(i, j), u.get(i, k));
                    u.set(i, j, c * x - s * y);
                    u.set(i, k, s * x + c * y);
                }
                for i in 0..p {
                    let (x, y) = (v.get(i, j), v.get(i, k));
                    v.set(i, j, c * x - s * y);
                    v.set(i, k, s * x + c * y);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<(f64, usize)> = (0..p)
        .map(|j| ((0..n).map(|i| u.get(i, j).powi(2)).sum::<f64>().sqrt(), j))
        .collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut uu = Matrix::zeros(n, p);
    let mut vv = Matrix::zeros(p, p);
    let mut s = Vec::with_capacity(p);
    for (col, &(sigma, j)) in sv.iter().enumerate() {
        s.push(sigma);
        for i in 0..n {
            uu.set(i, col, if sigma > 0.0 { u.get(i, j) / sigma } else { 0.0 });
        }
        for i in 0..p {
            vv.set(i, col, v.get(i, j));
        }
    }
    Svd { u: uu, singular_values: s, v: vv }
}

/// Numerical rank with threshold `1e-10 * sigma_max`.
pub fn rank(a: &Matrix) -> usize {
    let s = svd(a).singular_values;
    let smax = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| x > 1e-10 * smax && x > 0.0).count()
}

/// Moore-Penrose inverse. Singular values below `1e-10 * sigma_max` are dropped.
pub fn pinv(a: &Matrix) -> Matrix {
    let Svd { u, singular_values: s, v } = svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(a.cols, a.rows);
    for (k, &sigma) in s.iter().enumerate() {
        if sigma <= 1e-10 * smax || sigma == 0.0 {
            continue;
        }
        for i in 0..a.cols {
            let vik = v.get(i, k) / sigma;
            if vik == 0.0 {
                continue;
            }
            for j in 0..a.rows {
                out.data[i * a.rows + j] += vik * u.get(j, k);
            }
        }
    }
    out
}

/// Real symmetric matrix. Entries are symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: Matrix,
}

impl SymMatrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeError("dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::ShapeError(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        let mut s = SymMatrix { dim, data };
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (s.data[i * dim + j] + s.data[j * dim + i]);
                s.data[i * dim + j] = v;
                s.data[j * dim + i] = v;
            }
        }
        Ok(s)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)?;
        if m.rows != m.cols {
            return Err(Error::ShapeError("matrix is not square".into()));
        }
        SymMatrix::new(m.rows, m.data)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix { dim, data: Matrix::identity(dim).data }
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in values.iter().enumerate() {
            data[i * n + i] = v;
        }
        SymMatrix { dim: n, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix { rows: self.dim, cols: self.dim, data: self.data.clone() }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.to_matrix().to_rows()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(SymMatrix { dim: self.dim, data })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(SymMatrix { dim: self.dim, data })
    }

    fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::ShapeError(format!("dimensions {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// `B' A B` for a general square `B`, symmetrized.
    pub fn congruence(&self, b: &Matrix) -> Result<SymMatrix> {
        let prod = b.transpose().matmul(&self.to_matrix())?.matmul(b)?;
        prod.to_sym(f64::INFINITY)
    }

    /// `B A B` for symmetric `B`.
    pub fn sandwich(&self, b: &SymMatrix) -> Result<SymMatrix> {
        self.congruence(&b.to_matrix())
    }

    /// Cyclic Jacobi eigendecomposition.
    pub fn eigh(&self) -> Result<EigenDecomposition> {
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let n = self.dim;
        let mut a = self.data.clone();
        let mut v = Matrix::identity(n).data;
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].powi(2))
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * norm || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let (app, aqq) = (a[p * n + p], a[q * n + q]);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k * n + p], a[k * n + q]);
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        // Stable sort keeps ties in their original order.
        order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
        let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
        let mut vecs = Matrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                vecs.set(k, col, v[k * n + src]);
            }
        }
        Ok(EigenDecomposition { eigenvalues, eigenvectors: vecs })
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.eigenvalues)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// `Q f(Lambda) Q'`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let e = self.eigh()?;
        Ok(from_spectrum(&e.eigenvectors, &e.eigenvalues.iter().map(|&l| f(l)).collect::<Vec<_>>()))
    }

    /// Unique PSD square root. Eigenvalues down to `-1e-10 ||A||` are clamped to zero.
    pub fn sqrt_psd(&self) -> Result<SymMatrix> {
        let e = self.eigh()?;
        let tol = 1e-10 * self.max_abs();
        let min = e.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        let roots: Vec<f64> = e.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
        Ok(from_spectrum(&e.eigenvectors, &roots))
    }

    fn pd_spectrum(&self) -> Result<EigenDecomposition> {
        let e = self.eigh()?;
        let min = e.eigenvalues.last().copied().unwrap_or(0.0);
        if min <= 1e-12 * self.max_abs() || min <= 0.0 {
            return Err(Error::SingularMatrix);
        }
        Ok(e)
    }

    pub fn inv(&self) -> Result<SymMatrix> {
        let e = self.pd_spectrum()?;
        let r: Vec<f64> = e.eigenvalues.iter().map(|l| 1.0 / l).collect();
        Ok(from_spectrum(&e.eigenvectors, &r))
    }

    /// `A^{-1/2}` for positive definite `A`.
    pub fn inv_sqrt(&self) -> Result<SymMatrix> {
        let e = self.pd_spectrum()?;
        let r: Vec<f64> = e.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect();
        Ok(from_spectrum(&e.eigenvectors, &r))
    }

    pub fn logdet(&self) -> Result<f64> {
        Ok(self.pd_spectrum()?.eigenvalues.iter().map(|l| l.ln()).sum())
    }

    /// Determinant as the product of eigenvalues; defined for any symmetric matrix.
    pub fn det(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().product())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn from_spectrum(q: &Matrix, values: &[f64]) -> SymMatrix {
    let n = values.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum();
            data[i * n + j] = s;
            data[j * n + i] = s;
        }
    }
    SymMatrix { dim: n, data }
}

/// True iff the smallest eigenvalue of `A - B` exceeds `tol`.
pub fn loewner_gt(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    let d = a.sub(b)?;
    let ev = d.eigenvalues()?;
    Ok(ev.last().copied().unwrap_or(f64::NEG_INFINITY) > tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_spectrum() {
        let e = SymMatrix::diag(&[1.0, 3.0]).eigh().unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        let e = SymMatrix::identity(3).eigh().unwrap();
        assert_eq!(e.eigenvalues, vec![1.0; 3]);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let a = SymMatrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 2.0, 0.0, 1.0],
            vec![-2.0, 0.0, 3.0, -1.5],
            vec![0.5, 1.0, -1.5, 1.0],
        ])
        .unwrap();
        let e = a.eigh().unwrap();
        let q = &e.eigenvectors;
        let back = from_spectrum(q, &e.eigenvalues);
        for i in 0..4 {
            for j in 0..4 {
                assert!((back.get(i, j) - a.get(i, j)).abs() < 1e-12);
                let qq: f64 = (0..4).map(|k| q.get(k, i) * q.get(k, j)).sum();
                assert!((qq - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn roots_inverses_determinants() {
        let r = SymMatrix::diag(&[4.0, 9.0]).sqrt_psd().unwrap();
        assert!((r.get(0, 0) - 2.0).abs() < 1e-14 && (r.get(1, 1) - 3.0).abs() < 1e-14);
        assert_eq!(SymMatrix::identity(3).inv().unwrap(), SymMatrix::identity(3));
        assert!((SymMatrix::diag(&[2.0, 3.0]).det().unwrap() - 6.0).abs() < 1e-14);
        assert!(matches!(SymMatrix::diag(&[1.0, -1.0]).sqrt_psd(), Err(Error::NotPsd { .. })));
        assert!(matches!(SymMatrix::diag(&[1.0, 0.0]).inv(), Err(Error::SingularMatrix)));
    }

    #[test]
    fn pinv_of_diagonal() {
        let p = pinv(&SymMatrix::diag(&[2.0, 0.0]).to_matrix());
        assert_eq!(p.data(), &[0.5, 0.0, 0.0, 0.0]);
        assert_eq!(pinv(&Matrix::identity(3)), Matrix::identity(3));
    }

    #[test]
    fn loewner_examples() {
        let i = SymMatrix::identity(2);
        assert!(loewner_gt(&i.scale(2.0), &i, 0.0).unwrap());
        assert!(!loewner_gt(&SymMatrix::diag(&[2.0, 0.5]), &i, 0.0).unwrap());
        assert!(loewner_gt(&i, &SymMatrix::identity(3), 0.0).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let a = SymMatrix::diag(&[f64::NAN, 1.0]);
        assert!(matches!(a.eigh(), Err(Error::InvalidInput(_))));
    }
}
