//! Dense complex matrices and the binary64 reference kernels.

use std::ops::{Index, IndexMut};

use itertools::Itertools;
use thiserror::Error;

use crate::precision::{CScalar, PrecisionContext, PrecisionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix with {rows} rows exceeds the enumeration limit {limit}")]
    TooLarge { rows: usize, limit: usize },
    #[error("one-sided Jacobi did not converge after {sweeps} sweeps")]
    NoConvergence {
        sweeps: usize,
        best: Box<SvdResult>,
    },
    #[error("matrix is rank deficient: numerical rank {rank} of {size}")]
    RankDeficient { rank: usize, size: usize },
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("singular triangular factor at diagonal {0}")]
    Singular(usize),
    #[error("empty or zero matrix")]
    Zero,
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<CScalar>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![CScalar::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                CScalar::new(1.0, 0.0)
            } else {
                CScalar::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CScalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Build from row-major data. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<CScalar>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "data length must equal rows * cols");
        Self { rows, cols, data }
    }

    /// Build from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Self {
        Self::from_vec(
            rows,
            cols,
            values.iter().map(|&v| CScalar::new(v, 0.0)).collect(),
        )
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                CScalar::new(values[i], 0.0)
            } else {
                CScalar::new(0.0, 0.0)
            }
        })
    }

    /// Column vector from complex entries.
    pub fn column_vector(values: Vec<CScalar>) -> Self {
        let n = values.len();
        Self::from_vec(n, 1, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[CScalar] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<CScalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[CScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, f: impl Fn(CScalar) -> CScalar) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn try_map<E>(&self, f: impl Fn(CScalar) -> Result<CScalar, E>) -> Result<Self, E> {
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect::<Result<_, _>>()?,
        })
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op: "sub",
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Whether `self == self^H` within `rel_tol * ||self||_F`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let tol = rel_tol * self.fro_norm();
        (0..self.rows).all(|i| (0..=i).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// Every entry rounded to the context's grid.
    pub fn quantize(&self, ctx: &PrecisionContext) -> Result<Self, PrecisionError> {
        self.try_map(|z| ctx.round_complex(z))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = CScalar;

    fn index(&self, (i, j): (usize, usize)) -> &CScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut CScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Binary64 product `A B`, or `A^H B` when `conjugate_transpose_a` is set.
pub fn gemm_exact(a: &CMatrix, b: &CMatrix, conjugate_transpose_a: bool) -> Result<CMatrix, LinalgError> {
    let (m, k) = if conjugate_transpose_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    if k != b.rows {
        return Err(LinalgError::DimensionMismatch {
            op: "gemm",
            left: (m, k),
            right: b.shape(),
        });
    }
    let n = b.cols;
    let mut c = CMatrix::zeros(m, n);
    for i in 0..m {
        for l in 0..k {
            let a_il = if conjugate_transpose_a {
                a[(l, i)].conj()
            } else {
                a[(i, l)]
            };
            let b_row = b.row(l);
            let c_row = &mut c.data[i * n..(i + 1) * n];
            for (cij, blj) in c_row.iter_mut().zip(b_row) {
                *cij += a_il * blj;
            }
        }
    }
    Ok(c)
}

/// Binary64 Cholesky factor `L` (lower, positive real diagonal) of a
/// Hermitian positive definite matrix.
pub fn cholesky_exact(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = square_dim(a, "cholesky")?;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return Err(LinalgError::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = CScalar::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Solve `L X = B` for lower-triangular `L` by forward substitution.
pub fn solve_lower_exact(l: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = square_dim(l, "solve_lower")?;
    check_rows(n, b, "solve_lower")?;
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in 0..n {
            let mut s = x[(i, c)];
            for j in 0..i {
                s -= l[(i, j)] * x[(j, c)];
            }
            let d = l[(i, i)];
            if d.norm_sqr() == 0.0 {
                return Err(LinalgError::Singular(i));
            }
            x[(i, c)] = s / d;
        }
    }
    Ok(x)
}

/// Solve `L^H X = B` for lower-triangular `L` by back substitution.
pub fn solve_lower_adjoint_exact(l: &CMatrix, b: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = square_dim(l, "solve_lower_adjoint")?;
    check_rows(n, b, "solve_lower_adjoint")?;
    let mut x = b.clone();
    for c in 0..b.cols {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for j in i + 1..n {
                s -= l[(j, i)].conj() * x[(j, c)];
            }
            let d = l[(i, i)].conj();
            if d.norm_sqr() == 0.0 {
                return Err(LinalgError::Singular(i));
            }
            x[(i, c)] = s / d;
        }
    }
    Ok(x)
}

fn square_dim(a: &CMatrix, op: &'static str) -> Result<usize, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::DimensionMismatch {
            op,
            left: a.shape(),
            right: (a.cols, a.rows),
        });
    }
    Ok(a.rows)
}

fn check_rows(n: usize, b: &CMatrix, op: &'static str) -> Result<(), LinalgError> {
    if b.rows != n {
        return Err(LinalgError::DimensionMismatch {
            op,
            left: (n, n),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Singular values (descending) and optional factors with `A = U diag(s) V^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub u: Option<CMatrix>,
    pub v: Option<CMatrix>,
}

impl SvdResult {
    pub fn reconstruct(&self) -> Option<CMatrix> {
        let (u, v) = (self.u.as_ref()?, self.v.as_ref()?);
        let k = self.singular_values.len();
        let us = CMatrix::from_fn(u.rows, k, |i, j| u[(i, j)] * self.singular_values[j]);
        gemm_exact(&us, &v.conj_transpose(), false).ok()
    }
}

const JACOBI_MAX_SWEEPS: usize = 60;
const JACOBI_PAIR_TOL: f64 = 1e-15;

/// Singular values by one-sided Jacobi.
pub fn svd_jacobi(a: &CMatrix) -> Result<SvdResult, LinalgError> {
    jacobi(a, false)
}

/// Singular values and thin factors by one-sided Jacobi.
pub fn svd_jacobi_full(a: &CMatrix) -> Result<SvdResult, LinalgError> {
    jacobi(a, true)
}

fn jacobi(a: &CMatrix, want_factors: bool) -> Result<SvdResult, LinalgError> {
    if a.fro_norm() == 0.0 {
        return Err(LinalgError::Zero);
    }
    // Work with the tall orientation; swap factors back at the end.
    let transposed = a.rows < a.cols;
    let work = if transposed { a.conj_transpose() } else { a.clone() };
    let (m, n) = work.shape();

    let mut cols: Vec<Vec<CScalar>> = (0..n).map(|j| work.column(j)).collect();
    let mut v: Vec<Vec<CScalar>> = if want_factors {
        (0..n)
            .map(|j| {
                let mut e = vec![CScalar::new(0.0, 0.0); n];
                e[j] = CScalar::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: CScalar = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= JACOBI_PAIR_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s, phase);
                if want_factors {
                    rotate(&mut v, p, q, c, s, phase);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .enumerate()
        .collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let singular_values: Vec<f64> = order.iter().map(|&(_, s)| s).collect();

    let (u_mat, v_mat) = if want_factors {
        let u = CMatrix::from_fn(m, n, |i, k| {
            let (j, s) = order[k];
            if s > 0.0 {
                cols[j][i] / s
            } else {
                CScalar::new(0.0, 0.0)
            }
        });
        let vm = CMatrix::from_fn(n, n, |i, k| v[order[k].0][i]);
        if transposed {
            (Some(vm), Some(u))
        } else {
            (Some(u), Some(vm))
        }
    } else {
        (None, None)
    };

    let result = SvdResult {
        singular_values,
        u: u_mat,
        v: v_mat,
    };
    if converged {
        Ok(result)
    } else {
        Err(LinalgError::NoConvergence {
            sweeps,
            best: Box::new(result),
        })
    }
}

/// Apply the rotation that orthogonalizes columns p and q, where the
/// q column is first rephased so that their inner product is real.
fn rotate(cols: &mut [Vec<CScalar>], p: usize, q: usize, c: f64, s: f64, phase: CScalar) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    let unphase = phase.conj();
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * unphase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Determinant of a square matrix by LU with partial pivoting.
pub fn determinant(a: &CMatrix) -> Result<CScalar, LinalgError> {
    let n = square_dim(a, "determinant")?;
    let mut lu = a.clone();
    let mut det = CScalar::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm()))
            .expect("non-empty range");
        if lu[(piv, k)].norm_sqr() == 0.0 {
            return Ok(CScalar::new(0.0, 0.0));
        }
        if piv != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            det = -det;
        }
        let d = lu[(k, k)];
        det *= d;
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            for j in k + 1..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
        }
    }
    Ok(det)
}

/// Matrix volume `sqrt(max(det A^H A, det A A^H))`, i.e. the product of the
/// singular values of the thin side.
pub fn volume(a: &CMatrix) -> f64 {
    match svd_jacobi(a) {
        Ok(svd) => svd.singular_values.iter().product(),
        Err(LinalgError::NoConvergence { best, .. }) => best.singular_values.iter().product(),
        Err(_) => 0.0,
    }
}

/// Both sides of the Binet-Cauchy identity for `det(A^H B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinetCauchy {
    pub lhs: CScalar,
    pub rhs: CScalar,
    /// `|lhs - rhs|`.
    pub defect: f64,
    /// `sum_I |det A_I| |det B_I|`, the natural scale of the defect.
    pub scale: f64,
}

pub const BINET_CAUCHY_MAX_ROWS: usize = 12;

/// Compare `det(A^H B)` against the sum of `conj(det A_I) det B_I` over all
/// row subsets `I` of size N.
pub fn binet_cauchy_check(a: &CMatrix, b: &CMatrix) -> Result<BinetCauchy, LinalgError> {
    if a.shape() != b.shape() || a.rows < a.cols {
        return Err(LinalgError::DimensionMismatch {
            op: "binet_cauchy",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if a.rows > BINET_CAUCHY_MAX_ROWS {
        return Err(LinalgError::TooLarge {
            rows: a.rows,
            limit: BINET_CAUCHY_MAX_ROWS,
        });
    }
    let n = a.cols;
    let lhs = determinant(&gemm_exact(a, b, true)?)?;
    let mut rhs = CScalar::new(0.0, 0.0);
    let mut scale = 0.0;
    for subset in (0..a.rows).combinations(n) {
        let da = determinant(&select_rows(a, &subset))?;
        let db = determinant(&select_rows(b, &subset))?;
        rhs += da.conj() * db;
        scale += da.norm() * db.norm();
    }
    Ok(BinetCauchy {
        lhs,
        rhs,
        defect: (lhs - rhs).norm(),
        scale,
    })
}

pub fn select_rows(a: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), a.cols, |i, j| a[(rows[i], j)])
}

pub fn select_cols(a: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(a.rows, cols.len(), |i, j| a[(i, cols[j])])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> CScalar {
        CScalar::new(re, im)
    }

    fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_times_b() {
        let b = CMatrix::from_fn(3, 2, |i, j| c(i as f64, j as f64 - 1.0));
        assert_eq!(gemm_exact(&CMatrix::identity(3), &b, false).unwrap(), b);
    }

    #[test]
    fn hand_expanded_conjugate_product() {
        // [[1, i], [0, 1]]^H [[1, 0], [1, 1]]
        let a = CMatrix::from_vec(2, 2, vec![c(1., 0.), c(0., 1.), c(0., 0.), c(1., 0.)]);
        let b = CMatrix::from_real(2, 2, &[1., 0., 1., 1.]);
        let p = gemm_exact(&a, &b, true).unwrap();
        let expected = CMatrix::from_vec(2, 2, vec![c(1., 0.), c(0., 0.), c(1., -1.), c(1., 0.)]);
        // row 0: conj(1)*1 + conj(0)*1 = 1, conj(1)*0 + 0 = 0
        // row 1: conj(i)*1 + conj(1)*1 = 1 - i, conj(i)*0 + 1 = 1
        assert_eq!(p, expected);
    }

    #[test]
    fn dimension_mismatch() {
        let a = CMatrix::zeros(2, 3);
        let b = CMatrix::zeros(2, 2);
        assert!(matches!(
            gemm_exact(&a, &b, false),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        assert!(gemm_exact(&a, &b, true).is_ok());
    }

    #[test]
    fn svd_of_diagonal_and_rank_one() {
        let s = svd_jacobi(&CMatrix::diag(&[1.0, 3.0])).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 1.0]);

        let u = [c(0.6, 0.0), c(0.0, 0.8)];
        let v = [c(0.5, 0.5), c(0.5, -0.5)];
        let a = CMatrix::from_fn(2, 2, |i, j| u[i] * v[j].conj());
        let s = svd_jacobi(&a).unwrap();
        assert!((s.singular_values[0] - 1.0).abs() < 1e-12);
        assert!(s.singular_values[1].abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_wide_and_tall() {
        let a = CMatrix::from_fn(3, 5, |i, j| c((i * 7 + j) as f64 % 4.0 - 1.5, (i + 2 * j) as f64 % 3.0));
        for m in [a.clone(), a.conj_transpose()] {
            let s = svd_jacobi_full(&m).unwrap();
            let r = s.reconstruct().unwrap();
            assert!(max_abs_diff(&r, &m) <= 1e-12 * m.fro_norm());
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_rejects_zero() {
        assert_eq!(svd_jacobi(&CMatrix::zeros(2, 2)), Err(LinalgError::Zero));
    }

    #[test]
    fn volume_basics() {
        assert!((volume(&CMatrix::identity(4)) - 1.0).abs() < 1e-14);
        assert!((volume(&CMatrix::diag(&[2.0, 3.0])) - 6.0).abs() < 1e-13);
        // tall 3x2: sqrt(det A^H A)
        let a = CMatrix::from_real(3, 2, &[1., 0., 1., 1., 0., 2.]);
        let g = gemm_exact(&a, &a, true).unwrap();
        let det = determinant(&g).unwrap().re;
        assert!((volume(&a) - det.sqrt()).abs() < 1e-12);
        assert_eq!(volume(&CMatrix::zeros(2, 2)), 0.0);
    }

    #[test]
    fn determinant_hand_cases() {
        let a = CMatrix::from_vec(2, 2, vec![c(1., 1.), c(2., 0.), c(0., 1.), c(3., 0.)]);
        // (1+i)*3 - 2*i = 3 + i
        let d = determinant(&a).unwrap();
        assert!((d - c(3., 1.)).norm() < 1e-14);
        let p = CMatrix::from_real(3, 3, &[0., 1., 0., 1., 0., 0., 0., 0., 1.]);
        assert!((determinant(&p).unwrap() - c(-1., 0.)).norm() < 1e-15);
    }

    #[test]
    fn binet_cauchy_on_identity_columns() {
        let a = CMatrix::from_fn(4, 2, |i, j| if i == j { c(1., 0.) } else { c(0., 0.) });
        let r = binet_cauchy_check(&a, &a).unwrap();
        assert_eq!(r.defect, 0.0);
        assert_eq!(r.lhs, c(1., 0.));
        assert_eq!(r.rhs, c(1., 0.));
    }

    #[test]
    fn binet_cauchy_limits() {
        let big = CMatrix::zeros(13, 2);
        assert!(matches!(
            binet_cauchy_check(&big, &big),
            Err(LinalgError::TooLarge { .. })
        ));
        let a = CMatrix::zeros(4, 2);
        let b = CMatrix::zeros(4, 3);
        assert!(matches!(
            binet_cauchy_check(&a, &b),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exact_cholesky_and_triangular_solves() {
        let a = CMatrix::from_real(2, 2, &[4., 2., 2., 2.]);
        let l = cholesky_exact(&a).unwrap();
        assert_eq!(l, CMatrix::from_real(2, 2, &[2., 0., 1., 1.]));
        let b = CMatrix::from_real(2, 1, &[2., 3.]);
        let z = solve_lower_exact(&l, &b).unwrap();
        assert_eq!(z, CMatrix::from_real(2, 1, &[1., 2.]));
        let x = solve_lower_adjoint_exact(&l, &z).unwrap();
        // A x = b with x = (-0.5, 2)
        assert!(max_abs_diff(&x, &CMatrix::from_real(2, 1, &[-0.5, 2.])) < 1e-15);
        let bad = CMatrix::from_real(2, 2, &[1., 2., 2., 1.]);
        assert!(matches!(
            cholesky_exact(&bad),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn quantize_rounds_each_component() {
        let ctx = PrecisionContext::new(10).unwrap();
        let m = CMatrix::from_vec(1, 1, vec![c(1.0 / 3.0, -1.0 / 3.0)]);
        let q = m.quantize(&ctx).unwrap();
        assert_eq!(q[(0, 0)], c(0.333251953125, -0.333251953125));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols).prop_map(move |v| {
                CMatrix::from_vec(rows, cols, v.into_iter().map(|(r, i)| CScalar::new(r, i)).collect())
            })
        }

        proptest! {
            #[test]
            fn adjoint_of_product(a in matrix(5, 3), b in matrix(5, 4)) {
                let ab = gemm_exact(&a, &b, true).unwrap();
                let ba = gemm_exact(&b, &a, true).unwrap();
                let scale = 1.0 + a.fro_norm() * b.fro_norm();
                prop_assert!(ab.conj_transpose().sub(&ba).unwrap().fro_norm() <= 1e-14 * scale);
            }

            #[test]
            fn binet_cauchy_holds(a in matrix(5, 2), b in matrix(5, 2)) {
                let r = binet_cauchy_check(&a, &b).unwrap();
                prop_assert!(r.defect <= 1e-12 * r.scale.max(1e-300));
            }

            #[test]
            fn svd_reconstructs(a in matrix(6, 3)) {
                if let Ok(s) = svd_jacobi_full(&a) {
                    let back = s.reconstruct().unwrap();
                    prop_assert!(back.sub(&a).unwrap().fro_norm() <= 1e-12 * (1.0 + a.fro_norm()));
                    prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
                }
            }
        }
    }
}
