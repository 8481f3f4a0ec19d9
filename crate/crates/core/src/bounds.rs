//! Round-off bound evaluators and condition numbers.
//!
//! Probabilistic bounds are returned with unit leading constants; they are
//! meant to be compared against RMS or mean errors over many trials, not
//! against individual worst cases.

use serde::Serialize;

use crate::matrix::{cholesky_exact, gemm_exact, svd_jacobi, CMatrix, LinalgError, SvdResult};
use crate::precision::PrecisionContext;

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

fn singular_values(a: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    match svd_jacobi(a) {
        Ok(SvdResult { singular_values, .. }) => Ok(singular_values),
        Err(LinalgError::NoConvergence { best, .. }) => Ok(best.singular_values),
        Err(e) => Err(e),
    }
}

fn numerical_rank(sv: &[f64]) -> Result<&[f64], LinalgError> {
    let cut = RANK_TOL * sv[0];
    let rank = sv.iter().take_while(|&&s| s > cut).count();
    if rank < sv.len() {
        return Err(LinalgError::RankDeficient {
            rank,
            size: sv.len(),
        });
    }
    Ok(sv)
}

/// `cond_2 = sigma_max / sigma_min`.
pub fn cond2(a: &CMatrix) -> Result<f64, LinalgError> {
    let sv = singular_values(a)?;
    cond2_from_singular_values(numerical_rank(&sv)?)
}

/// `cond_F = ||A||_F ||A^+||_F`.
pub fn cond_f(a: &CMatrix) -> Result<f64, LinalgError> {
    let sv = singular_values(a)?;
    cond_f_from_singular_values(numerical_rank(&sv)?)
}

pub fn cond2_from_singular_values(sv: &[f64]) -> Result<f64, LinalgError> {
    Ok(sv[0] / sv[sv.len() - 1])
}

pub fn cond_f_from_singular_values(sv: &[f64]) -> Result<f64, LinalgError> {
    let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
    let inv: f64 = sv.iter().map(|s| 1.0 / (s * s)).sum::<f64>().sqrt();
    Ok(fro * inv)
}

/// Worst-case Cholesky backward bound with its norm corollaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBound {
    /// `(N + 1) u |L| |L^H|`, real entries stored in the real parts.
    pub elementwise: CMatrix,
    /// `(N + 1) sqrt(N) u ||A||_F`.
    pub fro: f64,
    /// `(N + 1) N u ||A||_2`.
    pub spectral: f64,
}

pub fn bound_classical(
    a: &CMatrix,
    l_exact: &CMatrix,
    ctx: &PrecisionContext,
) -> Result<ClassicalBound, LinalgError> {
    let n = a.rows();
    let u = ctx.unit_roundoff();
    let abs_l = l_exact.map(|z| z.norm().into());
    let prod = gemm_exact(&abs_l, &abs_l.conj_transpose(), false)?;
    let coef = (n as f64 + 1.0) * u;
    let spectral_norm = singular_values(a)?[0];
    Ok(ClassicalBound {
        elementwise: prod.map(|z| (coef * z.re).into()),
        fro: bound_classical_fro(n, a.fro_norm(), ctx),
        spectral: coef * n as f64 * spectral_norm,
    })
}

/// `(N + 1) sqrt(N) u ||A||_F`.
pub fn bound_classical_fro(n: usize, fro_a: f64, ctx: &PrecisionContext) -> f64 {
    (n as f64 + 1.0) * (n as f64).sqrt() * ctx.unit_roundoff() * fro_a
}

/// Random-rounding scalar product bound `sqrt(N) eps ||a|| ||b||`.
pub fn bound_scalar_higham(n: usize, norm_a: f64, norm_b: f64, ctx: &PrecisionContext) -> f64 {
    (n as f64).sqrt() * ctx.eps() * norm_a * norm_b
}

/// Refined scalar product bound `sqrt(N) eps |a^H b| + eps ||a|| ||b||`: only
/// the component of `b` parallel to `a` accumulates the `sqrt(N)` growth.
pub fn bound_scalar_new(n: usize, inner_abs: f64, norm_a: f64, norm_b: f64, ctx: &PrecisionContext) -> f64 {
    let eps = ctx.eps();
    (n as f64).sqrt() * eps * inner_abs + eps * norm_a * norm_b
}

/// Dominant Gram-product error `sqrt(M) eps ||A||_F`.
pub fn bound_gram(m: usize, fro_a: f64, ctx: &PrecisionContext) -> f64 {
    (m as f64).sqrt() * ctx.eps() * fro_a
}

/// Cholesky backward error per triangular factor, `sqrt(N) eps ||A||_F`.
pub fn bound_cholesky(n: usize, fro_a: f64, ctx: &PrecisionContext) -> f64 {
    (n as f64).sqrt() * ctx.eps() * fro_a
}

/// Symmetrized backward error `Delta A = Delta A_1 + Delta A_1^H`, twice
/// the per-factor bound.
pub fn bound_cholesky_symmetric(n: usize, fro_a: f64, ctx: &PrecisionContext) -> f64 {
    2.0 * bound_cholesky(n, fro_a, ctx)
}

/// Forward error bound `(sqrt(M) / N) eps cond_F(H^H H)` for a unit solution.
pub fn bound_final(m: usize, n: usize, cond_f_a: f64, ctx: &PrecisionContext) -> f64 {
    (m as f64).sqrt() / n as f64 * ctx.eps() * cond_f_a
}

/// The looser `sqrt(M) eps cond_2(H)^2` form.
pub fn bound_final_cond2(m: usize, cond2_h: f64, ctx: &PrecisionContext) -> f64 {
    (m as f64).sqrt() * ctx.eps() * cond2_h * cond2_h
}

/// Forward error obtained by pushing the classical Frobenius backward bound
/// through the same `(1/N) ||A^-1||_F ||Delta A||_F` chain:
/// `(N + 1) sqrt(N) u cond_F(A) / N`.
pub fn bound_final_classical(n: usize, cond_f_a: f64, ctx: &PrecisionContext) -> f64 {
    bound_classical_fro(n, cond_f_a, ctx) / n as f64
}

/// Every bound evaluated for one matrix `H` and one context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rows: usize,
    pub cols: usize,
    pub mantissa_bits: u32,
    pub eps: f64,
    pub u: f64,
    pub fro_a: f64,
    pub classical_fro: f64,
    pub classical_spectral: f64,
    /// Largest entry of `(N + 1) u |L| |L^H|`.
    pub classical_elementwise_max: f64,
    pub gram_bound: f64,
    pub cholesky_bound: f64,
    pub cholesky_bound_symmetric: f64,
    pub final_bound: f64,
    pub final_bound_cond2_form: f64,
    pub cond2_h: f64,
    pub cond_f_a: f64,
}

impl BoundReport {
    pub fn for_matrix(h: &CMatrix, ctx: &PrecisionContext) -> Result<Self, LinalgError> {
        let (m, n) = h.shape();
        let hsv = singular_values(h)?;
        let cond2_h = cond2_from_singular_values(numerical_rank(&hsv)?)?;
        let a = gemm_exact(h, h, true)?;
        let cond_f_a = cond_f(&a)?;
        let l = cholesky_exact(&a)?;
        let classical = bound_classical(&a, &l, ctx)?;
        let fro_a = a.fro_norm();
        let classical_elementwise_max = classical
            .elementwise
            .data()
            .iter()
            .map(|z| z.re)
            .fold(0.0, f64::max);
        Ok(Self {
            rows: m,
            cols: n,
            mantissa_bits: ctx.mantissa_bits(),
            eps: ctx.eps(),
            u: ctx.unit_roundoff(),
            fro_a,
            classical_fro: classical.fro,
            classical_spectral: classical.spectral,
            classical_elementwise_max,
            gram_bound: bound_gram(m, fro_a, ctx),
            cholesky_bound: bound_cholesky(n, fro_a, ctx),
            cholesky_bound_symmetric: bound_cholesky_symmetric(n, fro_a, ctx),
            final_bound: bound_final(m, n, cond_f_a, ctx),
            final_bound_cond2_form: bound_final_cond2(m, cond2_h, ctx),
            cond2_h,
            cond_f_a,
        })
    }
}
