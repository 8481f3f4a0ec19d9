//! Cholesky least-squares detector executed under a [`PrecisionContext`],
//! the binary64 reference solve, and the error measurement between them.
//!
//! The detector forms `A = H^H H`, factors `A = L L^H` with the right-looking
//! algorithm, builds the weight matrix `W = L^-H (L^-1 H^H)` by two triangular
//! solves and applies `X = W Y`. Every dot product is summed sequentially in
//! index order.

use thiserror::Error;

use crate::matrix::{
    cholesky_exact, gemm_exact, solve_lower_adjoint_exact, solve_lower_exact, CMatrix, LinalgError,
};
use crate::precision::{CScalar, PrecisionContext, PrecisionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FailureStage {
    #[default]
    None,
    Gram,
    Cholesky,
    Solve,
    Apply,
}

impl FailureStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Gram => "gram",
            Self::Cholesky => "cholesky",
            Self::Solve => "solve",
            Self::Apply => "apply",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CholeskyError {
    #[error("breakdown at pivot {pivot}: rounded pivot {value:e} is not positive")]
    Breakdown { pivot: usize, value: f64 },
    #[error(transparent)]
    Arithmetic(#[from] PrecisionError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StageError {
    #[error("gram: {0}")]
    Gram(PrecisionError),
    #[error("cholesky: {0}")]
    Cholesky(CholeskyError),
    #[error("solve: {0}")]
    Solve(PrecisionError),
    #[error("apply: {0}")]
    Apply(PrecisionError),
}

impl StageError {
    pub fn stage(&self) -> FailureStage {
        match self {
            Self::Gram(_) => FailureStage::Gram,
            Self::Cholesky(_) => FailureStage::Cholesky,
            Self::Solve(_) => FailureStage::Solve,
            Self::Apply(_) => FailureStage::Apply,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Compute `X = W Y` under the context (otherwise in binary64).
    pub apply_wy_in_lp: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            apply_wy_in_lp: true,
        }
    }
}

/// Outcome of one detector run. Factors computed before a failure are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    /// Gram matrix that entered Cholesky.
    pub gram: Option<CMatrix>,
    pub l: Option<CMatrix>,
    pub w: Option<CMatrix>,
    pub x: Option<CMatrix>,
    pub failure_stage: FailureStage,
    pub error: Option<StageError>,
}

impl LsSolution {
    pub fn failed(&self) -> bool {
        self.failure_stage != FailureStage::None
    }
}

fn zero() -> CScalar {
    CScalar::new(0.0, 0.0)
}

/// `H^H H` under `ctx`. Only the lower triangle is computed (columns dotted
/// in row order 0..M); the diagonal is a real sum of `|h|^2` and the upper
/// triangle is mirrored by conjugation.
pub fn gram_lp(h: &CMatrix, ctx: &PrecisionContext) -> Result<CMatrix, PrecisionError> {
    let n = h.cols();
    let cols: Vec<Vec<CScalar>> = (0..n).map(|j| h.column(j)).collect();
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        let mut d = 0.0;
        for &z in &cols[i] {
            d = ctx.abs2_acc(d, z)?;
        }
        a[(i, i)] = CScalar::new(d, 0.0);
        for j in 0..i {
            let mut acc = zero();
            for (&x, &y) in cols[i].iter().zip(&cols[j]) {
                acc = ctx.cmul_acc(acc, x, y)?;
            }
            a[(i, j)] = acc;
            a[(j, i)] = acc.conj();
        }
    }
    Ok(a)
}

/// Right-looking Cholesky under `ctx`:
/// for each column j, `L_jj = sqrt(A_jj)`, `L_ij = A_ij / L_jj`, then the
/// trailing update `A -= L_:,j L_:,j^H`. The input is first rounded to the
/// context grid; only its lower triangle is read.
pub fn cholesky_lp(a: &CMatrix, ctx: &PrecisionContext) -> Result<CMatrix, CholeskyError> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky_lp needs a square matrix");
    let mut work = a.quantize(ctx)?;
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let pivot = work[(j, j)].re;
        if pivot.is_nan() || pivot <= 0.0 {
            return Err(CholeskyError::Breakdown { pivot: j, value: pivot });
        }
        let ljj = ctx.sqrt(pivot)?;
        if ljj == 0.0 {
            return Err(CholeskyError::Breakdown { pivot: j, value: ljj });
        }
        l[(j, j)] = CScalar::new(ljj, 0.0);
        for i in j + 1..n {
            l[(i, j)] = ctx.cdiv_real(work[(i, j)], ljj)?;
        }
        for k in j + 1..n {
            let lkj = l[(k, j)];
            let d = ctx.abs2_sub(work[(k, k)].re, lkj)?;
            work[(k, k)] = CScalar::new(d, 0.0);
            for i in k + 1..n {
                // A_ik -= L_ij conj(L_kj)
                work[(i, k)] = ctx.cmul_sub_conj(work[(i, k)], lkj, l[(i, j)])?;
            }
        }
    }
    Ok(l)
}

/// `W = L^-H (L^-1 H^H)` by forward then back substitution under `ctx`.
pub fn weight_lp(l: &CMatrix, h: &CMatrix, ctx: &PrecisionContext) -> Result<CMatrix, PrecisionError> {
    let n = l.rows();
    let m = h.rows();
    assert_eq!(h.cols(), n, "H must have as many columns as L has rows");
    let mut w = CMatrix::zeros(n, m);
    let mut z = vec![zero(); n];
    let mut x = vec![zero(); n];
    for c in 0..m {
        for i in 0..n {
            let mut acc = h[(c, i)].conj();
            for j in 0..i {
                acc = ctx.cmul_sub_plain(acc, l[(i, j)], z[j])?;
            }
            z[i] = ctx.cdiv_real(acc, l[(i, i)].re)?;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc = ctx.cmul_sub_conj(acc, l[(j, i)], x[j])?;
            }
            x[i] = ctx.cdiv_real(acc, l[(i, i)].re)?;
        }
        for i in 0..n {
            w[(i, c)] = x[i];
        }
    }
    Ok(w)
}

/// `W Y` with sequential summation under `ctx`.
pub fn apply_lp(w: &CMatrix, y: &CMatrix, ctx: &PrecisionContext) -> Result<CMatrix, PrecisionError> {
    assert_eq!(w.cols(), y.rows(), "W and Y shapes disagree");
    let mut x = CMatrix::zeros(w.rows(), y.cols());
    for i in 0..w.rows() {
        for c in 0..y.cols() {
            let mut acc = zero();
            for (k, &wik) in w.row(i).iter().enumerate() {
                acc = ctx.cmul_acc_plain(acc, wik, y[(k, c)])?;
            }
            x[(i, c)] = acc;
        }
    }
    Ok(x)
}

pub fn solve_lp(h: &CMatrix, y: &CMatrix, ctx: &PrecisionContext) -> LsSolution {
    solve_lp_with(h, y, ctx, &SolveOptions::default())
}

/// Full detector under `ctx`. `H` and `Y` are rounded to the context grid
/// on entry.
pub fn solve_lp_with(h: &CMatrix, y: &CMatrix, ctx: &PrecisionContext, opts: &SolveOptions) -> LsSolution {
    assert_eq!(h.rows(), y.rows(), "H and Y must have the same number of rows");
    let mut sol = LsSolution {
        gram: None,
        l: None,
        w: None,
        x: None,
        failure_stage: FailureStage::None,
        error: None,
    };
    let fail = |mut sol: LsSolution, e: StageError| {
        sol.failure_stage = e.stage();
        sol.error = Some(e);
        sol
    };

    let hq = match h.quantize(ctx) {
        Ok(m) => m,
        Err(e) => return fail(sol, StageError::Gram(e)),
    };
    let a = match gram_lp(&hq, ctx) {
        Ok(a) => a,
        Err(e) => return fail(sol, StageError::Gram(e)),
    };
    sol.gram = Some(a.clone());
    let l = match cholesky_lp(&a, ctx) {
        Ok(l) => l,
        Err(e) => return fail(sol, StageError::Cholesky(e)),
    };
    sol.l = Some(l.clone());
    let w = match weight_lp(&l, &hq, ctx) {
        Ok(w) => w,
        Err(e) => return fail(sol, StageError::Solve(e)),
    };
    sol.w = Some(w.clone());
    let x = if opts.apply_wy_in_lp {
        y.quantize(ctx).and_then(|yq| apply_lp(&w, &yq, ctx))
    } else {
        Ok(gemm_exact(&w, y, false).expect("shapes checked"))
    };
    match x {
        Ok(x) => {
            sol.x = Some(x);
            sol
        }
        Err(e) => fail(sol, StageError::Apply(e)),
    }
}

/// The same pipeline with plain binary64 kernels.
pub fn solve_exact(h: &CMatrix, y: &CMatrix) -> Result<LsSolution, LinalgError> {
    let a = gemm_exact(h, h, true)?;
    let l = cholesky_exact(&a)?;
    let z = solve_lower_exact(&l, &h.conj_transpose())?;
    let w = solve_lower_adjoint_exact(&l, &z)?;
    let x = gemm_exact(&w, y, false)?;
    Ok(LsSolution {
        gram: Some(a),
        l: Some(l),
        w: Some(w),
        x: Some(x),
        failure_stage: FailureStage::None,
        error: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMeasurement {
    /// `||X_lp - X_exact||_2 / ||X_exact||_2`.
    pub rel_err: f64,
    /// `||L L^H - A_in||_F / ||A||_F` for the Gram matrix `A_in` that
    /// entered Cholesky.
    pub backward_err: f64,
    /// `||A_in - H^H H||_F / ||H^H H||_F`.
    pub gram_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Solved(ErrorMeasurement),
    Failed {
        stage: FailureStage,
        gram_err: Option<f64>,
    },
}

impl TrialOutcome {
    pub fn measurement(&self) -> Option<&ErrorMeasurement> {
        match self {
            Self::Solved(m) => Some(m),
            Self::Failed { .. } => None,
        }
    }
}

/// Run the detector and the reference solve and compare them.
///
/// `H` and `Y` are first rounded to the context grid, as they would be
/// stored, and both solves see the rounded data. All three errors therefore
/// measure the arithmetic of the detector alone, not the representation
/// error of its inputs.
pub fn measure_error(
    h: &CMatrix,
    y: &CMatrix,
    ctx: &PrecisionContext,
    opts: &SolveOptions,
) -> Result<TrialOutcome, LinalgError> {
    let (hq, yq) = match (h.quantize(ctx), y.quantize(ctx)) {
        (Ok(hq), Ok(yq)) => (hq, yq),
        _ => {
            return Ok(TrialOutcome::Failed {
                stage: FailureStage::Gram,
                gram_err: None,
            })
        }
    };
    let exact = solve_exact(&hq, &yq)?;
    let x_exact = exact.x.as_ref().expect("exact solve yields X");
    let lp = solve_lp_with(&hq, &yq, ctx, opts);
    let a_exact = gemm_exact(&hq, &hq, true)?;

    let gram_err = match &lp.gram {
        Some(g) => Some(relative_fro(g, &a_exact)?),
        None => None,
    };
    if lp.failed() {
        return Ok(TrialOutcome::Failed {
            stage: lp.failure_stage,
            gram_err,
        });
    }
    let gram = lp.gram.as_ref().expect("gram present on success");
    let l = lp.l.as_ref().expect("factor present on success");
    let x = lp.x.as_ref().expect("solution present on success");
    let a_norm = a_exact.fro_norm();

    Ok(TrialOutcome::Solved(ErrorMeasurement {
        rel_err: relative_fro(x, x_exact)?,
        backward_err: backward_error(l, gram)? / a_norm,
        gram_err: gram_err.expect("gram error available on success"),
    }))
}

/// `||L L^H - A||_F`.
pub fn backward_error(l: &CMatrix, a: &CMatrix) -> Result<f64, LinalgError> {
    let llh = gemm_exact(l, &l.conj_transpose(), false)?;
    Ok(llh.sub(a)?.fro_norm())
}

fn relative_fro(approx: &CMatrix, reference: &CMatrix) -> Result<f64, LinalgError> {
    let denom = reference.fro_norm();
    let diff = approx.sub(reference)?.fro_norm();
    Ok(if denom == 0.0 { diff } else { diff / denom })
}
