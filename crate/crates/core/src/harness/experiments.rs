//! Monte-Carlo experiments behind the statistical invariants: rounding
//! statistics, scalar-product error growth, Gram and Cholesky error scaling,
//! subset-volume sampling and Haar marginals.

use rand::seq::index::sample;
use rand::Rng;

use crate::ensembles::{haar_columns, randsvd, random_unit_vector, RandsvdSpec, RngStream};
use crate::harness::stats::{mean, rms, std_error};
use crate::matrix::{gemm_exact, select_rows, volume, CMatrix};
use crate::par::{map_indexed, Parallelism};
use crate::pipeline::{backward_error, cholesky_lp, gram_lp};
use crate::precision::{CScalar, PrecisionContext};

/// Outcome of fuzzing [`PrecisionContext::round`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundingFuzz {
    pub samples: usize,
    pub idempotence_failures: usize,
    pub monotonicity_failures: usize,
    pub exactness_failures: usize,
    /// `max |round(x) - x| / (u |x|)`; at most 1.
    pub max_rel_err_over_u: f64,
    /// RMS of `(round(x) - x) / 2^floor(log2 |x|)`, the error measured in
    /// units of the leading bit; its model value is `eps`.
    pub rms_binade_err: f64,
    /// RMS of `(round(x) - x) / x`; for uniform significands its model
    /// value is `eps / sqrt(2)`.
    pub rms_rel_err: f64,
}

/// Fuzz the rounding engine with `samples` values `±(1 + U) 2^e`,
/// `U ~ Uniform[0, 1)`, `e` uniform in `[-30, 30]`.
pub fn rounding_fuzz(ctx: &PrecisionContext, samples: usize, seed: u64) -> RoundingFuzz {
    let mut rng = RngStream::new(seed, 0x0f0f);
    let b = ctx.mantissa_bits() as i32;
    let u = ctx.unit_roundoff();
    let mut out = RoundingFuzz {
        samples,
        idempotence_failures: 0,
        monotonicity_failures: 0,
        exactness_failures: 0,
        max_rel_err_over_u: 0.0,
        rms_binade_err: 0.0,
        rms_rel_err: 0.0,
    };
    let mut binade = Vec::with_capacity(samples);
    let mut rel = Vec::with_capacity(samples);
    let round = |x: f64| ctx.round(x).expect("finite input in unbounded range");
    for _ in 0..samples {
        let e: i32 = rng.random_range(-30..=30);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let scale = 2f64.powi(e);
        let x = sign * (1.0 + rng.uniform()) * scale;
        let r = round(x);

        if round(r) != r {
            out.idempotence_failures += 1;
        }
        let err = r - x;
        out.max_rel_err_over_u = out.max_rel_err_over_u.max(err.abs() / (u * x.abs()));
        binade.push(err / scale);
        rel.push(err / x);

        // neighbours: the next binary64 value and a random nearby value
        let near = x + (rng.uniform() - 0.5) * 4.0 * scale * 2f64.powi(-b);
        for y in [x.next_up(), near] {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            if round(lo) > round(hi) {
                out.monotonicity_failures += 1;
            }
        }

        // a value with exactly b+1 significant bits must be left unchanged
        let k: u64 = rng.random_range((1u64 << b)..(1u64 << (b + 1)));
        let exact = sign * k as f64 * 2f64.powi(e - b);
        if round(exact) != exact {
            out.exactness_failures += 1;
        }
    }
    out.rms_binade_err = rms(&binade);
    out.rms_rel_err = rms(&rel);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// `b = a`.
    Parallel,
    /// `b` orthogonalized against `a` in binary64.
    Orthogonal,
}

/// RMS of `|fl(a^H b) - a^H b| / (||a|| ||b||)` for random unit vectors of
/// length `n`, both rounded to the context grid before the product.
pub fn scalar_product_rms(
    n: usize,
    kind: PairKind,
    pairs: usize,
    ctx: &PrecisionContext,
    seed: u64,
    par: Parallelism,
) -> f64 {
    let errs = map_indexed(pairs, par, |k| {
        let mut rng = RngStream::new(seed, k as u64);
        let a = random_unit_vector(n, &mut rng).quantize(ctx).expect("unit entries fit");
        let a: Vec<CScalar> = a.data().to_vec();
        let b: Vec<CScalar> = match kind {
            PairKind::Parallel => a.clone(),
            PairKind::Orthogonal => {
                let mut g: Vec<CScalar> = (0..n).map(|_| rng.complex_gaussian()).collect();
                let na2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
                for _ in 0..2 {
                    let proj: CScalar = a.iter().zip(&g).map(|(x, y)| x.conj() * y).sum::<CScalar>() / na2;
                    for (gi, ai) in g.iter_mut().zip(&a) {
                        *gi -= proj * ai;
                    }
                }
                let ng = g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                g.iter()
                    .map(|z| ctx.round_complex(z / ng).expect("unit entries fit"))
                    .collect()
            }
        };
        let exact: CScalar = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let mut acc = CScalar::new(0.0, 0.0);
        for (x, y) in a.iter().zip(&b) {
            acc = ctx.cmul_acc(acc, *x, *y).expect("unit entries fit");
        }
        let norms = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (acc - exact).norm() / norms
    });
    rms(&errs)
}

/// Per-trial Gram and Cholesky backward errors over RANDSVD draws.
#[derive(Debug, Clone, PartialEq)]
pub struct GramCholeskyErrors {
    /// `||fl(H^H H) - H^H H||_F / ||H^H H||_F`, one entry per trial.
    pub gram_err: Vec<f64>,
    /// `||L L^H - fl(H^H H)||_F / ||H^H H||_F` for trials that factored.
    pub backward_err: Vec<f64>,
    pub breakdowns: usize,
}

impl GramCholeskyErrors {
    pub fn mean_gram(&self) -> f64 {
        mean(&self.gram_err)
    }

    pub fn mean_backward(&self) -> f64 {
        mean(&self.backward_err)
    }
}

/// Run Gram product and Cholesky under `ctx` on `trials` RANDSVD `m x n`
/// draws with target condition `cond`. `H` is rounded to the grid first.
pub fn gram_cholesky_errors(
    m: usize,
    n: usize,
    cond: f64,
    trials: usize,
    ctx: &PrecisionContext,
    seed: u64,
    par: Parallelism,
) -> GramCholeskyErrors {
    let spec = RandsvdSpec::new(m, n, cond, seed);
    let per_trial = map_indexed(trials, par, |t| {
        let mut rng = RngStream::for_trial(seed, 0, t as u32);
        let h = randsvd(&spec, &mut rng).expect("valid spec").quantize(ctx).expect("entries fit");
        let reference = gemm_exact(&h, &h, true).expect("shapes agree");
        let a_norm = reference.fro_norm();
        let a = gram_lp(&h, ctx).expect("entries fit");
        let gram_err = a.sub(&reference).expect("same shape").fro_norm() / a_norm;
        let backward = cholesky_lp(&a, ctx)
            .ok()
            .map(|l| backward_error(&l, &a).expect("same shape") / a_norm);
        (gram_err, backward)
    });
    let mut out = GramCholeskyErrors {
        gram_err: Vec::with_capacity(trials),
        backward_err: Vec::with_capacity(trials),
        breakdowns: 0,
    };
    for (g, b) in per_trial {
        out.gram_err.push(g);
        match b {
            Some(b) => out.backward_err.push(b),
            None => out.breakdowns += 1,
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

/// Monte-Carlo estimate of `C(m, n) E V^2(A_I)` for `A` the first `n`
/// columns of an `m x m` Haar unitary and `I` a uniformly random row subset
/// of size `n`. Returns `(estimate, standard error)`; the exact value is
/// `V^2(A) = 1`.
pub fn subset_volume_estimate(m: usize, n: usize, samples: usize, seed: u64, par: Parallelism) -> (f64, f64) {
    let c = binomial(m, n);
    let vals = map_indexed(samples, par, |k| {
        let mut rng = RngStream::new(seed, k as u64);
        let a = haar_columns(m, n, &mut rng);
        let mut rows = sample(&mut rng, m, n).into_vec();
        rows.sort_unstable();
        let v = volume(&select_rows(&a, &rows));
        c * v * v
    });
    (mean(&vals), std_error(&vals))
}

/// Sample moments of the first column of `n x n` Haar unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarColumnStats {
    /// Mean and standard error of `|q_i1|^2` for each row `i`.
    pub abs2: Vec<(f64, f64)>,
    /// Mean and standard error of `Re q_11` and `Im q_11`.
    pub re: (f64, f64),
    pub im: (f64, f64),
}

pub fn haar_first_column_stats(n: usize, samples: usize, seed: u64, par: Parallelism) -> HaarColumnStats {
    let cols: Vec<Vec<CScalar>> = map_indexed(samples, par, |k| {
        let mut rng = RngStream::new(seed, k as u64);
        crate::ensembles::haar_unitary(n, &mut rng).column(0)
    });
    let abs2 = (0..n)
        .map(|i| {
            let v: Vec<f64> = cols.iter().map(|c| c[i].norm_sqr()).collect();
            (mean(&v), std_error(&v))
        })
        .collect();
    let re: Vec<f64> = cols.iter().map(|c| c[0].re).collect();
    let im: Vec<f64> = cols.iter().map(|c| c[0].im).collect();
    HaarColumnStats {
        abs2,
        re: (mean(&re), std_error(&re)),
        im: (mean(&im), std_error(&im)),
    }
}

/// Mean and standard error of `|x_1|^2` for random unit vectors.
pub fn unit_vector_first_entry(n: usize, samples: usize, seed: u64) -> (f64, f64) {
    let v: Vec<f64> = (0..samples)
        .map(|k| random_unit_vector(n, &mut RngStream::new(seed, k as u64))[(0, 0)].norm_sqr())
        .collect();
    (mean(&v), std_error(&v))
}

/// Random complex matrix with standard Gaussian entries.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}
