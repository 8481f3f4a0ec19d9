//! Reproducible random matrices: Haar unitaries, RANDSVD draws with
//! prescribed spectra, and random unit vectors.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::matrix::CMatrix;
use crate::precision::CScalar;

/// Counter-based random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha12, whose 64-bit stream selector gives independent,
/// platform-stable sequences for every stream id under one seed.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Stream for one trial of one sweep point.
    pub fn for_trial(seed: u64, point: u32, trial: u32) -> Self {
        Self::new(seed, ((point as u64) << 32) | trial as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly symmetric complex Gaussian with unit variance.
    pub fn complex_gaussian(&mut self) -> CScalar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CScalar::new(s * self.gaussian(), s * self.gaussian())
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// The first `k` columns of an `m x m` Haar unitary.
///
/// Gram-Schmidt (applied twice) on a complex Gaussian `m x k` matrix yields
/// the Q factor whose R has positive real diagonal, which is exactly the
/// rephased QR that makes Q Haar distributed.
pub fn haar_columns(m: usize, k: usize, rng: &mut RngStream) -> CMatrix {
    assert!(k >= 1 && k <= m, "need 1 <= k <= m");
    let mut cols: Vec<Vec<CScalar>> = (0..k)
        .map(|_| (0..m).map(|_| rng.complex_gaussian()).collect())
        .collect();
    for j in 0..k {
        for _ in 0..2 {
            for p in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let q = &done[p];
                let v = &mut rest[0];
                let proj: CScalar = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut cols[j] {
            *z /= norm;
        }
    }
    CMatrix::from_fn(m, k, |i, j| cols[j][i])
}

pub fn haar_unitary(n: usize, rng: &mut RngStream) -> CMatrix {
    haar_columns(n, n, rng)
}

pub fn random_unit_vector(n: usize, rng: &mut RngStream) -> CMatrix {
    assert!(n >= 1, "vector length must be positive");
    let v: Vec<CScalar> = (0..n).map(|_| rng.complex_gaussian()).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CMatrix::column_vector(v.into_iter().map(|z| z / norm).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// Geometrically spaced `sigma_j = cond^(-(j-1)/(n-1))`.
    Exponential,
    /// Explicit positive, non-increasing singular values.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandsvdSpec {
    pub rows: usize,
    pub cols: usize,
    pub cond: f64,
    pub spectrum: Spectrum,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("dimensions must be positive, got {0}x{1}")]
    Shape(usize, usize),
    #[error("condition number must be finite and >= 1, got {0}")]
    Cond(f64),
    #[error("explicit spectrum must have {expected} positive non-increasing values")]
    Spectrum { expected: usize },
}

impl RandsvdSpec {
    pub fn new(rows: usize, cols: usize, cond: f64, seed: u64) -> Self {
        Self {
            rows,
            cols,
            cond,
            spectrum: Spectrum::Exponential,
            seed,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.min(self.cols)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(SpecError::Shape(self.rows, self.cols));
        }
        match &self.spectrum {
            Spectrum::Exponential => {
                if !(self.cond.is_finite() && self.cond >= 1.0) {
                    return Err(SpecError::Cond(self.cond));
                }
            }
            Spectrum::Explicit(s) => {
                let ok = s.len() == self.rank()
                    && s.iter().all(|&x| x > 0.0 && x.is_finite())
                    && s.windows(2).all(|w| w[0] >= w[1]);
                if !ok {
                    return Err(SpecError::Spectrum {
                        expected: self.rank(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn singular_values(&self) -> Vec<f64> {
        match &self.spectrum {
            Spectrum::Explicit(s) => s.clone(),
            Spectrum::Exponential => exponential_spectrum(self.rank(), self.cond),
        }
    }

    /// Draw using the stream `(seed, 0)`.
    pub fn generate(&self) -> Result<CMatrix, SpecError> {
        randsvd(self, &mut RngStream::new(self.seed, 0))
    }
}

pub fn exponential_spectrum(n: usize, cond: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|j| cond.powf(-(j as f64) / (n - 1) as f64))
        .collect()
}

/// `H = U diag(sigma) V` with U the first n columns of an M x M Haar
/// unitary and V the first n rows of an independent N x N Haar unitary.
pub fn randsvd(spec: &RandsvdSpec, rng: &mut RngStream) -> Result<CMatrix, SpecError> {
    spec.validate()?;
    let n = spec.rank();
    let sigma = spec.singular_values();
    let u = haar_columns(spec.rows, n, rng);
    // first n rows of a Haar unitary = adjoint of the first n columns of one
    let v_cols = haar_columns(spec.cols, n, rng);
    Ok(CMatrix::from_fn(spec.rows, spec.cols, |i, j| {
        (0..n)
            .map(|k| u[(i, k)] * sigma[k] * v_cols[(j, k)].conj())
            .sum()
    }))
}
