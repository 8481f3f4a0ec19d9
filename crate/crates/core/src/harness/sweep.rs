//! Monte-Carlo condition-number sweeps over RANDSVD channels.
//!
//! For every log-spaced target `cond_2(H)` the sweep draws independent
//! `(H, X0)` pairs, forms `Y = H X0` in binary64, runs the low-precision
//! detector and aggregates the errors into one [`SweepRecord`]. Trial
//! `(point, trial)` always uses the RNG stream derived from
//! `(seed, point, trial)`, so output is identical for any worker count.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{bound_final, bound_final_classical, bound_final_cond2, cond2_from_singular_values,
    cond_f_from_singular_values};
use crate::ensembles::{randsvd, random_unit_vector, RandsvdSpec, RngStream};
use crate::harness::stats::{mean, std_dev};
use crate::matrix::{gemm_exact, svd_jacobi, LinalgError};
use crate::par::{map_indexed, Parallelism};
use crate::pipeline::{measure_error, SolveOptions, TrialOutcome};
use crate::precision::{PrecisionContext, PrecisionError, RangePolicy};

pub const CSV_HEADER: &str = "cond_target,cond2_H_mean,condF_A_mean,trials_ok,trials_failed,mean_rel_err,\
std_rel_err,mean_backward_err,mean_gram_err,bound_final,bound_final_cond2,bound_classical_fro";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Precision(#[from] PrecisionError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub rows: usize,
    pub cols: usize,
    pub cond_min: f64,
    pub cond_max: f64,
    pub cond_points: usize,
    pub trials: usize,
    pub mantissa_bits: u32,
    pub fma: bool,
    pub range: RangePolicy,
    pub apply_wy_in_lp: bool,
    pub seed: u64,
    pub parallelism: Parallelism,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rows: 32,
            cols: 32,
            cond_min: 1.0,
            cond_max: 100.0,
            cond_points: 20,
            trials: 100,
            mantissa_bits: 10,
            fma: true,
            range: RangePolicy::Unbounded,
            apply_wy_in_lp: true,
            seed: 0,
            parallelism: Parallelism::Auto,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::Invalid(m));
        if self.rows == 0 || self.cols == 0 {
            return bad(format!("dimensions must be positive, got {}x{}", self.rows, self.cols));
        }
        if self.rows < self.cols {
            return bad(format!(
                "least squares needs rows >= cols, got {}x{}",
                self.rows, self.cols
            ));
        }
        if !(self.cond_min.is_finite() && self.cond_min >= 1.0) {
            return bad(format!("cond_min must be >= 1, got {}", self.cond_min));
        }
        if !(self.cond_max.is_finite() && self.cond_max >= self.cond_min) {
            return bad(format!("cond_max must be >= cond_min, got {}", self.cond_max));
        }
        if self.cond_points == 0 {
            return bad("cond_points must be >= 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.cond_points > u32::MAX as usize || self.trials > u32::MAX as usize {
            return bad("too many points or trials".into());
        }
        self.context()?;
        Ok(())
    }

    pub fn context(&self) -> Result<PrecisionContext, SweepError> {
        Ok(PrecisionContext::new(self.mantissa_bits)?
            .with_fma(self.fma)
            .with_range(self.range))
    }

    /// Log-spaced targets from `cond_min` to `cond_max` inclusive.
    pub fn cond_grid(&self) -> Vec<f64> {
        if self.cond_points == 1 {
            return vec![self.cond_min];
        }
        let (lo, hi) = (self.cond_min.ln(), self.cond_max.ln());
        let last = self.cond_points - 1;
        (0..self.cond_points)
            .map(|i| match i {
                0 => self.cond_min,
                i if i == last => self.cond_max,
                i => (lo + (hi - lo) * i as f64 / last as f64).exp(),
            })
            .collect()
    }
}

/// One condition-number point of a sweep. Error statistics are over
/// successful trials only; condition numbers are averaged over all trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub cond_target: f64,
    #[serde(rename = "cond2_H_mean")]
    pub cond2_h_mean: f64,
    #[serde(rename = "condF_A_mean")]
    pub cond_f_a_mean: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
    pub mean_rel_err: f64,
    pub std_rel_err: f64,
    pub mean_backward_err: f64,
    pub mean_gram_err: f64,
    pub bound_final: f64,
    pub bound_final_cond2: f64,
    pub bound_classical_fro: f64,
}

impl SweepRecord {
    pub fn trials(&self) -> usize {
        self.trials_ok + self.trials_failed
    }
}

/// Result of one Monte-Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub cond2_h: f64,
    pub cond_f_a: f64,
    pub outcome: Option<TrialOutcome>,
}

/// Draw and evaluate trial `(point, trial)` at target condition `cond`.
pub fn run_trial(cfg: &SweepConfig, ctx: &PrecisionContext, point: usize, trial: usize, cond: f64) -> TrialResult {
    let mut rng = RngStream::for_trial(cfg.seed, point as u32, trial as u32);
    let spec = RandsvdSpec::new(cfg.rows, cfg.cols, cond, cfg.seed);
    let h = randsvd(&spec, &mut rng).expect("validated spec");
    let x0 = random_unit_vector(cfg.cols, &mut rng);
    let y = gemm_exact(&h, &x0, false).expect("shapes agree");

    let sv = match svd_jacobi(&h) {
        Ok(s) => s.singular_values,
        Err(LinalgError::NoConvergence { best, .. }) => best.singular_values,
        Err(_) => Vec::new(),
    };
    let (cond2_h, cond_f_a) = if sv.is_empty() || sv[sv.len() - 1] == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let sq: Vec<f64> = sv.iter().map(|s| s * s).collect();
        (
            cond2_from_singular_values(&sv).expect("non-empty"),
            cond_f_from_singular_values(&sq).expect("non-empty"),
        )
    };
    let opts = SolveOptions {
        apply_wy_in_lp: cfg.apply_wy_in_lp,
    };
    TrialResult {
        cond2_h,
        cond_f_a,
        outcome: measure_error(&h, &y, ctx, &opts).ok(),
    }
}

pub fn aggregate(cfg: &SweepConfig, ctx: &PrecisionContext, cond_target: f64, trials: &[TrialResult]) -> SweepRecord {
    let ok: Vec<_> = trials
        .iter()
        .filter_map(|t| t.outcome.as_ref().and_then(TrialOutcome::measurement))
        .collect();
    let rel: Vec<f64> = ok.iter().map(|m| m.rel_err).collect();
    let bwd: Vec<f64> = ok.iter().map(|m| m.backward_err).collect();
    let gram: Vec<f64> = ok.iter().map(|m| m.gram_err).collect();
    let cond2_h_mean = mean(&trials.iter().map(|t| t.cond2_h).collect::<Vec<_>>());
    let cond_f_a_mean = mean(&trials.iter().map(|t| t.cond_f_a).collect::<Vec<_>>());
    SweepRecord {
        cond_target,
        cond2_h_mean,
        cond_f_a_mean,
        trials_ok: ok.len(),
        trials_failed: trials.len() - ok.len(),
        mean_rel_err: mean(&rel),
        std_rel_err: std_dev(&rel),
        mean_backward_err: mean(&bwd),
        mean_gram_err: mean(&gram),
        bound_final: bound_final(cfg.rows, cfg.cols, cond_f_a_mean, ctx),
        bound_final_cond2: bound_final_cond2(cfg.rows, cond2_h_mean, ctx),
        bound_classical_fro: bound_final_classical(cfg.cols, cond_f_a_mean, ctx),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, SweepError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let grid = cfg.cond_grid();
    let t = cfg.trials;
    let results = map_indexed(grid.len() * t, cfg.parallelism, |k| {
        let (p, i) = (k / t, k % t);
        run_trial(cfg, &ctx, p, i, grid[p])
    });
    Ok(grid
        .iter()
        .zip(results.chunks(t))
        .map(|(&cond, chunk)| aggregate(cfg, &ctx, cond, chunk))
        .collect())
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[SweepRecord]) -> Result<String, SweepError> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
