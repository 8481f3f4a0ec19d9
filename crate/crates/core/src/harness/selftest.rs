//! Quick statistical invariant suite behind the `selftest` subcommand.
//!
//! Sample counts are reduced relative to the full acceptance suite so the
//! whole run takes a few seconds; thresholds are the same.

use crate::bounds::{bound_cholesky, bound_classical_fro};
use crate::ensembles::RngStream;
use crate::harness::experiments::{
    gaussian_matrix, gram_cholesky_errors, haar_first_column_stats, rounding_fuzz, scalar_product_rms,
    subset_volume_estimate, PairKind,
};
use crate::matrix::binet_cauchy_check;
use crate::par::Parallelism;
use crate::precision::PrecisionContext;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn within_sigma(mean: f64, se: f64, target: f64, k: f64) -> bool {
    (mean - target).abs() <= k * se
}

pub fn run_selftest(seed: u64, par: Parallelism) -> Vec<Check> {
    let mut checks = Vec::new();
    let half = PrecisionContext::new(10).expect("valid width");
    let eps = half.eps();

    for b in [5u32, 8, 10, 23] {
        let ctx = PrecisionContext::new(b).expect("valid width");
        let f = rounding_fuzz(&ctx, 100_000, seed ^ b as u64);
        let rms_ratio = f.rms_binade_err / ctx.eps();
        let ok = f.idempotence_failures == 0
            && f.monotonicity_failures == 0
            && f.exactness_failures == 0
            && f.max_rel_err_over_u <= 1.0
            && (rms_ratio - 1.0).abs() <= 0.05;
        checks.push(Check::new(
            format!("rounding engine b={b}"),
            ok,
            format!(
                "max|err|/(u|x|)={:.4} rms/eps={rms_ratio:.4} failures={}/{}/{}",
                f.max_rel_err_over_u, f.idempotence_failures, f.monotonicity_failures, f.exactness_failures
            ),
        ));
    }

    let pairs = 2_000;
    let orth64 = scalar_product_rms(64, PairKind::Orthogonal, pairs, &half, seed, par);
    let orth1024 = scalar_product_rms(1024, PairKind::Orthogonal, pairs, &half, seed + 1, par);
    let par64 = scalar_product_rms(64, PairKind::Parallel, pairs, &half, seed + 2, par);
    let par1024 = scalar_product_rms(1024, PairKind::Parallel, pairs, &half, seed + 3, par);
    let orth_ratio = orth1024 / orth64;
    let par_ratio = par1024 / par64;
    checks.push(Check::new(
        "scalar product, orthogonal pairs",
        orth_ratio <= 1.8 && orth1024 <= 3.0 * eps && orth64 <= 3.0 * eps,
        format!("rms/eps N=64 {:.3}, N=1024 {:.3}, ratio {orth_ratio:.3}", orth64 / eps, orth1024 / eps),
    ));
    checks.push(Check::new(
        "scalar product, parallel pairs",
        (2.8..=5.7).contains(&par_ratio),
        format!("ratio N=1024/N=64 {par_ratio:.3}"),
    ));

    let trials = 60;
    let b16 = gram_cholesky_errors(16, 16, 10.0, trials, &half, seed, par);
    let b64 = gram_cholesky_errors(64, 64, 10.0, trials, &half, seed + 1, par);
    let (m16, m64) = (b16.mean_backward(), b64.mean_backward());
    let ratio = m64 / m16;
    checks.push(Check::new(
        "cholesky backward error ~ sqrt(N) eps",
        m16 <= 4.0 * 4.0 * eps && m64 <= 4.0 * 8.0 * eps && (1.4..=2.9).contains(&ratio),
        format!(
            "mean/(sqrt(N) eps) N=16 {:.3}, N=64 {:.3}, ratio {ratio:.3}",
            m16 / (4.0 * eps),
            m64 / (8.0 * eps)
        ),
    ));

    let g16 = gram_cholesky_errors(16, 8, 10.0, trials, &half, seed + 2, par);
    let g256 = gram_cholesky_errors(256, 8, 10.0, trials, &half, seed + 3, par);
    let gratio = g256.mean_gram() / g16.mean_gram();
    checks.push(Check::new(
        "gram error ~ sqrt(M) eps",
        (2.8..=5.7).contains(&gratio),
        format!("ratio M=256/M=16 {gratio:.3}"),
    ));

    let mut rng = RngStream::new(seed, 0xb1ce);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = gaussian_matrix(5, 2, &mut rng);
        let b = gaussian_matrix(5, 2, &mut rng);
        let r = binet_cauchy_check(&a, &b).expect("valid shapes");
        worst = worst.max(r.defect / r.scale);
    }
    checks.push(Check::new(
        "Binet-Cauchy identity",
        worst <= 1e-12,
        format!("max defect/scale {worst:.2e}"),
    ));

    let (est, se) = subset_volume_estimate(8, 2, 2_000, seed, par);
    checks.push(Check::new(
        "subset volume average",
        within_sigma(est, se, 1.0, 3.0),
        format!("C(8,2) E V^2 = {est:.4} ± {se:.4}"),
    ));

    let h = haar_first_column_stats(8, 2_000, seed, par);
    let ok = h.abs2.iter().all(|&(m, s)| within_sigma(m, s, 1.0 / 8.0, 3.0))
        && within_sigma(h.re.0, h.re.1, 0.0, 3.0)
        && within_sigma(h.im.0, h.im.1, 0.0, 3.0);
    checks.push(Check::new(
        "Haar first-column marginals",
        ok,
        format!("E|q_11|^2 = {:.4} ± {:.4}", h.abs2[0].0, h.abs2[0].1),
    ));

    let mut worst: f64 = 0.0;
    for n in [8usize, 32, 64] {
        let r = bound_classical_fro(n, 1.0, &half) / bound_cholesky(n, 1.0, &half);
        worst = worst.max((r / ((n as f64 + 1.0) * 3f64.sqrt()) - 1.0).abs());
    }
    checks.push(Check::new(
        "classical / probabilistic backward ratio",
        worst <= 1e-12,
        format!("max relative deviation from (N+1) sqrt(3): {worst:.1e}"),
    ));

    checks
}
