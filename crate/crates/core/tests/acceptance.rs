//! Acceptance suite. Every criterion runs and prints one `PASS`/`FAIL`
//! line; the process exits non-zero if any failed.

use std::sync::OnceLock;

use lpls::bounds::{bound_cholesky, bound_classical_fro};
use lpls::ensembles::RngStream;
use lpls::harness::experiments::{
    gaussian_matrix, gram_cholesky_errors, rounding_fuzz, scalar_product_rms, subset_volume_estimate, PairKind,
};
use lpls::harness::stats::log_log_slope;
use lpls::harness::sweep::{run_sweep, to_csv_string, SweepConfig, SweepRecord};
use lpls::matrix::binet_cauchy_check;
use lpls::par::Parallelism;
use lpls::PrecisionContext;

fn report(id: u32, name: &str, passed: bool, detail: String) -> bool {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2}: {name}: {detail}");
    passed
}

fn half() -> PrecisionContext {
    PrecisionContext::new(10).unwrap()
}

fn sweep_config(parallelism: Parallelism) -> SweepConfig {
    SweepConfig {
        rows: 32,
        cols: 32,
        cond_min: 1.0,
        cond_max: 100.0,
        cond_points: 20,
        trials: 200,
        mantissa_bits: 10,
        seed: 42,
        parallelism,
        ..SweepConfig::default()
    }
}

fn reference_sweep() -> &'static (Vec<SweepRecord>, String) {
    static SWEEP: OnceLock<(Vec<SweepRecord>, String)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let recs = run_sweep(&sweep_config(Parallelism::Auto)).unwrap();
        let csv = to_csv_string(&recs).unwrap();
        (recs, csv)
    })
}

fn criterion_01_bound_dominance() -> bool {
    let (recs, _) = reference_sweep();
    let below = recs.iter().filter(|r| r.mean_rel_err <= r.bound_final_cond2).count();
    let worst = recs
        .iter()
        .map(|r| r.mean_rel_err / r.bound_final_cond2)
        .fold(0.0, f64::max);
    report(
        1,
        "mean error below cond2^2 bound",
        recs.len() == 20 && below >= 19,
        format!("{below}/20 points below, max mean/bound {worst:.3}"),
    )
}

fn criterion_02_bound_tightness_and_slope() -> bool {
    let (recs, _) = reference_sweep();
    let mut worst_db: f64 = 0.0;
    let mut tight = true;
    for r in recs.iter().filter(|r| r.cond_target >= 3.0) {
        let db = 10.0 * (r.bound_final / r.mean_rel_err).log10();
        worst_db = worst_db.max(db.abs());
        tight &= db.is_finite() && db.abs() <= 15.0;
    }
    let lo = 10f64.powf(0.5);
    let hi = 10f64.powf(1.5);
    let pts: Vec<(f64, f64)> = recs
        .iter()
        .filter(|r| r.cond_target >= lo * (1.0 - 1e-9) && r.cond_target <= hi * (1.0 + 1e-9))
        .map(|r| (r.cond_target, r.mean_rel_err))
        .collect();
    let slope = log_log_slope(&pts);
    report(
        2,
        "condF bound within 15 dB, cond^2 growth",
        tight && (1.5..=2.5).contains(&slope),
        format!("max |bound/mean| {worst_db:.2} dB, mid-range slope {slope:.3} over {} points", pts.len()),
    )
}

fn criterion_03_classical_gap() -> bool {
    let ctx = half();
    let mut worst: f64 = 0.0;
    for n in [8usize, 32, 64] {
        let ratio = bound_classical_fro(n, 1.0, &ctx) / bound_cholesky(n, 1.0, &ctx);
        let expected = (n as f64 + 1.0) * 3f64.sqrt();
        worst = worst.max((ratio / expected - 1.0).abs());
    }
    report(
        3,
        "classical/probabilistic ratio (N+1) sqrt(3)",
        worst <= 1e-12,
        format!("max relative deviation {worst:.2e}"),
    )
}

fn criterion_04_backward_error_scaling() -> bool {
    let ctx = half();
    let eps = ctx.eps();
    let e16 = gram_cholesky_errors(16, 16, 10.0, 200, &ctx, 4016, Parallelism::Auto);
    let e64 = gram_cholesky_errors(64, 64, 10.0, 200, &ctx, 4064, Parallelism::Auto);
    let (m16, m64) = (e16.mean_backward(), e64.mean_backward());
    let ratio = m64 / m16;
    let ok = m16 <= 4.0 * 4.0 * eps && m64 <= 4.0 * 8.0 * eps && (1.4..=2.9).contains(&ratio);
    report(
        4,
        "cholesky backward error ~ sqrt(N) eps",
        ok,
        format!(
            "mean/(sqrt(N) eps): N=16 {:.3}, N=64 {:.3}; ratio {ratio:.3}; breakdowns {}+{}",
            m16 / (4.0 * eps),
            m64 / (8.0 * eps),
            e16.breakdowns,
            e64.breakdowns
        ),
    )
}

fn criterion_05_gram_error_scaling() -> bool {
    let ctx = half();
    let g16 = gram_cholesky_errors(16, 8, 10.0, 200, &ctx, 5016, Parallelism::Auto);
    let g256 = gram_cholesky_errors(256, 8, 10.0, 200, &ctx, 5256, Parallelism::Auto);
    let ratio = g256.mean_gram() / g16.mean_gram();
    report(
        5,
        "gram error ~ sqrt(M) eps",
        (2.8..=5.7).contains(&ratio),
        format!("ratio M=256/M=16 {ratio:.3}"),
    )
}

fn criterion_06_scalar_product_terms() -> bool {
    let ctx = half();
    let eps = ctx.eps();
    let pairs = 10_000;
    let par = Parallelism::Auto;
    let o64 = scalar_product_rms(64, PairKind::Orthogonal, pairs, &ctx, 6000, par);
    let o1024 = scalar_product_rms(1024, PairKind::Orthogonal, pairs, &ctx, 6001, par);
    let p64 = scalar_product_rms(64, PairKind::Parallel, pairs, &ctx, 6002, par);
    let p1024 = scalar_product_rms(1024, PairKind::Parallel, pairs, &ctx, 6003, par);
    let orth = o1024 / o64;
    let para = p1024 / p64;
    let ok = orth <= 1.8 && o64 <= 3.0 * eps && o1024 <= 3.0 * eps && (2.8..=5.7).contains(&para);
    report(
        6,
        "orthogonal term flat, parallel term ~ sqrt(N)",
        ok,
        format!(
            "orthogonal rms/eps {:.3} -> {:.3} (ratio {orth:.3}); parallel ratio {para:.3}",
            o64 / eps,
            o1024 / eps
        ),
    )
}

fn criterion_07_binet_cauchy_and_subset_volumes() -> bool {
    let mut rng = RngStream::new(7, 0);
    let mut worst: f64 = 0.0;
    for (m, n) in [(5usize, 2usize), (6, 3)] {
        for _ in 0..100 {
            let a = gaussian_matrix(m, n, &mut rng);
            let b = gaussian_matrix(m, n, &mut rng);
            let r = binet_cauchy_check(&a, &b).unwrap();
            worst = worst.max(r.defect / r.scale);
        }
    }
    let (est, se) = subset_volume_estimate(8, 2, 10_000, 77, Parallelism::Auto);
    let z = (est - 1.0) / se;
    report(
        7,
        "Binet-Cauchy identity and subset volume average",
        worst <= 1e-12 && z.abs() <= 3.0,
        format!("max defect/scale {worst:.2e}; C(8,2) E V^2 = {est:.4} +- {se:.4} (z = {z:.2})"),
    )
}

fn criterion_08_rounding_engine() -> bool {
    let mut lines = Vec::new();
    let mut ok = true;
    for b in [5u32, 8, 10, 23] {
        let ctx = PrecisionContext::new(b).unwrap();
        let f = rounding_fuzz(&ctx, 1_000_000, 800 + b as u64);
        let dev = f.rms_binade_err / ctx.eps() - 1.0;
        let pass = f.idempotence_failures == 0
            && f.monotonicity_failures == 0
            && f.exactness_failures == 0
            && f.max_rel_err_over_u <= 1.0
            && dev.abs() <= 0.05;
        ok &= pass;
        lines.push(format!(
            "b={b}: max/u {:.4}, rms/eps {:+.2}%, rms(err/x)/(eps/sqrt2) {:.4}",
            f.max_rel_err_over_u,
            100.0 * dev,
            f.rms_rel_err / (ctx.eps() / 2f64.sqrt())
        ));
    }
    report(8, "rounding engine fuzz", ok, lines.join("; "))
}

fn criterion_09_determinism() -> bool {
    let (_, reference) = reference_sweep();
    let again = to_csv_string(&run_sweep(&sweep_config(Parallelism::Auto)).unwrap()).unwrap();
    let one = to_csv_string(&run_sweep(&sweep_config(Parallelism::Sequential)).unwrap()).unwrap();
    let eight = to_csv_string(&run_sweep(&sweep_config(Parallelism::Threads(8))).unwrap()).unwrap();
    let ok = *reference == again && *reference == one && *reference == eight;
    report(
        9,
        "byte-identical sweep CSV",
        ok,
        format!(
            "{} bytes; repeat {}, 1 worker {}, 8 workers {}",
            reference.len(),
            *reference == again,
            *reference == one,
            *reference == eight
        ),
    )
}

fn criterion_10_precision_constants() -> bool {
    let e10 = PrecisionContext::new(10).unwrap().eps();
    let e23 = PrecisionContext::new(23).unwrap().eps();
    let ok = e10 == 2f64.powi(-11) / 3f64.sqrt() && e23 == 2f64.powi(-24) / 3f64.sqrt();
    report(
        10,
        "eps constants",
        ok,
        format!("eps(10) = {e10:e}, eps(23) = {e23:e}"),
    )
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        criterion_01_bound_dominance,
        criterion_02_bound_tightness_and_slope,
        criterion_03_classical_gap,
        criterion_04_backward_error_scaling,
        criterion_05_gram_error_scaling,
        criterion_06_scalar_product_terms,
        criterion_07_binet_cauchy_and_subset_volumes,
        criterion_08_rounding_engine,
        criterion_09_determinism,
        criterion_10_precision_constants,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
