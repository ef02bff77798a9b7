//! Acceptance run: one PASS/FAIL line per criterion at the pinned
//! tolerances. Runs without the libtest harness so the report is the output.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use hardylab::forms::{
    identity_report, pointwise_identity_residual, pointwise_identity_scale,
};
use hardylab::numerics::{Ext, ExtCtx, Real, SummationMode};
use hardylab::optimality::{find_witness, probe_remainder, route_tolerance, WitnessOptions};
use hardylab::sequences::{Builtin, Sequence, SupportCap};
use hardylab::spectral::{
    build_form, factorization_residual, smallest_eigenvalue, DEFAULT_EIGEN_TOL,
};
use hardylab::weights::{
    kpp_weight, telescoping_residual, weight_gap, weight_gap_in, WeightKind, WeightTable,
};
use hardylab::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fail(detail: impl Into<String>) -> Outcome {
    outcome(false, detail.into())
}

/// Split `1..=last` across the available cores and collect per-chunk
/// results.
fn par_chunks<T: Send>(last: u64, f: impl Fn(u64, u64) -> T + Sync) -> Vec<T> {
    let workers = thread::available_parallelism().map_or(4, |n| n.get()) as u64;
    let chunk = last.div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                let lo = i * chunk + 1;
                let hi = ((i + 1) * chunk).min(last);
                let f = &f;
                s.spawn(move || f(lo, hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Support of log-uniform size in 1..=10^4 laid out as runs separated by
/// gaps; entries have log-uniform magnitude in [1e-6, 1e6] and random phase.
fn random_sequence(rng: &mut ChaCha8Rng) -> Sequence {
    let size = log_uniform(rng, 1.0, 10_001.0).floor() as usize;
    let mut n: u64 = rng.gen_range(1..=50_000);
    let mut pairs = Vec::with_capacity(size);
    for _ in 0..size {
        let r = log_uniform(rng, 1e-6, 1e6);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        pairs.push((n, Complex64::from_polar(r, phase)));
        n += if rng.gen_bool(0.8) { 1 } else { rng.gen_range(2..200) };
    }
    Sequence::from_pairs(pairs).unwrap()
}

fn identity_suite() -> Outcome {
    const COUNT: u64 = 1000;
    let modes = [SummationMode::Compensated, SummationMode::default_extended()];
    let results = par_chunks(COUNT, |lo, hi| {
        let mut worst = [0.0f64; 2];
        for seed in lo..=hi {
            let u = random_sequence(&mut ChaCha8Rng::seed_from_u64(seed));
            for (slot, mode) in modes.iter().enumerate() {
                match identity_report(&u, *mode) {
                    Ok(r) => {
                        let rel = r.residual.abs() / r.dirichlet.max(1.0);
                        worst[slot] = worst[slot].max(rel);
                    }
                    Err(e) => return Err(format!("seed {seed}, {mode}: {e}")),
                }
            }
        }
        Ok(worst)
    });
    let mut worst = [0.0f64; 2];
    for r in results {
        match r {
            Ok(w) => {
                worst[0] = worst[0].max(w[0]);
                worst[1] = worst[1].max(w[1]);
            }
            Err(e) => return fail(e),
        }
    }
    outcome(
        worst[0] <= 1e-12 && worst[1] <= 1e-60,
        format!(
            "{COUNT} sequences, max |D-W-R|/max(D,1): compensated {:.2e} (≤ 1e-12), extended(256) {:.2e} (≤ 1e-60)",
            worst[0], worst[1]
        ),
    )
}

fn exact_case() -> Outcome {
    let u = Builtin::Unit(1).build(SupportCap::DEFAULT).unwrap();
    let r = match identity_report(&u, SummationMode::Compensated) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let sqrt2 = 2f64.sqrt();
    let ulp = |x: f64| x.abs() * f64::EPSILON;
    let pass = r.dirichlet == 2.0
        && (r.weighted - (2.0 - sqrt2)).abs() <= ulp(2.0 - sqrt2)
        && (r.remainder - sqrt2).abs() <= ulp(sqrt2)
        && r.residual.abs() <= 4.0 * ulp(2.0);
    outcome(
        pass,
        format!(
            "e1: D = {}, W = {}, R = {}, residual {:e} (≤ 4 ulp)",
            r.dirichlet, r.weighted, r.remainder, r.residual
        ),
    )
}

fn strict_improvement() -> Outcome {
    const LAST: u64 = 1_000_000;
    let bad: Vec<u64> = par_chunks(LAST, |lo, hi| {
        (lo..=hi).filter(|&n| !matches!(weight_gap(n), Ok(g) if g > 0.0)).collect::<Vec<_>>()
    })
    .concat();
    if let Some(n) = bad.first() {
        return fail(format!("gap not positive at n = {n} ({} indices)", bad.len()));
    }
    let scaled = |n: u64| weight_gap(n).unwrap() * (n as f64).powi(4);
    let ctx = ExtCtx::new(256).unwrap();
    let limit_check: Vec<(u64, f64)> = [10_000u64, 100_000]
        .iter()
        .map(|&n| {
            let g = weight_gap_in::<Ext>(n, ctx);
            let n4 = Ext::from_u64(n, ctx).square().square();
            (n, (g * n4).to_f64())
        })
        .collect();
    // n^4 gap = 5/64 + O(1/n^2): the extended values must close in on it.
    let converges = limit_check
        .iter()
        .all(|&(n, v)| (v - 0.078125).abs() <= 1.0 / (n as f64).powi(2));
    let at_1000 = scaled(1000);
    outcome(
        converges && (at_1000 - 0.078125).abs() <= 1e-6,
        format!(
            "gap > 0 on 1..=10^6; n^4 gap: {at_1000:.12} at 10^3, {:.14} at 10^4, {:.16} at 10^5 (→ 5/64)",
            limit_check[0].1, limit_check[1].1
        ),
    )
}

fn telescoping() -> Outcome {
    const LAST: u64 = 1_000_000;
    let worst = par_chunks(LAST, |lo, hi| {
        let mut worst = (0.0f64, 0u64);
        for n in lo..=hi {
            let ratio = telescoping_residual(n).unwrap().abs() / kpp_weight(n).unwrap();
            if ratio > worst.0 {
                worst = (ratio, n);
            }
        }
        worst
    })
    .into_iter()
    .fold((0.0f64, 0u64), |a, b| if b.0 > a.0 { b } else { a });
    let in_ulp = worst.0 / f64::EPSILON;
    outcome(
        in_ulp <= 4.0,
        format!(
            "max |w_n - (h_n - h_(n+1))/sqrt(n)| / w_n = {in_ulp:.3} ulp at n = {} (≤ 4)",
            worst.1
        ),
    )
}

fn probe_bound() -> Outcome {
    let levels = [2u64, 3, 4, 8, 16, 32, 64, 128, 256, 512, 1024];
    let mut worst_route = 0.0f64;
    for &level in &levels {
        let p = match probe_remainder(level, SummationMode::Compensated, SupportCap::DEFAULT) {
            Ok(p) => p,
            Err(e) => return fail(format!("N = {level}: {e}")),
        };
        if !p.within_bound() {
            return fail(format!("N = {level}: remainder {} > bound {}", p.remainder, p.bound));
        }
        if !p.chain.windows(2).all(|w| w[0] <= w[1]) {
            return fail(format!("N = {level}: chain {:?} decreases", p.chain));
        }
        let route = (p.remainder - p.closed_form).abs() / p.closed_form.abs();
        worst_route = worst_route.max(route);
    }
    let at_1024 = probe_remainder(1024, SummationMode::Compensated, SupportCap::DEFAULT).unwrap();
    outcome(
        worst_route <= route_tolerance(SummationMode::Compensated),
        format!(
            "{} levels within 4/log N, chains non-decreasing, route gap {worst_route:.2e} (≤ 1e-12); R(u^1024) = {:.6}",
            levels.len(),
            at_1024.remainder
        ),
    )
}

fn witness() -> Outcome {
    let w = match find_witness(100, 0.02, WitnessOptions::default()) {
        Ok(w) => w,
        Err(e) => return fail(e.to_string()),
    };
    let agreement = (w.margin - w.identity_margin).abs();
    let infeasible = match find_witness(1, 0.001, WitnessOptions::default()) {
        Err(Error::Feasibility(info)) => Some(info),
        _ => None,
    };
    let report_ok = infeasible
        .as_ref()
        .is_some_and(|i| (i.log_min_level - 4000.0).abs() < 1e-9 && i.min_level.is_none());
    outcome(
        w.level == 101 && w.margin > 0.0 && agreement <= 1e-10 && report_ok,
        format!(
            "k=100, ε=0.02: N = {}, margin {:.6}, |direct - identity| = {agreement:.1e}; k=1, ε=0.001 infeasible, log N_min = {}",
            w.level,
            w.margin,
            infeasible.map_or(f64::NAN, |i| i.log_min_level)
        ),
    )
}

fn spectral_oracle() -> Outcome {
    let kpp = build_form(2000, &WeightTable::kpp()).unwrap();
    let lam = smallest_eigenvalue(&kpp, DEFAULT_EIGEN_TOL).unwrap();
    let mut worst = 0.0f64;
    for size in [1usize, 2, 3, 10, 100, 1000, 2000] {
        match factorization_residual(size) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return fail(format!("M = {size}: {e}")),
        }
    }
    let perturbed = WeightTable::new(WeightKind::perturbed(WeightKind::Kpp, 100, 0.02).unwrap());
    let form = build_form(20_000, &perturbed).unwrap();
    let lam_perturbed = smallest_eigenvalue(&form, DEFAULT_EIGEN_TOL).unwrap();
    outcome(
        lam >= -1e-10 && lam_perturbed < 0.0,
        format!(
            "λ_min(M=2000) = {lam:.6e} (≥ -1e-10), factorization residual ≤ {worst:.1e}, perturbed λ_min(M=20000) = {lam_perturbed:.6e} (< 0)"
        ),
    )
}

fn pointwise() -> Outcome {
    const COUNT: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for i in 0..COUNT {
        // Every tenth triple sits at n = 1, where u_{n-1} must be ignored.
        let n = if i % 10 == 0 { 1 } else { log_uniform(&mut rng, 2.0, 1e9) as u64 };
        let draw = |rng: &mut ChaCha8Rng| {
            Complex64::from_polar(
                log_uniform(rng, 1e-6, 1e6),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        };
        let u_n = draw(&mut rng);
        let u_prev = draw(&mut rng);
        let residual = pointwise_identity_residual(n, u_n, u_prev).unwrap();
        let scale = pointwise_identity_scale(n, u_n, u_prev);
        worst = worst.max(residual.abs() / scale);
    }
    let in_ulp = worst / f64::EPSILON;
    outcome(
        in_ulp <= 8.0,
        format!("{COUNT} triples, max residual {in_ulp:.3} ulp of |u_n|^2 + |u_(n-1)|^2 (≤ 8)"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("identity suite", identity_suite, Duration::from_secs(60)),
        ("exact case e1", exact_case, Duration::from_secs(1)),
        ("strict improvement", strict_improvement, Duration::from_secs(120)),
        ("telescoping", telescoping, Duration::from_secs(60)),
        ("probe bound", probe_bound, Duration::from_secs(60)),
        ("witness", witness, Duration::from_secs(30)),
        ("spectral oracle", spectral_oracle, Duration::from_secs(120)),
        ("pointwise identity", pointwise, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= *budget;
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{}] {name}: {} [{:.2}s of {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
