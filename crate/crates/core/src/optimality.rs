//! Optimality machinery: the remainder of the regularized ground state
//! `u^N`, the chain of upper bounds ending in `4 / log N`, and witnesses that
//! a single-site increase of the weight breaks the inequality.

use serde::Serialize;

use crate::error::{Error, Infeasible, Result};
use crate::forms::{self, real_remainder_in};
use crate::numerics::{Ext, Real, SummationMode};
use crate::sequences::{cutoff_in, regularized_ground_state, CutoffSequence, SupportCap};
use crate::weights::{WeightKind, WeightTable};

/// Default lower bound on `epsilon * k` accepted by [`find_witness`]
/// without an explicit level.
pub const DEFAULT_FEASIBILITY_THRESHOLD: f64 = 0.5;

/// Relative agreement required between the two remainder routes.
pub fn route_tolerance(mode: SummationMode) -> f64 {
    match mode {
        SummationMode::Naive => 1e-9,
        SummationMode::Compensated => 1e-12,
        SummationMode::Extended { .. } => 1e-50,
    }
}

/// Labels of the bound chain, in order.
pub const CHAIN_LABELS: [&str; 5] = [
    "remainder",
    "reciprocal_square_bound",
    "harmonic_bound",
    "integral_bound",
    "log_bound",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub level: u64,
    /// `R(u^N)` from the materialized sequence.
    pub remainder: f64,
    /// `R(u^N)` from `(1/log^2 N) sum_{n=N+1}^{N^2} sqrt(n(n-1)) log^2(n/(n-1))`.
    pub closed_form: f64,
    /// `4 / log N`.
    pub bound: f64,
    /// The five chain stages, non-decreasing, first = `remainder`,
    /// last = `bound`.
    pub chain: [f64; 5],
    /// `bound - remainder`.
    pub margin: f64,
    /// Nonzero difference terms, `N^2 - N`.
    pub terms: u64,
    pub mode: SummationMode,
}

impl ProbeResult {
    pub fn within_bound(&self) -> bool {
        self.remainder <= self.bound
    }

    pub fn chain_entries(&self) -> Vec<(&'static str, f64)> {
        CHAIN_LABELS.iter().copied().zip(self.chain).collect()
    }
}

fn sequence_route_ext(level: u64, mode: SummationMode, cap: SupportCap) -> Result<f64> {
    let ctx = mode.ext_ctx()?.expect("extended mode");
    let upper = u128::from(level) * u128::from(level);
    cap.check(&format!("regularized ground state at N = {level}"), upper - 1)?;
    let upper = upper as u64;
    let value = |n: u64| -> Ext {
        if n == 0 {
            Ext::zero(ctx)
        } else {
            cutoff_in::<Ext>(level, n, ctx) * Ext::from_u64(n, ctx).sqrt()
        }
    };
    let mut prev = value(1);
    let triples = (2..=upper).map(move |n| {
        let cur = value(n);
        let t = (n, cur.clone(), prev.clone());
        prev = cur;
        t
    });
    Ok(real_remainder_in::<Ext, _>(triples, mode, ctx)?.to_f64())
}

/// The closed-form remainder and the two summed stages of the chain, plus
/// the termwise lemmas behind them.
fn closed_form_sums<R: Real>(level: u64, mode: SummationMode, ctx: R::Ctx) -> Result<[R; 3]> {
    let upper = level * level;
    let ln_level = R::from_u64(level, ctx).ln();
    let ln_sq = ln_level.square();
    let root_two = R::from_u64(2, ctx).sqrt();
    let mut lemma_failure: Option<String> = None;

    // log^2(n/(n-1)) as ln_1p(1/(n-1))^2.
    let log_term = |n: u64| -> R { (R::one(ctx) / R::from_u64(n - 1, ctx)).ln_1p().square() };
    let geometric = |n: u64| -> R { R::from_u64(n, ctx).sqrt() * R::from_u64(n - 1, ctx).sqrt() };

    let exact = R::reduce(
        (level + 1..=upper).map(|n| geometric(n) * log_term(n)),
        mode,
        ctx,
    )?;
    let reciprocal_square = R::reduce(
        (level + 1..=upper).map(|n| {
            let m = R::from_u64(n - 1, ctx);
            let inv_sq = R::one(ctx) / m.square();
            if lemma_failure.is_none() {
                if log_term(n) > inv_sq {
                    lemma_failure = Some(format!("log^2(n/(n-1)) > 1/(n-1)^2 at n = {n}"));
                } else if geometric(n) > root_two.clone() * m.clone() {
                    lemma_failure = Some(format!("sqrt(n(n-1)) > sqrt(2)(n-1) at n = {n}"));
                }
            }
            geometric(n) * inv_sq
        }),
        mode,
        ctx,
    )?;
    if let Some(msg) = lemma_failure {
        return Err(Error::Assertion(msg));
    }
    let harmonic = R::reduce(
        (level + 1..=upper).map(|n| R::one(ctx) / R::from_u64(n - 1, ctx)),
        mode,
        ctx,
    )?;
    let two = R::from_u64(2, ctx);
    Ok([
        exact / ln_sq.clone(),
        reciprocal_square / ln_sq.clone(),
        two * harmonic / ln_sq,
    ])
}

fn tail_stages<R: Real>(level: u64, ctx: R::Ctx) -> [R; 2] {
    let ln_level = R::from_u64(level, ctx).ln();
    let integral = R::from_u64(2, ctx) * R::from_u64(level + 1, ctx).ln() / ln_level.square();
    [integral, R::from_u64(4, ctx) / ln_level]
}

/// Evaluate `R(u^N)` along both routes, require agreement and fill in the
/// bound chain.
pub fn probe_remainder(level: u64, mode: SummationMode, cap: SupportCap) -> Result<ProbeResult> {
    let xi = CutoffSequence::new(level)?;
    cap.check(&format!("regularized ground state at N = {level}"), xi.upper() - 1)?;

    let (remainder, sums, tail) = match mode.ext_ctx()? {
        None => {
            let u = regularized_ground_state(level, cap)?;
            let r = forms::remainder_form(&u, mode)?;
            (r, closed_form_sums::<f64>(level, mode, ())?, tail_stages::<f64>(level, ()))
        }
        Some(ctx) => {
            let r = sequence_route_ext(level, mode, cap)?;
            let s = closed_form_sums::<Ext>(level, mode, ctx)?.map(|x| x.to_f64());
            let t = tail_stages::<Ext>(level, ctx).map(|x| x.to_f64());
            (r, s, t)
        }
    };
    let [closed_form, reciprocal_square, harmonic] = sums;
    let [integral, bound] = tail;

    let gap = (remainder - closed_form).abs();
    if gap > route_tolerance(mode) * closed_form.abs() {
        return Err(Error::InternalConsistency(format!(
            "remainder routes disagree at N = {level}: sequence {remainder:e}, closed form {closed_form:e}"
        )));
    }

    let chain = [remainder, reciprocal_square, harmonic, integral, bound];
    if let Some(i) = (1..chain.len()).find(|&i| chain[i] < chain[i - 1]) {
        return Err(Error::Assertion(format!(
            "bound chain decreases at N = {level}: {} = {:e} > {} = {:e}",
            CHAIN_LABELS[i - 1],
            chain[i - 1],
            CHAIN_LABELS[i],
            chain[i]
        )));
    }

    Ok(ProbeResult {
        level,
        remainder,
        closed_form,
        bound,
        chain,
        margin: bound - remainder,
        terms: level * level - level,
        mode,
    })
}

/// The chain as `(label, value)` pairs, checked non-decreasing.
pub fn verify_bound_chain(
    level: u64,
    mode: SummationMode,
    cap: SupportCap,
) -> Result<Vec<(&'static str, f64)>> {
    Ok(probe_remainder(level, mode, cap)?.chain_entries())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessResult {
    pub site: u64,
    pub epsilon: f64,
    pub level: u64,
    /// `xi^N_k`; 1 whenever the level was chosen automatically.
    pub cutoff_at_site: f64,
    /// `sum (w_n + epsilon [n = k]) |u^N_n|^2`.
    pub perturbed_weighted: f64,
    pub dirichlet: f64,
    pub remainder: f64,
    /// Directly summed `perturbed_weighted - dirichlet`.
    pub margin: f64,
    /// `epsilon k (xi^N_k)^2 - R(u^N)`.
    pub identity_margin: f64,
    pub mode: SummationMode,
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessOptions {
    /// Use this cutoff level instead of choosing one.
    pub level: Option<u64>,
    pub threshold: f64,
    pub cap: SupportCap,
    pub mode: SummationMode,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            level: None,
            threshold: DEFAULT_FEASIBILITY_THRESHOLD,
            cap: SupportCap::DEFAULT,
            mode: SummationMode::Compensated,
        }
    }
}

/// Smallest `N >= 2` with `4 / log N < strength`, or `None` past `u64`.
pub fn minimum_bound_level(strength: f64) -> Option<u64> {
    let log_min = 4.0 / strength;
    let estimate = log_min.exp();
    if !estimate.is_finite() || estimate >= 1.8e19 {
        return None;
    }
    let mut n = (estimate.floor() as u64).max(2);
    while 4.0 / (n as f64).ln() >= strength {
        n += 1;
    }
    Some(n)
}

fn infeasible(strength: f64, reason: String) -> Error {
    Error::Feasibility(Infeasible {
        strength,
        log_min_level: 4.0 / strength,
        min_level: minimum_bound_level(strength).map(|n| n.max(2)),
        reason,
    })
}

/// Certify that `w + epsilon * delta_k` does not satisfy the inequality by
/// exhibiting `u^N` with `sum w~ |u^N|^2 > D(u^N)`.
pub fn find_witness(site: u64, epsilon: f64, opts: WitnessOptions) -> Result<WitnessResult> {
    let table = WeightTable::new(WeightKind::perturbed(WeightKind::Kpp, site, epsilon)?);
    let strength = epsilon * site as f64;

    let level = match opts.level {
        Some(level) => {
            if level < 2 {
                return Err(Error::Validation(format!("N must be ≥ 2, got {level}")));
            }
            level
        }
        None => {
            if strength < opts.threshold {
                return Err(infeasible(
                    strength,
                    format!(
                        "epsilon * k = {strength} is below the feasibility threshold {}",
                        opts.threshold
                    ),
                ));
            }
            match minimum_bound_level(strength) {
                Some(n) => n.max(site.saturating_add(1)),
                None => return Err(infeasible(strength, "level overflows u64".into())),
            }
        }
    };
    let upper = u128::from(level) * u128::from(level);
    if upper - 1 > u128::from(opts.cap.0) {
        return Err(infeasible(
            strength,
            format!(
                "level N = {level} needs {} entries, support cap is {}",
                upper - 1,
                opts.cap.0
            ),
        ));
    }

    let u = regularized_ground_state(level, opts.cap)?;
    let mode = opts.mode;
    let dirichlet = forms::dirichlet_energy(&u, mode)?;
    let perturbed_weighted = forms::weighted_form(&u, &table, mode)?;
    let remainder = forms::remainder_form(&u, mode)?;
    let cutoff_at_site = CutoffSequence::new(level)?.value(site);
    let margin = perturbed_weighted - dirichlet;
    let identity_margin = strength * cutoff_at_site * cutoff_at_site - remainder;

    let slack = 100.0 * forms::tolerance(mode).max(1e-14) * dirichlet.max(1.0);
    if (margin - identity_margin).abs() > slack {
        return Err(Error::InternalConsistency(format!(
            "witness margins disagree: direct {margin:e}, identity {identity_margin:e}"
        )));
    }
    if margin <= 0.0 {
        return Err(infeasible(
            strength,
            format!("no violation at N = {level}: margin {margin:e}"),
        ));
    }
    Ok(WitnessResult {
        site,
        epsilon,
        level,
        cutoff_at_site,
        perturbed_weighted,
        dirichlet,
        remainder,
        margin,
        identity_margin,
        mode,
    })
}
