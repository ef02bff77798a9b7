//! The three quadratic forms and the identities tying them together:
//! Dirichlet energy `D(u) = sum |u_n - u_{n-1}|^2`, weighted form
//! `W(u) = sum w_n |u_n|^2` and remainder
//! `R(u) = sum_{n>=2} |a_n u_n - b_n u_{n-1}|^2` with
//! `a_n = ((n-1)/n)^(1/4)`, `b_n = (n/(n-1))^(1/4)`, satisfying `D = W + R`.
//!
//! All sums run in ascending index order and include the trailing
//! difference term one past the support.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fourth_root_ratio_in, Ext, ExtCtx, Real, SummationMode};
use crate::sequences::Sequence;
use crate::weights::{self, WeightKind, WeightTable};

/// Relative tolerance of `D - W - R` against `max(D, 1)`.
pub fn tolerance(mode: SummationMode) -> f64 {
    match mode {
        SummationMode::Naive => 1e-10,
        SummationMode::Compensated => 1e-12,
        SummationMode::Extended { .. } => 1e-60,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormReport {
    pub dirichlet: f64,
    pub weighted: f64,
    pub remainder: f64,
    /// `D - W - R`, formed in the working precision before rounding.
    pub residual: f64,
    /// Absolute bound the residual was held to.
    pub tolerance: f64,
    pub mode: SummationMode,
    pub support_size: usize,
}

impl FormReport {
    pub fn passes(&self) -> bool {
        self.residual.abs() <= self.tolerance
    }
}

/// `a_n = ((n-1)/n)^(1/4)` and `b_n = (n/(n-1))^(1/4)` for `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderCoefficients {
    pub a: f64,
    pub b: f64,
}

impl RemainderCoefficients {
    pub fn at(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation(format!(
                "remainder coefficients start at n = 2, got {n}"
            )));
        }
        let (a, b) = remainder_coefficients_in::<f64>(n, ());
        Ok(Self { a, b })
    }
}

pub fn remainder_coefficients_in<R: Real>(n: u64, ctx: R::Ctx) -> (R, R) {
    (
        fourth_root_ratio_in::<R>(n - 1, n, ctx),
        fourth_root_ratio_in::<R>(n, n - 1, ctx),
    )
}

/// Scalars the form kernels run on. Extended coefficients are memoized per
/// thread since they dominate the cost of an extended evaluation.
trait FormScalar: Real {
    fn coefficients(n: u64, ctx: Self::Ctx) -> (Self, Self);
    fn kpp(n: u64, ctx: Self::Ctx) -> Self;
}

impl FormScalar for f64 {
    fn coefficients(n: u64, _: ()) -> (f64, f64) {
        remainder_coefficients_in::<f64>(n, ())
    }

    fn kpp(n: u64, _: ()) -> f64 {
        weights::kpp_weight_stable(n)
    }
}

const EXT_MEMO_LIMIT: u64 = 1 << 17;

#[derive(Default)]
struct ExtMemo {
    bits: u32,
    coefficients: Vec<Option<(Ext, Ext)>>,
    kpp: Vec<Option<Ext>>,
}

impl ExtMemo {
    fn reset_for(&mut self, bits: u32) {
        if self.bits != bits {
            *self = ExtMemo {
                bits,
                ..ExtMemo::default()
            };
        }
    }
}

thread_local! {
    static EXT_MEMO: RefCell<ExtMemo> = RefCell::new(ExtMemo::default());
}

fn memoized<T: Clone>(
    n: u64,
    ctx: ExtCtx,
    slot: impl Fn(&mut ExtMemo) -> &mut Vec<Option<T>>,
    compute: impl Fn() -> T,
) -> T {
    if n >= EXT_MEMO_LIMIT {
        return compute();
    }
    EXT_MEMO.with(|memo| {
        let mut memo = memo.borrow_mut();
        memo.reset_for(ctx.bits());
        let table = slot(&mut memo);
        let i = n as usize;
        if table.len() <= i {
            table.resize(i + 1, None);
        }
        table[i].get_or_insert_with(compute).clone()
    })
}

impl FormScalar for Ext {
    fn coefficients(n: u64, ctx: ExtCtx) -> (Ext, Ext) {
        memoized(
            n,
            ctx,
            |m| &mut m.coefficients,
            || remainder_coefficients_in::<Ext>(n, ctx),
        )
    }

    fn kpp(n: u64, ctx: ExtCtx) -> Ext {
        memoized(
            n,
            ctx,
            |m| &mut m.kpp,
            || weights::kpp_weight_literal_in::<Ext>(n, ctx),
        )
    }
}

fn abs_sq<R: Real>(z: Complex64, ctx: R::Ctx) -> R {
    R::lift(z.re, ctx).square() + R::lift(z.im, ctx).square()
}

fn diff_sq<R: Real>(x: Complex64, y: Complex64, ctx: R::Ctx) -> R {
    let re = R::lift(x.re, ctx) - R::lift(y.re, ctx);
    let im = R::lift(x.im, ctx) - R::lift(y.im, ctx);
    re.square() + im.square()
}

/// `|a x - b y|^2` for complex `x`, `y` given as `f64` parts.
fn combination_sq<R: Real>(a: &R, x: Complex64, b: &R, y: Complex64, ctx: R::Ctx) -> R {
    let re = a.clone() * R::lift(x.re, ctx) - b.clone() * R::lift(y.re, ctx);
    let im = a.clone() * R::lift(x.im, ctx) - b.clone() * R::lift(y.im, ctx);
    re.square() + im.square()
}

fn weight_of<R: FormScalar>(kind: &WeightKind, n: u64, ctx: R::Ctx) -> R {
    match kind {
        WeightKind::Kpp => R::kpp(n, ctx),
        WeightKind::Classical => weights::classical_weight_in::<R>(n, ctx),
        WeightKind::Perturbed {
            base,
            site,
            epsilon,
        } => {
            let b = weight_of::<R>(base, n, ctx);
            if n == *site {
                b + R::lift(*epsilon, ctx)
            } else {
                b
            }
        }
    }
}

fn dirichlet_in<R: FormScalar>(u: &Sequence, mode: SummationMode, ctx: R::Ctx) -> Result<R> {
    R::reduce(
        u.adjacent().map(|t| diff_sq::<R>(t.current, t.previous, ctx)),
        mode,
        ctx,
    )
}

fn weighted_in<R: FormScalar>(
    u: &Sequence,
    kind: &WeightKind,
    mode: SummationMode,
    ctx: R::Ctx,
) -> Result<R> {
    R::reduce(
        u.iter().map(|(n, z)| weight_of::<R>(kind, n, ctx) * abs_sq::<R>(z, ctx)),
        mode,
        ctx,
    )
}

fn remainder_in<R: FormScalar>(u: &Sequence, mode: SummationMode, ctx: R::Ctx) -> Result<R> {
    R::reduce(
        u.adjacent().filter(|t| t.n >= 2).map(|t| {
            let (a, b) = R::coefficients(t.n, ctx);
            combination_sq::<R>(&a, t.current, &b, t.previous, ctx)
        }),
        mode,
        ctx,
    )
}

/// `sum_{n>=2} (a_n x_n - b_n x_{n-1})^2` for a real sequence handed over
/// as ascending `(n, x_n, x_{n-1})` triples in the backend itself.
pub(crate) fn real_remainder_in<R: Real, I>(triples: I, mode: SummationMode, ctx: R::Ctx) -> Result<R>
where
    I: IntoIterator<Item = (u64, R, R)>,
{
    R::reduce(
        triples.into_iter().filter(|t| t.0 >= 2).map(|(n, x, y)| {
            let (a, b) = remainder_coefficients_in::<R>(n, ctx);
            (a * x - b * y).square()
        }),
        mode,
        ctx,
    )
}

fn sbp_in<R: FormScalar>(u: &Sequence, mode: SummationMode, ctx: R::Ctx) -> Result<R> {
    R::reduce(
        u.adjacent().map(|t| {
            let h = weights::h_in::<R>(t.n, ctx);
            let mut inner = abs_sq::<R>(t.current, ctx) / R::from_u64(t.n, ctx).sqrt();
            if t.n > 1 {
                inner = inner - abs_sq::<R>(t.previous, ctx) / R::from_u64(t.n - 1, ctx).sqrt();
            }
            h * inner
        }),
        mode,
        ctx,
    )
}

macro_rules! in_backend {
    ($mode:expr, |$r:ident, $ctx:ident| $body:expr) => {{
        let mode: SummationMode = $mode;
        match mode.ext_ctx()? {
            None => {
                type $r = f64;
                let $ctx = ();
                let v: f64 = $body?;
                Ok(v)
            }
            Some(ext) => {
                type $r = Ext;
                let $ctx = ext;
                let v: Ext = $body?;
                Ok(v.to_f64())
            }
        }
    }};
}

/// `D(u) = sum_{n=1}^{max+1} |u_n - u_{n-1}|^2`.
pub fn dirichlet_energy(u: &Sequence, mode: SummationMode) -> Result<f64> {
    in_backend!(mode, |S, ctx| dirichlet_in::<S>(u, mode, ctx))
}

/// `W(u) = sum_n w(n) |u_n|^2` over the support.
pub fn weighted_form(u: &Sequence, table: &WeightTable, mode: SummationMode) -> Result<f64> {
    in_backend!(mode, |S, ctx| weighted_in::<S>(u, table.kind(), mode, ctx))
}

/// `R(u) = sum_{n=2}^{max+1} |a_n u_n - b_n u_{n-1}|^2`.
pub fn remainder_form(u: &Sequence, mode: SummationMode) -> Result<f64> {
    in_backend!(mode, |S, ctx| remainder_in::<S>(u, mode, ctx))
}

fn report_in<R: FormScalar>(u: &Sequence, mode: SummationMode, ctx: R::Ctx) -> Result<FormReport> {
    let d = dirichlet_in::<R>(u, mode, ctx)?;
    let w = weighted_in::<R>(u, &WeightKind::Kpp, mode, ctx)?;
    let r = remainder_in::<R>(u, mode, ctx)?;
    let residual = (d.clone() - w.clone() - r.clone()).to_f64();
    let dirichlet = d.to_f64();
    Ok(FormReport {
        dirichlet,
        weighted: w.to_f64(),
        remainder: r.to_f64(),
        residual,
        tolerance: tolerance(mode) * dirichlet.max(1.0),
        mode,
        support_size: u.support_size(),
    })
}

/// Evaluate `D`, `W` (improved weight) and `R` and check `D = W + R`.
/// A residual beyond tolerance is an implementation defect and is returned
/// as [`Error::IdentityViolation`].
pub fn identity_report(u: &Sequence, mode: SummationMode) -> Result<FormReport> {
    let report = match mode.ext_ctx()? {
        None => report_in::<f64>(u, mode, ())?,
        Some(ctx) => report_in::<Ext>(u, mode, ctx)?,
    };
    if report.passes() {
        Ok(report)
    } else {
        Err(Error::IdentityViolation(Box::new(report)))
    }
}

/// Residual of the per-index identity
/// `|c_n u_n - d_n u_{n-1}|^2 + h_n (|u_n|^2/sqrt n - |u_{n-1}|^2/sqrt(n-1)) = |u_n - u_{n-1}|^2`
/// with `c_n = sqrt(1 - h_n/sqrt n)`, `d_n = sqrt(1 + h_n/sqrt(n-1))`. At
/// `n = 1` every `u_{n-1}` term is zero and `u_prev` is ignored.
pub fn pointwise_identity_residual(n: u64, u_n: Complex64, u_prev: Complex64) -> Result<f64> {
    let h = weights::h(n)?;
    let root = (n as f64).sqrt();
    let c = (1.0 - h / root).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let (d, prev, prev_part) = if n == 1 {
        (0.0, zero, 0.0)
    } else {
        let root_prev = ((n - 1) as f64).sqrt();
        (
            (1.0 + h / root_prev).sqrt(),
            u_prev,
            u_prev.norm_sqr() / root_prev,
        )
    };
    let square = combination_sq::<f64>(&c, u_n, &d, prev, ());
    let telescoped = h * (u_n.norm_sqr() / root - prev_part);
    let energy = diff_sq::<f64>(u_n, prev, ());
    Ok(square + telescoped - energy)
}

/// Magnitude the pointwise residual is measured against:
/// `|u_n|^2 + |u_{n-1}|^2` (only `|u_1|^2` at `n = 1`).
pub fn pointwise_identity_scale(n: u64, u_n: Complex64, u_prev: Complex64) -> f64 {
    if n == 1 {
        u_n.norm_sqr()
    } else {
        u_n.norm_sqr() + u_prev.norm_sqr()
    }
}

/// `W(u) - sum_n h_n (|u_n|^2/sqrt n - |u_{n-1}|^2/sqrt(n-1))`.
pub fn summation_by_parts_residual(u: &Sequence, mode: SummationMode) -> Result<f64> {
    in_backend!(mode, |S, ctx| {
        let w = weighted_in::<S>(u, &WeightKind::Kpp, mode, ctx)?;
        let telescoped = sbp_in::<S>(u, mode, ctx)?;
        Ok::<_, Error>(w - telescoped)
    })
}

/// `D(u) / W(u)`; the inequality is the statement that this is `>= 1` for
/// the improved weight.
pub fn hardy_quotient(u: &Sequence, table: &WeightTable, mode: SummationMode) -> Result<f64> {
    if u.is_zero() {
        return Err(Error::Validation(
            "Hardy quotient is undefined for the zero sequence".into(),
        ));
    }
    in_backend!(mode, |S, ctx| {
        let d = dirichlet_in::<S>(u, mode, ctx)?;
        let w = weighted_in::<S>(u, table.kind(), mode, ctx)?;
        Ok::<_, Error>(d / w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ulp_of, DEFAULT_EXTENDED_BITS};
    use crate::sequences::{regularized_ground_state, SupportCap};

    // mpmath, 300 bits.
    const W_11: f64 = 0.653_934_785_048_768_4;
    const R_11: f64 = 1.346_065_214_951_231_6;

    const MODES: [SummationMode; 3] = [
        SummationMode::Naive,
        SummationMode::Compensated,
        SummationMode::Extended {
            precision_bits: DEFAULT_EXTENDED_BITS,
        },
    ];

    fn near(a: f64, b: f64, ulps: f64) -> bool {
        (a - b).abs() <= ulps * ulp_of(b)
    }

    fn e1() -> Sequence {
        Sequence::unit(1).unwrap()
    }

    fn pair() -> Sequence {
        Sequence::from_real([(1, 1.0), (2, 1.0)]).unwrap()
    }

    #[test]
    fn dirichlet_examples() {
        for mode in MODES {
            assert_eq!(dirichlet_energy(&e1(), mode).unwrap(), 2.0);
            assert_eq!(dirichlet_energy(&pair(), mode).unwrap(), 2.0);
            assert_eq!(dirichlet_energy(&Sequence::zero(), mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn weighted_examples() {
        let kpp = WeightTable::kpp();
        for mode in MODES {
            assert!(near(weighted_form(&e1(), &kpp, mode).unwrap(), 2.0 - 2f64.sqrt(), 4.0));
            assert_eq!(weighted_form(&e1(), &WeightTable::classical(), mode).unwrap(), 0.25);
            assert!(near(weighted_form(&pair(), &kpp, mode).unwrap(), W_11, 4.0));
        }
    }

    #[test]
    fn remainder_examples() {
        for mode in MODES {
            assert!(near(remainder_form(&e1(), mode).unwrap(), 2f64.sqrt(), 4.0));
            assert!(near(remainder_form(&pair(), mode).unwrap(), R_11, 4.0));
        }
        // sqrt(n) on 1..=M: only the trailing term at M + 1 survives,
        // |b_{M+1} sqrt(M)|^2 = sqrt(M (M + 1)).
        let m = 50u64;
        let u = Sequence::from_real((1..=m).map(|n| (n, (n as f64).sqrt()))).unwrap();
        let r = remainder_form(&u, SummationMode::Compensated).unwrap();
        let tail = ((m * (m + 1)) as f64).sqrt();
        assert!((r - tail).abs() < 1e-12 * tail, "{r} vs {tail}");
    }

    #[test]
    fn ground_state_annihilates_interior_terms() {
        for n in [2u64, 3, 10, 1000, 1_000_000] {
            let RemainderCoefficients { a, b } = RemainderCoefficients::at(n).unwrap();
            let term = a * (n as f64).sqrt() - b * ((n - 1) as f64).sqrt();
            let scale = ((n * (n - 1)) as f64).sqrt().sqrt();
            assert!(term.abs() <= 8.0 * ulp_of(scale), "n = {n}: {term:e}");
        }
        assert!(RemainderCoefficients::at(1).is_err());
    }

    #[test]
    fn coefficient_algebra() {
        for n in 2..2000u64 {
            let RemainderCoefficients { a, b } = RemainderCoefficients::at(n).unwrap();
            assert!((a * b - 1.0).abs() <= 2.0 * f64::EPSILON, "n = {n}");
            let next = RemainderCoefficients::at(n + 1).unwrap();
            let diag = a * a + next.b * next.b;
            let w = weights::kpp_weight(n).unwrap();
            assert!((diag - (2.0 - w)).abs() <= 8.0 * ulp_of(2.0), "n = {n}");
        }
    }

    #[test]
    fn identity_examples() {
        for mode in MODES {
            let rep = identity_report(&e1(), mode).unwrap();
            assert_eq!(rep.dirichlet, 2.0);
            assert!(rep.residual.abs() <= 4.0 * ulp_of(2.0));
            let rep = identity_report(&pair(), mode).unwrap();
            assert!(rep.residual.abs() <= 1e-12);
            assert!(near(rep.weighted, W_11, 4.0));
            assert!(near(rep.remainder, R_11, 4.0));
            assert_eq!(rep.support_size, 2);
        }
        let ext = identity_report(&pair(), SummationMode::default_extended()).unwrap();
        assert!(ext.residual.abs() <= 1e-60);
    }

    #[test]
    fn identity_violation_is_an_error() {
        let rep = FormReport {
            dirichlet: 1.0,
            weighted: 0.5,
            remainder: 0.1,
            residual: 0.4,
            tolerance: 1e-12,
            mode: SummationMode::Compensated,
            support_size: 1,
        };
        let msg = Error::IdentityViolation(Box::new(rep)).to_string();
        assert!(msg.contains("identity violated"));
    }

    #[test]
    fn pointwise_examples() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(pointwise_identity_residual(1, one, Complex64::new(7.0, 3.0)).unwrap(), 0.0);
        let cases = [
            (2, one, one),
            (5, Complex64::new(2.0, 1.0), Complex64::new(-1.0, 0.0)),
            (999_999, Complex64::new(1e3, -2e-3), Complex64::new(0.5, 1e2)),
        ];
        for (n, x, y) in cases {
            let r = pointwise_identity_residual(n, x, y).unwrap();
            let scale = pointwise_identity_scale(n, x, y);
            assert!(r.abs() <= 8.0 * f64::EPSILON * scale, "n = {n}: {r:e}");
        }
        assert!(pointwise_identity_residual(0, one, one).is_err());
    }

    #[test]
    fn summation_by_parts_examples() {
        for mode in MODES {
            assert!(summation_by_parts_residual(&e1(), mode).unwrap().abs() <= 1e-15);
            assert!(summation_by_parts_residual(&pair(), mode).unwrap().abs() <= 1e-15);
        }
        let ext = summation_by_parts_residual(&pair(), SummationMode::default_extended()).unwrap();
        assert!(ext.abs() <= 1e-60);
    }

    #[test]
    fn quotient_examples() {
        let mode = SummationMode::Compensated;
        let q = hardy_quotient(&e1(), &WeightTable::kpp(), mode).unwrap();
        assert!(near(q, 2.0 + 2f64.sqrt(), 8.0));
        assert_eq!(hardy_quotient(&e1(), &WeightTable::classical(), mode).unwrap(), 8.0);
        assert!(matches!(
            hardy_quotient(&Sequence::zero(), &WeightTable::kpp(), mode),
            Err(Error::Validation(_))
        ));
        let probe = regularized_ground_state(64, SupportCap::DEFAULT).unwrap();
        let q = hardy_quotient(&probe, &WeightTable::kpp(), mode).unwrap();
        let rep = identity_report(&probe, mode).unwrap();
        assert!(q > 1.0);
        assert!((q - (1.0 + rep.remainder / rep.weighted)).abs() < 1e-12);
    }

    #[test]
    fn extended_memo_is_precision_aware() {
        let u = pair();
        let a = remainder_form(&u, SummationMode::Extended { precision_bits: 128 }).unwrap();
        let b = remainder_form(&u, SummationMode::Extended { precision_bits: 512 }).unwrap();
        let c = remainder_form(&u, SummationMode::Extended { precision_bits: 128 }).unwrap();
        assert_eq!(a, c);
        assert!(near(a, b, 1.0));
    }
}
