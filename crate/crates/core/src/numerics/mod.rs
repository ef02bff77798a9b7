//! Scalar and reduction kernels shared by every other module.
//!
//! Two arithmetic backends implement [`Real`]: plain `f64` and the
//! software-emulated [`Ext`] with a configurable significand width. Generic
//! kernels are written once against [`Real`]; reductions of `f64` terms go
//! through [`Accumulator`] so the summation policy is selected by
//! [`SummationMode`].

mod extended;
mod real;
mod summation;

pub use extended::{Ext, ExtCtx, MAX_EXTENDED_BITS, MIN_EXTENDED_BITS};
pub use real::Real;
pub use summation::{sum, sum_iter, Accumulator, SummationMode, DEFAULT_EXTENDED_BITS};

/// `sqrt(p / q)` evaluated as `sqrt(p) / sqrt(q)`.
pub fn sqrt_ratio(p: u64, q: u64) -> f64 {
    assert!(q >= 1, "sqrt_ratio: denominator must be positive");
    sqrt_ratio_in::<f64>(p, q, ())
}

/// `(p / q)^(1/4)` as the square root of [`sqrt_ratio`].
pub fn fourth_root_ratio(p: u64, q: u64) -> f64 {
    assert!(p >= 1 && q >= 1, "fourth_root_ratio: arguments must be positive");
    fourth_root_ratio_in::<f64>(p, q, ())
}

pub fn sqrt_ratio_in<R: Real>(p: u64, q: u64, ctx: R::Ctx) -> R {
    R::from_u64(p, ctx).sqrt() / R::from_u64(q, ctx).sqrt()
}

pub fn fourth_root_ratio_in<R: Real>(p: u64, q: u64, ctx: R::Ctx) -> R {
    sqrt_ratio_in::<R>(p, q, ctx).sqrt()
}

/// Relative spacing of `f64` values: `|x| * EPSILON`, floored at the
/// smallest normal so that zero has a usable tolerance.
pub fn ulp_of(x: f64) -> f64 {
    (x.abs() * f64::EPSILON).max(f64::MIN_POSITIVE)
}
