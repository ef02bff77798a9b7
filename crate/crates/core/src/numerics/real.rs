use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{sum_iter, SummationMode};
use crate::error::Result;

/// Arithmetic backend for the generic kernels.
///
/// `Ctx` carries whatever a backend needs to materialize constants: nothing
/// for `f64`, the significand width for [`super::Ext`].
pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Copy + Debug;

    /// Exact conversion of a finite `f64` (rounded only if the backend is
    /// narrower than 53 bits, which none are).
    fn lift(x: f64, ctx: Self::Ctx) -> Self;
    fn from_u64(n: u64, ctx: Self::Ctx) -> Self;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn ln_1p(&self) -> Self;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;

    /// Sum `terms` in order. `f64` honours the summation policy; wider
    /// backends add directly in their own precision.
    fn reduce<I: IntoIterator<Item = Self>>(
        terms: I,
        mode: SummationMode,
        ctx: Self::Ctx,
    ) -> Result<Self>;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_u64(0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_u64(1, ctx)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Real for f64 {
    type Ctx = ();

    #[inline]
    fn lift(x: f64, _: ()) -> Self {
        x
    }

    #[inline]
    fn from_u64(n: u64, _: ()) -> Self {
        n as f64
    }

    #[inline]
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    #[inline]
    fn ln(&self) -> Self {
        f64::ln(*self)
    }

    #[inline]
    fn ln_1p(&self) -> Self {
        f64::ln_1p(*self)
    }

    #[inline]
    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    #[inline]
    fn to_f64(&self) -> f64 {
        *self
    }

    fn reduce<I: IntoIterator<Item = Self>>(terms: I, mode: SummationMode, _: ()) -> Result<Self> {
        sum_iter(terms, mode)
    }

    #[inline]
    fn square(&self) -> Self {
        self * self
    }
}
