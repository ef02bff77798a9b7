use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use super::{Real, SummationMode};
use crate::error::{Error, Result};

type Big = FBig<HalfEven, 2>;

pub const MIN_EXTENDED_BITS: u32 = 64;
pub const MAX_EXTENDED_BITS: u32 = 4096;

/// Significand width for [`Ext`] values, validated on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtCtx {
    bits: u32,
}

impl ExtCtx {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_EXTENDED_BITS {
            return Err(Error::Configuration(format!(
                "extended precision needs at least {MIN_EXTENDED_BITS} bits, got {bits}"
            )));
        }
        if bits > MAX_EXTENDED_BITS {
            return Err(Error::Configuration(format!(
                "extended precision is available up to {MAX_EXTENDED_BITS} bits, got {bits}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }
}

/// Binary floating point with a fixed significand width, round half to even.
#[derive(Clone)]
pub struct Ext(Big);

impl Ext {
    pub fn bits(&self) -> usize {
        self.0.precision()
    }

    fn wrap(x: Big, bits: usize) -> Self {
        Ext(x.with_precision(bits).value())
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ext({:e} @{}b)", self.to_f64(), self.bits())
    }
}

impl PartialEq for Ext {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Ext {
            type Output = Ext;
            #[inline]
            fn $method(self, rhs: Ext) -> Ext {
                Ext($tr::$method(self.0, rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(-self.0)
    }
}

impl Real for Ext {
    type Ctx = ExtCtx;

    fn lift(x: f64, ctx: ExtCtx) -> Self {
        let big = Big::try_from(x).expect("Ext::lift requires a finite value");
        Ext::wrap(big, ctx.bits as usize)
    }

    fn from_u64(n: u64, ctx: ExtCtx) -> Self {
        Ext::wrap(Big::from(n), ctx.bits as usize)
    }

    fn sqrt(&self) -> Self {
        Ext(self.0.sqrt())
    }

    fn ln(&self) -> Self {
        Ext(self.0.ln())
    }

    fn ln_1p(&self) -> Self {
        Ext(self.0.ln_1p())
    }

    fn abs(&self) -> Self {
        if self.0 < Big::ZERO {
            Ext(-self.0.clone())
        } else {
            self.clone()
        }
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    fn reduce<I: IntoIterator<Item = Self>>(terms: I, _: SummationMode, ctx: ExtCtx) -> Result<Self> {
        Ok(terms.into_iter().fold(Ext::zero(ctx), |acc, t| acc + t))
    }
}
