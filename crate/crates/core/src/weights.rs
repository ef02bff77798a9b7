//! Weight sequences: the improved weight `w_n`, the classical `1/(4n^2)`,
//! the auxiliary `h_n = sqrt(n) - sqrt(n-1)` and single-site bumps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Ext, ExtCtx, Real, DEFAULT_EXTENDED_BITS};

/// From this index on, [`weight_gap`] is evaluated in extended precision.
pub const GAP_EXTENDED_FROM: u64 = 10_000;

fn check_index(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::Index(n))
    } else {
        Ok(())
    }
}

fn default_ctx() -> ExtCtx {
    ExtCtx::new(DEFAULT_EXTENDED_BITS).expect("default width is valid")
}

/// `w_n = 2 - sqrt((n+1)/n) - sqrt((n-1)/n)`.
///
/// Evaluated through the equivalent product
/// `2 / (n^2 (s+ + s-)(1 + s+)(1 + s-))` with `s± = sqrt(1 ± 1/n)`, which has
/// no subtraction; the literal form loses about `2 log10(n)` digits.
pub fn kpp_weight(n: u64) -> Result<f64> {
    check_index(n)?;
    Ok(kpp_weight_stable(n))
}

#[inline]
pub(crate) fn kpp_weight_stable(n: u64) -> f64 {
    let nf = n as f64;
    let inv = 1.0 / nf;
    let sp = (1.0 + inv).sqrt();
    let sm = (1.0 - inv).sqrt();
    2.0 / (nf * nf * (sp + sm) * (1.0 + sp) * (1.0 + sm))
}

/// The defining expression, term by term, in any backend.
pub fn kpp_weight_literal_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    let nn = R::from_u64(n, ctx);
    let up = (R::from_u64(n + 1, ctx) / nn.clone()).sqrt();
    let down = (R::from_u64(n - 1, ctx) / nn).sqrt();
    R::from_u64(2, ctx) - up - down
}

pub fn classical_weight(n: u64) -> Result<f64> {
    check_index(n)?;
    let nf = n as f64;
    Ok(1.0 / (4.0 * nf * nf))
}

pub fn classical_weight_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    let nn = R::from_u64(n, ctx);
    R::one(ctx) / (R::from_u64(4, ctx) * nn.clone() * nn)
}

/// `h_n = sqrt(n) - sqrt(n-1)`, as `1 / (sqrt(n) + sqrt(n-1))`.
pub fn h(n: u64) -> Result<f64> {
    check_index(n)?;
    Ok(h_in::<f64>(n, ()))
}

pub fn h_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    R::one(ctx) / (R::from_u64(n, ctx).sqrt() + R::from_u64(n - 1, ctx).sqrt())
}

/// `w_n - 1/(4n^2)`. Switches to extended precision from
/// [`GAP_EXTENDED_FROM`] on, where the `f64` difference is cancellation bound.
pub fn weight_gap(n: u64) -> Result<f64> {
    check_index(n)?;
    if n < GAP_EXTENDED_FROM {
        Ok(kpp_weight_stable(n) - classical_weight(n)?)
    } else {
        Ok(weight_gap_in::<Ext>(n, default_ctx()).to_f64())
    }
}

pub fn weight_gap_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    kpp_weight_literal_in::<R>(n, ctx) - classical_weight_in::<R>(n, ctx)
}

/// `w_n - (h_n - h_{n+1}) / sqrt(n)` with `w_n` from [`kpp_weight`] and the
/// telescoped side in extended precision, so the result measures how far the
/// `f64` weight sits from the exact telescoped value.
pub fn telescoping_residual(n: u64) -> Result<f64> {
    let w = kpp_weight(n)?;
    let ctx = default_ctx();
    let rhs = telescoped_weight_in::<Ext>(n, ctx);
    Ok((Ext::lift(w, ctx) - rhs).to_f64())
}

/// `(h_n - h_{n+1}) / sqrt(n)`.
pub fn telescoped_weight_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    (h_in::<R>(n, ctx) - h_in::<R>(n + 1, ctx)) / R::from_u64(n, ctx).sqrt()
}

/// Both sides of the telescoping identity in the same backend.
pub fn telescoping_residual_in<R: Real>(n: u64, ctx: R::Ctx) -> R {
    kpp_weight_literal_in::<R>(n, ctx) - telescoped_weight_in::<R>(n, ctx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightKind {
    Kpp,
    Classical,
    /// `base + epsilon` at `site`, `base` elsewhere.
    Perturbed {
        base: Box<WeightKind>,
        site: u64,
        epsilon: f64,
    },
}

impl WeightKind {
    pub fn perturbed(base: WeightKind, site: u64, epsilon: f64) -> Result<Self> {
        if site == 0 {
            return Err(Error::Validation("perturbation site must be >= 1".into()));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Validation(format!(
                "perturbation epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(WeightKind::Perturbed {
            base: Box::new(base),
            site,
            epsilon,
        })
    }

    pub fn name(&self) -> String {
        match self {
            WeightKind::Kpp => "kpp".into(),
            WeightKind::Classical => "classical".into(),
            WeightKind::Perturbed {
                base,
                site,
                epsilon,
            } => format!("{}+{epsilon}@{site}", base.name()),
        }
    }
}

/// Lazily evaluated weight sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    kind: WeightKind,
}

impl WeightTable {
    pub fn new(kind: WeightKind) -> Self {
        Self { kind }
    }

    pub fn kpp() -> Self {
        Self::new(WeightKind::Kpp)
    }

    pub fn classical() -> Self {
        Self::new(WeightKind::Classical)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn value(&self, n: u64) -> Result<f64> {
        check_index(n)?;
        Ok(value_f64(&self.kind, n))
    }

    /// Value in an arbitrary backend; the improved weight uses its literal
    /// form there.
    pub fn value_in<R: Real>(&self, n: u64, ctx: R::Ctx) -> Result<R> {
        check_index(n)?;
        Ok(value_generic::<R>(&self.kind, n, ctx))
    }
}

fn value_f64(kind: &WeightKind, n: u64) -> f64 {
    match kind {
        WeightKind::Kpp => kpp_weight_stable(n),
        WeightKind::Classical => classical_weight_in::<f64>(n, ()),
        WeightKind::Perturbed {
            base,
            site,
            epsilon,
        } => {
            let b = value_f64(base, n);
            if n == *site {
                b + epsilon
            } else {
                b
            }
        }
    }
}

fn value_generic<R: Real>(kind: &WeightKind, n: u64, ctx: R::Ctx) -> R {
    match kind {
        WeightKind::Kpp => kpp_weight_literal_in::<R>(n, ctx),
        WeightKind::Classical => classical_weight_in::<R>(n, ctx),
        WeightKind::Perturbed {
            base,
            site,
            epsilon,
        } => {
            let b = value_generic::<R>(base, n, ctx);
            if n == *site {
                b + R::lift(*epsilon, ctx)
            } else {
                b
            }
        }
    }
}
