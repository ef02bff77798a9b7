use num_complex::Complex64;

use super::Sequence;
use crate::error::{Error, Result};
use crate::numerics::Real;

/// Upper bound on the number of stored entries a generator may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportCap(pub u64);

impl SupportCap {
    pub const DEFAULT: SupportCap = SupportCap(100_000_000);

    pub fn check(self, what: &str, requested: u128) -> Result<()> {
        if requested > u128::from(self.0) {
            Err(Error::Resource {
                what: what.to_string(),
                requested,
                cap: self.0,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for SupportCap {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn check_level(level: u64) -> Result<()> {
    if level < 2 {
        Err(Error::Validation(format!("N must be ≥ 2, got {level}")))
    } else {
        Ok(())
    }
}

/// `xi^N_n`: 1 below `N`, `(2 log N - log n) / log N` on `[N, N^2]`, 0 above.
pub fn cutoff(level: u64, n: u64) -> Result<f64> {
    check_level(level)?;
    if n == 0 {
        return Err(Error::Index(0));
    }
    Ok(CutoffSequence::new(level)?.value(n))
}

/// The same three branches in any backend.
pub fn cutoff_in<R: Real>(level: u64, n: u64, ctx: R::Ctx) -> R {
    let sq = u128::from(level) * u128::from(level);
    if n < level {
        R::one(ctx)
    } else if u128::from(n) >= sq {
        R::zero(ctx)
    } else {
        let ln_level = R::from_u64(level, ctx).ln();
        (ln_level.clone() + ln_level.clone() - R::from_u64(n, ctx).ln()) / ln_level
    }
}

/// `xi^N` with `log N` evaluated once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSequence {
    level: u64,
    ln_level: f64,
}

impl CutoffSequence {
    pub fn new(level: u64) -> Result<Self> {
        check_level(level)?;
        Ok(Self {
            level,
            ln_level: (level as f64).ln(),
        })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn ln_level(&self) -> f64 {
        self.ln_level
    }

    /// `N^2` as `u128`; overflow-free for every `u64` level.
    pub fn upper(&self) -> u128 {
        u128::from(self.level) * u128::from(self.level)
    }

    pub fn value(&self, n: u64) -> f64 {
        if n < self.level {
            1.0
        } else if u128::from(n) >= self.upper() {
            // Right junction: exact zero rather than a rounding remnant of
            // 2 log N - log N^2.
            0.0
        } else {
            // 2L - L is exact, so the left junction gives exactly 1.
            ((2.0 * self.ln_level - (n as f64).ln()) / self.ln_level).max(0.0)
        }
    }
}

/// `u^N_n = xi^N_n sqrt(n)`, supported on `1..N^2`.
pub fn regularized_ground_state(level: u64, cap: SupportCap) -> Result<Sequence> {
    let xi = CutoffSequence::new(level)?;
    let last = xi.upper() - 1;
    cap.check(&format!("regularized ground state at N = {level}"), last)?;
    let last = last as u64;
    let entries = (1..=last)
        .map(|n| (n, Complex64::new(xi.value(n) * (n as f64).sqrt(), 0.0)))
        .collect();
    Ok(Sequence::from_sorted_unchecked(entries))
}
