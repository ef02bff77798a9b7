use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Ext, ExtCtx, Real};
use crate::error::{Error, Result};

pub const DEFAULT_EXTENDED_BITS: u32 = 256;

/// Summation policy applied to every reduction in the toolkit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SummationMode {
    Naive,
    #[default]
    Compensated,
    Extended { precision_bits: u32 },
}

impl SummationMode {
    pub fn extended(precision_bits: u32) -> Result<Self> {
        ExtCtx::new(precision_bits)?;
        Ok(SummationMode::Extended { precision_bits })
    }

    pub fn default_extended() -> Self {
        SummationMode::Extended {
            precision_bits: DEFAULT_EXTENDED_BITS,
        }
    }

    /// Extended-precision context, `None` for the `f64` policies.
    pub fn ext_ctx(self) -> Result<Option<ExtCtx>> {
        match self {
            SummationMode::Extended { precision_bits } => ExtCtx::new(precision_bits).map(Some),
            _ => Ok(None),
        }
    }

    pub fn is_extended(self) -> bool {
        matches!(self, SummationMode::Extended { .. })
    }
}

impl fmt::Display for SummationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummationMode::Naive => f.write_str("naive"),
            SummationMode::Compensated => f.write_str("compensated"),
            SummationMode::Extended { precision_bits } => write!(f, "extended({precision_bits})"),
        }
    }
}

#[derive(Debug, Clone)]
enum State {
    Naive(f64),
    // Neumaier: the correction branch picks whichever operand is larger in
    // magnitude, so terms bigger than the running sum are handled.
    Compensated { sum: f64, carry: f64 },
    Extended { acc: Ext, ctx: ExtCtx },
}

/// Running sum of `f64` terms under a [`SummationMode`].
#[derive(Debug, Clone)]
pub struct Accumulator {
    state: State,
    count: usize,
}

impl Accumulator {
    pub fn new(mode: SummationMode) -> Result<Self> {
        let state = match mode.ext_ctx()? {
            Some(ctx) => State::Extended {
                acc: Ext::zero(ctx),
                ctx,
            },
            None if mode == SummationMode::Naive => State::Naive(0.0),
            None => State::Compensated { sum: 0.0, carry: 0.0 },
        };
        Ok(Self { state, count: 0 })
    }

    pub fn add(&mut self, term: f64) -> Result<()> {
        if !term.is_finite() {
            return Err(Error::Input(format!(
                "non-finite summation term {term} at position {}",
                self.count
            )));
        }
        self.count += 1;
        match &mut self.state {
            State::Naive(s) => *s += term,
            State::Compensated { sum, carry } => {
                let t = *sum + term;
                if sum.abs() >= term.abs() {
                    *carry += (*sum - t) + term;
                } else {
                    *carry += (term - t) + *sum;
                }
                *sum = t;
            }
            State::Extended { acc, ctx } => {
                let next = acc.clone() + Ext::lift(term, *ctx);
                *acc = next;
            }
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self) -> f64 {
        match &self.state {
            State::Naive(s) => *s,
            State::Compensated { sum, carry } => sum + carry,
            State::Extended { acc, .. } => acc.to_f64(),
        }
    }
}

/// Sum `terms` in order under `mode`.
pub fn sum(terms: &[f64], mode: SummationMode) -> Result<f64> {
    sum_iter(terms.iter().copied(), mode)
}

pub fn sum_iter<I: IntoIterator<Item = f64>>(terms: I, mode: SummationMode) -> Result<f64> {
    let mut acc = Accumulator::new(mode)?;
    for t in terms {
        acc.add(t)?;
    }
    Ok(acc.value())
}
