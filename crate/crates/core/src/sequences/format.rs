//! Text input: the `n,re,im` sequence file format and builtin sequence names.

use num_complex::Complex64;

use super::{regularized_ground_state, Sequence, SupportCap};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse `n,re,im` lines with strictly increasing `n >= 1`. Blank lines and
/// everything after `#` are ignored. Line numbers in errors are 1-based.
pub fn parse_sequence_text(text: &str) -> Result<Sequence> {
    let mut entries: Vec<(u64, Complex64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                line_no,
                format!("expected 3 fields `n,re,im`, found {}", fields.len()),
            ));
        }
        let n: u64 = fields[0]
            .parse()
            .map_err(|_| parse_err(line_no, format!("bad index `{}`", fields[0])))?;
        if n == 0 {
            return Err(parse_err(line_no, "u_0 must be 0"));
        }
        if let Some(&(prev, _)) = entries.last() {
            if n <= prev {
                return Err(parse_err(
                    line_no,
                    format!("indices must increase strictly ({n} after {prev})"),
                ));
            }
        }
        let part = |s: &str, what: &str| -> Result<f64> {
            let x: f64 = s
                .parse()
                .map_err(|_| parse_err(line_no, format!("bad {what} part `{s}`")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(parse_err(line_no, format!("non-finite {what} part `{s}`")))
            }
        };
        let re = part(fields[1], "real")?;
        let im = part(fields[2], "imaginary")?;
        entries.push((n, Complex64::new(re, im)));
    }
    Ok(Sequence::from_sorted_unchecked(entries))
}

/// Named sequences available without an input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `e1` or `e:K`: the unit vector at `K`.
    Unit(u64),
    /// `step:M`: 1 on `1..=M`.
    Step(u64),
    /// `sqrt:M`: `sqrt(n)` on `1..=M`.
    Sqrt(u64),
    /// `probe:N=L` (or `probe:L`): the regularized ground state at level `L`.
    Probe(u64),
}

fn positive(value: &str, name: &str) -> Result<u64> {
    match value.trim().parse::<u64>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(Error::Validation(format!(
            "builtin `{name}` needs a positive integer, got `{value}`"
        ))),
    }
}

/// `Ok(None)` when `name` is not builtin syntax at all, so callers can fall
/// back to treating it as a path.
pub fn parse_builtin(name: &str) -> Result<Option<Builtin>> {
    let name = name.trim();
    if name == "e1" {
        return Ok(Some(Builtin::Unit(1)));
    }
    let Some((head, arg)) = name.split_once(':') else {
        return Ok(None);
    };
    let builtin = match head {
        "e" => Builtin::Unit(positive(arg, "e")?),
        "step" => Builtin::Step(positive(arg, "step")?),
        "sqrt" => Builtin::Sqrt(positive(arg, "sqrt")?),
        "probe" => {
            let value = arg.strip_prefix("N=").unwrap_or(arg);
            let level = positive(value, "probe")?;
            if level < 2 {
                return Err(Error::Validation(format!("N must be ≥ 2, got {level}")));
            }
            Builtin::Probe(level)
        }
        _ => return Ok(None),
    };
    Ok(Some(builtin))
}

impl Builtin {
    pub fn build(self, cap: SupportCap) -> Result<Sequence> {
        let dense = |m: u64, f: fn(u64) -> f64| -> Result<Sequence> {
            cap.check("builtin sequence", u128::from(m))?;
            Ok(Sequence::from_sorted_unchecked(
                (1..=m).map(|n| (n, Complex64::new(f(n), 0.0))).collect(),
            ))
        };
        match self {
            Builtin::Unit(k) => Sequence::unit(k),
            Builtin::Step(m) => dense(m, |_| 1.0),
            Builtin::Sqrt(m) => dense(m, |n| (n as f64).sqrt()),
            Builtin::Probe(level) => regularized_ground_state(level, cap),
        }
    }
}

impl std::fmt::Display for Builtin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Builtin::Unit(1) => f.write_str("e1"),
            Builtin::Unit(k) => write!(f, "e:{k}"),
            Builtin::Step(m) => write!(f, "step:{m}"),
            Builtin::Sqrt(m) => write!(f, "sqrt:{m}"),
            Builtin::Probe(n) => write!(f, "probe:N={n}"),
        }
    }
}
