//! Linear-algebra cross-check of the inequality: on sequences supported in
//! `1..=M` the form `D - W` is the symmetric tridiagonal matrix with
//! diagonal `2 - w_n` and off-diagonal `-1`, and it factors as `C^T C` with
//! `C` the bidiagonal matrix of the remainder coefficients.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::RemainderCoefficients;
use crate::numerics::{sum_iter, ulp_of, SummationMode};
use crate::sequences::Sequence;
use crate::weights::WeightTable;

/// Default absolute accuracy of [`smallest_eigenvalue`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-12;

/// `D - W` restricted to `1..=M` (Dirichlet truncation).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TridiagonalForm {
    /// `d_n = 2 - w(n)`, index 0 holds `n = 1`.
    pub diagonal: Vec<f64>,
    /// Entries `(n, n+1)`, all `-1`.
    pub off_diagonal: Vec<f64>,
}

impl TridiagonalForm {
    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    /// `u^* T u` for `u` supported in `1..=M`.
    pub fn quadratic_form(&self, u: &Sequence, mode: SummationMode) -> Result<f64> {
        let m = self.size() as u64;
        if !u.is_supported_in(m) {
            return Err(Error::Validation(format!(
                "sequence reaches index {} beyond the matrix size {m}",
                u.max_index()
            )));
        }
        let terms = u.adjacent().flat_map(|t| {
            let mut parts = [0.0; 2];
            if t.n <= m && t.current.norm_sqr() > 0.0 {
                parts[0] = self.diagonal[(t.n - 1) as usize] * t.current.norm_sqr();
            }
            if t.n >= 2 && t.n <= m {
                let cross = (t.current.conj() * t.previous).re;
                parts[1] = 2.0 * self.off_diagonal[(t.n - 2) as usize] * cross;
            }
            parts
        });
        sum_iter(terms, mode)
    }
}

pub fn build_form(size: usize, table: &WeightTable) -> Result<TridiagonalForm> {
    if size == 0 {
        return Err(Error::Validation("matrix size must be >= 1".into()));
    }
    let diagonal = (1..=size as u64)
        .map(|n| table.value(n).map(|w| 2.0 - w))
        .collect::<Result<Vec<_>>>()?;
    Ok(TridiagonalForm {
        diagonal,
        off_diagonal: vec![-1.0; size - 1],
    })
}

/// `C` with rows `n = 2..=M+1`: `-b_n` in column `n-1`, `a_n` in column `n`
/// (the latter absent for the last row).
#[derive(Debug, Clone, PartialEq)]
pub struct BidiagonalFactor {
    /// `a_n` for `n = 2..=M`.
    pub a: Vec<f64>,
    /// `b_n` for `n = 2..=M+1`.
    pub b: Vec<f64>,
}

impl BidiagonalFactor {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Validation("matrix size must be >= 1".into()));
        }
        let coeffs = (2..=size as u64 + 1)
            .map(RemainderCoefficients::at)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            a: coeffs[..size - 1].iter().map(|c| c.a).collect(),
            b: coeffs.iter().map(|c| c.b).collect(),
        })
    }

    /// Diagonal and off-diagonal of `C^T C`.
    pub fn gram(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.b.len();
        // Column j (index j-1) collects a_j^2 from row j and b_{j+1}^2 from
        // row j+1; column 1 has no a-entry.
        let diagonal = (0..m)
            .map(|i| {
                let from_a = if i == 0 { 0.0 } else { self.a[i - 1] * self.a[i - 1] };
                from_a + self.b[i] * self.b[i]
            })
            .collect();
        let off = (0..m - 1).map(|i| -self.b[i] * self.a[i]).collect();
        (diagonal, off)
    }
}

/// Largest entrywise gap between the truncated improved-weight form and
/// `C^T C`. Every entry must agree to 8 ulp.
pub fn factorization_residual(size: usize) -> Result<f64> {
    let form = build_form(size, &WeightTable::kpp())?;
    let (diag, off) = BidiagonalFactor::new(size)?.gram();
    let pairs = form
        .diagonal
        .iter()
        .zip(&diag)
        .chain(form.off_diagonal.iter().zip(&off));
    let mut worst = 0.0f64;
    for (i, (&t, &c)) in pairs.enumerate() {
        let gap = (t - c).abs();
        if gap > 8.0 * ulp_of(t.abs().max(c.abs())) {
            return Err(Error::Assertion(format!(
                "factorization entry {i} differs by {gap:e} ({t} vs {c})"
            )));
        }
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Number of eigenvalues strictly below `x`, from the signs of the `LDL^T`
/// pivots of `T - x I`.
pub fn sturm_count(form: &TridiagonalForm, x: f64) -> usize {
    let d = &form.diagonal;
    let e = &form.off_diagonal;
    let scale = d.iter().map(|v| v.abs()).fold(1.0f64, f64::max);
    let pivot_floor = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = (d[i] - x) - e[i - 1] * e[i - 1] / q;
        }
        if q.abs() < pivot_floor {
            q = -pivot_floor;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

pub fn negative_eigenvalue_count(form: &TridiagonalForm) -> usize {
    sturm_count(form, 0.0)
}

/// Smallest eigenvalue to absolute accuracy `tol` by bisection on the
/// Sturm count inside the Gershgorin interval.
pub fn smallest_eigenvalue(form: &TridiagonalForm, tol: f64) -> Result<f64> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    let m = form.size();
    if m == 1 {
        return Ok(form.diagonal[0]);
    }
    let radius = |i: usize| {
        let left = if i > 0 { form.off_diagonal[i - 1].abs() } else { 0.0 };
        let right = form.off_diagonal.get(i).map_or(0.0, |v| v.abs());
        left + right
    };
    let mut lo = (0..m)
        .map(|i| form.diagonal[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..m)
        .map(|i| form.diagonal[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    // Nudge outward so the interval is closed under rounding of the pivots.
    let pad = 4.0 * ulp_of(lo.abs().max(hi.abs()));
    lo -= pad;
    hi += pad;
    if sturm_count(form, lo) != 0 || sturm_count(form, hi) == 0 {
        return Err(Error::InternalConsistency(format!(
            "Gershgorin interval [{lo}, {hi}] does not bracket the spectrum"
        )));
    }
    for _ in 0..4096 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(form, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
