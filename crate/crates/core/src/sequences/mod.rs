//! Finitely supported complex sequences with `u_0 = 0`, the logarithmic
//! cutoff and the regularized ground state built from it.

mod cutoff;
mod format;

pub use cutoff::{cutoff, cutoff_in, regularized_ground_state, CutoffSequence, SupportCap};
pub use format::{parse_builtin, parse_sequence_text, Builtin};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sparse sequence stored as index-ascending `(n, u_n)` pairs, `n >= 1`,
/// every stored value nonzero and finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sequence {
    entries: Vec<(u64, Complex64)>,
}

/// `(n, u_n, u_{n-1})` for one difference term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adjacent {
    pub n: u64,
    pub current: Complex64,
    pub previous: Complex64,
}

fn check_value(n: u64, z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("non-finite value {z} at index {n}")))
    }
}

impl Sequence {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Unit vector at `k`.
    pub fn unit(k: u64) -> Result<Self> {
        Self::from_pairs([(k, Complex64::new(1.0, 0.0))])
    }

    /// Pairs may come in any order; zero values are accepted and not stored.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, Complex64)>,
    {
        let mut entries: Vec<(u64, Complex64)> = pairs.into_iter().collect();
        for &(n, z) in &entries {
            if n == 0 {
                return Err(Error::Validation("u_0 must be 0".into()));
            }
            check_value(n, z)?;
        }
        entries.sort_by_key(|&(n, _)| n);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation(format!("duplicate index {}", w[0].0)));
        }
        entries.retain(|&(_, z)| z != Complex64::new(0.0, 0.0));
        Ok(Self { entries })
    }

    pub fn from_real<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self> {
        Self::from_pairs(pairs.into_iter().map(|(n, x)| (n, Complex64::new(x, 0.0))))
    }

    /// Trusted constructor for generators that already emit ascending,
    /// distinct, positive indices.
    pub(crate) fn from_sorted_unchecked(mut entries: Vec<(u64, Complex64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.first().is_none_or(|e| e.0 >= 1));
        entries.retain(|&(_, z)| z != Complex64::new(0.0, 0.0));
        Self { entries }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Largest stored index, 0 for the zero sequence.
    pub fn max_index(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.0)
    }

    pub fn get(&self, n: u64) -> Complex64 {
        match self.entries.binary_search_by_key(&n, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Stored entries in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_supported_in(&self, max: u64) -> bool {
        self.max_index() <= max
    }

    /// Every `n` with `u_n != 0` or `u_{n-1} != 0`, ascending.
    pub fn adjacent(&self) -> AdjacentIter<'_> {
        AdjacentIter {
            entries: &self.entries,
            pos: 0,
            pending_tail: None,
        }
    }

    pub fn scale(&self, c: Complex64) -> Sequence {
        Sequence::from_sorted_unchecked(self.entries.iter().map(|&(n, z)| (n, c * z)).collect())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Sequence, c: Complex64) -> Sequence {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&(n, x)), Some(&(m, _))) if n < m => {
                    i += 1;
                    (n, x)
                }
                (Some(&(n, _)), Some(&(m, y))) if m < n => {
                    j += 1;
                    (m, c * y)
                }
                (Some(&(n, x)), Some(&(_, y))) => {
                    i += 1;
                    j += 1;
                    (n, x + c * y)
                }
                (Some(&e), None) => {
                    i += 1;
                    e
                }
                (None, Some(&(m, y))) => {
                    j += 1;
                    (m, c * y)
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        Sequence::from_sorted_unchecked(out)
    }

    pub fn add(&self, other: &Sequence) -> Sequence {
        self.add_scaled(other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Sequence) -> Sequence {
        self.add_scaled(other, Complex64::new(-1.0, 0.0))
    }
}

pub struct AdjacentIter<'a> {
    entries: &'a [(u64, Complex64)],
    pos: usize,
    // Index one past a stored entry whose successor is not stored.
    pending_tail: Option<(u64, Complex64)>,
}

impl Iterator for AdjacentIter<'_> {
    type Item = Adjacent;

    fn next(&mut self) -> Option<Adjacent> {
        let zero = Complex64::new(0.0, 0.0);
        if let Some((n, prev)) = self.pending_tail.take() {
            return Some(Adjacent {
                n,
                current: zero,
                previous: prev,
            });
        }
        let &(n, current) = self.entries.get(self.pos)?;
        let previous = match self.pos.checked_sub(1).map(|i| self.entries[i]) {
            Some((m, z)) if m + 1 == n => z,
            _ => zero,
        };
        self.pos += 1;
        match self.entries.get(self.pos) {
            Some(&(m, _)) if m == n + 1 => {}
            _ => self.pending_tail = Some((n + 1, current)),
        }
        Some(Adjacent {
            n,
            current,
            previous,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constructors() {
        let e1 = Sequence::from_pairs([(1, c(1.0))]).unwrap();
        assert_eq!(e1, Sequence::unit(1).unwrap());
        assert_eq!(e1.max_index(), 1);
        assert!(Sequence::from_pairs([]).unwrap().is_zero());
        let err = Sequence::from_pairs([(0, c(1.0))]).unwrap_err();
        assert!(err.to_string().contains("u_0 must be 0"));
        assert!(Sequence::from_pairs([(2, c(1.0)), (2, c(3.0))]).is_err());
        assert!(Sequence::from_pairs([(2, c(f64::NAN))]).is_err());
        assert!(Sequence::from_pairs([(2, Complex64::new(0.0, f64::INFINITY))]).is_err());
        let z = Sequence::from_pairs([(3, c(0.0)), (4, c(2.0))]).unwrap();
        assert_eq!(z.support_size(), 1);
    }

    #[test]
    fn linear_combinations() {
        let e1 = Sequence::unit(1).unwrap();
        assert_eq!(e1.add(&e1), Sequence::from_pairs([(1, c(2.0))]).unwrap());
        assert!(e1.sub(&e1).is_zero());
        let e3 = Sequence::unit(3).unwrap();
        assert_eq!(e3.scale(c(2.0)), Sequence::from_pairs([(3, c(2.0))]).unwrap());
        let mix = e1.add_scaled(&e3, Complex64::new(0.0, 1.0));
        assert_eq!(mix.get(3), Complex64::new(0.0, 1.0));
        assert_eq!(mix.get(2), c(0.0));
    }

    #[test]
    fn adjacent_walk_covers_gaps_and_tail() {
        let u = Sequence::from_real([(1, 1.0), (2, 2.0), (5, 3.0)]).unwrap();
        let got: Vec<(u64, f64, f64)> = u
            .adjacent()
            .map(|a| (a.n, a.current.re, a.previous.re))
            .collect();
        assert_eq!(
            got,
            vec![(1, 1.0, 0.0), (2, 2.0, 1.0), (3, 0.0, 2.0), (5, 3.0, 0.0), (6, 0.0, 3.0)]
        );
        assert_eq!(Sequence::zero().adjacent().count(), 0);
    }

    proptest! {
        #[test]
        fn round_trip_sorted(map in proptest::collection::btree_map(1u64..500, -10.0f64..10.0, 0..40)) {
            let pairs: Vec<(u64, f64)> = map.iter().rev().map(|(&n, &x)| (n, x)).collect();
            let u = Sequence::from_real(pairs).unwrap();
            let back: Vec<(u64, f64)> = u.iter().map(|(n, z)| (n, z.re)).collect();
            let expected: Vec<(u64, f64)> = map.into_iter().filter(|&(_, x)| x != 0.0).collect();
            prop_assert_eq!(back, expected);
        }

        #[test]
        fn adjacent_matches_dense_walk(map in proptest::collection::btree_map(1u64..60, 1.0f64..2.0, 0..20)) {
            let u = Sequence::from_real(map.clone()).unwrap();
            let dense: Vec<u64> = (1..=u.max_index() + 1)
                .filter(|&n| u.get(n) != c(0.0) || u.get(n - 1) != c(0.0))
                .collect();
            let walked: Vec<u64> = u.adjacent().map(|a| a.n).collect();
            prop_assert_eq!(walked, dense);
            for a in u.adjacent() {
                prop_assert_eq!(a.current, u.get(a.n));
                prop_assert_eq!(a.previous, u.get(a.n - 1));
            }
        }
    }
}
