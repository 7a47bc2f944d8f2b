//! Closed sub-intervals of `[0, 1]`, the signs of interval literals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with `0 <= lo <= hi <= 1`.
///
/// Degenerate intervals (`lo == hi`) are legal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(Error::InvalidParameter(format!(
                "interval [{lo}, {hi}] is not inside [0, 1]"
            )));
        }
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval [{lo}, {hi}] has lo > hi"
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds an interval from two points in either order.
    pub(crate) fn from_endpoints(u: f64, v: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
        if u <= v {
            Interval { lo: u, hi: v }
        } else {
            Interval { lo: v, hi: u }
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Closed-interval disjointness: shared endpoints count as an intersection.
    #[inline]
    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.hi < other.lo || other.hi < self.lo
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// The point of the interval closest to 1/2.
    ///
    /// Both endpoints can only be equidistant from 1/2 when 1/2 lies inside,
    /// so there is never a tie to break.
    #[inline]
    pub fn nearest_to_half(&self) -> f64 {
        if self.hi < 0.5 {
            self.hi
        } else if self.lo > 0.5 {
            self.lo
        } else {
            0.5
        }
    }

    /// Exact identity key (bit patterns of both endpoints).
    #[inline]
    pub(crate) fn bits(&self) -> (u64, u64) {
        (self.lo.to_bits(), self.hi.to_bits())
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn nearest_to_half_examples() {
        assert_eq!(iv(0.1, 0.3).nearest_to_half(), 0.3);
        assert_eq!(iv(0.2, 0.8).nearest_to_half(), 0.5);
        assert_eq!(iv(0.6, 0.9).nearest_to_half(), 0.6);
        assert_eq!(iv(0.5, 0.5).nearest_to_half(), 0.5);
        assert_eq!(iv(0.0, 0.0).nearest_to_half(), 0.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(Interval::new(0.7, 0.2).is_err());
        assert!(Interval::new(-0.1, 0.2).is_err());
        assert!(Interval::new(0.1, 1.5).is_err());
        assert!(Interval::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn closed_semantics() {
        let a = iv(0.0, 0.4);
        let b = iv(0.4, 1.0);
        assert!(a.contains(0.4) && b.contains(0.4));
        assert!(!a.is_disjoint(&b));
        assert!(iv(0.0, 0.2).is_disjoint(&iv(0.3, 0.6)));
        assert_eq!(a.intersection(&b), Some(iv(0.4, 0.4)));
    }

    proptest! {
        #[test]
        fn nearest_point_is_inside_and_closest(u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
            let i = Interval::from_endpoints(u, v);
            let p = i.nearest_to_half();
            prop_assert!(i.contains(p));
            prop_assert!((p - 0.5).abs() <= (i.lo() - 0.5).abs());
            prop_assert!((p - 0.5).abs() <= (i.hi() - 0.5).abs());
        }

        #[test]
        fn disjointness_is_symmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0, d in 0.0f64..=1.0) {
            let i = Interval::from_endpoints(a, b);
            let j = Interval::from_endpoints(c, d);
            prop_assert_eq!(i.is_disjoint(&j), j.is_disjoint(&i));
            prop_assert_eq!(i.is_disjoint(&j), i.intersection(&j).is_none());
        }
    }
}
