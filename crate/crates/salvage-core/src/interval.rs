//! Intervals with open/closed endpoint flags and finite unions of them.
//!
//! Endpoint flags matter for reporting (`[0, 1)` vs `[0, 1]`) and for exact
//! set complements such as `[1, 3] \ [2, 3) = [1, 2) ∪ {3}`; they never affect
//! Lebesgue measure, so integrals are insensitive to them.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A single interval. Endpoints may be `-inf`/`+inf` (necessarily open).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        let lo_closed = lo_closed && lo.is_finite();
        let hi_closed = hi_closed && hi.is_finite();
        Interval { lo, hi, lo_closed, hi_closed }
    }

    /// Closed interval `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, true)
    }

    /// Half-open interval `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, true, false)
    }

    /// Open interval `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi, false, false)
    }

    /// Single point `{p}`.
    pub fn point(p: f64) -> Self {
        Interval::closed(p, p)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn measure(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = x > self.lo || (x == self.lo && self.lo_closed);
        let below = x < self.hi || (x == self.hi && self.hi_closed);
        above && below
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo.is_infinite() && self.hi.is_infinite() {
            0.0
        } else if self.lo.is_infinite() {
            self.hi - 1.0
        } else if self.hi.is_infinite() {
            self.lo + 1.0
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        let iv = Interval::new(lo, hi, lo_closed, hi_closed);
        if iv.is_empty() {
            None
        } else {
            Some(iv)
        }
    }

    /// `self \ other`, at most two parts.
    fn subtract(&self, other: &Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        if other.is_empty() || self.is_empty() {
            if !self.is_empty() {
                out.push(*self);
            }
            return out;
        }
        // left remainder: [self.lo, other.lo) or [self.lo, other.lo]
        let left = Interval::new(self.lo, other.lo, self.lo_closed, !other.lo_closed);
        if !left.is_empty() && left.lo <= self.hi {
            if let Some(iv) = left.intersect(self) {
                out.push(iv);
            }
        }
        // right remainder: (other.hi, self.hi] or [other.hi, self.hi]
        let right = Interval::new(other.hi, self.hi, !other.hi_closed, self.hi_closed);
        if !right.is_empty() {
            if let Some(iv) = right.intersect(self) {
                out.push(iv);
            }
        }
        out
    }

    fn touches_or_overlaps(&self, next: &Interval) -> bool {
        debug_assert!(self.lo <= next.lo);
        next.lo < self.hi || (next.lo == self.hi && (self.hi_closed || next.lo_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

/// A finite union of disjoint intervals, sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    ivs: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { ivs: Vec::new() }
    }

    pub fn from_interval(iv: Interval) -> Self {
        IntervalSet::new(vec![iv])
    }

    /// Normalizes: drops empties, sorts, merges overlapping or touching parts.
    pub fn new(mut ivs: Vec<Interval>) -> Self {
        ivs.retain(|iv| !iv.is_empty());
        ivs.sort_by(|a, b| {
            a.lo.partial_cmp(&b.lo)
                .unwrap()
                .then(b.lo_closed.cmp(&a.lo_closed))
        });
        let mut merged: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match merged.last_mut() {
                Some(last) if last.touches_or_overlaps(&iv) => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                        last.hi_closed = iv.hi_closed;
                    } else if iv.hi == last.hi {
                        last.hi_closed = last.hi_closed || iv.hi_closed;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalSet { ivs: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.ivs
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.ivs.iter().map(Interval::measure).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ivs.iter().any(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.ivs.clone();
        all.extend_from_slice(&other.ivs);
        IntervalSet::new(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.ivs {
            for b in &other.ivs {
                if let Some(iv) = a.intersect(b) {
                    out.push(iv);
                }
            }
        }
        IntervalSet::new(out)
    }

    /// `self \ other`.
    pub fn subtract(&self, other: &IntervalSet) -> IntervalSet {
        let mut current = self.ivs.clone();
        for cut in &other.ivs {
            let mut next = Vec::with_capacity(current.len() + 1);
            for iv in &current {
                next.extend(iv.subtract(cut));
            }
            current = next;
        }
        IntervalSet::new(current)
    }

    /// Complement of `self` inside `parent`.
    pub fn complement_within(&self, parent: &IntervalSet) -> IntervalSet {
        parent.subtract(self)
    }

    /// Smallest single interval covering the set.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.ivs.first()?;
        let last = self.ivs.last()?;
        Some(Interval::new(first.lo, last.hi, first.lo_closed, last.hi_closed))
    }

    /// Clips infinite endpoints to `[-window, window]`.
    pub fn clip_to_window(&self, window: f64) -> IntervalSet {
        let ivs = self
            .ivs
            .iter()
            .map(|iv| {
                let lo = if iv.lo.is_finite() { iv.lo } else { -window };
                let hi = if iv.hi.is_finite() { iv.hi } else { window };
                Interval::new(lo, hi, iv.lo_closed || !iv.lo.is_finite(), iv.hi_closed || !iv.hi.is_finite())
            })
            .collect();
        IntervalSet::new(ivs)
    }

    /// `n` sample points spread over the set proportionally to component
    /// measure, endpoints included. Point components contribute themselves.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let mut pts = Vec::new();
        let total = self.measure();
        if self.ivs.is_empty() || n == 0 {
            return pts;
        }
        for iv in &self.ivs {
            if iv.measure() == 0.0 {
                pts.push(iv.lo);
                continue;
            }
            let share = if total > 0.0 {
                libm::ceil((iv.measure() / total) * n as f64) as usize
            } else {
                1
            };
            let k = share.max(2);
            for j in 0..k {
                pts.push(iv.lo + (iv.hi - iv.lo) * j as f64 / (k - 1) as f64);
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ivs.is_empty() {
            return write!(f, "empty");
        }
        for (i, iv) in self.ivs.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "{}", iv)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_keeps_boundary_point() {
        // [1,3] \ [2,3) = [1,2) ∪ {3}
        let parent = IntervalSet::from_interval(Interval::closed(1.0, 3.0));
        let image = IntervalSet::from_interval(Interval::closed_open(2.0, 3.0));
        let rest = image.complement_within(&parent);
        assert_eq!(rest.intervals().len(), 2);
        assert_eq!(rest.intervals()[0], Interval::closed_open(1.0, 2.0));
        assert_eq!(rest.intervals()[1], Interval::point(3.0));
        assert!(rest.contains(3.0));
        assert!(!rest.contains(2.0));
    }

    #[test]
    fn union_merges_touching_when_closed() {
        let a = IntervalSet::from_interval(Interval::closed_open(0.0, 1.0));
        let b = IntervalSet::from_interval(Interval::closed(1.0, 2.0));
        let u = a.union(&b);
        assert_eq!(u.intervals(), &[Interval::closed(0.0, 2.0)]);

        // open endpoints do not merge: (0,1) ∪ (1,2) keeps the gap at 1
        let c = IntervalSet::from_interval(Interval::open(0.0, 1.0));
        let d = IntervalSet::from_interval(Interval::open(1.0, 2.0));
        let v = c.union(&d);
        assert_eq!(v.intervals().len(), 2);
        assert!(!v.contains(1.0));
    }

    #[test]
    fn empty_intervals_are_never_stored() {
        let s = IntervalSet::new(vec![
            Interval::open(1.0, 1.0),
            Interval::closed(2.0, 1.0),
            Interval::point(5.0),
        ]);
        assert_eq!(s.intervals(), &[Interval::point(5.0)]);
    }

    #[test]
    fn measure_ignores_flags_and_points() {
        let s = IntervalSet::new(vec![
            Interval::closed_open(0.0, 1.5),
            Interval::point(3.0),
            Interval::open(4.0, 6.0),
        ]);
        assert_eq!(s.measure(), 3.5);
    }

    #[test]
    fn clip_handles_infinite_endpoints() {
        let s = IntervalSet::from_interval(Interval::new(f64::NEG_INFINITY, f64::INFINITY, false, false));
        let c = s.clip_to_window(10.0);
        assert_eq!(c.intervals(), &[Interval::closed(-10.0, 10.0)]);
    }

    #[test]
    fn grid_covers_components_and_endpoints() {
        let s = IntervalSet::new(vec![
            Interval::closed_open(0.0, 1.0),
            Interval::closed(2.0, 4.0),
        ]);
        let g = s.sample_grid(30);
        assert!(g.contains(&0.0));
        assert!(g.contains(&1.0));
        assert!(g.contains(&2.0));
        assert!(g.contains(&4.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
