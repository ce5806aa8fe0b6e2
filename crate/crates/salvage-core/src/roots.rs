//! Sign-change root isolation, monotone-segment decomposition, numerical
//! inversion on monotone segments, and level-set preimages built on top.
//!
//! Root isolation is grid-based: one refined root per sign change detected at
//! grid resolution. Tangential (even-multiplicity) roots below the grid
//! resolution are out of contract; sign partitions only need sign changes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::realfn::{Function1D, RealFn};

/// Direction of a function on a monotone segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

/// An interval on which the target function's derivative keeps one sign
/// (verified at grid resolution).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneSegment {
    pub interval: Interval,
    pub direction: Direction,
}

/// Default grid pitch: the measure of the set divided by 4096.
pub fn default_grid_h(set: &IntervalSet) -> f64 {
    let m = set.measure();
    if m > 0.0 && m.is_finite() {
        m / 4096.0
    } else {
        1.0 / 256.0
    }
}

fn bisect_sign_change<F: Function1D + ?Sized>(f: &F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f.eval(lo)?;
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f.eval(mid)?;
        if fmid == 0.0 {
            return Ok(mid);
        }
        if (flo < 0.0) != (fmid < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    polish_root(f, lo, hi)
}

/// Snaps a converged bracket to a round number when that number is an exact
/// zero, so partitions built from clean fixtures report clean boundaries.
fn polish_root<F: Function1D + ?Sized>(f: &F, lo: f64, hi: f64) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    for digits in [0i32, 3, 6, 9, 12] {
        let scale = libm::pow(10.0, digits as f64);
        let candidate = libm::round(mid * scale) / scale;
        if candidate >= lo && candidate <= hi && f.eval(candidate)? == 0.0 {
            return Ok(candidate);
        }
    }
    Ok(mid)
}

/// One refined root per sign change of `f` on the grid, sorted ascending.
pub fn isolate_roots<F: Function1D + ?Sized>(
    f: &F,
    set: &IntervalSet,
    grid_h: f64,
) -> Result<Vec<f64>> {
    debug_assert!(grid_h > 0.0);
    let mut roots = Vec::new();
    for iv in set.intervals() {
        if iv.measure() == 0.0 {
            continue;
        }
        let (lo, hi) = (iv.lo, iv.hi);
        let steps = (libm::ceil((hi - lo) / grid_h) as usize).clamp(1, 4_000_000);
        let mut x_prev = lo;
        let mut f_prev = f.eval(x_prev)?;
        for k in 1..=steps {
            let x = if k == steps { hi } else { lo + (hi - lo) * k as f64 / steps as f64 };
            let fx = f.eval(x)?;
            // zeros at grid points count only next to a nonzero sample, so an
            // identically-zero stretch is not a wall of roots
            if f_prev == 0.0 && fx != 0.0 {
                roots.push(x_prev);
            } else if fx == 0.0 && f_prev != 0.0 {
                roots.push(x);
            } else if fx != 0.0 && (f_prev < 0.0) != (fx < 0.0) {
                roots.push(bisect_sign_change(f, x_prev, x)?);
            }
            x_prev = x;
            f_prev = fx;
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-10);
    Ok(roots)
}

/// Splits `set` into segments on which `f` is monotone, by isolating the sign
/// changes of `f'` and splitting additionally at piece seams of `f`.
pub fn monotone_segments(f: &RealFn, set: &IntervalSet, grid_h: f64) -> Result<Vec<MonotoneSegment>> {
    let df = f.differentiate();
    let mut segments = Vec::new();
    for iv in set.intervals() {
        if iv.measure() == 0.0 {
            segments.push(MonotoneSegment { interval: *iv, direction: Direction::Constant });
            continue;
        }
        let mut cuts: Vec<f64> = Vec::new();
        cuts.push(iv.lo);
        for (piece, _) in f.pieces() {
            for edge in [piece.lo, piece.hi] {
                if edge > iv.lo && edge < iv.hi {
                    cuts.push(edge);
                }
            }
        }
        let here = IntervalSet::from_interval(*iv);
        for r in isolate_roots(&df, &here, grid_h)? {
            if r > iv.lo && r < iv.hi {
                cuts.push(r);
            }
        }
        cuts.push(iv.hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let lo_closed = if a == iv.lo { iv.lo_closed } else { true };
            let hi_closed = if b == iv.hi { iv.hi_closed } else { false };
            let seg = Interval::new(a, b, lo_closed, hi_closed);
            let slope = df.eval(seg.midpoint())?;
            let scale = f.eval(seg.midpoint())?.abs().max(1.0);
            let direction = if slope > 1e-13 * scale {
                Direction::Increasing
            } else if slope < -1e-13 * scale {
                Direction::Decreasing
            } else {
                Direction::Constant
            };
            segments.push(MonotoneSegment { interval: seg, direction });
        }
    }
    Ok(segments)
}

/// Solves `f(x) = y` on a strictly monotone segment by bisection.
///
/// The result satisfies `|f(x) - y| <= 1e-10 * max(1, |y|)`.
pub fn invert_on_segment<F: Function1D + ?Sized>(
    f: &F,
    seg: &MonotoneSegment,
    y: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (seg.interval.lo, seg.interval.hi);
    let (f_lo, f_hi) = (f.eval(lo)?, f.eval(hi)?);
    let (mut y_lo, mut y_hi) = if f_lo <= f_hi { (f_lo, f_hi) } else { (f_hi, f_lo) };
    // forgive endpoint roundoff
    let slack = 1e-9 * (y.abs().max(y_lo.abs()).max(y_hi.abs()).max(1.0));
    y_lo -= slack;
    y_hi += slack;
    if y < y_lo || y > y_hi {
        return Err(Error::InversionOutOfRange { y });
    }
    let increasing = f_hi >= f_lo;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f.eval(mid)?;
        if fm == y {
            return Ok(mid);
        }
        if (fm < y) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    // clamp to the best endpoint when y sits at the segment edge
    let fx = f.eval(x)?;
    if (fx - y).abs() <= (f_lo - y).abs() && (fx - y).abs() <= (f_hi - y).abs() {
        Ok(x)
    } else if (f_lo - y).abs() <= (f_hi - y).abs() {
        Ok(seg.interval.lo)
    } else {
        Ok(seg.interval.hi)
    }
}

/// Closed range of `f` over a set of monotone segments.
pub fn range_over_segments(f: &RealFn, segments: &[MonotoneSegment]) -> Result<IntervalSet> {
    let mut parts = Vec::new();
    for seg in segments {
        let a = f.eval(seg.interval.lo)?;
        let b = f.eval(seg.interval.hi)?;
        parts.push(Interval::closed(a.min(b), a.max(b)));
    }
    Ok(IntervalSet::new(parts))
}

/// Preimage `{x in segments : f(x) in [y_lo, y_hi]}` computed segment by
/// segment via monotone inversion. Endpoint flags follow the bin's flags
/// where the cut is interior and the segment's flags where it is not.
pub fn preimage_over_segments(
    f: &RealFn,
    segments: &[MonotoneSegment],
    bin: &Interval,
) -> Result<IntervalSet> {
    let mut parts = Vec::new();
    for seg in segments {
        let a = seg.interval.lo;
        let b = seg.interval.hi;
        let fa = f.eval(a)?;
        let fb = f.eval(b)?;
        match seg.direction {
            Direction::Constant => {
                let v = f.eval(seg.interval.midpoint())?;
                if bin.contains(v) {
                    parts.push(seg.interval);
                }
            }
            Direction::Increasing | Direction::Decreasing => {
                let (f_min, f_max) = (fa.min(fb), fa.max(fb));
                if bin.lo > f_max || bin.hi < f_min {
                    continue;
                }
                let x_at = |y: f64| -> Result<f64> {
                    if y <= f_min {
                        Ok(if fa <= fb { a } else { b })
                    } else if y >= f_max {
                        Ok(if fa <= fb { b } else { a })
                    } else {
                        invert_on_segment(f, seg, y)
                    }
                };
                let (x1, x2) = (x_at(bin.lo)?, x_at(bin.hi)?);
                let (mut lo, mut hi) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
                lo = lo.max(a);
                hi = hi.min(b);
                if hi < lo {
                    continue;
                }
                // carry the segment's own flags at its ends, the bin's flags
                // (orientation-adjusted) at interior cuts
                let increasing = seg.direction == Direction::Increasing;
                let lo_closed = if lo == a {
                    seg.interval.lo_closed
                } else if increasing {
                    bin.lo_closed
                } else {
                    bin.hi_closed
                };
                let hi_closed = if hi == b {
                    seg.interval.hi_closed
                } else if increasing {
                    bin.hi_closed
                } else {
                    bin.lo_closed
                };
                let iv = Interval::new(lo, hi, lo_closed, hi_closed);
                if !iv.is_empty() {
                    parts.push(iv);
                }
            }
        }
    }
    Ok(IntervalSet::new(parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::realfn::parse;

    #[test]
    fn single_root_of_linear_weight() {
        let f = parse("x - 1", Interval::closed(0.0, 3.0), &Params::new()).unwrap();
        let roots = isolate_roots(&f, f.domain(), default_grid_h(f.domain())).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn positive_function_has_no_roots() {
        let f = parse("1", Interval::closed(0.0, 1.0), &Params::new()).unwrap();
        let roots = isolate_roots(&f, f.domain(), default_grid_h(f.domain())).unwrap();
        assert!(roots.is_empty());
    }

    #[test]
    fn tilted_gaussian_weight_root() {
        let mut params = Params::new();
        params.insert("z".into(), 2.0);
        let f = parse("(1 + z*x)*phi(x)", Interval::closed(-10.0, 10.0), &params).unwrap();
        let roots = isolate_roots(&f, f.domain(), default_grid_h(f.domain())).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] + 0.5).abs() <= 1e-10);
    }

    #[test]
    fn shift_link_is_one_increasing_segment() {
        let q = parse("x + 2", Interval::closed_open(0.0, 1.0), &Params::new()).unwrap();
        let segs = monotone_segments(&q, q.domain(), 1e-3).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].direction, Direction::Increasing);
    }

    #[test]
    fn cubic_link_splits_into_three_segments() {
        let q = parse("2 - x + 12*x^2 - 12*x^3", Interval::closed(0.0, 1.0), &Params::new()).unwrap();
        let segs = monotone_segments(&q, q.domain(), 1e-4).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0].direction, Direction::Decreasing);
        assert_eq!(segs[1].direction, Direction::Increasing);
        assert_eq!(segs[2].direction, Direction::Decreasing);
        // breakpoints are the roots of -1 + 24x - 36x^2, i.e. (2 ∓ sqrt(3))/6
        let b1 = (2.0 - 3.0_f64.sqrt()) / 6.0;
        let b2 = (2.0 + 3.0_f64.sqrt()) / 6.0;
        assert!((segs[0].interval.hi - b1).abs() <= 1e-9);
        assert!((segs[1].interval.hi - b2).abs() <= 1e-9);
    }

    #[test]
    fn constant_function_is_one_constant_segment() {
        let f = parse("2", Interval::closed(0.0, 1.0), &Params::new()).unwrap();
        let segs = monotone_segments(&f, f.domain(), 1e-3).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].direction, Direction::Constant);
    }

    #[test]
    fn inversion_examples() {
        // the function lives on the closed hull even when the segment is half-open
        let f = parse("x + 2", Interval::closed(0.0, 1.0), &Params::new()).unwrap();
        let seg = MonotoneSegment {
            interval: Interval::closed_open(0.0, 1.0),
            direction: Direction::Increasing,
        };
        let x = invert_on_segment(&f, &seg, 2.5).unwrap();
        assert!((x - 0.5).abs() <= 1e-10);

        let sq = parse("x^2", Interval::closed(0.0, 2.0), &Params::new()).unwrap();
        let seg = MonotoneSegment {
            interval: Interval::closed(0.0, 2.0),
            direction: Direction::Increasing,
        };
        let x = invert_on_segment(&sq, &seg, 2.0).unwrap();
        assert!((x - 2.0_f64.sqrt()).abs() <= 1e-10);
        assert!((sq.eval(x).unwrap() - 2.0).abs() <= 1e-10);

        assert!(matches!(
            invert_on_segment(&sq, &seg, 5.0),
            Err(Error::InversionOutOfRange { .. })
        ));
    }

    #[test]
    fn cubic_link_final_branch_inverts_to_one() {
        let q = parse("2 - x + 12*x^2 - 12*x^3", Interval::closed(0.0, 1.0), &Params::new()).unwrap();
        let segs = monotone_segments(&q, q.domain(), 1e-4).unwrap();
        let last = segs.last().unwrap();
        // Q(1) = 2 - 1 + 12 - 12 = 1 on the final decreasing branch
        let x = invert_on_segment(&q, last, 1.0).unwrap();
        assert!((x - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn preimage_of_square_on_split_domain() {
        let f = parse("x^2", Interval::closed(-2.0, 2.0), &Params::new()).unwrap();
        let segs = monotone_segments(&f, f.domain(), 1e-3).unwrap();
        let pre = preimage_over_segments(&f, &segs, &Interval::closed_open(1.0, 4.0)).unwrap();
        // {x : 1 <= x^2 < 4} = (-2, -1] ∪ [1, 2)
        assert_eq!(pre.intervals().len(), 2);
        assert!((pre.measure() - 2.0).abs() <= 1e-9);
        assert!(pre.contains(-1.0));
        assert!(pre.contains(1.5));
        assert!(!pre.contains(0.0));
    }
}
