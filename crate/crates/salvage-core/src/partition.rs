//! Sign partition of the domain by the weight function.

use alloc::vec::Vec;

use crate::error::Result;
use crate::interval::{Interval, IntervalSet};
use crate::realfn::RealFn;
use crate::roots::{default_grid_h, isolate_roots};

/// The domain split by the sign of the weight: `x_minus = {omega < 0}`,
/// `x_plus = {omega >= 0}`, and the subset of `x_plus` whose marginal-effect
/// values are also attained on `x_minus` (empty until matched against a
/// specific `g'`; see [`crate::dominance::match_set`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SignPartition {
    pub x_minus: IntervalSet,
    pub x_plus: IntervalSet,
    pub x_plus_matched: IntervalSet,
}

impl SignPartition {
    /// Full domain `x_minus ∪ x_plus`.
    pub fn domain(&self) -> IntervalSet {
        self.x_minus.union(&self.x_plus)
    }
}

/// Splits `domain` at the sign changes of `omega`.
///
/// Boundary points where `omega = 0` belong to `x_plus`, so negative cells
/// are open on the side that touches a root.
pub fn partition_signs(omega: &RealFn, domain: &IntervalSet) -> Result<SignPartition> {
    let roots = isolate_roots(omega, domain, default_grid_h(domain))?;
    let mut minus: Vec<Interval> = Vec::new();
    let mut plus: Vec<Interval> = Vec::new();
    for iv in domain.intervals() {
        let mut cuts: Vec<f64> = Vec::new();
        cuts.push(iv.lo);
        cuts.extend(roots.iter().copied().filter(|r| *r > iv.lo && *r < iv.hi));
        cuts.push(iv.hi);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cell = Interval::new(a, b, a != iv.lo || iv.lo_closed, b != iv.hi || iv.hi_closed);
            if cell.is_empty() {
                continue;
            }
            if omega.eval(cell.midpoint())? < 0.0 {
                // roots bordering a negative cell stay with x_plus
                let lo_closed = cell.lo_closed && !roots.contains(&a);
                let hi_closed = cell.hi_closed && !roots.contains(&b);
                minus.push(Interval::new(a, b, lo_closed, hi_closed));
            } else {
                plus.push(cell);
            }
        }
    }
    // boundary roots between two negative cells would otherwise vanish
    for r in &roots {
        if minus.iter().any(|iv| iv.lo == *r || iv.hi == *r)
            && !plus.iter().any(|iv| iv.contains(*r))
        {
            plus.push(Interval::point(*r));
        }
    }
    Ok(SignPartition {
        x_minus: IntervalSet::new(minus),
        x_plus: IntervalSet::new(plus),
        x_plus_matched: IntervalSet::empty(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::realfn::parse;

    #[test]
    fn linear_weight_splits_at_one() {
        let omega = parse("x - 1", Interval::closed(0.0, 3.0), &Params::new()).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        assert_eq!(part.x_minus.intervals(), &[Interval::closed_open(0.0, 1.0)]);
        assert_eq!(part.x_plus.intervals(), &[Interval::closed(1.0, 3.0)]);
        assert!(part.x_plus.contains(1.0));
        assert!(!part.x_minus.contains(1.0));
    }

    #[test]
    fn positive_weight_has_empty_negative_region() {
        let omega = parse("phi(x)", Interval::closed(-5.0, 5.0), &Params::new()).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        assert!(part.x_minus.is_empty());
        assert_eq!(part.x_plus.measure(), 10.0);
    }

    #[test]
    fn tilted_gaussian_weight_is_negative_left_of_minus_half() {
        let mut params = Params::new();
        params.insert("z".into(), 2.0);
        let omega = parse("(1 + z*x)*phi(x)", Interval::closed(-10.0, 10.0), &params).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        assert_eq!(part.x_minus.intervals().len(), 1);
        let m = part.x_minus.intervals()[0];
        assert_eq!(m.lo, -10.0);
        assert!((m.hi + 0.5).abs() <= 1e-10);
        assert!(!m.hi_closed);
        assert!((part.x_plus.measure() - 10.5).abs() <= 1e-9);
    }

    #[test]
    fn negative_shock_flips_the_partition() {
        let mut params = Params::new();
        params.insert("z".into(), -2.0);
        let omega = parse("(1 + z*x)*phi(x)", Interval::closed(-10.0, 10.0), &params).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        let m = part.x_minus.intervals()[0];
        assert!((m.lo - 0.5).abs() <= 1e-10);
        assert_eq!(m.hi, 10.0);
        assert!(part.x_plus.contains(0.0));
    }
}
