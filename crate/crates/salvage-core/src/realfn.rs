//! Piecewise scalar functions over an interval-set domain.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr, Params};
use crate::interval::{Interval, IntervalSet};

/// Anything that can be evaluated at a point. Quadrature, root isolation, and
/// the weight transforms are generic over this.
pub trait Function1D {
    fn eval(&self, x: f64) -> Result<f64>;
}

impl<F: Fn(f64) -> Result<f64>> Function1D for F {
    fn eval(&self, x: f64) -> Result<f64> {
        self(x)
    }
}

/// A parsed, evaluable, differentiable function: an ordered list of
/// `(interval, expression)` pieces closed over its parameter values.
///
/// Piece intervals are pairwise disjoint and sorted; their union is the
/// domain. By convention each piece is closed on the left and open on the
/// right except the final piece, which is closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFn {
    pieces: Vec<(Interval, Expr)>,
    domain: IntervalSet,
    params: Params,
}

impl RealFn {
    /// Builds a piecewise function, normalizing boundary flags to the
    /// half-open convention and rejecting overlapping pieces.
    pub fn from_pieces(mut pieces: Vec<(Interval, Expr)>, params: Params) -> Result<RealFn> {
        pieces.retain(|(iv, _)| !iv.is_empty());
        pieces.sort_by(|a, b| a.0.lo.partial_cmp(&b.0.lo).unwrap());
        for w in pieces.windows(2) {
            if w[1].0.lo < w[0].0.hi {
                return Err(Error::OverlappingPieces { at: w[1].0.lo });
            }
        }
        // closed-left, open-right at seams shared with the next piece; the
        // final piece (and any piece followed by a gap) keeps its right end
        let seams: Vec<bool> = (0..pieces.len())
            .map(|i| match pieces.get(i + 1) {
                Some(next) => next.0.lo == pieces[i].0.hi,
                None => false,
            })
            .collect();
        let normalized: Vec<(Interval, Expr)> = pieces
            .into_iter()
            .zip(seams)
            .map(|((iv, e), seam)| (Interval::new(iv.lo, iv.hi, true, !seam), e))
            .collect();
        let domain = IntervalSet::new(normalized.iter().map(|(iv, _)| *iv).collect());
        Ok(RealFn {
            pieces: normalized,
            domain,
            params,
        })
    }

    /// Single-piece function from an already-parsed expression.
    pub fn from_expr(expr: Expr, domain: Interval, params: Params) -> Result<RealFn> {
        RealFn::from_pieces(vec![(domain, expr)], params)
    }

    pub fn domain(&self) -> &IntervalSet {
        &self.domain
    }

    pub fn pieces(&self) -> &[(Interval, Expr)] {
        &self.pieces
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Evaluates at `x`; `x` outside the domain is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        for (iv, e) in &self.pieces {
            if iv.contains(x) {
                return e.eval(x, &self.params);
            }
        }
        Err(Error::OutOfDomain { x })
    }

    /// Exact derivative, piece by piece; piece boundaries are unchanged.
    pub fn differentiate(&self) -> RealFn {
        RealFn {
            pieces: self
                .pieces
                .iter()
                .map(|(iv, e)| (*iv, e.differentiate()))
                .collect(),
            domain: self.domain.clone(),
            params: self.params.clone(),
        }
    }

    /// Restricts the function to `domain ∩ set` (pieces are clipped).
    pub fn restrict(&self, set: &IntervalSet) -> RealFn {
        let mut pieces = Vec::new();
        for (iv, e) in &self.pieces {
            for cut in set.intervals() {
                if let Some(clipped) = iv.intersect(cut) {
                    pieces.push((clipped, e.clone()));
                }
            }
        }
        let domain = IntervalSet::new(pieces.iter().map(|(iv, _)| *iv).collect());
        RealFn {
            pieces,
            domain,
            params: self.params.clone(),
        }
    }
}

impl Function1D for RealFn {
    fn eval(&self, x: f64) -> Result<f64> {
        RealFn::eval(self, x)
    }
}

impl Function1D for &RealFn {
    fn eval(&self, x: f64) -> Result<f64> {
        RealFn::eval(self, x)
    }
}

/// Parses a single-expression function over `domain`.
pub fn parse(text: &str, domain: Interval, params: &Params) -> Result<RealFn> {
    let expr = parse_expr(text, params)?;
    RealFn::from_expr(expr, domain, params.clone())
}
