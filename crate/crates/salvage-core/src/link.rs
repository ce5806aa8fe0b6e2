//! Link-function route: pair each negative-weight point `x` with a
//! positive-weight point `Q(x)` carrying the same marginal effect, check the
//! net-weight and Jacobian conditions, and build the transformed weights
//!
//! ```text
//! w~(x) = omega(Q^{-1}(x)) + omega(x)   on the image Q(x_minus)
//!         omega(x)                      on x_plus \ image
//!         0                             elsewhere
//! ```
//!
//! The four conditions reported:
//!
//! * A1: `g'(x) = g'(Q(x))` on `x_minus` (sup residual over a grid);
//! * A2: `omega(x) + omega(Q(x)) >= 0` on `x_minus` (grid minimum);
//! * A3: `∫ omega (1 - Q') g' dx = 0` over `x_minus` (quadrature residual);
//! * A4: `∫ omega (1 - Q') dx = 0` over `x_minus` (quadrature residual).
//!
//! A1 and A2 make the transform nonnegative and well defined; A3 and A4 are
//! the Jacobian identities behind value and mass preservation for an
//! orientation-preserving `Q`. They are reported as computed residuals, never
//! assumed: a decreasing `Q` can fail A3/A4 as written yet still preserve the
//! estimand (the change of variables flips orientation), which is exactly why
//! [`verify_prop1`] measures the preservation identities directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::partition::SignPartition;
use crate::quad::{integrate_fn, QuadratureResult, TruncationPolicy};
use crate::realfn::{Function1D, RealFn};
use crate::roots::{invert_on_segment, monotone_segments, Direction, MonotoneSegment};

/// Tolerances shared by the condition checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute quadrature tolerance.
    pub quad_tol: f64,
    /// Pass/fail tolerance for the condition residuals.
    pub a_tol: f64,
    /// Number of grid points for the pointwise checks.
    pub grid_points: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad_tol: 1e-10, a_tol: 1e-9, grid_points: 1024 }
    }
}

/// How to resolve a link that is not injective on `x_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchPolicy {
    /// Refuse the link (default).
    Reject,
    /// Use monotone segment `k` only; coverage of `x_minus` becomes partial.
    Segment(usize),
}

/// A validated link: a strictly monotone map from (part of) `x_minus` into
/// the domain, with its derivative, covered region, and oriented image.
#[derive(Debug, Clone)]
pub struct LinkFn {
    pub q: RealFn,
    pub q_prime: RealFn,
    /// Monotone segments of `q` actually used (one, unless `x_minus` is empty).
    pub segments: Vec<MonotoneSegment>,
    /// Portion of `x_minus` the link covers.
    pub covered: IntervalSet,
    /// `Q(covered)`, with endpoint flags mapped through the orientation.
    pub image: IntervalSet,
    /// True when a branch policy shrank the covered region.
    pub partial_coverage: bool,
}

/// A finding about a candidate link, reported rather than silently dropped.
#[derive(Debug, Clone, PartialEq)]
pub enum LinkIssue {
    /// More than one monotone segment on `x_minus` (or a flat one).
    NotInjective { segments: Vec<MonotoneSegment> },
    /// Some `Q(x)` leaves the positive region; the worst offender is kept.
    ImageEscape { x: f64, qx: f64, distance: f64 },
    /// A branch policy was applied, so only part of `x_minus` is covered.
    PartialCoverage { covered_measure: f64, x_minus_measure: f64 },
}

/// Residuals and verdicts for conditions A1-A4.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// sup over the grid of `|g'(x) - g'(Q(x))|`.
    pub a1_sup_residual: f64,
    /// min over the grid of `omega(x) + omega(Q(x))`.
    pub a2_min: f64,
    /// `∫ omega (1 - Q') g' dx` over the covered region.
    pub a3_integral: QuadratureResult,
    /// `∫ omega (1 - Q') dx` over the covered region.
    pub a4_integral: QuadratureResult,
    pub a1_pass: bool,
    pub a2_pass: bool,
    pub a3_pass: bool,
    pub a4_pass: bool,
    /// Grid points where `Q(x)` left the domain of `omega`/`g'`; they are
    /// excluded from the A1/A2 scans and surface as an image-escape issue.
    pub skipped_points: usize,
    pub grid_points: usize,
}

impl ConditionReport {
    fn trivial(tols: &Tolerances) -> ConditionReport {
        ConditionReport {
            a1_sup_residual: 0.0,
            a2_min: 0.0,
            a3_integral: QuadratureResult::zero(),
            a4_integral: QuadratureResult::zero(),
            a1_pass: true,
            a2_pass: true,
            a3_pass: true,
            a4_pass: true,
            skipped_points: 0,
            grid_points: tols.grid_points,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.a1_pass && self.a2_pass && self.a3_pass && self.a4_pass
    }

    /// A1 and A2 alone decide whether the transform is constructible.
    pub fn constructible(&self) -> bool {
        self.a1_pass && self.a2_pass
    }
}

/// Everything learned about a candidate link in one pass: validity issues and
/// the condition residuals (computed with out-of-domain grid points skipped,
/// so diagnostics survive even an invalid link).
#[derive(Debug, Clone)]
pub struct LinkAssessment {
    pub link: Option<LinkFn>,
    pub issues: Vec<LinkIssue>,
    pub conditions: ConditionReport,
}

impl LinkAssessment {
    pub fn is_valid(&self) -> bool {
        self.link.is_some()
            && !self
                .issues
                .iter()
                .any(|i| matches!(i, LinkIssue::NotInjective { .. } | LinkIssue::ImageEscape { .. }))
    }
}

fn oriented_image(q: &RealFn, seg: &MonotoneSegment) -> Result<Interval> {
    let fa = q.eval(seg.interval.lo)?;
    let fb = q.eval(seg.interval.hi)?;
    Ok(match seg.direction {
        Direction::Decreasing => {
            Interval::new(fb, fa, seg.interval.hi_closed, seg.interval.lo_closed)
        }
        _ => Interval::new(fa, fb, seg.interval.lo_closed, seg.interval.hi_closed),
    })
}

fn distance_to_set(set: &IntervalSet, v: f64) -> f64 {
    if set.contains(v) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for iv in set.intervals() {
        let d = if v < iv.lo {
            iv.lo - v
        } else if v > iv.hi {
            v - iv.hi
        } else {
            0.0
        };
        best = best.min(d);
    }
    best
}

/// Builds a [`LinkFn`] from a candidate map, enforcing injectivity (modulo
/// the branch policy) and containment of the image in `x_plus`.
pub fn build_link(
    q: &RealFn,
    part: &SignPartition,
    policy: BranchPolicy,
    grid_h: f64,
) -> Result<LinkFn> {
    let q_prime = q.differentiate();
    if part.x_minus.is_empty() {
        return Ok(LinkFn {
            q: q.clone(),
            q_prime,
            segments: Vec::new(),
            covered: IntervalSet::empty(),
            image: IntervalSet::empty(),
            partial_coverage: false,
        });
    }
    let segments: Vec<MonotoneSegment> = monotone_segments(q, &part.x_minus, grid_h)?
        .into_iter()
        .filter(|s| s.interval.measure() > 0.0)
        .collect();
    let strict = segments.len() == 1 && segments[0].direction != Direction::Constant;
    let chosen = if strict {
        segments[0]
    } else {
        match policy {
            BranchPolicy::Reject => return Err(Error::LinkNotInjective { segments }),
            BranchPolicy::Segment(k) => {
                let seg = *segments.get(k).ok_or(Error::BranchOutOfRange {
                    index: k,
                    available: segments.len(),
                })?;
                if seg.direction == Direction::Constant {
                    return Err(Error::LinkNotInjective { segments });
                }
                seg
            }
        }
    };
    let covered = IntervalSet::from_interval(chosen.interval);
    let image = IntervalSet::from_interval(oriented_image(q, &chosen)?);

    // numeric containment check with a witness at the worst violation
    let mut worst: Option<(f64, f64, f64)> = None;
    for x in covered.sample_grid(512) {
        let qx = q.eval(x)?;
        let d = distance_to_set(&part.x_plus, qx);
        if d > 1e-9 && worst.is_none_or(|(_, _, bd)| d > bd) {
            worst = Some((x, qx, d));
        }
    }
    if let Some((x, qx, _)) = worst {
        return Err(Error::LinkImageEscapes { x, qx });
    }
    Ok(LinkFn {
        q: q.clone(),
        q_prime,
        segments: vec![chosen],
        covered,
        image,
        partial_coverage: !strict,
    })
}

fn condition_scan(
    omega: &RealFn,
    g_prime: &RealFn,
    q: &RealFn,
    region: &IntervalSet,
    part: &SignPartition,
    tols: &Tolerances,
) -> Result<(ConditionReport, Option<LinkIssue>)> {
    if region.is_empty() {
        return Ok((ConditionReport::trivial(tols), None));
    }
    let q_prime = q.differentiate();
    let grid = region.sample_grid(tols.grid_points);
    let mut a1_sup = 0.0f64;
    let mut a2_min = f64::INFINITY;
    let mut skipped = 0usize;
    let mut worst_escape: Option<(f64, f64, f64)> = None;
    let grid_len = grid.len();
    for x in grid {
        let qx = q.eval(x)?;
        let d = distance_to_set(&part.x_plus, qx);
        if d > 1e-9 && worst_escape.is_none_or(|(_, _, bd)| d > bd) {
            worst_escape = Some((x, qx, d));
        }
        match (g_prime.eval(qx), omega.eval(qx)) {
            (Ok(gq), Ok(wq)) => {
                a1_sup = a1_sup.max((g_prime.eval(x)? - gq).abs());
                a2_min = a2_min.min(omega.eval(x)? + wq);
            }
            _ => skipped += 1,
        }
    }
    if a2_min == f64::INFINITY {
        a2_min = 0.0;
    }

    let seams = seam_edges(&[omega, g_prime, q], region);
    let a3 = integrate_product(
        &|x| Ok(omega.eval(x)? * (1.0 - q_prime.eval(x)?) * g_prime.eval(x)?),
        region,
        &seams,
        tols.quad_tol,
    )?;
    let a4 = integrate_product(
        &|x| Ok(omega.eval(x)? * (1.0 - q_prime.eval(x)?)),
        region,
        &seams,
        tols.quad_tol,
    )?;

    let a3_tol = tols.a_tol.max(3.0 * a3.abs_error_estimate);
    let a4_tol = tols.a_tol.max(3.0 * a4.abs_error_estimate);
    let report = ConditionReport {
        a1_sup_residual: a1_sup,
        a2_min,
        a3_integral: a3,
        a4_integral: a4,
        a1_pass: a1_sup <= tols.a_tol,
        a2_pass: a2_min >= -tols.a_tol,
        a3_pass: a3.value.abs() <= a3_tol,
        a4_pass: a4.value.abs() <= a4_tol,
        skipped_points: skipped,
        grid_points: grid_len,
    };
    let issue = worst_escape.map(|(x, qx, distance)| LinkIssue::ImageEscape { x, qx, distance });
    Ok((report, issue))
}

/// Full diagnostic pass over a candidate link: validity plus conditions, with
/// out-of-domain points skipped so an invalid link still yields residuals.
pub fn assess_link(
    omega: &RealFn,
    g_prime: &RealFn,
    q: &RealFn,
    part: &SignPartition,
    tols: &Tolerances,
    policy: BranchPolicy,
    grid_h: f64,
) -> Result<LinkAssessment> {
    let mut issues = Vec::new();
    let link = match build_link(q, part, policy, grid_h) {
        Ok(l) => {
            if l.partial_coverage {
                issues.push(LinkIssue::PartialCoverage {
                    covered_measure: l.covered.measure(),
                    x_minus_measure: part.x_minus.measure(),
                });
            }
            Some(l)
        }
        Err(Error::LinkNotInjective { segments }) => {
            issues.push(LinkIssue::NotInjective { segments });
            None
        }
        Err(Error::LinkImageEscapes { .. }) => None, // witness re-found below
        Err(e) => return Err(e),
    };
    let region = link
        .as_ref()
        .map(|l| l.covered.clone())
        .filter(|c| !c.is_empty() || part.x_minus.is_empty())
        .unwrap_or_else(|| part.x_minus.clone());
    let (conditions, escape) = condition_scan(omega, g_prime, q, &region, part, tols)?;
    if let Some(issue) = escape {
        issues.push(issue);
    }
    Ok(LinkAssessment { link, issues, conditions })
}

/// Condition check for an already-validated link.
pub fn check_link(
    omega: &RealFn,
    g_prime: &RealFn,
    link: &LinkFn,
    part: &SignPartition,
    tols: &Tolerances,
) -> Result<ConditionReport> {
    let (report, _) = condition_scan(omega, g_prime, &link.q, &link.covered, part, tols)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// transformed weights

/// One piece of a transformed weight function.
#[derive(Debug, Clone)]
pub struct WeightPiece {
    pub interval: Interval,
    pub kind: WeightKind,
}

#[derive(Debug, Clone)]
pub enum WeightKind {
    /// The original weight, unchanged.
    Original(RealFn),
    /// `omega(Q^{-1}(x)) + omega(x)`, inverting `q` on the stored segment.
    LinkSum { omega: RealFn, q: RealFn, segment: MonotoneSegment },
    /// A constant (the binned dominance construction).
    Const(f64),
}

/// A nonnegative piecewise weight supported on `x_plus`; zero elsewhere.
#[derive(Debug, Clone)]
pub struct PiecewiseWeight {
    pieces: Vec<WeightPiece>,
    support: IntervalSet,
    nonneg_certificate: f64,
}

impl PiecewiseWeight {
    /// Assembles pieces, sorts them, and certifies nonnegativity on a
    /// 4096-point support grid.
    pub fn new(mut pieces: Vec<WeightPiece>) -> Result<PiecewiseWeight> {
        pieces.retain(|p| !p.interval.is_empty());
        pieces.sort_by(|a, b| a.interval.lo.partial_cmp(&b.interval.lo).unwrap());
        let support = IntervalSet::new(pieces.iter().map(|p| p.interval).collect());
        let mut w = PiecewiseWeight { pieces, support, nonneg_certificate: 0.0 };
        let mut min = f64::INFINITY;
        for x in w.support.sample_grid(4096) {
            min = min.min(w.eval(x)?);
        }
        w.nonneg_certificate = if min.is_finite() { min } else { 0.0 };
        Ok(w)
    }

    pub fn pieces(&self) -> &[WeightPiece] {
        &self.pieces
    }

    pub fn support(&self) -> &IntervalSet {
        &self.support
    }

    /// Minimum over the certification grid; `>= -1e-12` whenever the
    /// producing checks passed.
    pub fn nonneg_certificate(&self) -> f64 {
        self.nonneg_certificate
    }

    /// Evaluates the weight; zero off the support.
    pub fn eval(&self, x: f64) -> Result<f64> {
        // pieces are sorted by lo and have disjoint interiors, so only the
        // last two pieces with lo <= x can contain x
        let idx = self.pieces.partition_point(|p| p.interval.lo <= x);
        for p in self.pieces[..idx].iter().rev().take(2) {
            if p.interval.contains(x) {
                return match &p.kind {
                    WeightKind::Original(f) => f.eval(x),
                    WeightKind::LinkSum { omega, q, segment } => {
                        let pre = invert_on_segment(q, segment, x)?;
                        Ok(omega.eval(pre)? + omega.eval(x)?)
                    }
                    WeightKind::Const(c) => Ok(*c),
                };
            }
        }
        Ok(0.0)
    }

    /// Piece boundaries, for seam-aware integration.
    pub fn seams(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.pieces.len() * 2);
        for p in &self.pieces {
            edges.push(p.interval.lo);
            edges.push(p.interval.hi);
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        edges
    }
}

impl Function1D for PiecewiseWeight {
    fn eval(&self, x: f64) -> Result<f64> {
        PiecewiseWeight::eval(self, x)
    }
}

/// Builds the link-route transformed weights.
pub fn transform_weights_link(
    omega: &RealFn,
    link: &LinkFn,
    part: &SignPartition,
) -> Result<PiecewiseWeight> {
    let mut pieces = Vec::new();
    if let Some(segment) = link.segments.first() {
        for iv in link.image.intervals() {
            pieces.push(WeightPiece {
                interval: *iv,
                kind: WeightKind::LinkSum {
                    omega: omega.clone(),
                    q: link.q.clone(),
                    segment: *segment,
                },
            });
        }
    }
    for iv in part.x_plus.subtract(&link.image).intervals() {
        pieces.push(WeightPiece { interval: *iv, kind: WeightKind::Original(omega.clone()) });
    }
    PiecewiseWeight::new(pieces)
}

// ---------------------------------------------------------------------------
// integration helpers and the preservation identities

/// Piece edges of several functions that fall strictly inside `set`.
pub(crate) fn seam_edges(fns: &[&RealFn], set: &IntervalSet) -> Vec<f64> {
    let mut edges = Vec::new();
    for f in fns {
        for (iv, _) in f.pieces() {
            for e in [iv.lo, iv.hi] {
                if e.is_finite() && set.intervals().iter().any(|s| e > s.lo && e < s.hi) {
                    edges.push(e);
                }
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    edges
}

/// Integrates a callable over `set`, subdividing panels at the given seams so
/// Gauss-Kronrod only ever sees smooth integrands.
pub(crate) fn integrate_product<F: Function1D + ?Sized>(
    f: &F,
    set: &IntervalSet,
    seams: &[f64],
    tol: f64,
) -> Result<QuadratureResult> {
    let mut chunks: Vec<Interval> = Vec::new();
    for iv in set.intervals() {
        let mut lo = iv.lo;
        for &e in seams.iter().filter(|e| **e > iv.lo && **e < iv.hi) {
            chunks.push(Interval::new(lo, e, true, false));
            lo = e;
        }
        chunks.push(Interval::new(lo, iv.hi, true, true));
    }
    chunks.retain(|c| !c.is_empty());
    if chunks.is_empty() {
        return Ok(QuadratureResult::zero());
    }
    let share = tol / chunks.len() as f64;
    let mut total = QuadratureResult::zero();
    for c in chunks {
        let r = integrate_fn(f, &IntervalSet::from_interval(c), share, TruncationPolicy::default())?;
        total.value += r.value;
        total.abs_error_estimate += r.abs_error_estimate;
        total.subdivisions += r.subdivisions;
    }
    Ok(total)
}

/// `beta = ∫_S w(x) g'(x) dx` for the original weight function.
pub fn beta(w: &RealFn, g_prime: &RealFn, set: &IntervalSet, tol: f64) -> Result<QuadratureResult> {
    let seams = seam_edges(&[w, g_prime], set);
    integrate_product(&|x| Ok(w.eval(x)? * g_prime.eval(x)?), set, &seams, tol)
}

/// `beta = ∫_S w~(x) g'(x) dx` for a transformed weight.
pub fn beta_weighted(
    w: &PiecewiseWeight,
    g_prime: &RealFn,
    set: &IntervalSet,
    tol: f64,
) -> Result<QuadratureResult> {
    let mut seams = seam_edges(&[g_prime], set);
    seams.extend(w.seams());
    seams.sort_by(|a, b| a.partial_cmp(b).unwrap());
    seams.dedup();
    integrate_product(&|x| Ok(w.eval(x)? * g_prime.eval(x)?), set, &seams, tol)
}

/// Total weight mass `∫_S w dx`.
pub fn mass(w: &RealFn, set: &IntervalSet, tol: f64) -> Result<QuadratureResult> {
    let seams = seam_edges(&[w], set);
    integrate_product(&|x| w.eval(x), set, &seams, tol)
}

pub fn mass_weighted(w: &PiecewiseWeight, set: &IntervalSet, tol: f64) -> Result<QuadratureResult> {
    let seams = w.seams();
    integrate_product(&|x| w.eval(x), set, &seams, tol)
}

/// Residuals of the two preservation identities:
///
/// * statement 1: `∫_X omega g' = ∫_{X \ x_minus} w~ g'`
/// * statement 2: `∫_X omega    = ∫_{X \ x_minus} w~`
pub fn verify_prop1(
    omega: &RealFn,
    omega_tilde: &PiecewiseWeight,
    g_prime: &RealFn,
    domain: &IntervalSet,
    part: &SignPartition,
    tol: f64,
) -> Result<(f64, f64)> {
    let keep = domain.subtract(&part.x_minus);
    let b_orig = beta(omega, g_prime, domain, tol)?;
    let b_tilde = beta_weighted(omega_tilde, g_prime, &keep, tol)?;
    let m_orig = mass(omega, domain, tol)?;
    let m_tilde = mass_weighted(omega_tilde, &keep, tol)?;
    Ok(((b_orig.value - b_tilde.value).abs(), (m_orig.value - m_tilde.value).abs()))
}
