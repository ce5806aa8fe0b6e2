//! Measure-dominance route: no link function required.
//!
//! The marginal-effect axis is cut into value bins; each bin `B` induces two
//! masses through the weight,
//!
//! ```text
//! mu_minus(B) = -∫ omega over {x in x_minus : g'(x) in B}
//! mu_plus(B)  =  ∫ omega over {x in x_plus  : g'(x) in B}
//! ```
//!
//! Dominance holds when `mu_minus <= mu_plus` in every bin. The transformed
//! weight is then the step function that spreads each bin's net mass
//! `(mu_plus - mu_minus)` uniformly over the bin's positive preimage, leaves
//! `omega` untouched on bins with no negative mass, and vanishes on
//! `x_minus`. Refining the bins drives the step weights to the exact
//! transform, and the preservation residual `|∫ omega g' - ∫ w~_n g'|` is
//! recorded per refinement step so convergence is observable.
//!
//! Bin edges start equal-width over the attained range of `g'`, with fold
//! values inserted so no preimage straddles a turning point. Edges are then
//! added until every positive-side preimage cell is narrower than
//! `measure(domain) / (2 n)`: the step value is a cell average, so cell width
//! in `x` is what controls the sup-norm distance to the limit, and a pure
//! value-space grid leaves cells wide wherever `g'` is flat.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::link::{
    beta, beta_weighted, integrate_product, mass, mass_weighted, seam_edges, PiecewiseWeight,
    WeightKind, WeightPiece,
};
use crate::partition::SignPartition;
use crate::realfn::RealFn;
use crate::roots::{
    monotone_segments, preimage_over_segments, range_over_segments, MonotoneSegment,
};

/// Value-axis bin edges for the step approximation of `g'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueBins {
    /// Strictly increasing edges `y_0 < ... < y_m`; bins are `[y_k, y_{k+1})`
    /// with the top bin closed.
    pub edges: Vec<f64>,
    /// Set when `g'` is constant: a single degenerate bin.
    pub constant: bool,
}

impl ValueBins {
    pub fn bin_count(&self) -> usize {
        if self.constant {
            1
        } else {
            self.edges.len().saturating_sub(1)
        }
    }

    /// The `k`-th bin as an interval (top bin closed).
    pub fn bin(&self, k: usize) -> Interval {
        if self.constant {
            return Interval::point(self.edges[0]);
        }
        let last = k + 2 == self.edges.len();
        Interval::new(self.edges[k], self.edges[k + 1], true, last)
    }
}

/// Per-bin preimages and induced masses.
#[derive(Debug, Clone)]
pub struct BinMeasures {
    pub bin: Interval,
    pub preimage_minus: IntervalSet,
    pub preimage_plus: IntervalSet,
    /// `-∫ omega` over the negative preimage (nonnegative up to quadrature error).
    pub mu_minus: f64,
    /// `∫ omega` over the positive preimage.
    pub mu_plus: f64,
    /// Lebesgue measure of the positive preimage.
    pub leb_plus: f64,
    pub mu_minus_err: f64,
    pub mu_plus_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceVerdict {
    Dominated,
    Violated,
}

/// Outcome of one dominance pass at a given refinement level.
#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub n_requested: usize,
    pub bins: ValueBins,
    pub measures: Vec<BinMeasures>,
    pub violated_bins: Vec<usize>,
    pub verdict: DominanceVerdict,
    /// Step transformed weights; populated only when dominated.
    pub omega_tilde_n: Option<PiecewiseWeight>,
    /// `|∫ omega g' - ∫ w~_n g'|`, when the transform exists.
    pub preservation_residual: Option<f64>,
    /// `|∫ omega - ∫ w~_n|`, when the transform exists.
    pub mass_residual: Option<f64>,
}

/// The subset of `x_plus` whose marginal-effect value is also attained on
/// `x_minus`, computed as the preimage over `x_plus` of the range of `g'`
/// over `x_minus`. Zero-measure slivers are dropped.
pub fn match_set(g_prime: &RealFn, part: &SignPartition, grid_h: f64) -> Result<IntervalSet> {
    if part.x_minus.is_empty() {
        return Ok(IntervalSet::empty());
    }
    let minus_segs = monotone_segments(g_prime, &part.x_minus, grid_h)?;
    let attained = range_over_segments(g_prime, &minus_segs)?;
    let plus_segs = monotone_segments(g_prime, &part.x_plus, grid_h)?;
    let mut matched = IntervalSet::empty();
    for r in attained.intervals() {
        matched = matched.union(&preimage_over_segments(g_prime, &plus_segs, r)?);
    }
    let kept: Vec<Interval> = matched
        .intervals()
        .iter()
        .copied()
        .filter(|iv| iv.measure() > 0.0)
        .collect();
    Ok(IntervalSet::new(kept))
}

/// Equal-width bin edges over the attained range of `g'`, with fold values
/// (segment-boundary values of `g'`) inserted as extra edges.
pub fn bin_values(
    g_prime: &RealFn,
    domain: &IntervalSet,
    n: usize,
    grid_h: f64,
) -> Result<ValueBins> {
    debug_assert!(n >= 1);
    let segs = monotone_segments(g_prime, domain, grid_h)?;
    let range = range_over_segments(g_prime, &segs)?;
    let hull = range.hull().expect("nonempty domain has a range");
    let (lo, hi) = (hull.lo, hull.hi);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if hi - lo <= 1e-13 * scale {
        return Ok(ValueBins { edges: alloc::vec![lo], constant: true });
    }
    let mut edges: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    // fold values: where g' turns around, a bin edge keeps preimages clean
    for seg in &segs {
        for endpoint in [seg.interval.lo, seg.interval.hi] {
            let v = g_prime.eval(endpoint)?;
            if v > lo && v < hi {
                edges.push(v);
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    Ok(ValueBins { edges, constant: false })
}

/// Inserts edges until every positive-side preimage cell is at most
/// `max_cell_width` wide, so the step weights track the limiting transform in
/// sup norm and not just in integral.
fn refine_for_cell_width(
    bins: &ValueBins,
    g_prime: &RealFn,
    plus_segs: &[MonotoneSegment],
    max_cell_width: f64,
) -> Result<ValueBins> {
    if bins.constant {
        return Ok(bins.clone());
    }
    let mut edges = bins.edges.clone();
    for k in 0..bins.bin_count() {
        let bin = bins.bin(k);
        let pre = preimage_over_segments(g_prime, plus_segs, &bin)?;
        for cell in pre.intervals() {
            let w = cell.measure();
            if w <= max_cell_width {
                continue;
            }
            let parts = libm::ceil(w / max_cell_width) as usize;
            for j in 1..parts {
                let x = cell.lo + w * j as f64 / parts as f64;
                let y = g_prime.eval(x)?;
                if y > bin.lo && y < bin.hi {
                    edges.push(y);
                }
            }
        }
    }
    let scale = edges.last().copied().unwrap_or(1.0).abs().max(1.0);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    Ok(ValueBins { edges, constant: false })
}

/// Computes per-bin preimages and induced masses.
pub fn induced_measures(
    omega: &RealFn,
    g_prime: &RealFn,
    part: &SignPartition,
    bins: &ValueBins,
    quad_tol: f64,
    grid_h: f64,
) -> Result<Vec<BinMeasures>> {
    let domain = part.domain();
    let segs = monotone_segments(g_prime, &domain, grid_h)?;
    let omega_seams: Vec<f64> = seam_edges(&[omega], &domain);
    let mut out = Vec::with_capacity(bins.bin_count());
    for k in 0..bins.bin_count() {
        let bin = bins.bin(k);
        let pre = preimage_over_segments(g_prime, &segs, &bin)?;
        let pre_minus = pre.intersect(&part.x_minus);
        let pre_plus = pre.intersect(&part.x_plus);
        let m = integrate_product(&|x| omega.eval(x), &pre_minus, &omega_seams, quad_tol)?;
        let p = integrate_product(&|x| omega.eval(x), &pre_plus, &omega_seams, quad_tol)?;
        out.push(BinMeasures {
            bin,
            preimage_minus: pre_minus,
            preimage_plus: pre_plus.clone(),
            mu_minus: -m.value,
            mu_plus: p.value,
            leb_plus: pre_plus.measure(),
            mu_minus_err: m.abs_error_estimate,
            mu_plus_err: p.abs_error_estimate,
        });
    }
    Ok(out)
}

/// Per-bin comparison `mu_minus <= mu_plus`, with tolerance coupled to the
/// quadrature error so near-ties are not spuriously rejected.
pub fn check_dominance(measures: &[BinMeasures], tol: f64) -> (DominanceVerdict, Vec<usize>) {
    let mut violated = Vec::new();
    for (k, m) in measures.iter().enumerate() {
        let slack = tol.max(3.0 * (m.mu_minus_err + m.mu_plus_err));
        if m.mu_minus > m.mu_plus + slack {
            violated.push(k);
        }
    }
    let verdict = if violated.is_empty() {
        DominanceVerdict::Dominated
    } else {
        DominanceVerdict::Violated
    };
    (verdict, violated)
}

/// Builds the binned step weights; requires a dominated verdict.
///
/// Bins whose negative preimage has positive measure get the constant
/// `(mu_plus - mu_minus) / leb_plus` on their positive preimage; everything
/// else on `x_plus` keeps `omega`; `x_minus` gets zero.
pub fn transform_weights_dominance(
    omega: &RealFn,
    part: &SignPartition,
    measures: &[BinMeasures],
    tol: f64,
) -> Result<PiecewiseWeight> {
    let mut pieces = Vec::new();
    let mut matched = IntervalSet::empty();
    for (k, m) in measures.iter().enumerate() {
        if m.preimage_minus.measure() <= 0.0 {
            continue;
        }
        if m.leb_plus <= 0.0 {
            if m.mu_minus > tol.max(3.0 * m.mu_minus_err) {
                return Err(Error::EmptyPositivePreimage { bin: k, mu_minus: m.mu_minus });
            }
            continue;
        }
        let value = (m.mu_plus - m.mu_minus) / m.leb_plus;
        if value < -tol.max(3.0 * (m.mu_minus_err + m.mu_plus_err) / m.leb_plus) {
            return Err(Error::DominanceViolated);
        }
        for iv in m.preimage_plus.intervals() {
            pieces.push(WeightPiece { interval: *iv, kind: WeightKind::Const(value.max(0.0)) });
        }
        matched = matched.union(&m.preimage_plus);
    }
    for iv in part.x_plus.subtract(&matched).intervals() {
        pieces.push(WeightPiece { interval: *iv, kind: WeightKind::Original(omega.clone()) });
    }
    PiecewiseWeight::new(pieces)
}

/// Parameters of one dominance pass.
#[derive(Debug, Clone, Copy)]
pub struct DominanceSettings {
    pub quad_tol: f64,
    pub dominance_tol: f64,
    pub grid_h: f64,
}

impl Default for DominanceSettings {
    fn default() -> Self {
        DominanceSettings { quad_tol: 1e-10, dominance_tol: 1e-9, grid_h: 1e-3 }
    }
}

/// Full pass at refinement level `n`: bin, measure, check, transform, and
/// record the preservation residuals.
pub fn dominance_pass(
    omega: &RealFn,
    g_prime: &RealFn,
    part: &SignPartition,
    n: usize,
    settings: &DominanceSettings,
) -> Result<DominanceReport> {
    let domain = part.domain();
    let base = bin_values(g_prime, &domain, n, settings.grid_h)?;
    let plus_segs = monotone_segments(g_prime, &part.x_plus, settings.grid_h)?;
    let cap = domain.measure() / (2.0 * n as f64);
    let bins = refine_for_cell_width(&base, g_prime, &plus_segs, cap)?;
    let measures =
        induced_measures(omega, g_prime, part, &bins, settings.quad_tol, settings.grid_h)?;
    let (verdict, violated_bins) = check_dominance(&measures, settings.dominance_tol);

    let mut report = DominanceReport {
        n_requested: n,
        bins,
        measures,
        violated_bins,
        verdict,
        omega_tilde_n: None,
        preservation_residual: None,
        mass_residual: None,
    };
    if verdict == DominanceVerdict::Dominated {
        let w = transform_weights_dominance(omega, part, &report.measures, settings.dominance_tol)?;
        let b_orig = beta(omega, g_prime, &domain, settings.quad_tol)?;
        let b_step = beta_weighted(&w, g_prime, &part.x_plus, settings.quad_tol)?;
        let m_orig = mass(omega, &domain, settings.quad_tol)?;
        let m_step = mass_weighted(&w, &part.x_plus, settings.quad_tol)?;
        report.preservation_residual = Some((b_orig.value - b_step.value).abs());
        report.mass_residual = Some((m_orig.value - m_step.value).abs());
        report.omega_tilde_n = Some(w);
    }
    Ok(report)
}

/// Runs [`dominance_pass`] at each level of an increasing schedule, returning
/// the sequence of reports for convergence diagnosis.
pub fn refine(
    omega: &RealFn,
    g_prime: &RealFn,
    part: &SignPartition,
    schedule: &[usize],
    settings: &DominanceSettings,
) -> Result<Vec<DominanceReport>> {
    let mut out = Vec::with_capacity(schedule.len());
    for &n in schedule {
        out.push(dominance_pass(omega, g_prime, part, n, settings)?);
    }
    Ok(out)
}
