//! Diagnostics and repair machinery for weighted-average estimands
//! `beta = ∫ omega(x) g'(x) dx` whose weight function `omega` dips negative.
//!
//! The crate answers three questions about a pair `(omega, g')` on a domain:
//!
//! 1. Where is the weight negative, and can an everywhere-positive marginal
//!    effect flip the sign of `beta` ([`adversary`])?
//! 2. Does a user-supplied injective link `Q` pair each negative-weight point
//!    with a positive-weight point carrying the same marginal effect, and do
//!    the associated net-weight and Jacobian conditions hold ([`link`])?
//! 3. Does the induced measure of the negative region dominate below the
//!    induced measure of the positive region level-set by level-set, so a
//!    binned step reweighting preserves `beta` ([`dominance`])?
//!
//! Both repair routes produce a [`PiecewiseWeight`]: a nonnegative weight
//! supported on the positive region that integrates `g'` to the same value.
//!
//! The substrate is deliberately small: a parsed expression type with exact
//! symbolic differentiation ([`expr`]), interval-set arithmetic with
//! open/closed endpoint bookkeeping ([`interval`]), Gauss-Kronrod adaptive
//! quadrature over interval sets ([`quad`]), and sign-change root isolation
//! with monotone-segment decomposition ([`roots`]).
//!
//! `no_std` compatible with `alloc`; transcendentals come from `libm` so
//! results are bit-identical across platforms.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adversary;
pub mod dominance;
pub mod error;
pub mod expr;
pub mod interval;
pub mod link;
pub mod partition;
pub mod quad;
pub mod realfn;
pub mod roots;

pub use adversary::{find_sign_flip, AdversaryOutcome, BumpSpec};
pub use dominance::{
    bin_values, check_dominance, dominance_pass, induced_measures, match_set, refine,
    transform_weights_dominance, BinMeasures, DominanceReport, DominanceSettings, DominanceVerdict,
    ValueBins,
};
pub use error::Error;
pub use expr::{parse_expr, Expr, Params};
pub use interval::{Interval, IntervalSet};
pub use link::{
    assess_link, beta, beta_weighted, build_link, check_link, mass, mass_weighted,
    transform_weights_link, verify_prop1, BranchPolicy, ConditionReport, LinkAssessment, LinkFn,
    LinkIssue, PiecewiseWeight, Tolerances, WeightKind, WeightPiece,
};
pub use partition::{partition_signs, SignPartition};
pub use quad::{integrate, integrate_fn, QuadratureResult, TruncationPolicy};
pub use realfn::{parse, Function1D, RealFn};
pub use roots::{invert_on_segment, isolate_roots, monotone_segments, Direction, MonotoneSegment};
