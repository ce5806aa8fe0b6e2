//! Error types shared across the crate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::roots::MonotoneSegment;

/// Everything that can go wrong while parsing, evaluating, or analysing.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Text did not conform to the expression grammar.
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    /// An identifier was used that is neither `x`, a builtin, nor a bound parameter.
    #[error("unbound parameter `{name}` at byte {position}")]
    UnboundParam { name: String, position: usize },

    /// Piece intervals of a piecewise function overlap.
    #[error("piece intervals overlap near x = {at}")]
    OverlappingPieces { at: f64 },

    /// Evaluation requested outside the function's domain.
    #[error("x = {x} is outside the function domain")]
    OutOfDomain { x: f64 },

    /// log/sqrt of a negative number, division by zero, or a non-finite result.
    #[error("math domain error in `{op}` at x = {x}")]
    MathDomain { op: &'static str, x: f64 },

    /// Adaptive quadrature did not reach the tolerance within the depth budget.
    #[error("quadrature failed to converge on [{lo}, {hi}]")]
    QuadratureNonConvergence { lo: f64, hi: f64 },

    /// Bisection target lies outside the range of the segment.
    #[error("inversion target y = {y} is outside the segment range")]
    InversionOutOfRange { y: f64 },

    /// The link is not injective on the negative region.
    #[error("link not injective: {} monotone segments on the negative region", segments.len())]
    LinkNotInjective { segments: Vec<MonotoneSegment> },

    /// The link image leaves the positive-weight region.
    #[error("link image escapes the positive region: Q({x}) = {qx}")]
    LinkImageEscapes { x: f64, qx: f64 },

    /// A requested branch index does not exist.
    #[error("branch index {index} out of range ({available} segments)")]
    BranchOutOfRange { index: usize, available: usize },

    /// A bin carries negative mass but has no positive-region preimage to host it.
    #[error("bin {bin} has negative mass {mu_minus} and empty positive preimage")]
    EmptyPositivePreimage { bin: usize, mu_minus: f64 },

    /// Transform requested while the dominance check is violated.
    #[error("measure dominance is violated; transformed weights are not defined")]
    DominanceViolated,

    /// Adversary internal consistency failure.
    #[error("adversary bump has nonnegative weighted mass {mass}")]
    BumpMassNotNegative { mass: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
