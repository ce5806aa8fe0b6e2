//! Sign-flip witness: when the negative-weight region has positive measure,
//! an everywhere-positive marginal effect can still drive `beta` below zero.
//! This module constructs one — a smooth bump over the most negative stretch
//! of `x_minus` riding on a small positive floor — or certifies that no such
//! witness exists because the weight is nonnegative.

use alloc::vec;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::link::{integrate_product, seam_edges};
use crate::partition::SignPartition;
use crate::realfn::RealFn;

/// A smooth compactly supported bump `B(u) = exp(-1/(1-u^2))` rescaled to
/// `[center - half_width, center + half_width]`, plus a positive floor:
/// `g'(x) = epsilon + amplitude * B((x - center)/half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub center: f64,
    pub half_width: f64,
    pub epsilon: f64,
    pub amplitude: f64,
}

impl BumpSpec {
    /// Evaluates the adversarial marginal effect. Always `>= epsilon`.
    pub fn eval(&self, x: f64) -> f64 {
        self.epsilon + self.amplitude * bump((x - self.center) / self.half_width)
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        libm::exp(-1.0 / (1.0 - u * u))
    } else {
        0.0
    }
}

/// Outcome of the sign-flip search.
#[derive(Debug, Clone)]
pub enum AdversaryOutcome {
    /// A witness with `beta < 0`, verified by quadrature.
    Found { spec: BumpSpec, g_prime_adv: RealFn, achieved_beta: f64 },
    /// `omega >= 0` everywhere, so `beta >= epsilon * ∫ omega` for any
    /// positive marginal effect.
    Infeasible { omega_mass: f64 },
}

/// Builds the adversarial `g'` as a piecewise function in the expression
/// grammar so the rest of the toolchain can analyse it. The bump piece stops
/// a hair inside its support so `1 - u^2` never hits zero; the tail of the
/// bump is below f64 underflow there anyway.
fn bump_realfn(domain: &IntervalSet, spec: &BumpSpec) -> Result<RealFn> {
    use crate::expr::{BinOp, Builtin, Expr};
    let hull = domain.hull().expect("nonempty domain");
    let a = spec.center - spec.half_width * (1.0 - 1e-9);
    let b = spec.center + spec.half_width * (1.0 - 1e-9);
    let u = Expr::bin(
        BinOp::Div,
        Expr::bin(BinOp::Sub, Expr::Var, Expr::num(spec.center)),
        Expr::num(spec.half_width),
    );
    let one_minus_u2 = Expr::bin(
        BinOp::Sub,
        Expr::num(1.0),
        Expr::bin(BinOp::Pow, u, Expr::num(2.0)),
    );
    let bump_expr = Expr::bin(
        BinOp::Add,
        Expr::num(spec.epsilon),
        Expr::bin(
            BinOp::Mul,
            Expr::num(spec.amplitude),
            Expr::call(
                Builtin::Exp,
                Expr::negate(Expr::bin(BinOp::Div, Expr::num(1.0), one_minus_u2)),
            ),
        ),
    );
    let floor = Expr::num(spec.epsilon);
    let pieces = vec![
        (Interval::new(hull.lo, a, true, false), floor.clone()),
        (Interval::new(a, b, true, false), bump_expr),
        (Interval::new(b, hull.hi, true, true), floor),
    ];
    RealFn::from_pieces(
        pieces.into_iter().filter(|(iv, _)| !iv.is_empty()).collect(),
        crate::expr::Params::new(),
    )
}

/// Searches for an everywhere-positive `g'` with `beta < 0`.
///
/// The bump sits on the middle 60% of the connected component of `x_minus`
/// with the most negative weighted mass; the amplitude solves
/// `epsilon ∫ omega + M ∫ omega B < 0` in closed form and is then doubled
/// for margin. Returns [`AdversaryOutcome::Infeasible`] when `x_minus` has
/// zero measure.
pub fn find_sign_flip(
    omega: &RealFn,
    part: &SignPartition,
    epsilon: f64,
    quad_tol: f64,
) -> Result<AdversaryOutcome> {
    debug_assert!(epsilon > 0.0);
    let domain = part.domain();
    let omega_seams = seam_edges(&[omega], &domain);
    let omega_mass = integrate_product(&|x| omega.eval(x), &domain, &omega_seams, quad_tol)?.value;

    if part.x_minus.measure() <= 0.0 {
        return Ok(AdversaryOutcome::Infeasible { omega_mass });
    }

    // most negative component of x_minus
    let mut best: Option<(Interval, f64)> = None;
    for iv in part.x_minus.intervals() {
        if iv.measure() == 0.0 {
            continue;
        }
        let m = integrate_product(
            &|x| omega.eval(x),
            &IntervalSet::from_interval(*iv),
            &omega_seams,
            quad_tol,
        )?
        .value;
        if best.is_none_or(|(_, bm)| m < bm) {
            best = Some((*iv, m));
        }
    }
    let (component, _) = best.expect("positive-measure component exists");

    let center = 0.5 * (component.lo + component.hi);
    let half_width = 0.3 * component.measure();
    let mut spec = BumpSpec { center, half_width, epsilon, amplitude: 1.0 };

    let support = IntervalSet::from_interval(Interval::closed(
        center - half_width,
        center + half_width,
    ));
    let weighted_bump = integrate_product(
        &|x| Ok(omega.eval(x)? * bump((x - center) / half_width)),
        &support,
        &omega_seams,
        quad_tol,
    )?
    .value;
    if weighted_bump >= 0.0 {
        // cannot happen: the bump support is interior to a region where
        // omega < 0, so the weighted bump mass is strictly negative
        return Err(Error::BumpMassNotNegative { mass: weighted_bump });
    }

    let m_raw = -epsilon * omega_mass / weighted_bump;
    spec.amplitude = if m_raw > 0.0 { 2.0 * m_raw } else { 1.0 };

    let g_prime_adv = bump_realfn(&domain, &spec)?;
    let g_seams = {
        let mut s = seam_edges(&[omega, &g_prime_adv], &domain);
        s.push(center - half_width);
        s.push(center + half_width);
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s
    };
    let achieved_beta = integrate_product(
        &|x| Ok(omega.eval(x)? * g_prime_adv.eval(x)?),
        &domain,
        &g_seams,
        quad_tol,
    )?
    .value;
    Ok(AdversaryOutcome::Found { spec, g_prime_adv, achieved_beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::link::beta;
    use crate::partition::partition_signs;
    use crate::realfn::parse;

    #[test]
    fn linear_weight_admits_a_sign_flip() {
        let omega = parse("x - 1", Interval::closed(0.0, 3.0), &Params::new()).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        match find_sign_flip(&omega, &part, 0.01, 1e-10).unwrap() {
            AdversaryOutcome::Found { spec, g_prime_adv, achieved_beta } => {
                assert!(achieved_beta < 0.0, "beta {achieved_beta}");
                assert!(spec.center - spec.half_width >= 0.0);
                assert!(spec.center + spec.half_width <= 1.0);
                // independent verification through the estimand integral
                let b = beta(&omega, &g_prime_adv, omega.domain(), 1e-10).unwrap();
                assert!((b.value - achieved_beta).abs() <= 1e-8);
                assert!(b.value < 0.0);
                // strictly positive marginal effect
                for x in omega.domain().sample_grid(4096) {
                    assert!(g_prime_adv.eval(x).unwrap() >= 0.01 - 1e-12);
                }
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn nonnegative_weight_is_infeasible() {
        let omega = parse("phi(x)", Interval::closed(-5.0, 5.0), &Params::new()).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        match find_sign_flip(&omega, &part, 0.01, 1e-10).unwrap() {
            AdversaryOutcome::Infeasible { omega_mass } => {
                assert!(omega_mass > 0.99);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn doubling_amplitude_strictly_lowers_beta() {
        let omega = parse("x - 1", Interval::closed(0.0, 3.0), &Params::new()).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        let (spec, domain) = match find_sign_flip(&omega, &part, 0.01, 1e-10).unwrap() {
            AdversaryOutcome::Found { spec, .. } => (spec, omega.domain().clone()),
            _ => unreachable!(),
        };
        let doubled = BumpSpec { amplitude: 2.0 * spec.amplitude, ..spec };
        let f1 = bump_realfn(&domain, &spec).unwrap();
        let f2 = bump_realfn(&domain, &doubled).unwrap();
        let b1 = beta(&omega, &f1, &domain, 1e-10).unwrap().value;
        let b2 = beta(&omega, &f2, &domain, 1e-10).unwrap().value;
        assert!(b2 < b1);
    }

    #[test]
    fn tilted_gaussian_weight_admits_a_sign_flip() {
        let mut params = Params::new();
        params.insert("z".into(), 2.0);
        let omega = parse("(1 + z*x)*phi(x)", Interval::closed(-10.0, 10.0), &params).unwrap();
        let part = partition_signs(&omega, omega.domain()).unwrap();
        match find_sign_flip(&omega, &part, 0.01, 1e-10).unwrap() {
            AdversaryOutcome::Found { spec, achieved_beta, .. } => {
                assert!(achieved_beta < 0.0);
                assert!(spec.center > -10.0 && spec.center < -0.5);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }
}
