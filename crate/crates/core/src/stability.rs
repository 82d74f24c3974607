//! Linear string-stability calculus for the OVRV law under attack.
//!
//! The sign of a single scalar, here called the stability index, decides
//! whether small perturbations grow as they propagate upstream through a
//! platoon: negative means string stable, nonnegative means unstable.
//! Evaluated on the attacked partials this yields closed-form
//! characterizations of which attack gains destabilize or merely degrade
//! the ACC dynamics.

use crate::models::{partials_t1, partials_t2, AccelPartials, OvrvParams};
use thiserror::Error;

/// Convergence width for the bisection oracle.
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    /// The speed partial is zero: the stability index is undefined and the
    /// rational-driving constraints are violated at this exact point.
    #[error("stability index undefined: speed partial is zero (rational-driving boundary)")]
    SpeedPartialZero,
    /// Type I analysis is singular where the attack gain equals tau * k1.
    #[error("attack gain {delta} hits the singularity at tau*k1 = {tau_k1}")]
    SingularAttackGain { delta: f64, tau_k1: f64 },
    #[error("bracket [{lo}, {hi}] contains the singularity tau*k1 = {tau_k1}")]
    BracketContainsSingularity { lo: f64, hi: f64, tau_k1: f64 },
    #[error("no sign change of the stability index over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
}

/// String-stability verdict for one set of partials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    StringStable,
    StringUnstable,
    RdcViolated,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::StringStable => "string-stable",
            Classification::StringUnstable => "string-unstable",
            Classification::RdcViolated => "rdc-violated",
        })
    }
}

/// Partials, rational-driving flag, stability index, and classification
/// for one model-plus-attack combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub partials: AccelPartials,
    pub rdc_ok: bool,
    /// None exactly when the speed partial is zero.
    pub lambda2: Option<f64>,
    pub classification: Classification,
}

/// Rational driving constraints: more gap and more closing speed must both
/// increase acceleration, more own speed must decrease it.
pub fn rdc_check(partials: &AccelPartials) -> bool {
    partials.wrt_spacing > 0.0 && partials.wrt_rel_speed > 0.0 && partials.wrt_speed < 0.0
}

fn lambda2_unchecked(p: &AccelPartials) -> f64 {
    let b3 = p.wrt_speed;
    (p.wrt_spacing / b3.powi(3)) * (b3 * b3 / 2.0 - p.wrt_rel_speed * b3 - p.wrt_spacing)
}

/// Stability index (beta1 / beta3^3)(beta3^2/2 - beta2 beta3 - beta1) of a
/// car-following law from its equilibrium partials. Negative means string
/// stable.
pub fn lambda2(partials: &AccelPartials) -> Result<f64, StabilityError> {
    if partials.wrt_speed == 0.0 {
        return Err(StabilityError::SpeedPartialZero);
    }
    Ok(lambda2_unchecked(partials))
}

/// Full report for one set of partials. The index is left empty at the
/// rational-driving boundary instead of overflowing to infinity.
pub fn stability_report(partials: AccelPartials) -> StabilityReport {
    let rdc_ok = rdc_check(&partials);
    let lambda2 = lambda2(&partials).ok();
    let classification = if !rdc_ok {
        Classification::RdcViolated
    } else if lambda2.expect("rdc_ok implies nonzero speed partial") < 0.0 {
        Classification::StringStable
    } else {
        Classification::StringUnstable
    };
    StabilityReport {
        partials,
        rdc_ok,
        lambda2,
        classification,
    }
}

/// Stability index of the OVRV law under a Type I attack gain.
///
/// Errors where the gain equals tau * k1, the pole of the index.
pub fn lambda2_tilde(p: &OvrvParams, delta: f64) -> Result<f64, StabilityError> {
    let partials = partials_t1(p, delta);
    if partials.wrt_speed == 0.0 {
        return Err(StabilityError::SingularAttackGain {
            delta,
            tau_k1: p.tau_k1(),
        });
    }
    Ok(lambda2_unchecked(&partials))
}

/// Stability index of the unattacked OVRV law.
pub fn lambda2_ovrv_baseline(p: &OvrvParams) -> f64 {
    lambda2_unchecked(&partials_t1(p, 0.0))
}

/// Stability index of the OVRV law under a Type II attack pair. Total:
/// the speed partial is -tau k1 < 0 for any valid parameters.
pub fn lambda2_hat(p: &OvrvParams, delta1: f64, delta2: f64) -> f64 {
    lambda2_unchecked(&partials_t2(p, delta1, delta2))
}

/// The feasible zero of the Type I stability index,
/// tau k1 + k2 - sqrt(k2^2 + 2 k1).
pub fn delta_star(p: &OvrvParams) -> f64 {
    p.tau_k1() + p.rel_speed_gain - (p.rel_speed_gain * p.rel_speed_gain + 2.0 * p.gap_gain).sqrt()
}

/// The second zero, tau k1 + k2 + sqrt(k2^2 + 2 k1). Always exceeds
/// tau k1, so it contradicts the rational-driving bound and is never a
/// usable attack gain.
pub fn delta_star_rejected(p: &OvrvParams) -> f64 {
    p.tau_k1() + p.rel_speed_gain + (p.rel_speed_gain * p.rel_speed_gain + 2.0 * p.gap_gain).sqrt()
}

/// Destabilizing interval of Type I attack gains for a given bound r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type1AttackInterval {
    /// Lower endpoint: the feasible zero of the attacked stability index.
    pub delta_star: f64,
    /// Upper endpoint: the attack bound r.
    pub bound: f64,
    pub feasible: bool,
    /// Auxiliary bound r1 (equal to delta_star); the attack bound must
    /// reach max{-r1, r1, 0} for the zero to be attainable.
    pub r1: f64,
    /// Value of 2 tau^2 k1 + 2 tau k2 - 1; must be positive for the
    /// interval to be nonempty.
    pub param_condition_value: f64,
}

impl Type1AttackInterval {
    /// Whether a gain lies in the feasible destabilizing interval.
    pub fn contains(&self, delta: f64) -> bool {
        self.feasible && self.delta_star <= delta && delta <= self.bound
    }
}

/// Characterize the destabilizing Type I gains [delta*, r] for bound r.
///
/// Feasibility needs the parameter condition 2 tau^2 k1 + 2 tau k2 - 1 > 0
/// and tau k1 > r >= max{-r1, r1, 0}. Infeasibility is a result, not an
/// error.
pub fn type1_interval(p: &OvrvParams, bound: f64) -> Type1AttackInterval {
    let tau = p.time_gap;
    let r1 = delta_star(p);
    let param_condition_value = 2.0 * tau * tau * p.gap_gain + 2.0 * tau * p.rel_speed_gain - 1.0;
    let lower_required = (-r1).max(r1).max(0.0);
    let feasible = param_condition_value > 0.0 && bound < p.tau_k1() && bound >= lower_required;
    Type1AttackInterval {
        delta_star: r1,
        bound,
        feasible,
        r1,
        param_condition_value,
    }
}

/// Cubic whose negativity marks Type I gains that degrade stability,
/// i.e. raise the index above its unattacked value.
///
/// Mathematically this is, with w = d - tau k1:
///
/// ```text
/// (tau^2 k1 + 2 tau k2 - 2) w^3 + tau^3 k1^2 w^2
///     - 2 tau^3 k1^2 k2 w - 2 tau^3 k1^3
/// ```
///
/// The constant term in d vanishes identically, so the cubic is evaluated
/// in the factored form d * (quadratic in d), keeping the root at zero
/// attack exact in floating point.
pub fn p_poly(p: &OvrvParams, delta: f64) -> f64 {
    let tau = p.time_gap;
    let k1 = p.gap_gain;
    let k2 = p.rel_speed_gain;
    let c = p.tau_k1();
    let a3 = tau * tau * k1 + 2.0 * tau * k2 - 2.0;
    let b2 = tau.powi(3) * k1 * k1;
    let c1 = -2.0 * tau.powi(3) * k1 * k1 * k2;
    delta
        * (a3 * delta * delta
            + (b2 - 3.0 * a3 * c) * delta
            + (3.0 * a3 * c * c - 2.0 * b2 * c + c1))
}

/// Degrading (but not necessarily destabilizing) Type I check:
/// p(delta) < 0, |delta| <= r, and r < tau k1.
pub fn type1_degrading_check(p: &OvrvParams, delta: f64, bound: f64) -> bool {
    p_poly(p, delta) < 0.0 && delta.abs() <= bound && bound < p.tau_k1()
}

/// Destabilizing Type I check: membership of the gain in a feasible
/// [delta*, r] interval.
pub fn type1_destabilizing_check(p: &OvrvParams, delta: f64, bound: f64) -> bool {
    type1_interval(p, bound).contains(delta)
}

/// Quadratic whose positivity marks Type II pairs that degrade stability:
/// 2 d1^2 - (tau^2 k1 + 2 tau k2 - 4) d1 - 2 tau k2 d2 - 2 tau k2 d1 d2.
pub fn theta(p: &OvrvParams, delta1: f64, delta2: f64) -> f64 {
    let tau = p.time_gap;
    let k1 = p.gap_gain;
    let k2 = p.rel_speed_gain;
    2.0 * delta1 * delta1
        - (tau * tau * k1 + 2.0 * tau * k2 - 4.0) * delta1
        - 2.0 * tau * k2 * delta2
        - 2.0 * tau * k2 * delta1 * delta2
}

/// Verdict on one Type II attack pair against bounds (z1, z2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2AttackVerdict {
    pub lambda2_hat: f64,
    pub theta_value: f64,
    pub rdc_ok: bool,
    /// Index positive, rational driving kept, and both gains in bounds.
    /// Note z1 = z2 = 0 admits only the zero attack, for which a positive
    /// verdict just restates that the unattacked model is unstable.
    pub destabilizing: bool,
    /// Index strictly above its unattacked value, under the same side
    /// conditions.
    pub degrading: bool,
}

/// Evaluate a Type II pair: destabilizing requires lambda2_hat > 0 with
/// 1 + delta_j > 0 and |delta_j| <= z_j for both channels.
pub fn type2_destabilizing_check(
    p: &OvrvParams,
    delta1: f64,
    delta2: f64,
    z1: f64,
    z2: f64,
) -> Type2AttackVerdict {
    let l2 = lambda2_hat(p, delta1, delta2);
    let th = theta(p, delta1, delta2);
    let rdc_ok = 1.0 + delta1 > 0.0 && 1.0 + delta2 > 0.0;
    let in_bounds = delta1.abs() <= z1 && delta2.abs() <= z2;
    Type2AttackVerdict {
        lambda2_hat: l2,
        theta_value: th,
        rdc_ok,
        destabilizing: l2 > 0.0 && rdc_ok && in_bounds,
        degrading: th > 0.0 && rdc_ok && in_bounds,
    }
}

/// Degrading Type II check: theta > 0, gains in bounds, rational driving
/// kept.
pub fn type2_degrading_check(p: &OvrvParams, delta1: f64, delta2: f64, z1: f64, z2: f64) -> bool {
    type2_destabilizing_check(p, delta1, delta2, z1, z2).degrading
}

/// Bisection root of the Type I stability index over [lo, hi].
///
/// Independent of the closed-form zero: used to cross-check `delta_star`.
/// The bracket must exclude the singularity at tau k1 and show a sign
/// change.
pub fn root_oracle_lambda2_tilde(p: &OvrvParams, lo: f64, hi: f64) -> Result<f64, StabilityError> {
    let sing = p.tau_k1();
    if lo >= hi || (lo <= sing && sing <= hi) {
        return Err(StabilityError::BracketContainsSingularity {
            lo,
            hi,
            tau_k1: sing,
        });
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = lambda2_tilde(p, a)?;
    let fb = lambda2_tilde(p, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(StabilityError::NoSignChange { lo, hi });
    }
    while b - a > BISECTION_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval exhausted at float resolution
        }
        let fm = lambda2_tilde(p, mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
