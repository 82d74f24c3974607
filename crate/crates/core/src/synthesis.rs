//! Grid-based synthesis of candidate attacks from the closed-form
//! stability conditions.
//!
//! The feasible sets are one- or two-dimensional and the conditions cheap,
//! so exhaustive grid search is exact enough and trivially auditable. All
//! searches scan grids in ascending order and break ties toward the
//! smallest gain (then the smallest second gain), so results are
//! deterministic.

use crate::models::OvrvParams;
use crate::stability::{
    lambda2_hat, lambda2_tilde, p_poly, theta, type1_interval, type2_destabilizing_check,
};

/// Lower margin keeping Type II grids strictly inside 1 + delta > 0.
const GRID_EPSILON: f64 = 1e-6;

/// What the synthesized attack is required to do to the ACC dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    /// Make the attacked stability index nonnegative (Type I) or positive
    /// (Type II).
    Destabilize,
    /// Raise the index strictly above its unattacked value.
    Degrade,
}

/// How to pick one gain out of the feasible set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisStrategy {
    /// Argmax of the mode's objective: the attacked index when
    /// destabilizing, the degrade margin when degrading.
    MaxLambda,
    /// Smallest-magnitude gain (Type I) or smallest second gain (Type II)
    /// that still meets the mode's conditions.
    MinDelta,
    /// Exhaustive scan; same selection as `MaxLambda`.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type1SynthesisRequest {
    /// Attack bound r.
    pub bound: f64,
    pub mode: SynthesisMode,
    pub strategy: SynthesisStrategy,
    /// Target grid spacing in the gain dimension.
    pub grid_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2SynthesisRequest {
    /// Bound z1 on the spacing gain.
    pub spacing_bound: f64,
    /// Bound z2 on the relative-speed gain.
    pub rel_speed_bound: f64,
    pub mode: SynthesisMode,
    pub strategy: SynthesisStrategy,
    pub grid_step: f64,
}

/// A synthesized Type I gain with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizedType1 {
    pub delta: f64,
    pub lambda2_tilde: f64,
    pub p_value: f64,
}

/// A synthesized Type II pair with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizedType2 {
    pub delta1: f64,
    pub delta2: f64,
    pub lambda2_hat: f64,
    pub theta_value: f64,
}

/// Why a synthesis request has an empty feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfeasibleReason {
    /// 2 tau^2 k1 + 2 tau k2 - 1 must be positive for a reachable zero.
    ParamConditionNotMet { value: f64 },
    /// The bound does not reach the zero of the attacked index.
    BoundBelowRequired { required: f64, given: f64 },
    /// Rational driving needs the bound strictly below tau k1.
    BoundNotBelowTauK1 { tau_k1: f64, given: f64 },
    /// Zero bounds admit only the zero attack.
    ZeroBounds,
    /// The grid contained no point meeting the conditions.
    NoFeasiblePoint,
}

impl std::fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InfeasibleReason::ParamConditionNotMet { value } => write!(
                f,
                "parameter condition 2*tau^2*k1 + 2*tau*k2 - 1 = {value} is not positive"
            ),
            InfeasibleReason::BoundBelowRequired { required, given } => write!(
                f,
                "attack bound r = {given} is below the required minimum {required}"
            ),
            InfeasibleReason::BoundNotBelowTauK1 { tau_k1, given } => write!(
                f,
                "attack bound {given} must be strictly below tau*k1 = {tau_k1}"
            ),
            InfeasibleReason::ZeroBounds => {
                f.write_str("attack bounds are zero, admitting only the zero attack")
            }
            InfeasibleReason::NoFeasiblePoint => {
                f.write_str("no grid point satisfies the requested conditions")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Type1Outcome {
    Feasible(SynthesizedType1),
    Infeasible(InfeasibleReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Type2Outcome {
    Feasible(SynthesizedType2),
    Infeasible(InfeasibleReason),
}

/// Inclusive uniform grid from lo to hi with spacing close to `step`.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let n = (((hi - lo) / step).round() as usize).max(1);
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect()
}

/// Synthesize a Type I gain. Infeasibility is a value, not an error.
pub fn synthesize_type1(p: &OvrvParams, req: &Type1SynthesisRequest) -> Type1Outcome {
    let interval = type1_interval(p, req.bound);
    match req.mode {
        SynthesisMode::Destabilize => {
            if !interval.feasible {
                let reason = if interval.param_condition_value <= 0.0 {
                    InfeasibleReason::ParamConditionNotMet {
                        value: interval.param_condition_value,
                    }
                } else if req.bound >= p.tau_k1() {
                    InfeasibleReason::BoundNotBelowTauK1 {
                        tau_k1: p.tau_k1(),
                        given: req.bound,
                    }
                } else {
                    let required = (-interval.r1).max(interval.r1).max(0.0);
                    InfeasibleReason::BoundBelowRequired {
                        required,
                        given: req.bound,
                    }
                };
                return Type1Outcome::Infeasible(reason);
            }
            let pick = select_type1(p, req, |d| interval.contains(d));
            finish_type1(p, pick)
        }
        SynthesisMode::Degrade => {
            if req.bound >= p.tau_k1() {
                return Type1Outcome::Infeasible(InfeasibleReason::BoundNotBelowTauK1 {
                    tau_k1: p.tau_k1(),
                    given: req.bound,
                });
            }
            let pick = select_type1(p, req, |d| p_poly(p, d) < 0.0);
            finish_type1(p, pick)
        }
    }
}

fn select_type1(
    p: &OvrvParams,
    req: &Type1SynthesisRequest,
    feasible: impl Fn(f64) -> bool,
) -> Option<f64> {
    let objective = |d: f64| match req.mode {
        SynthesisMode::Destabilize => lambda2_tilde(p, d).expect("grid stays below tau*k1"),
        SynthesisMode::Degrade => -p_poly(p, d),
    };
    let mut best: Option<(f64, f64)> = None; // (score, delta)
    for d in grid(-req.bound, req.bound, req.grid_step) {
        if !feasible(d) {
            continue;
        }
        let score = match req.strategy {
            SynthesisStrategy::MaxLambda | SynthesisStrategy::Grid => objective(d),
            SynthesisStrategy::MinDelta => -d.abs(),
        };
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, d));
        }
    }
    best.map(|(_, d)| d)
}

fn finish_type1(p: &OvrvParams, pick: Option<f64>) -> Type1Outcome {
    match pick {
        Some(delta) => Type1Outcome::Feasible(SynthesizedType1 {
            delta,
            lambda2_tilde: lambda2_tilde(p, delta).expect("selected gain below tau*k1"),
            p_value: p_poly(p, delta),
        }),
        None => Type1Outcome::Infeasible(InfeasibleReason::NoFeasiblePoint),
    }
}

/// Synthesize a Type II pair over the box [-min(z1,1)+eps, z1] x
/// [-min(z2,1)+eps, z2]; the lower margins keep rational driving strict.
pub fn synthesize_type2(p: &OvrvParams, req: &Type2SynthesisRequest) -> Type2Outcome {
    if req.spacing_bound == 0.0 && req.rel_speed_bound == 0.0 {
        return Type2Outcome::Infeasible(InfeasibleReason::ZeroBounds);
    }
    let axis = |bound: f64| {
        if bound == 0.0 {
            vec![0.0]
        } else {
            grid(-bound.min(1.0) + GRID_EPSILON, bound, req.grid_step)
        }
    };
    let grid1 = axis(req.spacing_bound);
    let grid2 = axis(req.rel_speed_bound);

    let mut best: Option<(f64, f64, f64)> = None; // (score, d1, d2)
    for &d1 in &grid1 {
        for &d2 in &grid2 {
            let verdict =
                type2_destabilizing_check(p, d1, d2, req.spacing_bound, req.rel_speed_bound);
            let ok = match req.mode {
                SynthesisMode::Destabilize => verdict.destabilizing,
                SynthesisMode::Degrade => verdict.degrading,
            };
            if !ok {
                continue;
            }
            let score = match (req.strategy, req.mode) {
                (SynthesisStrategy::MinDelta, _) => -d2,
                (_, SynthesisMode::Destabilize) => verdict.lambda2_hat,
                (_, SynthesisMode::Degrade) => verdict.theta_value,
            };
            let better = match best {
                None => true,
                Some((s, b1, _)) => {
                    score > s
                        || (req.strategy == SynthesisStrategy::MinDelta && score == s && d1 < b1)
                }
            };
            if better {
                best = Some((score, d1, d2));
            }
        }
    }
    match best {
        Some((_, delta1, delta2)) => Type2Outcome::Feasible(SynthesizedType2 {
            delta1,
            delta2,
            lambda2_hat: lambda2_hat(p, delta1, delta2),
            theta_value: theta(p, delta1, delta2),
        }),
        None => Type2Outcome::Infeasible(InfeasibleReason::NoFeasiblePoint),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::{type1_degrading_check, type1_destabilizing_check};

    fn table1() -> OvrvParams {
        OvrvParams::default()
    }

    fn req1(bound: f64, mode: SynthesisMode, strategy: SynthesisStrategy) -> Type1SynthesisRequest {
        Type1SynthesisRequest {
            bound,
            mode,
            strategy,
            grid_step: 1e-4,
        }
    }

    #[test]
    fn destabilize_picks_endpoint_at_max_lambda() {
        let p = table1();
        let out = synthesize_type1(
            &p,
            &req1(
                0.12,
                SynthesisMode::Destabilize,
                SynthesisStrategy::MaxLambda,
            ),
        );
        match out {
            Type1Outcome::Feasible(s) => {
                // the index increases toward tau k1, so the argmax is the bound
                assert!((s.delta - 0.12).abs() < 1e-12);
                assert!(s.lambda2_tilde > 0.0);
                assert!(type1_destabilizing_check(&p, s.delta, 0.12));
            }
            Type1Outcome::Infeasible(r) => panic!("unexpected infeasible: {r}"),
        }
    }

    #[test]
    fn destabilize_infeasible_below_required_bound() {
        let out = synthesize_type1(
            &table1(),
            &req1(
                0.05,
                SynthesisMode::Destabilize,
                SynthesisStrategy::MaxLambda,
            ),
        );
        match out {
            Type1Outcome::Infeasible(InfeasibleReason::BoundBelowRequired { required, .. }) => {
                assert!((required - 0.106662).abs() < 1e-6);
            }
            other => panic!("expected bound-below-required, got {other:?}"),
        }
    }

    #[test]
    fn destabilize_infeasible_at_tau_k1() {
        let out = synthesize_type1(
            &table1(),
            &req1(
                0.125,
                SynthesisMode::Destabilize,
                SynthesisStrategy::MaxLambda,
            ),
        );
        assert!(matches!(
            out,
            Type1Outcome::Infeasible(InfeasibleReason::BoundNotBelowTauK1 { .. })
        ));
    }

    #[test]
    fn degrade_min_delta_returns_smallest_magnitude() {
        let p = table1();
        let out = synthesize_type1(
            &p,
            &Type1SynthesisRequest {
                bound: 0.12,
                mode: SynthesisMode::Degrade,
                strategy: SynthesisStrategy::MinDelta,
                grid_step: 1e-3,
            },
        );
        match out {
            Type1Outcome::Feasible(s) => {
                // only positive gains degrade for these parameters, so the
                // first grid step above zero wins
                assert!((s.delta - 1e-3).abs() < 1e-9);
                assert!(s.p_value < 0.0);
                assert!(type1_degrading_check(&p, s.delta, 0.12));
            }
            Type1Outcome::Infeasible(r) => panic!("unexpected infeasible: {r}"),
        }
    }

    #[test]
    fn type2_destabilize_hits_corner() {
        let p = table1();
        let out = synthesize_type2(
            &p,
            &Type2SynthesisRequest {
                spacing_bound: 0.8,
                rel_speed_bound: 0.7,
                mode: SynthesisMode::Destabilize,
                strategy: SynthesisStrategy::MaxLambda,
                grid_step: 1e-2,
            },
        );
        match out {
            Type2Outcome::Feasible(s) => {
                // index increases in d1 here and decreases in d2
                assert!((s.delta1 - 0.8).abs() < 1e-12);
                assert!((s.delta2 - (-0.7 + 1e-6)).abs() < 1e-9);
                assert!(s.lambda2_hat > 0.0);
                let v = type2_destabilizing_check(&p, s.delta1, s.delta2, 0.8, 0.7);
                assert!(v.destabilizing);
            }
            Type2Outcome::Infeasible(r) => panic!("unexpected infeasible: {r}"),
        }
    }

    #[test]
    fn type2_zero_bounds_infeasible() {
        let out = synthesize_type2(
            &table1(),
            &Type2SynthesisRequest {
                spacing_bound: 0.0,
                rel_speed_bound: 0.0,
                mode: SynthesisMode::Destabilize,
                strategy: SynthesisStrategy::MaxLambda,
                grid_step: 1e-3,
            },
        );
        assert!(matches!(
            out,
            Type2Outcome::Infeasible(InfeasibleReason::ZeroBounds)
        ));
    }

    #[test]
    fn type2_degrade_matches_exhaustive_theta_argmax() {
        let p = table1();
        let step = 2e-2;
        let out = synthesize_type2(
            &p,
            &Type2SynthesisRequest {
                spacing_bound: 0.8,
                rel_speed_bound: 0.7,
                mode: SynthesisMode::Degrade,
                strategy: SynthesisStrategy::Grid,
                grid_step: step,
            },
        );
        // independent exhaustive scan over the same grid
        let mut best: Option<(f64, f64, f64)> = None;
        let n1 = (((0.8 + 0.8 - 1e-6) / step).round() as usize).max(1);
        let n2 = (((0.7 + 0.7 - 1e-6) / step).round() as usize).max(1);
        for i in 0..=n1 {
            let d1 = (-0.8 + 1e-6) + (0.8 - (-0.8 + 1e-6)) * i as f64 / n1 as f64;
            for j in 0..=n2 {
                let d2 = (-0.7 + 1e-6) + (0.7 - (-0.7 + 1e-6)) * j as f64 / n2 as f64;
                if !type2_destabilizing_check(&p, d1, d2, 0.8, 0.7).degrading {
                    continue;
                }
                let t = theta(&p, d1, d2);
                if best.is_none_or(|(s, _, _)| t > s) {
                    best = Some((t, d1, d2));
                }
            }
        }
        let (expected_theta, e1, e2) = best.expect("degrading set nonempty");
        match out {
            Type2Outcome::Feasible(s) => {
                assert!((s.delta1 - e1).abs() < 1e-12, "{} vs {}", s.delta1, e1);
                assert!((s.delta2 - e2).abs() < 1e-12);
                assert!((s.theta_value - expected_theta).abs() < 1e-12);
                assert!(s.theta_value > 0.0);
            }
            Type2Outcome::Infeasible(r) => panic!("unexpected infeasible: {r}"),
        }
    }

    #[test]
    fn type2_min_delta_prefers_smallest_second_gain() {
        let p = table1();
        let out = synthesize_type2(
            &p,
            &Type2SynthesisRequest {
                spacing_bound: 0.8,
                rel_speed_bound: 0.7,
                mode: SynthesisMode::Destabilize,
                strategy: SynthesisStrategy::MinDelta,
                grid_step: 1e-2,
            },
        );
        match out {
            Type2Outcome::Feasible(s) => {
                assert!((s.delta2 - (-0.7 + 1e-6)).abs() < 1e-9);
                // smallest spacing gain that still destabilizes at that d2
                let v = type2_destabilizing_check(&p, s.delta1, s.delta2, 0.8, 0.7);
                assert!(v.destabilizing);
                let one_left = s.delta1 - (0.8 - (-0.8 + 1e-6)) / 160.0;
                let v_left = type2_destabilizing_check(&p, one_left, s.delta2, 0.8, 0.7);
                assert!(!v_left.destabilizing);
            }
            Type2Outcome::Infeasible(r) => panic!("unexpected infeasible: {r}"),
        }
    }

    #[test]
    fn synthesized_attacks_pass_their_own_verdicts() {
        let p = table1();
        for mode in [SynthesisMode::Destabilize, SynthesisMode::Degrade] {
            for strategy in [
                SynthesisStrategy::MaxLambda,
                SynthesisStrategy::MinDelta,
                SynthesisStrategy::Grid,
            ] {
                if let Type1Outcome::Feasible(s) = synthesize_type1(
                    &p,
                    &Type1SynthesisRequest {
                        bound: 0.12,
                        mode,
                        strategy,
                        grid_step: 1e-3,
                    },
                ) {
                    match mode {
                        SynthesisMode::Destabilize => {
                            assert!(type1_destabilizing_check(&p, s.delta, 0.12))
                        }
                        SynthesisMode::Degrade => {
                            assert!(type1_degrading_check(&p, s.delta, 0.12))
                        }
                    }
                }
                if let Type2Outcome::Feasible(s) = synthesize_type2(
                    &p,
                    &Type2SynthesisRequest {
                        spacing_bound: 0.8,
                        rel_speed_bound: 0.7,
                        mode,
                        strategy,
                        grid_step: 2e-2,
                    },
                ) {
                    let v = type2_destabilizing_check(&p, s.delta1, s.delta2, 0.8, 0.7);
                    match mode {
                        SynthesisMode::Destabilize => assert!(v.destabilizing),
                        SynthesisMode::Degrade => assert!(v.degrading),
                    }
                }
            }
        }
    }
}
