//! Mixed-traffic ring simulation and attack analysis for adaptive cruise
//! control.
//!
//! The crate has four layers:
//!
//! - [`models`]: the IDM and OVRV car-following laws, their attacked
//!   variants, and analytic partial derivatives.
//! - [`stability`]: the string-stability index and closed-form
//!   characterizations of destabilizing and degrading attacks.
//! - [`synthesis`]: grid search over the closed-form conditions to pick
//!   concrete attack gains.
//! - [`sim`] and [`metrics`]: deterministic ring-road simulation plus
//!   time-to-collision and flow-density metrics over its logs.

pub mod metrics;
pub mod models;
pub mod sim;
pub mod stability;
pub mod synthesis;

pub use metrics::{
    capacity, fd_sweep, mean_speed, oscillation_stats, pr_ratio, pr_table, ttc, FdPoint,
    MetricsError, OscillationStats, TtcReport,
};
pub use models::{
    clamp_accel, equilibrium_speed_ovrv, idm_accel, idm_desired_gap, ovrv_accel,
    ovrv_accel_attacked_t1, ovrv_accel_attacked_t2, partials_t1, partials_t2, AccelBounds,
    AccelPartials, AttackSpec, AttackTypeI, AttackTypeII, CfInput, IdmParams, ModelError,
    OvrvParams,
};
pub use sim::{
    build_fleet, init_state, rel_speed, run, spacing, step, CollisionEvent, CollisionPolicy,
    FleetBuild, FleetConfig, InitialSpeed, Perturbation, Placement, SampleRow, SimConfig, SimError,
    SimState, StepOutcome, TrajectoryLog, VehicleAgent, VehicleClass, VehicleModel,
};
pub use stability::{
    delta_star, delta_star_rejected, lambda2, lambda2_hat, lambda2_ovrv_baseline, lambda2_tilde,
    p_poly, rdc_check, root_oracle_lambda2_tilde, stability_report, theta, type1_degrading_check,
    type1_destabilizing_check, type1_interval, type2_degrading_check, type2_destabilizing_check,
    Classification, StabilityError, StabilityReport, Type1AttackInterval, Type2AttackVerdict,
};
pub use synthesis::{
    synthesize_type1, synthesize_type2, InfeasibleReason, SynthesisMode, SynthesisStrategy,
    SynthesizedType1, SynthesizedType2, Type1Outcome, Type1SynthesisRequest, Type2Outcome,
    Type2SynthesisRequest,
};
