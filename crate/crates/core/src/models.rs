//! Car-following acceleration laws and their attacked variants.
//!
//! Two concrete longitudinal models are provided: the intelligent driver
//! model (IDM) for human-driven vehicles and the optimal velocity with
//! relative velocity (OVRV) model, a linear constant-time-gap law, for
//! adaptive cruise control (ACC). Attacked variants corrupt either the
//! commanded acceleration (Type I) or the sensor measurements feeding the
//! controller (Type II).
//!
//! All types are immutable values and all functions are pure; everything
//! here is safe to share across threads.

use thiserror::Error;

/// Errors from model parameter validation and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter {name} = {value}: {requirement}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// Car-following laws are undefined at or past bumper contact.
    /// Collision handling belongs to the simulator, not the model.
    #[error("nonpositive spacing {spacing} m passed to a car-following model")]
    NonPositiveSpacing { spacing: f64 },
}

fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParam {
            name,
            value,
            requirement,
        })
    }
}

/// Intelligent driver model parameters for human-driven vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdmParams {
    /// Desired (free-road) speed v0, m/s.
    pub desired_speed: f64,
    /// Desired time headway T, s.
    pub time_headway: f64,
    /// Minimum spacing s0, m.
    pub min_spacing: f64,
    /// Maximum acceleration a, m/s^2.
    pub max_accel: f64,
    /// Comfortable deceleration b, m/s^2.
    pub comfort_decel: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            desired_speed: 30.0,
            time_headway: 1.5,
            min_spacing: 2.0,
            max_accel: 1.4,
            comfort_decel: 2.0,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        require(
            self.desired_speed > 0.0,
            "idm.v0",
            self.desired_speed,
            "must be > 0",
        )?;
        require(
            self.time_headway > 0.0,
            "idm.time_headway",
            self.time_headway,
            "must be > 0",
        )?;
        require(
            self.min_spacing > 0.0,
            "idm.s0",
            self.min_spacing,
            "must be > 0",
        )?;
        require(
            self.max_accel > 0.0,
            "idm.a_max",
            self.max_accel,
            "must be > 0",
        )?;
        require(
            self.comfort_decel > 0.0,
            "idm.b_comfort",
            self.comfort_decel,
            "must be > 0",
        )
    }
}

/// OVRV (linear constant-time-gap) parameters for ACC vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvrvParams {
    /// Gain k1 on the gap error, 1/s^2.
    pub gap_gain: f64,
    /// Gain k2 on the relative speed, 1/s.
    pub rel_speed_gain: f64,
    /// Jam distance eta (spacing held at rest), m.
    pub jam_distance: f64,
    /// Desired time gap tau, s.
    pub time_gap: f64,
}

impl Default for OvrvParams {
    fn default() -> Self {
        Self {
            gap_gain: 0.05,
            rel_speed_gain: 0.10,
            jam_distance: 21.51,
            time_gap: 2.50,
        }
    }
}

impl OvrvParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.gap_gain > 0.0, "ovrv.k1", self.gap_gain, "must be > 0")?;
        require(
            self.rel_speed_gain > 0.0,
            "ovrv.k2",
            self.rel_speed_gain,
            "must be > 0",
        )?;
        require(
            self.time_gap > 0.0,
            "ovrv.tau",
            self.time_gap,
            "must be > 0",
        )?;
        require(
            self.jam_distance >= 0.0,
            "ovrv.eta",
            self.jam_distance,
            "must be >= 0",
        )
    }

    /// Product tau * k1, the singular attack gain for Type I analysis.
    pub fn tau_k1(&self) -> f64 {
        self.time_gap * self.gap_gain
    }
}

/// Type I attack: additive corruption of the commanded acceleration,
/// proportional to the ego speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackTypeI {
    /// Multiplier delta on the ego speed, 1/s.
    pub gain: f64,
    /// Known bound r with |gain| <= bound; r = 0 means no attack.
    pub bound: f64,
}

impl AttackTypeI {
    pub fn new(gain: f64, bound: f64) -> Result<Self, ModelError> {
        let atk = Self { gain, bound };
        atk.validate()?;
        Ok(atk)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.bound >= 0.0, "attack.r", self.bound, "must be >= 0")?;
        require(
            self.gain.abs() <= self.bound,
            "attack.delta",
            self.gain,
            "must satisfy |delta| <= r",
        )
    }
}

/// Type II attack: false data injected into the spacing and relative-speed
/// measurements, each scaled by (1 + delta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackTypeII {
    /// Multiplier delta1 on the measured spacing.
    pub spacing_gain: f64,
    /// Multiplier delta2 on the measured relative speed.
    pub rel_speed_gain: f64,
    /// Bound z1 with |spacing_gain| <= z1.
    pub spacing_bound: f64,
    /// Bound z2 with |rel_speed_gain| <= z2.
    pub rel_speed_bound: f64,
}

impl AttackTypeII {
    pub fn new(
        spacing_gain: f64,
        rel_speed_gain: f64,
        spacing_bound: f64,
        rel_speed_bound: f64,
    ) -> Result<Self, ModelError> {
        let atk = Self {
            spacing_gain,
            rel_speed_gain,
            spacing_bound,
            rel_speed_bound,
        };
        atk.validate()?;
        Ok(atk)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        require(
            self.spacing_bound >= 0.0,
            "attack.z1",
            self.spacing_bound,
            "must be >= 0",
        )?;
        require(
            self.rel_speed_bound >= 0.0,
            "attack.z2",
            self.rel_speed_bound,
            "must be >= 0",
        )?;
        require(
            self.spacing_gain.abs() <= self.spacing_bound,
            "attack.delta1",
            self.spacing_gain,
            "must satisfy |delta1| <= z1",
        )?;
        require(
            self.rel_speed_gain.abs() <= self.rel_speed_bound,
            "attack.delta2",
            self.rel_speed_gain,
            "must satisfy |delta2| <= z2",
        )
    }
}

/// Either attack channel, as carried by a compromised vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSpec {
    TypeI(AttackTypeI),
    TypeII(AttackTypeII),
}

/// Inputs to a car-following law.
///
/// Sign convention: `rel_speed` is leader speed minus ego speed, so a
/// negative value means the ego vehicle is closing in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfInput {
    /// Bumper-to-bumper spacing to the leader, m.
    pub spacing: f64,
    /// Relative speed (leader minus ego), m/s.
    pub rel_speed: f64,
    /// Ego speed, m/s.
    pub speed: f64,
}

/// Physical acceleration envelope applied by the low-level controller,
/// after any attack has been injected into the command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelBounds {
    /// Most negative allowed acceleration, m/s^2.
    pub min: f64,
    /// Most positive allowed acceleration, m/s^2.
    pub max: f64,
}

impl Default for AccelBounds {
    fn default() -> Self {
        Self {
            min: -8.0,
            max: 5.0,
        }
    }
}

impl AccelBounds {
    pub fn validate(&self) -> Result<(), ModelError> {
        require(self.min < 0.0, "sim.accel_min", self.min, "must be < 0")?;
        require(self.max > 0.0, "sim.accel_max", self.max, "must be > 0")
    }
}

/// Partial derivatives of an acceleration law with respect to its inputs,
/// the raw ingredients of the rational-driving and string-stability checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelPartials {
    /// d(accel)/d(spacing), 1/s^2.
    pub wrt_spacing: f64,
    /// d(accel)/d(rel_speed), 1/s.
    pub wrt_rel_speed: f64,
    /// d(accel)/d(speed), 1/s.
    pub wrt_speed: f64,
}

/// IDM desired gap s* = s0 + max{0, v T - v dv / (2 sqrt(a b))}.
///
/// Always at least `min_spacing`; the dynamic term is clamped at zero.
pub fn idm_desired_gap(p: &IdmParams, speed: f64, rel_speed: f64) -> f64 {
    let dynamic =
        speed * p.time_headway - speed * rel_speed / (2.0 * (p.max_accel * p.comfort_decel).sqrt());
    p.min_spacing + dynamic.max(0.0)
}

/// IDM acceleration a [1 - (v/v0)^4 - (s*/s)^2].
///
/// Spacing must be strictly positive; collisions are the simulator's
/// business.
pub fn idm_accel(p: &IdmParams, input: &CfInput) -> Result<f64, ModelError> {
    if input.spacing <= 0.0 {
        return Err(ModelError::NonPositiveSpacing {
            spacing: input.spacing,
        });
    }
    let desired = idm_desired_gap(p, input.speed, input.rel_speed);
    let speed_ratio = input.speed / p.desired_speed;
    let gap_ratio = desired / input.spacing;
    Ok(p.max_accel * (1.0 - speed_ratio.powi(4) - gap_ratio.powi(2)))
}

/// OVRV acceleration k1 (s - eta - tau v) + k2 dv.
pub fn ovrv_accel(p: &OvrvParams, input: &CfInput) -> f64 {
    p.gap_gain * (input.spacing - p.jam_distance - p.time_gap * input.speed)
        + p.rel_speed_gain * input.rel_speed
}

/// OVRV acceleration under a Type I attack: the unattacked command plus
/// delta * v injected into the acceleration channel.
pub fn ovrv_accel_attacked_t1(p: &OvrvParams, atk: &AttackTypeI, input: &CfInput) -> f64 {
    ovrv_accel(p, input) + atk.gain * input.speed
}

/// OVRV acceleration under a Type II attack: the controller sees spacing
/// scaled by (1 + delta1) and relative speed scaled by (1 + delta2).
pub fn ovrv_accel_attacked_t2(p: &OvrvParams, atk: &AttackTypeII, input: &CfInput) -> f64 {
    p.gap_gain
        * (input.spacing + atk.spacing_gain * input.spacing
            - p.jam_distance
            - p.time_gap * input.speed)
        + p.rel_speed_gain * (input.rel_speed + atk.rel_speed_gain * input.rel_speed)
}

/// Partials of the Type-I-attacked OVRV law: (k1, k2, -tau k1 + delta).
///
/// The attack shifts only the ego-speed partial; the OVRV model is linear,
/// so these are state-independent.
pub fn partials_t1(p: &OvrvParams, delta: f64) -> AccelPartials {
    AccelPartials {
        wrt_spacing: p.gap_gain,
        wrt_rel_speed: p.rel_speed_gain,
        wrt_speed: -p.tau_k1() + delta,
    }
}

/// Partials of the Type-II-attacked OVRV law:
/// (k1 (1 + delta1), k2 (1 + delta2), -tau k1).
pub fn partials_t2(p: &OvrvParams, delta1: f64, delta2: f64) -> AccelPartials {
    AccelPartials {
        wrt_spacing: p.gap_gain * (1.0 + delta1),
        wrt_rel_speed: p.rel_speed_gain * (1.0 + delta2),
        wrt_speed: -p.tau_k1(),
    }
}

/// Speed at which the OVRV law is in equilibrium for a given spacing,
/// (s - eta) / tau, clamped to [0, speed_limit]. Spacings at or below the
/// jam distance map to zero (jammed).
pub fn equilibrium_speed_ovrv(p: &OvrvParams, spacing: f64, speed_limit: f64) -> f64 {
    if spacing < p.jam_distance {
        return 0.0;
    }
    ((spacing - p.jam_distance) / p.time_gap).clamp(0.0, speed_limit)
}

/// Clamp a commanded acceleration to the physical envelope.
pub fn clamp_accel(bounds: &AccelBounds, accel: f64) -> f64 {
    accel.clamp(bounds.min, bounds.max)
}
