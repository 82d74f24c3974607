//! Deterministic fixed-step simulation of a mixed HDV/ACC fleet on a
//! single-lane ring.
//!
//! The integrator is semi-implicit (speed-first) Euler with all
//! accelerations evaluated on the pre-step snapshot, so vehicle indexing
//! order cannot leak into the results. Identical configurations produce
//! bit-identical trajectories.

use crate::models::{
    clamp_accel, equilibrium_speed_ovrv, idm_accel, ovrv_accel, ovrv_accel_attacked_t1,
    ovrv_accel_attacked_t2, AccelBounds, AttackSpec, CfInput, IdmParams, ModelError, OvrvParams,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid config {name} = {value}: {requirement}")]
    InvalidConfig {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
}

fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    requirement: &'static str,
) -> Result<(), SimError> {
    if ok {
        Ok(())
    } else {
        Err(SimError::InvalidConfig {
            name,
            value,
            requirement,
        })
    }
}

/// Role of one vehicle in the mixed fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleClass {
    Hdv,
    Acc,
    AccAttacked,
}

impl VehicleClass {
    /// Stable token used in CSV output.
    pub fn token(&self) -> &'static str {
        match self {
            VehicleClass::Hdv => "hdv",
            VehicleClass::Acc => "acc",
            VehicleClass::AccAttacked => "acc_attacked",
        }
    }
}

/// Car-following law assigned to one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VehicleModel {
    Idm(IdmParams),
    Ovrv(OvrvParams),
}

/// One vehicle on the ring. HDVs carry the IDM, ACC vehicles the OVRV
/// law; only attacked ACC vehicles carry an attack.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleAgent {
    pub id: usize,
    pub class: VehicleClass,
    /// Vehicle length, m.
    pub length: f64,
    pub model: VehicleModel,
    pub attack: Option<AttackSpec>,
}

impl VehicleAgent {
    /// Commanded acceleration before the physical clamp.
    pub fn commanded_accel(&self, input: &CfInput) -> Result<f64, ModelError> {
        match (&self.model, &self.attack) {
            (VehicleModel::Idm(p), _) => idm_accel(p, input),
            (VehicleModel::Ovrv(p), None) => Ok(ovrv_accel(p, input)),
            (VehicleModel::Ovrv(p), Some(AttackSpec::TypeI(atk))) => {
                Ok(ovrv_accel_attacked_t1(p, atk, input))
            }
            (VehicleModel::Ovrv(p), Some(AttackSpec::TypeII(atk))) => {
                Ok(ovrv_accel_attacked_t2(p, atk, input))
            }
        }
    }
}

/// How ACC vehicles are placed among the fleet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// ACC vehicles at every floor(1/penetration)-th slot.
    Even,
}

/// Fleet composition on the ring.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetConfig {
    /// Number of vehicles, > 1.
    pub count: usize,
    /// Ring circumference L, m.
    pub ring_length: f64,
    /// Fraction of the fleet driving under ACC, in [0, 1].
    pub acc_penetration: f64,
    /// Fraction of the ACC vehicles that are attacked, in [0, 1].
    pub attacked_fraction: f64,
    pub placement: Placement,
    /// Uniform vehicle length, m.
    pub vehicle_length: f64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            count: 40,
            ring_length: 1400.0,
            acc_penetration: 0.2,
            attacked_fraction: 0.5,
            placement: Placement::Even,
            vehicle_length: 5.0,
        }
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        require(
            self.count > 1,
            "fleet.count",
            self.count as f64,
            "must be > 1",
        )?;
        require(
            self.vehicle_length > 0.0,
            "fleet.vehicle_length",
            self.vehicle_length,
            "must be > 0",
        )?;
        require(
            self.ring_length > self.count as f64 * self.vehicle_length,
            "fleet.ring_length",
            self.ring_length,
            "must exceed count * vehicle_length (positive initial gaps)",
        )?;
        require(
            (0.0..=1.0).contains(&self.acc_penetration),
            "fleet.acc_penetration",
            self.acc_penetration,
            "must be in [0, 1]",
        )?;
        require(
            (0.0..=1.0).contains(&self.attacked_fraction),
            "fleet.attacked_fraction",
            self.attacked_fraction,
            "must be in [0, 1]",
        )
    }

    /// Initial bumper-to-bumper gap shared by all vehicles.
    pub fn initial_gap(&self) -> f64 {
        self.ring_length / self.count as f64 - self.vehicle_length
    }
}

/// Initial speed assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpeed {
    /// Every vehicle starts at the OVRV equilibrium speed for the initial
    /// gap.
    OvrvEquilibrium,
    /// Every vehicle starts at this speed (clamped to [0, speed limit]).
    Fixed(f64),
}

/// One-off speed impulse seeding oscillations deterministically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub vehicle: usize,
    /// Speed change, m/s (applied once, clamped to [0, speed limit]).
    pub delta_v: f64,
    /// Simulation time at which the impulse is applied; <= 0 means at
    /// initialization.
    pub time: f64,
}

/// What to do when a follower's spacing reaches zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPolicy {
    /// Record the event and stop the run.
    Halt,
    /// Record the event, freeze the follower in place, and keep going.
    RecordAndFreeze,
}

/// Simulation controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Simulated time span, s.
    pub duration: f64,
    /// Settling time excluded by the metrics layer, s.
    pub warmup: f64,
    /// Hard speed cap, m/s.
    pub speed_limit: f64,
    pub accel_bounds: AccelBounds,
    pub initial_speed: InitialSpeed,
    pub perturbation: Option<Perturbation>,
    pub collision_policy: CollisionPolicy,
    /// Spacing of logged rows, s; must be a multiple of dt.
    pub sample_interval: f64,
    /// Reserved; the simulation itself is deterministic and draws no
    /// random numbers.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            duration: 600.0,
            warmup: 60.0,
            speed_limit: 30.0,
            accel_bounds: AccelBounds::default(),
            initial_speed: InitialSpeed::OvrvEquilibrium,
            perturbation: Some(Perturbation {
                vehicle: 0,
                delta_v: -0.25,
                time: 0.0,
            }),
            collision_policy: CollisionPolicy::Halt,
            sample_interval: 0.5,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        require(self.dt > 0.0, "sim.dt", self.dt, "must be > 0")?;
        require(
            self.duration >= 0.0,
            "sim.duration",
            self.duration,
            "must be >= 0",
        )?;
        require(
            self.duration == 0.0 || self.warmup < self.duration,
            "sim.warmup",
            self.warmup,
            "must be below sim.duration",
        )?;
        require(
            self.speed_limit > 0.0,
            "sim.speed_limit",
            self.speed_limit,
            "must be > 0",
        )?;
        self.accel_bounds.validate()?;
        require(
            self.sample_interval > 0.0,
            "sim.sample_interval",
            self.sample_interval,
            "must be > 0",
        )?;
        let per_sample = self.sample_interval / self.dt;
        require(
            (per_sample - per_sample.round()).abs() < 1e-9,
            "sim.sample_interval",
            self.sample_interval,
            "must be a multiple of sim.dt",
        )?;
        if let InitialSpeed::Fixed(v) = self.initial_speed {
            require(v >= 0.0, "sim.initial_speed", v, "must be >= 0")?;
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn steps_per_sample(&self) -> usize {
        ((self.sample_interval / self.dt).round() as usize).max(1)
    }
}

/// Kinematic state of the whole ring at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    /// Positions along the ring, m, wrapped to [0, L).
    pub x: Vec<f64>,
    /// Speeds, m/s, in [0, speed limit].
    pub v: Vec<f64>,
    /// Acceleration applied on the step that produced this state.
    pub a: Vec<f64>,
    /// Vehicles frozen in place after a recorded collision.
    pub frozen: Vec<bool>,
}

/// A follower reaching nonpositive spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub time: f64,
    pub follower: usize,
    /// Spacing at detection, m (<= 0).
    pub spacing: f64,
}

/// One logged (time, vehicle) observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRow {
    pub time: f64,
    pub vehicle: usize,
    pub x: f64,
    pub v: f64,
    pub a: f64,
    pub spacing: f64,
    pub rel_speed: f64,
}

/// Full sampled time series of one run plus its collision record.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub vehicle_count: usize,
    pub ring_length: f64,
    pub sample_interval: f64,
    pub classes: Vec<VehicleClass>,
    pub vehicle_lengths: Vec<f64>,
    pub rows: Vec<SampleRow>,
    pub collisions: Vec<CollisionEvent>,
    /// True when the run stopped early under the halt policy.
    pub halted: bool,
    /// Non-fatal notes from fleet construction (e.g. rounded counts).
    pub warnings: Vec<String>,
}

/// Fleet construction result; rounding of fractional counts is reported
/// as warnings rather than errors.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetBuild {
    pub agents: Vec<VehicleAgent>,
    pub warnings: Vec<String>,
}

/// Build the ordered fleet: ACC vehicles at every floor(1/penetration)-th
/// slot, attacked ACC chosen by alternation over the ACC ordinals (first,
/// third, ... then second, fourth, ... if more than half are attacked).
pub fn build_fleet(
    fc: &FleetConfig,
    idm: &IdmParams,
    ovrv: &OvrvParams,
    attack: Option<&AttackSpec>,
) -> Result<FleetBuild, SimError> {
    fc.validate()?;
    idm.validate()?;
    ovrv.validate()?;
    if let Some(spec) = attack {
        match spec {
            AttackSpec::TypeI(a) => a.validate()?,
            AttackSpec::TypeII(a) => a.validate()?,
        }
    }

    let mut warnings = Vec::new();
    let m = fc.count;
    let exact_acc = m as f64 * fc.acc_penetration;
    let n_acc = exact_acc.floor() as usize;
    if (exact_acc - exact_acc.round()).abs() > 1e-9 {
        warnings.push(format!(
            "acc_penetration * count = {exact_acc} is not an integer; using {n_acc} ACC vehicles"
        ));
    }

    let acc_slots: Vec<usize> = if n_acc == 0 {
        Vec::new()
    } else {
        let stride = ((1.0 / fc.acc_penetration).floor() as usize).max(1);
        (0..n_acc).map(|k| k * stride).collect()
    };

    let exact_attacked = n_acc as f64 * fc.attacked_fraction;
    let mut n_attacked = exact_attacked.floor() as usize;
    if (exact_attacked - exact_attacked.round()).abs() > 1e-9 {
        warnings.push(format!(
            "attacked_fraction * acc count = {exact_attacked} is not an integer; attacking {n_attacked} vehicles"
        ));
    }
    if attack.is_none() && n_attacked > 0 {
        warnings.push("no attack configured; attacked_fraction ignored".to_string());
        n_attacked = 0;
    }
    // alternation: even ACC ordinals first, then odd ones
    let attacked_slots: Vec<usize> = (0..n_acc)
        .step_by(2)
        .chain((1..n_acc).step_by(2))
        .take(n_attacked)
        .map(|ordinal| acc_slots[ordinal])
        .collect();

    let agents = (0..m)
        .map(|id| {
            if attacked_slots.contains(&id) {
                VehicleAgent {
                    id,
                    class: VehicleClass::AccAttacked,
                    length: fc.vehicle_length,
                    model: VehicleModel::Ovrv(*ovrv),
                    attack: attack.copied(),
                }
            } else if acc_slots.contains(&id) {
                VehicleAgent {
                    id,
                    class: VehicleClass::Acc,
                    length: fc.vehicle_length,
                    model: VehicleModel::Ovrv(*ovrv),
                    attack: None,
                }
            } else {
                VehicleAgent {
                    id,
                    class: VehicleClass::Hdv,
                    length: fc.vehicle_length,
                    model: VehicleModel::Idm(*idm),
                    attack: None,
                }
            }
        })
        .collect();

    Ok(FleetBuild { agents, warnings })
}

/// Equal-gap initial state with speeds from the configured rule and the
/// initial impulse (if any) already applied.
pub fn init_state(
    fc: &FleetConfig,
    sc: &SimConfig,
    ovrv: &OvrvParams,
) -> Result<SimState, SimError> {
    fc.validate()?;
    sc.validate()?;
    let m = fc.count;
    let slot = fc.ring_length / m as f64;
    let x: Vec<f64> = (0..m).map(|i| ((m - i) % m) as f64 * slot).collect();
    let v0 = match sc.initial_speed {
        InitialSpeed::OvrvEquilibrium => {
            equilibrium_speed_ovrv(ovrv, fc.initial_gap(), sc.speed_limit)
        }
        InitialSpeed::Fixed(v) => v.clamp(0.0, sc.speed_limit),
    };
    let mut v = vec![v0; m];
    if let Some(pert) = &sc.perturbation {
        require(
            (pert.vehicle as f64) < m as f64,
            "sim.perturbation.vehicle",
            pert.vehicle as f64,
            "must be a valid vehicle index",
        )?;
        if pert.time <= 0.0 {
            v[pert.vehicle] = (v[pert.vehicle] + pert.delta_v).clamp(0.0, sc.speed_limit);
        }
    }
    Ok(SimState {
        time: 0.0,
        x,
        v,
        a: vec![0.0; m],
        frozen: vec![false; m],
    })
}

/// Ring-wrapped bumper-to-bumper gap seen by follower `i`; the leader of
/// vehicle 0 is vehicle m-1.
pub fn spacing(state: &SimState, agents: &[VehicleAgent], ring_length: f64, i: usize) -> f64 {
    let m = agents.len();
    let leader = (i + m - 1) % m;
    (state.x[leader] - state.x[i]).rem_euclid(ring_length) - agents[leader].length
}

/// Relative speed (leader minus follower) seen by vehicle `i`.
pub fn rel_speed(state: &SimState, i: usize) -> f64 {
    let m = state.v.len();
    let leader = (i + m - 1) % m;
    state.v[leader] - state.v[i]
}

/// Result of advancing the ring by one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: SimState,
    /// Collisions detected after the position update, if any.
    pub collisions: Vec<CollisionEvent>,
}

/// Advance the ring by one step: accelerations from the pre-step
/// snapshot, attack injected before the physical clamp, then
/// v' = clamp(v + a dt), x' = x + v' dt (mod L).
///
/// Under `RecordAndFreeze` colliding followers come back frozen in the
/// returned state; under `Halt` the caller decides what to do with it.
pub fn step(
    state: &SimState,
    agents: &[VehicleAgent],
    sc: &SimConfig,
    ring_length: f64,
) -> Result<StepOutcome, SimError> {
    let m = agents.len();
    let mut accel = vec![0.0; m];
    for (i, agent) in agents.iter().enumerate() {
        if state.frozen[i] {
            continue;
        }
        let input = CfInput {
            spacing: spacing(state, agents, ring_length, i),
            rel_speed: rel_speed(state, i),
            speed: state.v[i],
        };
        accel[i] = clamp_accel(&sc.accel_bounds, agent.commanded_accel(&input)?);
    }

    let mut next = SimState {
        time: state.time + sc.dt,
        x: vec![0.0; m],
        v: vec![0.0; m],
        a: accel,
        frozen: state.frozen.clone(),
    };
    for i in 0..m {
        if state.frozen[i] {
            next.v[i] = 0.0;
            next.x[i] = state.x[i];
        } else {
            next.v[i] = (state.v[i] + next.a[i] * sc.dt).clamp(0.0, sc.speed_limit);
            next.x[i] = (state.x[i] + next.v[i] * sc.dt).rem_euclid(ring_length);
        }
    }

    let mut collisions = Vec::new();
    for i in 0..m {
        if next.frozen[i] {
            continue;
        }
        let gap = spacing(&next, agents, ring_length, i);
        if gap <= 0.0 {
            collisions.push(CollisionEvent {
                time: next.time,
                follower: i,
                spacing: gap,
            });
            if sc.collision_policy == CollisionPolicy::RecordAndFreeze {
                next.frozen[i] = true;
                next.v[i] = 0.0;
            }
        }
    }
    Ok(StepOutcome {
        state: next,
        collisions,
    })
}

/// Run the full scenario and return the sampled trajectory.
///
/// Identical inputs yield identical logs, bit for bit. Under the halt
/// policy the run stops at the first collision and the colliding state is
/// not logged, so logged rows always have positive spacings.
pub fn run(
    fc: &FleetConfig,
    sc: &SimConfig,
    idm: &IdmParams,
    ovrv: &OvrvParams,
    attack: Option<&AttackSpec>,
) -> Result<TrajectoryLog, SimError> {
    let FleetBuild { agents, warnings } = build_fleet(fc, idm, ovrv, attack)?;
    let mut state = init_state(fc, sc, ovrv)?;
    let ring_length = fc.ring_length;

    let mut log = TrajectoryLog {
        vehicle_count: fc.count,
        ring_length,
        sample_interval: sc.sample_interval,
        classes: agents.iter().map(|a| a.class).collect(),
        vehicle_lengths: agents.iter().map(|a| a.length).collect(),
        rows: Vec::new(),
        collisions: Vec::new(),
        halted: false,
        warnings,
    };
    let push_rows = |log: &mut TrajectoryLog, state: &SimState| {
        for i in 0..agents.len() {
            log.rows.push(SampleRow {
                time: state.time,
                vehicle: i,
                x: state.x[i],
                v: state.v[i],
                a: state.a[i],
                spacing: spacing(state, &agents, ring_length, i),
                rel_speed: rel_speed(state, i),
            });
        }
    };
    push_rows(&mut log, &state);

    let mut pending_impulse = sc.perturbation.as_ref().filter(|p| p.time > 0.0).copied();
    let steps = sc.steps();
    let per_sample = sc.steps_per_sample();
    for k in 0..steps {
        if let Some(pert) = pending_impulse {
            if state.time >= pert.time {
                state.v[pert.vehicle] =
                    (state.v[pert.vehicle] + pert.delta_v).clamp(0.0, sc.speed_limit);
                pending_impulse = None;
            }
        }
        let outcome = step(&state, &agents, sc, ring_length)?;
        state = outcome.state;
        state.time = (k + 1) as f64 * sc.dt;
        if !outcome.collisions.is_empty() {
            log.collisions.extend(outcome.collisions);
            if sc.collision_policy == CollisionPolicy::Halt {
                log.halted = true;
                break;
            }
        }
        if (k + 1) % per_sample == 0 {
            push_rows(&mut log, &state);
        }
    }
    Ok(log)
}
