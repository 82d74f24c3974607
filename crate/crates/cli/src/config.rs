//! Run configuration: a nested TOML file whose defaults reproduce the
//! reference scenario, with dotted-path `--set` overrides.
//!
//! Unknown keys are rejected. The effective configuration serializes back
//! to TOML and re-parses to an identical value, which is how outputs
//! embed a re-runnable echo of their inputs.

use accring_core::{
    AccelBounds, AttackSpec, AttackTypeI, AttackTypeII, CollisionPolicy, FleetConfig, IdmParams,
    InitialSpeed, ModelError, OvrvParams, Perturbation, Placement, SimConfig, SimError,
    SynthesisMode, SynthesisStrategy, Type1SynthesisRequest, Type2SynthesisRequest,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
    #[error("bad --set override '{arg}': {message}")]
    BadOverride { arg: String, message: String },
}

impl From<ModelError> for ConfigError {
    fn from(err: ModelError) -> Self {
        match err {
            ModelError::InvalidParam {
                name,
                value,
                requirement,
            } => ConfigError::Invalid {
                key: name.to_string(),
                message: format!("{value} {requirement}"),
            },
            other => ConfigError::Invalid {
                key: "model".to_string(),
                message: other.to_string(),
            },
        }
    }
}

impl From<SimError> for ConfigError {
    fn from(err: SimError) -> Self {
        match err {
            SimError::InvalidConfig {
                name,
                value,
                requirement,
            } => ConfigError::Invalid {
                key: name.to_string(),
                message: format!("{value} {requirement}"),
            },
            SimError::Model(m) => m.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub fleet: FleetSection,
    pub sim: SimSection,
    pub attack: AttackSection,
    pub metrics: MetricsSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub idm: IdmSection,
    pub ovrv: OvrvSection,
}

/// IDM parameters for human-driven vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdmSection {
    pub v0: f64,
    pub time_headway: f64,
    pub s0: f64,
    pub a_max: f64,
    pub b_comfort: f64,
}

impl Default for IdmSection {
    fn default() -> Self {
        let p = IdmParams::default();
        Self {
            v0: p.desired_speed,
            time_headway: p.time_headway,
            s0: p.min_spacing,
            a_max: p.max_accel,
            b_comfort: p.comfort_decel,
        }
    }
}

/// OVRV parameters for ACC vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OvrvSection {
    pub k1: f64,
    pub k2: f64,
    pub eta: f64,
    pub tau: f64,
}

impl Default for OvrvSection {
    fn default() -> Self {
        let p = OvrvParams::default();
        Self {
            k1: p.gap_gain,
            k2: p.rel_speed_gain,
            eta: p.jam_distance,
            tau: p.time_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FleetSection {
    pub count: usize,
    pub ring_length: f64,
    pub acc_penetration: f64,
    pub attacked_fraction: f64,
    pub placement: String,
    pub vehicle_length: f64,
}

impl Default for FleetSection {
    fn default() -> Self {
        let fc = FleetConfig::default();
        Self {
            count: fc.count,
            ring_length: fc.ring_length,
            acc_penetration: fc.acc_penetration,
            attacked_fraction: fc.attacked_fraction,
            placement: "even".to_string(),
            vehicle_length: fc.vehicle_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub duration: f64,
    pub warmup: f64,
    pub speed_limit: f64,
    pub accel_min: f64,
    pub accel_max: f64,
    /// Either the string "ovrv-equilibrium" or an explicit speed in m/s.
    pub initial_speed: InitialSpeedValue,
    pub sample_interval: f64,
    pub collision_policy: String,
    pub seed: u64,
    pub perturbation: PerturbationSection,
}

impl Default for SimSection {
    fn default() -> Self {
        let sc = SimConfig::default();
        Self {
            dt: sc.dt,
            duration: sc.duration,
            warmup: sc.warmup,
            speed_limit: sc.speed_limit,
            accel_min: sc.accel_bounds.min,
            accel_max: sc.accel_bounds.max,
            initial_speed: InitialSpeedValue::Rule("ovrv-equilibrium".to_string()),
            sample_interval: sc.sample_interval,
            collision_policy: "halt".to_string(),
            seed: sc.seed,
            perturbation: PerturbationSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpeedValue {
    Value(f64),
    Rule(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    pub enabled: bool,
    pub vehicle: usize,
    pub delta_v: f64,
    pub time: f64,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            vehicle: 0,
            delta_v: -0.25,
            time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttackSection {
    /// "none", "type1", or "type2".
    pub kind: String,
    /// "fixed" evaluates the configured gains; "destabilize" and
    /// "degrade" are synthesis goals.
    pub mode: String,
    /// Type I gain delta and bound r.
    pub delta: f64,
    pub r: f64,
    /// Type II gains and bounds.
    pub delta1: f64,
    pub delta2: f64,
    pub z1: f64,
    pub z2: f64,
    /// "max-lambda", "min-delta", or "grid".
    pub strategy: String,
    pub grid_step: f64,
}

impl Default for AttackSection {
    fn default() -> Self {
        Self {
            kind: "none".to_string(),
            mode: "fixed".to_string(),
            delta: 0.0,
            r: 0.12,
            delta1: 0.0,
            delta2: 0.0,
            z1: 0.8,
            z2: 0.8,
            strategy: "max-lambda".to_string(),
            grid_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub ttc_thresholds: Vec<f64>,
    pub warmup: f64,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            ttc_thresholds: vec![1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
            warmup: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub lengths: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            lengths: (0..=21).map(|k| 700.0 + 100.0 * k as f64).collect(),
        }
    }
}

/// Attack configuration resolved from the flat section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackKind {
    None,
    Type1,
    Type2,
}

impl RunConfig {
    pub fn idm_params(&self) -> IdmParams {
        IdmParams {
            desired_speed: self.model.idm.v0,
            time_headway: self.model.idm.time_headway,
            min_spacing: self.model.idm.s0,
            max_accel: self.model.idm.a_max,
            comfort_decel: self.model.idm.b_comfort,
        }
    }

    pub fn ovrv_params(&self) -> OvrvParams {
        OvrvParams {
            gap_gain: self.model.ovrv.k1,
            rel_speed_gain: self.model.ovrv.k2,
            jam_distance: self.model.ovrv.eta,
            time_gap: self.model.ovrv.tau,
        }
    }

    pub fn fleet_config(&self) -> Result<FleetConfig, ConfigError> {
        if self.fleet.placement != "even" {
            return Err(ConfigError::Invalid {
                key: "fleet.placement".to_string(),
                message: format!(
                    "unknown placement '{}' (expected 'even')",
                    self.fleet.placement
                ),
            });
        }
        Ok(FleetConfig {
            count: self.fleet.count,
            ring_length: self.fleet.ring_length,
            acc_penetration: self.fleet.acc_penetration,
            attacked_fraction: self.fleet.attacked_fraction,
            placement: Placement::Even,
            vehicle_length: self.fleet.vehicle_length,
        })
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let initial_speed = match &self.sim.initial_speed {
            InitialSpeedValue::Value(v) => InitialSpeed::Fixed(*v),
            InitialSpeedValue::Rule(rule) if rule == "ovrv-equilibrium" => {
                InitialSpeed::OvrvEquilibrium
            }
            InitialSpeedValue::Rule(rule) => {
                return Err(ConfigError::Invalid {
                    key: "sim.initial_speed".to_string(),
                    message: format!(
                        "unknown rule '{rule}' (expected 'ovrv-equilibrium' or a speed in m/s)"
                    ),
                })
            }
        };
        let collision_policy = match self.sim.collision_policy.as_str() {
            "halt" => CollisionPolicy::Halt,
            "record-and-freeze" => CollisionPolicy::RecordAndFreeze,
            other => {
                return Err(ConfigError::Invalid {
                    key: "sim.collision_policy".to_string(),
                    message: format!(
                        "unknown policy '{other}' (expected 'halt' or 'record-and-freeze')"
                    ),
                })
            }
        };
        let perturbation = if self.sim.perturbation.enabled {
            Some(Perturbation {
                vehicle: self.sim.perturbation.vehicle,
                delta_v: self.sim.perturbation.delta_v,
                time: self.sim.perturbation.time,
            })
        } else {
            None
        };
        Ok(SimConfig {
            dt: self.sim.dt,
            duration: self.sim.duration,
            warmup: self.sim.warmup,
            speed_limit: self.sim.speed_limit,
            accel_bounds: AccelBounds {
                min: self.sim.accel_min,
                max: self.sim.accel_max,
            },
            initial_speed,
            perturbation,
            collision_policy,
            sample_interval: self.sim.sample_interval,
            seed: self.sim.seed,
        })
    }

    pub fn attack_kind(&self) -> Result<AttackKind, ConfigError> {
        match self.attack.kind.as_str() {
            "none" => Ok(AttackKind::None),
            "type1" => Ok(AttackKind::Type1),
            "type2" => Ok(AttackKind::Type2),
            other => Err(ConfigError::Invalid {
                key: "attack.kind".to_string(),
                message: format!("unknown kind '{other}' (expected 'none', 'type1' or 'type2')"),
            }),
        }
    }

    /// The attack carried by compromised vehicles, if any.
    pub fn attack_spec(&self) -> Result<Option<AttackSpec>, ConfigError> {
        Ok(match self.attack_kind()? {
            AttackKind::None => None,
            AttackKind::Type1 => Some(AttackSpec::TypeI(AttackTypeI::new(
                self.attack.delta,
                self.attack.r,
            )?)),
            AttackKind::Type2 => Some(AttackSpec::TypeII(AttackTypeII::new(
                self.attack.delta1,
                self.attack.delta2,
                self.attack.z1,
                self.attack.z2,
            )?)),
        })
    }

    pub fn synthesis_mode(&self) -> Result<SynthesisMode, ConfigError> {
        match self.attack.mode.as_str() {
            "destabilize" => Ok(SynthesisMode::Destabilize),
            "degrade" => Ok(SynthesisMode::Degrade),
            other => Err(ConfigError::Invalid {
                key: "attack.mode".to_string(),
                message: format!(
                    "synthesis needs mode 'destabilize' or 'degrade' (found '{other}')"
                ),
            }),
        }
    }

    pub fn synthesis_strategy(&self) -> Result<SynthesisStrategy, ConfigError> {
        match self.attack.strategy.as_str() {
            "max-lambda" => Ok(SynthesisStrategy::MaxLambda),
            "min-delta" => Ok(SynthesisStrategy::MinDelta),
            "grid" => Ok(SynthesisStrategy::Grid),
            other => Err(ConfigError::Invalid {
                key: "attack.strategy".to_string(),
                message: format!(
                    "unknown strategy '{other}' (expected 'max-lambda', 'min-delta' or 'grid')"
                ),
            }),
        }
    }

    pub fn type1_request(&self) -> Result<Type1SynthesisRequest, ConfigError> {
        Ok(Type1SynthesisRequest {
            bound: self.attack.r,
            mode: self.synthesis_mode()?,
            strategy: self.synthesis_strategy()?,
            grid_step: self.attack.grid_step,
        })
    }

    pub fn type2_request(&self) -> Result<Type2SynthesisRequest, ConfigError> {
        Ok(Type2SynthesisRequest {
            spacing_bound: self.attack.z1,
            rel_speed_bound: self.attack.z2,
            mode: self.synthesis_mode()?,
            strategy: self.synthesis_strategy()?,
            grid_step: self.attack.grid_step,
        })
    }

    /// Validate every section against the core invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.idm_params().validate()?;
        self.ovrv_params().validate()?;
        self.fleet_config()?.validate()?;
        self.sim_config()?.validate()?;
        self.attack_spec()?;
        if self.attack.grid_step <= 0.0 {
            return Err(ConfigError::Invalid {
                key: "attack.grid_step".to_string(),
                message: format!("{} must be > 0", self.attack.grid_step),
            });
        }
        if self.metrics.warmup < 0.0 {
            return Err(ConfigError::Invalid {
                key: "metrics.warmup".to_string(),
                message: format!("{} must be >= 0", self.metrics.warmup),
            });
        }
        for pair in self.metrics.ttc_thresholds.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ConfigError::Invalid {
                    key: "metrics.ttc_thresholds".to_string(),
                    message: "must be strictly ascending".to_string(),
                });
            }
        }
        for &t in &self.metrics.ttc_thresholds {
            if t <= 0.0 {
                return Err(ConfigError::Invalid {
                    key: "metrics.ttc_thresholds".to_string(),
                    message: format!("threshold {t} must be > 0"),
                });
            }
        }
        let min_length = self.fleet.count as f64 * self.fleet.vehicle_length;
        for &length in &self.sweep.lengths {
            if length <= min_length {
                return Err(ConfigError::Invalid {
                    key: "sweep.lengths".to_string(),
                    message: format!(
                        "length {length} must exceed count * vehicle_length = {min_length}"
                    ),
                });
            }
        }
        Ok(())
    }

    /// The effective configuration as TOML; re-parsing this yields an
    /// identical value.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

/// Parse a config file (empty text gives the full defaults), apply
/// dotted-path overrides, and validate.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    for arg in overrides {
        apply_override(&mut table, arg)?;
    }
    let config: RunConfig = match toml::Value::Table(table).try_into() {
        Ok(config) => config,
        Err(e) => {
            if overrides.is_empty() {
                // reparse from source so the message carries line numbers
                match toml::from_str::<RunConfig>(text) {
                    Err(spanned) => return Err(ConfigError::Parse(spanned.to_string())),
                    Ok(config) => config,
                }
            } else {
                return Err(ConfigError::Parse(e.to_string()));
            }
        }
    };
    config.validate()?;
    Ok(config)
}

/// Apply one `section.key=value` override. The value is parsed as TOML
/// and falls back to a bare string.
fn apply_override(table: &mut toml::Table, arg: &str) -> Result<(), ConfigError> {
    let (path, raw) = arg
        .split_once('=')
        .ok_or_else(|| ConfigError::BadOverride {
            arg: arg.to_string(),
            message: "expected key=value".to_string(),
        })?;
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v present"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut current = table;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::BadOverride {
            arg: arg.to_string(),
            message: "empty path segment".to_string(),
        });
    }
    for segment in &segments[..segments.len() - 1] {
        let entry = current
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::BadOverride {
                arg: arg.to_string(),
                message: format!("'{segment}' is not a table"),
            })?;
    }
    current.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}
