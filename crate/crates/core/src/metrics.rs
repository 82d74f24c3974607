//! Safety and efficiency metrics over trajectory logs: time-to-collision
//! risk ratios, speed oscillation statistics, and flow-density sweeps.

use crate::models::{AttackSpec, IdmParams, OvrvParams};
use crate::sim::{run, FleetConfig, SimConfig, SimError, TrajectoryLog};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("time-to-collision undefined at nonpositive spacing {spacing} m")]
    NonPositiveSpacing { spacing: f64 },
    #[error("threshold {value} must be > 0")]
    NonPositiveThreshold { value: f64 },
    #[error("thresholds must be sorted in ascending order")]
    UnsortedThresholds,
    #[error("no observations after the warm-up period")]
    EmptyCaseSet,
}

/// Time to collision: spacing over closing speed while closing, infinite
/// otherwise.
pub fn ttc(spacing: f64, rel_speed: f64) -> Result<f64, MetricsError> {
    if spacing <= 0.0 {
        return Err(MetricsError::NonPositiveSpacing { spacing });
    }
    if rel_speed < 0.0 {
        Ok(spacing / -rel_speed)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Dangerous-risk ratios per threshold. Ratios are percentages and
/// nondecreasing across thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct TtcReport {
    pub thresholds: Vec<f64>,
    /// Percentage of cases with TTC below each threshold.
    pub ratios: Vec<f64>,
    pub dangerous_counts: Vec<usize>,
    pub total_cases: usize,
}

/// Dangerous-risk table over ascending TTC thresholds.
///
/// A case is one (vehicle, sampled row) pair after the warm-up time. Rows
/// at or past contact (possible under the freeze policy) count as
/// dangerous at every threshold.
pub fn pr_table(
    log: &TrajectoryLog,
    thresholds: &[f64],
    warmup: f64,
) -> Result<TtcReport, MetricsError> {
    for pair in thresholds.windows(2) {
        if pair[1] <= pair[0] {
            return Err(MetricsError::UnsortedThresholds);
        }
    }
    for &t in thresholds {
        if t <= 0.0 {
            return Err(MetricsError::NonPositiveThreshold { value: t });
        }
    }
    let mut total = 0usize;
    let mut dangerous = vec![0usize; thresholds.len()];
    for row in &log.rows {
        if row.time <= warmup {
            continue;
        }
        total += 1;
        if row.spacing <= 0.0 {
            for d in dangerous.iter_mut() {
                *d += 1;
            }
            continue;
        }
        let t = ttc(row.spacing, row.rel_speed).expect("spacing checked positive");
        for (j, &threshold) in thresholds.iter().enumerate() {
            if t < threshold {
                dangerous[j] += 1;
            }
        }
    }
    if total == 0 {
        return Err(MetricsError::EmptyCaseSet);
    }
    let ratios = dangerous
        .iter()
        .map(|&c| 100.0 * c as f64 / total as f64)
        .collect();
    Ok(TtcReport {
        thresholds: thresholds.to_vec(),
        ratios,
        dangerous_counts: dangerous,
        total_cases: total,
    })
}

/// Dangerous-risk ratio (percent) at one threshold.
pub fn pr_ratio(log: &TrajectoryLog, threshold: f64, warmup: f64) -> Result<f64, MetricsError> {
    Ok(pr_table(log, &[threshold], warmup)?.ratios[0])
}

/// Arithmetic mean of all sampled speeds after the warm-up time; NaN when
/// nothing was sampled past it.
pub fn mean_speed(log: &TrajectoryLog, warmup: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in &log.rows {
        if row.time > warmup {
            sum += row.v;
            n += 1;
        }
    }
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Per-vehicle speed variability over the post-warm-up samples.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationStats {
    /// Population standard deviation of each vehicle's speed, m/s.
    pub per_vehicle_std: Vec<f64>,
    pub fleet_mean: f64,
    pub fleet_max: f64,
}

/// Speed standard deviation per vehicle plus fleet aggregates, a scalar
/// proxy for how much the trajectories oscillate.
pub fn oscillation_stats(log: &TrajectoryLog, warmup: f64) -> OscillationStats {
    let m = log.vehicle_count;
    let mut sums = vec![0.0f64; m];
    let mut sq_sums = vec![0.0f64; m];
    let mut counts = vec![0usize; m];
    for row in &log.rows {
        if row.time <= warmup {
            continue;
        }
        sums[row.vehicle] += row.v;
        sq_sums[row.vehicle] += row.v * row.v;
        counts[row.vehicle] += 1;
    }
    let per_vehicle_std: Vec<f64> = (0..m)
        .map(|i| {
            if counts[i] == 0 {
                0.0
            } else {
                let n = counts[i] as f64;
                let mean = sums[i] / n;
                (sq_sums[i] / n - mean * mean).max(0.0).sqrt()
            }
        })
        .collect();
    let fleet_mean = per_vehicle_std.iter().sum::<f64>() / m as f64;
    let fleet_max = per_vehicle_std.iter().cloned().fold(0.0, f64::max);
    OscillationStats {
        per_vehicle_std,
        fleet_mean,
        fleet_max,
    }
}

/// One flow-density sample from a fixed-fleet run at one ring length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdPoint {
    pub ring_length: f64,
    /// Density rho = count / L, veh/m.
    pub density: f64,
    /// Post-warm-up mean speed, m/s (NaN when the run halted before the
    /// warm-up elapsed).
    pub mean_speed: f64,
    /// Flow q = rho * mean_speed, veh/s.
    pub flow: f64,
    /// Whether the run recorded any collision; collided points are
    /// excluded from capacity summaries.
    pub collided: bool,
}

/// Flow-density sweep: one simulation per ring length with everything
/// else fixed, returned sorted by density. Runs fan out across threads;
/// the output order is fixed by the sort.
pub fn fd_sweep(
    fleet_template: &FleetConfig,
    sc: &SimConfig,
    idm: &IdmParams,
    ovrv: &OvrvParams,
    attack: Option<&AttackSpec>,
    lengths: &[f64],
    warmup: f64,
) -> Result<Vec<FdPoint>, SimError> {
    for &length in lengths {
        if length <= fleet_template.count as f64 * fleet_template.vehicle_length {
            return Err(SimError::InvalidConfig {
                name: "sweep.lengths",
                value: length,
                requirement: "each length must exceed count * vehicle_length",
            });
        }
    }
    let mut points = lengths
        .par_iter()
        .map(|&length| {
            let fc = FleetConfig {
                ring_length: length,
                ..fleet_template.clone()
            };
            let log = run(&fc, sc, idm, ovrv, attack)?;
            let density = fc.count as f64 / length;
            let v_bar = mean_speed(&log, warmup);
            Ok(FdPoint {
                ring_length: length,
                density,
                mean_speed: v_bar,
                flow: density * v_bar,
                collided: !log.collisions.is_empty(),
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    points.sort_by(|a, b| a.density.partial_cmp(&b.density).expect("finite densities"));
    Ok(points)
}

/// Capacity of a sweep: the maximum flow over its non-collided points.
pub fn capacity(points: &[FdPoint]) -> Option<f64> {
    points
        .iter()
        .filter(|p| !p.collided && p.flow.is_finite())
        .map(|p| p.flow)
        .fold(None, |acc, q| Some(acc.map_or(q, |a: f64| a.max(q))))
}
