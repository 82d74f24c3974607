//! The five CLI commands and the stable exit-code contract:
//! 0 success, 2 config error, 3 infeasible synthesis, 4 I/O error.

use crate::config::{AttackKind, ConfigError, RunConfig};
use crate::io::{self, CsvReadError};
use accring_core::*;
use std::path::Path;
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("infeasible synthesis: {0}")]
    Infeasible(InfeasibleReason),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Read(#[from] CsvReadError),
    #[error("{0}")]
    Sim(#[from] SimError),
    #[error("{0}")]
    Metrics(#[from] MetricsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Write { .. } | CliError::Read(_) => 4,
            CliError::Sim(_) | CliError::Metrics(_) => 1,
        }
    }
}

fn classification_line(report: &StabilityReport) -> String {
    match report.lambda2 {
        Some(value) => format!(
            "lambda2 = {value:.9} -> {} (rdc {})",
            report.classification,
            if report.rdc_ok { "ok" } else { "violated" }
        ),
        None => format!(
            "lambda2 undefined (speed partial is zero) -> {}",
            report.classification
        ),
    }
}

/// Print the stability report for the configured model and attack.
pub fn cmd_stability(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let ovrv = config.ovrv_params();
    let baseline = stability_report(partials_t1(&ovrv, 0.0));
    if !quiet {
        println!(
            "ovrv: k1={} k2={} eta={} tau={}",
            ovrv.gap_gain, ovrv.rel_speed_gain, ovrv.jam_distance, ovrv.time_gap
        );
        println!("baseline: {}", classification_line(&baseline));
    }
    match config.attack_kind()? {
        AttackKind::None => {
            if quiet {
                println!(
                    "lambda2={:.9} classification={}",
                    baseline.lambda2.unwrap_or(f64::NAN),
                    baseline.classification
                );
            }
        }
        AttackKind::Type1 => {
            let delta = config.attack.delta;
            let bound = config.attack.r;
            let report = stability_report(partials_t1(&ovrv, delta));
            let interval = type1_interval(&ovrv, bound);
            let destabilizing = interval.contains(delta);
            let degrading = type1_degrading_check(&ovrv, delta, bound);
            if quiet {
                println!(
                    "lambda2_tilde={:.9} destabilizing={destabilizing} degrading={degrading}",
                    report.lambda2.unwrap_or(f64::NAN)
                );
            } else {
                println!("attack: type1 delta={delta} r={bound}");
                println!("attacked: {}", classification_line(&report));
                let required = (-interval.r1).max(interval.r1).max(0.0);
                println!(
                    "destabilizing interval: {} (delta* = {:.9}, needs tau*k1 > r >= {:.9}, param condition = {:.9})",
                    if interval.feasible { "feasible" } else { "infeasible" },
                    interval.delta_star,
                    required,
                    interval.param_condition_value
                );
                println!("destabilizing: {destabilizing}");
                println!(
                    "degrading: {degrading} (p(delta) = {:.9})",
                    p_poly(&ovrv, delta)
                );
            }
        }
        AttackKind::Type2 => {
            let (d1, d2) = (config.attack.delta1, config.attack.delta2);
            let (z1, z2) = (config.attack.z1, config.attack.z2);
            let verdict = type2_destabilizing_check(&ovrv, d1, d2, z1, z2);
            let report = stability_report(partials_t2(&ovrv, d1, d2));
            if quiet {
                println!(
                    "lambda2_hat={:.9} destabilizing={} degrading={}",
                    verdict.lambda2_hat, verdict.destabilizing, verdict.degrading
                );
            } else {
                println!("attack: type2 delta1={d1} delta2={d2} z1={z1} z2={z2}");
                println!("attacked: {}", classification_line(&report));
                println!("destabilizing: {}", verdict.destabilizing);
                println!(
                    "degrading: {} (theta = {:.9})",
                    verdict.degrading, verdict.theta_value
                );
            }
        }
    }
    Ok(())
}

/// Search for an attack meeting the configured mode; exit code 3 when the
/// feasible set is empty.
pub fn cmd_synthesize(config: &RunConfig, quiet: bool) -> Result<(), CliError> {
    let ovrv = config.ovrv_params();
    match config.attack_kind()? {
        AttackKind::None => Err(ConfigError::Invalid {
            key: "attack.kind".to_string(),
            message: "synthesize needs 'type1' or 'type2'".to_string(),
        }
        .into()),
        AttackKind::Type1 => {
            let request = config.type1_request()?;
            match synthesize_type1(&ovrv, &request) {
                Type1Outcome::Feasible(s) => {
                    if quiet {
                        println!("delta={:.6}", s.delta);
                    } else {
                        println!("synthesized type1 attack: delta = {:.6}", s.delta);
                        println!("lambda2_tilde = {:.9}", s.lambda2_tilde);
                        println!("p(delta) = {:.9}", s.p_value);
                        println!(
                            "destabilizing: {}",
                            type1_destabilizing_check(&ovrv, s.delta, request.bound)
                        );
                        println!(
                            "degrading: {}",
                            type1_degrading_check(&ovrv, s.delta, request.bound)
                        );
                    }
                    Ok(())
                }
                Type1Outcome::Infeasible(reason) => Err(CliError::Infeasible(reason)),
            }
        }
        AttackKind::Type2 => {
            let request = config.type2_request()?;
            match synthesize_type2(&ovrv, &request) {
                Type2Outcome::Feasible(s) => {
                    if quiet {
                        println!("delta1={:.6} delta2={:.6}", s.delta1, s.delta2);
                    } else {
                        println!(
                            "synthesized type2 attack: delta1 = {:.6}, delta2 = {:.6}",
                            s.delta1, s.delta2
                        );
                        println!("lambda2_hat = {:.9}", s.lambda2_hat);
                        println!("theta = {:.9}", s.theta_value);
                        let verdict = type2_destabilizing_check(
                            &ovrv,
                            s.delta1,
                            s.delta2,
                            request.spacing_bound,
                            request.rel_speed_bound,
                        );
                        println!("destabilizing: {}", verdict.destabilizing);
                        println!("degrading: {}", verdict.degrading);
                    }
                    Ok(())
                }
                Type2Outcome::Infeasible(reason) => Err(CliError::Infeasible(reason)),
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn print_pr_table(report: &TtcReport) {
    println!("p_r(%) at TTC thresholds ({} cases):", report.total_cases);
    for ((threshold, ratio), dangerous) in report
        .thresholds
        .iter()
        .zip(&report.ratios)
        .zip(&report.dangerous_counts)
    {
        println!("  {threshold:.1} s: {ratio:.6}% ({dangerous} dangerous)");
    }
}

/// Run the configured scenario, write the trajectory CSV, and print a
/// safety/oscillation summary.
pub fn cmd_simulate(config: &RunConfig, out: &Path, quiet: bool) -> Result<(), CliError> {
    let fleet = config.fleet_config()?;
    let sim = config.sim_config()?;
    let attack = config.attack_spec()?;
    let log = run(
        &fleet,
        &sim,
        &config.idm_params(),
        &config.ovrv_params(),
        attack.as_ref(),
    )?;
    write_file(out, &io::trajectory_csv(&log, VERSION, &config.to_toml()))?;
    if quiet {
        return Ok(());
    }
    for w in &log.warnings {
        println!("warning: {w}");
    }
    let hdv = log
        .classes
        .iter()
        .filter(|c| **c == VehicleClass::Hdv)
        .count();
    let acc = log
        .classes
        .iter()
        .filter(|c| **c == VehicleClass::Acc)
        .count();
    let attacked = log
        .classes
        .iter()
        .filter(|c| **c == VehicleClass::AccAttacked)
        .count();
    println!(
        "fleet: {} vehicles ({hdv} hdv, {acc} acc, {attacked} attacked) on a {} m ring",
        log.vehicle_count, fleet.ring_length
    );
    match &attack {
        None => println!("attack: none"),
        Some(AttackSpec::TypeI(a)) => println!("attack: type1 delta={} (r={})", a.gain, a.bound),
        Some(AttackSpec::TypeII(a)) => println!(
            "attack: type2 delta1={} delta2={} (z1={}, z2={})",
            a.spacing_gain, a.rel_speed_gain, a.spacing_bound, a.rel_speed_bound
        ),
    }
    println!(
        "collisions: {}{}",
        log.collisions.len(),
        if log.halted { " (run halted)" } else { "" }
    );
    if let Some(first) = log.collisions.first() {
        println!(
            "first collision: t={:.1} s, follower {}, spacing {:.3} m",
            first.time, first.follower, first.spacing
        );
    }
    let warmup = config.metrics.warmup;
    let v_bar = mean_speed(&log, warmup);
    if v_bar.is_nan() {
        println!("mean speed: no samples after {warmup} s warm-up");
    } else {
        println!("mean speed after {warmup} s warm-up: {v_bar:.4} m/s");
    }
    let osc = oscillation_stats(&log, warmup);
    println!(
        "oscillation (speed std): fleet mean {:.4} m/s, max {:.4} m/s",
        osc.fleet_mean, osc.fleet_max
    );
    match pr_table(&log, &config.metrics.ttc_thresholds, warmup) {
        Ok(report) => print_pr_table(&report),
        Err(MetricsError::EmptyCaseSet) => {
            println!("p_r table: no observations after the warm-up period");
        }
        Err(other) => return Err(other.into()),
    }
    println!(
        "trajectory written to {} ({} rows)",
        out.display(),
        log.rows.len()
    );
    Ok(())
}

/// Sweep the configured ring lengths and write the flow-density CSV.
pub fn cmd_fd(config: &RunConfig, out: &Path, quiet: bool) -> Result<(), CliError> {
    let fleet = config.fleet_config()?;
    let sim = config.sim_config()?;
    let attack = config.attack_spec()?;
    let points = fd_sweep(
        &fleet,
        &sim,
        &config.idm_params(),
        &config.ovrv_params(),
        attack.as_ref(),
        &config.sweep.lengths,
        config.metrics.warmup,
    )?;
    write_file(out, &io::fd_csv(&points, VERSION, &config.to_toml()))?;
    if quiet {
        return Ok(());
    }
    let collided = points.iter().filter(|p| p.collided).count();
    match capacity(&points) {
        Some(cap) => println!(
            "capacity: {:.6} veh/s ({:.1} veh/h) over {} points ({collided} collided, excluded)",
            cap,
            cap * 3600.0,
            points.len()
        ),
        None => println!("capacity: undefined (all {} points collided)", points.len()),
    }
    println!("fd written to {}", out.display());
    Ok(())
}

/// Recompute the risk-ratio table from an existing trajectory CSV.
pub fn cmd_ttc(
    config: &RunConfig,
    trajectory: &Path,
    out: Option<&Path>,
    quiet: bool,
) -> Result<(), CliError> {
    let log = io::read_trajectory_csv(&trajectory.display().to_string())?;
    let report = pr_table(&log, &config.metrics.ttc_thresholds, config.metrics.warmup)?;
    if !quiet {
        println!(
            "trajectory: {} ({} rows, {} vehicles, {} collisions)",
            trajectory.display(),
            log.rows.len(),
            log.vehicle_count,
            log.collisions.len()
        );
        print_pr_table(&report);
    }
    if let Some(path) = out {
        let mut text = io::echo_block(VERSION, &config.to_toml());
        text.push_str("threshold_s,p_r_percent,dangerous,total\n");
        for ((threshold, ratio), dangerous) in report
            .thresholds
            .iter()
            .zip(&report.ratios)
            .zip(&report.dangerous_counts)
        {
            text.push_str(&format!(
                "{threshold:.6},{ratio:.6},{dangerous},{}\n",
                report.total_cases
            ));
        }
        write_file(path, &text)?;
        if !quiet {
            println!("ttc report written to {}", path.display());
        }
    }
    Ok(())
}
