//! CSV serialization of trajectories and flow-density sweeps.
//!
//! Every file starts with `#`-prefixed comment lines carrying the tool
//! version and the effective config echo, so a run can be reproduced from
//! its output alone. Numeric fields use fixed 6-decimal formatting for
//! byte-stable files.

use accring_core::{CollisionEvent, FdPoint, SampleRow, TrajectoryLog, VehicleClass};
use thiserror::Error;

pub const TRAJECTORY_HEADER: &str = "t,vehicle_id,cls,x,v,a,s,dv,ttc";
pub const FD_HEADER: &str = "L,rho,vbar,q,collided";

#[derive(Debug, Error)]
pub enum CsvReadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

/// Time-to-collision cell: `inf` while not closing, 0 at or past contact.
fn ttc_cell(spacing: f64, rel_speed: f64) -> String {
    if spacing <= 0.0 {
        num(0.0)
    } else if rel_speed < 0.0 {
        num(spacing / -rel_speed)
    } else {
        "inf".to_string()
    }
}

pub(crate) fn echo_block(version: &str, config_toml: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# accring {version}\n"));
    out.push_str("# config:\n");
    for line in config_toml.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// Render a trajectory log as CSV text (echo comments, collision
/// comments, exact header, then rows sorted by time and vehicle id).
pub fn trajectory_csv(log: &TrajectoryLog, version: &str, config_toml: &str) -> String {
    let mut out = echo_block(version, config_toml);
    for w in &log.warnings {
        out.push_str(&format!("# warning: {w}\n"));
    }
    for c in &log.collisions {
        out.push_str(&format!(
            "# collision: t={} follower={} spacing={}\n",
            num(c.time),
            c.follower,
            num(c.spacing)
        ));
    }
    if log.halted {
        out.push_str("# halted: true\n");
    }
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in &log.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            num(row.time),
            row.vehicle,
            log.classes[row.vehicle].token(),
            num(row.x),
            num(row.v),
            num(row.a),
            num(row.spacing),
            num(row.rel_speed),
            ttc_cell(row.spacing, row.rel_speed),
        ));
    }
    out
}

/// Render a flow-density sweep as CSV text, one row per ring length.
pub fn fd_csv(points: &[FdPoint], version: &str, config_toml: &str) -> String {
    let mut out = echo_block(version, config_toml);
    out.push_str(FD_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            num(p.ring_length),
            num(p.density),
            num(p.mean_speed),
            num(p.flow),
            if p.collided { 1 } else { 0 },
        ));
    }
    out
}

fn parse_class(token: &str) -> Option<VehicleClass> {
    match token {
        "hdv" => Some(VehicleClass::Hdv),
        "acc" => Some(VehicleClass::Acc),
        "acc_attacked" => Some(VehicleClass::AccAttacked),
        _ => None,
    }
}

/// Read a trajectory CSV back into a log good enough for the metrics
/// layer (rows, classes, collision comments). Ring geometry is not stored
/// in the CSV and comes back as NaN.
pub fn read_trajectory_csv(path: &str) -> Result<TrajectoryLog, CsvReadError> {
    let text = std::fs::read_to_string(path).map_err(|source| CsvReadError::Io {
        path: path.to_string(),
        source,
    })?;
    let fail = |line: usize, message: String| CsvReadError::Format {
        path: path.to_string(),
        line,
        message,
    };

    let mut rows: Vec<SampleRow> = Vec::new();
    let mut classes: Vec<(usize, VehicleClass)> = Vec::new();
    let mut collisions: Vec<CollisionEvent> = Vec::new();
    let mut halted = false;
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if comment == "halted: true" {
                halted = true;
            } else if let Some(rest) = comment.strip_prefix("collision:") {
                let mut time = None;
                let mut follower = None;
                let mut spacing = None;
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("t=") {
                        time = v.parse::<f64>().ok();
                    } else if let Some(v) = field.strip_prefix("follower=") {
                        follower = v.parse::<usize>().ok();
                    } else if let Some(v) = field.strip_prefix("spacing=") {
                        spacing = v.parse::<f64>().ok();
                    }
                }
                if let (Some(time), Some(follower), Some(spacing)) = (time, follower, spacing) {
                    collisions.push(CollisionEvent {
                        time,
                        follower,
                        spacing,
                    });
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != TRAJECTORY_HEADER {
                return Err(fail(
                    lineno,
                    format!("expected header '{TRAJECTORY_HEADER}'"),
                ));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(fail(
                lineno,
                format!("expected 9 fields, found {}", fields.len()),
            ));
        }
        let parse_f = |s: &str, name: &str| {
            s.parse::<f64>()
                .map_err(|_| fail(lineno, format!("bad value for {name}: '{s}'")))
        };
        let time = parse_f(fields[0], "t")?;
        let vehicle = fields[1]
            .parse::<usize>()
            .map_err(|_| fail(lineno, format!("bad vehicle_id '{}'", fields[1])))?;
        let class = parse_class(fields[2])
            .ok_or_else(|| fail(lineno, format!("unknown class '{}'", fields[2])))?;
        let x = parse_f(fields[3], "x")?;
        let v = parse_f(fields[4], "v")?;
        let a = parse_f(fields[5], "a")?;
        let spacing = parse_f(fields[6], "s")?;
        let rel_speed = parse_f(fields[7], "dv")?;
        // field 8 (ttc) is derived; re-computed rather than trusted
        rows.push(SampleRow {
            time,
            vehicle,
            x,
            v,
            a,
            spacing,
            rel_speed,
        });
        if !classes.iter().any(|(id, _)| *id == vehicle) {
            classes.push((vehicle, class));
        }
    }
    if !seen_header {
        return Err(fail(
            text.lines().count(),
            "no header line found".to_string(),
        ));
    }
    if rows.is_empty() {
        return Err(fail(text.lines().count(), "no data rows".to_string()));
    }
    let vehicle_count = classes.iter().map(|(id, _)| *id).max().unwrap_or(0) + 1;
    let mut class_vec = vec![VehicleClass::Hdv; vehicle_count];
    for (id, class) in classes {
        class_vec[id] = class;
    }
    Ok(TrajectoryLog {
        vehicle_count,
        ring_length: f64::NAN,
        sample_interval: f64::NAN,
        classes: class_vec,
        vehicle_lengths: Vec::new(),
        rows,
        collisions,
        halted,
        warnings: Vec::new(),
    })
}
