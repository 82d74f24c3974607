//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the checked tolerances. Run with `--nocapture` to see
//! the lines for passing criteria.

use accring_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table1_ovrv() -> OvrvParams {
    OvrvParams::default()
}

fn reference_scenario() -> (FleetConfig, SimConfig, IdmParams, OvrvParams) {
    (
        FleetConfig::default(),
        SimConfig::default(),
        IdmParams::default(),
        OvrvParams::default(),
    )
}

fn type1_attack(delta: f64) -> AttackSpec {
    AttackSpec::TypeI(AttackTypeI::new(delta, 0.12).expect("valid attack"))
}

fn type2_attack(d1: f64, d2: f64) -> AttackSpec {
    AttackSpec::TypeII(AttackTypeII::new(d1, d2, 0.8, 0.8).expect("valid attack"))
}

const THRESHOLDS: [f64; 6] = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0];

fn random_params(rng: &mut ChaCha8Rng) -> OvrvParams {
    OvrvParams {
        gap_gain: rng.random_range(0.01..0.3),
        rel_speed_gain: rng.random_range(0.02..0.8),
        jam_distance: rng.random_range(0.0..30.0),
        time_gap: rng.random_range(0.8..4.0),
    }
}

#[test]
fn acceptance_01_baseline_instability() {
    let p = table1_ovrv();
    let baseline = lambda2_ovrv_baseline(&p);
    assert!(
        (baseline - 0.76).abs() < 1e-9,
        "baseline index {baseline} differs from 0.76"
    );
    let report = stability_report(partials_t1(&p, 0.0));
    assert_eq!(report.classification, Classification::StringUnstable);
    println!("acceptance 01 baseline instability: lambda2 = {baseline:.12} (0.76 +/- 1e-9), string-unstable ... PASS");
}

#[test]
fn acceptance_02_root_consistency() {
    let p = table1_ovrv();
    let closed_form = delta_star(&p);
    let oracle = root_oracle_lambda2_tilde(&p, -0.2, 0.0).expect("bracketed root");
    assert!(
        (closed_form - oracle).abs() < 1e-6,
        "closed form {closed_form} vs bisection {oracle}"
    );
    assert!((closed_form - (-0.106662)).abs() < 1e-6);
    let rejected = delta_star_rejected(&p);
    assert!((rejected - 0.556662).abs() < 1e-6);
    assert!(rejected > p.tau_k1());
    println!("acceptance 02 root consistency: delta* = {closed_form:.9} matches bisection within 1e-6, rejected root {rejected:.9} > tau*k1 ... PASS");
}

#[test]
fn acceptance_03_feasibility_arithmetic() {
    let p = table1_ovrv();
    let feasible = type1_interval(&p, 0.12);
    assert!((feasible.param_condition_value - 0.125).abs() < 1e-12);
    assert!(feasible.param_condition_value > 0.0);
    assert!(feasible.feasible, "r = 0.12 must be feasible");
    assert!(
        !type1_interval(&p, 0.05).feasible,
        "r = 0.05 must be infeasible"
    );
    assert!(
        !type1_interval(&p, 0.125).feasible,
        "r = 0.125 must be infeasible"
    );
    println!("acceptance 03 feasibility arithmetic: condition value 0.125 > 0; r=0.12 feasible, r=0.05 and r=0.125 infeasible ... PASS");
}

#[test]
fn acceptance_04_sign_equivalence_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000;
    for _ in 0..n {
        let p = random_params(&mut rng);
        let base = lambda2_ovrv_baseline(&p);
        let delta = rng.random_range(-0.5..p.tau_k1() * 0.999_999);
        let by_poly = p_poly(&p, delta) < 0.0;
        let by_index = lambda2_tilde(&p, delta).expect("below singularity") > base;
        assert_eq!(
            by_poly, by_index,
            "type I disagreement at {p:?}, delta = {delta}"
        );
    }
    for _ in 0..n {
        let p = random_params(&mut rng);
        let base = lambda2_ovrv_baseline(&p);
        let d1 = rng.random_range(-0.999..0.999);
        let d2 = rng.random_range(-0.999..0.999);
        let by_theta = theta(&p, d1, d2) > 0.0;
        let by_index = lambda2_hat(&p, d1, d2) > base;
        assert_eq!(
            by_theta, by_index,
            "type II disagreement at {p:?}, ({d1}, {d2})"
        );
    }
    println!("acceptance 04 sign equivalence: {n} randomized samples per attack type, zero violations ... PASS");
}

#[test]
fn acceptance_05_monotonicity_in_delta2() {
    let p = table1_ovrv();
    let n = 100;
    let coord = |k: usize| -0.9 + 1.8 * k as f64 / (n - 1) as f64;
    for i in 0..n {
        let d1 = coord(i);
        let mut prev_hat = f64::INFINITY;
        let mut prev_theta = f64::INFINITY;
        for j in 0..n {
            let d2 = coord(j);
            let hat = lambda2_hat(&p, d1, d2);
            let th = theta(&p, d1, d2);
            assert!(hat < prev_hat, "index not decreasing at d1={d1}, d2={d2}");
            assert!(th < prev_theta, "theta not decreasing at d1={d1}, d2={d2}");
            prev_hat = hat;
            prev_theta = th;
        }
    }
    println!("acceptance 05 monotonicity: index and theta strictly decreasing in delta2 on {n}x{n} grid, zero violations ... PASS");
}

#[test]
fn acceptance_06_risk_table_zero_rows() {
    let (fc, sc, idm, ovrv) = reference_scenario();
    for delta in [0.0, 0.02, 0.04] {
        let attack = type1_attack(delta);
        let log = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
        assert!(
            log.collisions.is_empty(),
            "unexpected collision at delta = {delta}"
        );
        let report = pr_table(&log, &THRESHOLDS, sc.warmup).expect("report");
        for (threshold, ratio) in report.thresholds.iter().zip(&report.ratios) {
            assert_eq!(
                *ratio, 0.0,
                "nonzero risk ratio {ratio}% at threshold {threshold}s for delta = {delta}"
            );
        }
    }
    println!("acceptance 06 risk-table zero rows: p_r = 0 exactly at all thresholds for delta in {{0.00, 0.02, 0.04}} ... PASS");
}

#[test]
fn acceptance_07_risk_table_trend() {
    let (fc, sc, idm, ovrv) = reference_scenario();
    let mut at_4s = Vec::new();
    for delta in [0.04, 0.08, 0.12] {
        let attack = type1_attack(delta);
        let log = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
        at_4s.push(pr_ratio(&log, 4.0, sc.warmup).expect("ratio"));
    }
    assert!(
        at_4s[0] < at_4s[1] && at_4s[1] < at_4s[2],
        "p_r(4.0s) not strictly increasing: {at_4s:?}"
    );
    let mut severe_hit = false;
    for delta in [0.10, 0.12] {
        let attack = type1_attack(delta);
        let log = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
        let pr_15 = pr_ratio(&log, 1.5, sc.warmup).expect("ratio");
        if !log.collisions.is_empty() || pr_15 > 0.0 {
            severe_hit = true;
        }
    }
    assert!(
        severe_hit,
        "neither delta = 0.10 nor 0.12 produced a collision or p_r(1.5s) > 0"
    );
    println!(
        "acceptance 07 risk-table trend: p_r(4.0s) strictly increasing over delta {{0.04, 0.08, 0.12}} = {:?}%, severe attacks collide ... PASS",
        at_4s
    );
}

fn default_length_grid() -> Vec<f64> {
    (0..=21).map(|k| 700.0 + 100.0 * k as f64).collect()
}

#[test]
fn acceptance_08_fd_trends() {
    let (fc, sc, idm, ovrv) = reference_scenario();
    let lengths = default_length_grid();
    let sweep =
        |attack: Option<&AttackSpec>| fd_sweep(&fc, &sc, &idm, &ovrv, attack, &lengths, sc.warmup);

    let base_cap = capacity(&sweep(None).expect("baseline sweep")).expect("capacity");
    let slow_attack = type1_attack(-0.10);
    let slow_cap = capacity(&sweep(Some(&slow_attack)).expect("attacked sweep")).expect("capacity");
    assert!(
        slow_cap < base_cap * 0.98,
        "capacity under delta=-0.10 ({slow_cap}) not at least 2% below baseline ({base_cap})"
    );

    let mut type2_caps = Vec::new();
    for d2 in [-0.7, 0.0, 0.8] {
        let attack = type2_attack(0.0, d2);
        let cap = capacity(&sweep(Some(&attack)).expect("type II sweep")).expect("capacity");
        type2_caps.push(cap);
    }
    let max = type2_caps.iter().cloned().fold(f64::MIN, f64::max);
    let min = type2_caps.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        (max - min) / min < 0.05,
        "type II capacity varies by more than 5%: {type2_caps:?}"
    );
    println!(
        "acceptance 08 fd trends: capacity drop {:.2}% >= 2% under delta=-0.10; type II capacity spread {:.3}% < 5% ... PASS",
        100.0 * (1.0 - slow_cap / base_cap),
        100.0 * (max - min) / min
    );
}

#[test]
fn acceptance_09_oscillation_trend() {
    let (fc, sc, idm, ovrv) = reference_scenario();
    // oscillation response to the same seed impulse, measured over the
    // whole run
    let mut stds = Vec::new();
    for d1 in [-0.3, 0.0, 0.4, 0.8] {
        let attack = type2_attack(d1, 0.0);
        let log = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
        stds.push(oscillation_stats(&log, 0.0).fleet_mean);
    }
    for pair in stds.windows(2) {
        assert!(
            pair[1] >= pair[0],
            "fleet-mean speed std not nondecreasing in delta1: {stds:?}"
        );
    }
    println!("acceptance 09 oscillation trend: fleet-mean speed std nondecreasing over delta1 {{-0.3, 0, 0.4, 0.8}} = {stds:?} ... PASS");
}

#[test]
fn acceptance_10_simulator_invariants() {
    let (fc, mut sc, idm, ovrv) = reference_scenario();

    // determinism: repeat runs identical in every logged bit
    let attack = type1_attack(0.06);
    let one = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
    let two = run(&fc, &sc, &idm, &ovrv, Some(&attack)).expect("run");
    assert_eq!(one, two, "repeat runs differ");

    // no overtaking: the cyclic order of positions never changes before
    // the first collision (all logged rows under the halt policy)
    let m = fc.count;
    let order_at = |rows: &[SampleRow]| {
        let mut ids: Vec<usize> = (0..m).collect();
        ids.sort_by(|&a, &b| rows[a].x.partial_cmp(&rows[b].x).expect("finite"));
        let zero_at = ids.iter().position(|&i| i == 0).expect("vehicle 0");
        ids.rotate_left(zero_at);
        ids
    };
    let reference = order_at(&one.rows[0..m]);
    for chunk in one.rows.chunks(m) {
        assert_eq!(
            order_at(chunk),
            reference,
            "cyclic order changed at t = {}",
            chunk[0].time
        );
    }

    // gap-sum conservation on every row
    let total_length: f64 = one.vehicle_lengths.iter().sum();
    for chunk in one.rows.chunks(m) {
        let gap_sum: f64 = chunk.iter().map(|r| r.spacing).sum();
        assert!(
            (gap_sum + total_length - fc.ring_length).abs() < 1e-9,
            "gap sum violated at t = {}",
            chunk[0].time
        );
    }

    // equilibrium persistence, all-ACC fleet
    sc.duration = 100.0;
    sc.warmup = 0.0;
    sc.perturbation = None;
    let all_acc = FleetConfig {
        acc_penetration: 1.0,
        attacked_fraction: 0.0,
        ..fc.clone()
    };
    let log = run(&all_acc, &sc, &idm, &ovrv, None).expect("run");
    let v0 = log.rows[0].v;
    let max_dev = log
        .rows
        .iter()
        .map(|r| (r.v - v0).abs())
        .fold(0.0, f64::max);
    assert!(max_dev < 1e-9, "all-ACC equilibrium drifted by {max_dev}");

    // equilibrium persistence, all-HDV fleet at the IDM equilibrium gap
    // for 15 m/s (bisected here, independently of the model internals)
    let v_eq = 15.0;
    let gap_eq = {
        let f = |s: f64| {
            idm_accel(
                &idm,
                &CfInput {
                    spacing: s,
                    rel_speed: 0.0,
                    speed: v_eq,
                },
            )
            .expect("s > 0")
        };
        let (mut lo, mut hi) = (10.0, 60.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let all_hdv = FleetConfig {
        acc_penetration: 0.0,
        attacked_fraction: 0.0,
        ring_length: fc.count as f64 * (gap_eq + fc.vehicle_length),
        ..fc.clone()
    };
    let sc_hdv = SimConfig {
        initial_speed: InitialSpeed::Fixed(v_eq),
        ..sc.clone()
    };
    let log = run(&all_hdv, &sc_hdv, &idm, &ovrv, None).expect("run");
    let max_dev = log
        .rows
        .iter()
        .map(|r| (r.v - v_eq).abs())
        .fold(0.0, f64::max);
    assert!(max_dev < 1e-9, "all-HDV equilibrium drifted by {max_dev}");

    println!("acceptance 10 simulator invariants: determinism, no overtaking, gap-sum within 1e-9 m, equilibrium drift < 1e-9 m/s ... PASS");
}

#[test]
fn acceptance_11_model_level_checks() {
    let ovrv = table1_ovrv();
    let h = 1e-4;
    let rel_ok =
        |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(1e-12) < 1e-6;
    let s_grid: Vec<f64> = (0..6).map(|k| 5.0 + 19.0 * k as f64).collect();
    let dv_grid: Vec<f64> = (0..5).map(|k| -5.0 + 2.5 * k as f64).collect();
    let v_grid: Vec<f64> = (0..6).map(|k| 6.0 * k as f64).collect();

    for &delta in &[-0.10, 0.0, 0.06, 0.12] {
        let atk = AttackTypeI {
            gain: delta,
            bound: 0.12,
        };
        let partials = partials_t1(&ovrv, delta);
        for &s in &s_grid {
            for &dv in &dv_grid {
                for &v in &v_grid {
                    let f = |s: f64, dv: f64, v: f64| {
                        ovrv_accel_attacked_t1(
                            &ovrv,
                            &atk,
                            &CfInput {
                                spacing: s,
                                rel_speed: dv,
                                speed: v,
                            },
                        )
                    };
                    assert!(rel_ok(
                        partials.wrt_spacing,
                        (f(s + h, dv, v) - f(s - h, dv, v)) / (2.0 * h)
                    ));
                    assert!(rel_ok(
                        partials.wrt_rel_speed,
                        (f(s, dv + h, v) - f(s, dv - h, v)) / (2.0 * h)
                    ));
                    assert!(rel_ok(
                        partials.wrt_speed,
                        (f(s, dv, v + h) - f(s, dv, v - h)) / (2.0 * h)
                    ));
                }
            }
        }
    }
    for &(d1, d2) in &[(0.0, 0.0), (0.8, -0.7), (-0.3, 0.4)] {
        let atk = AttackTypeII {
            spacing_gain: d1,
            rel_speed_gain: d2,
            spacing_bound: 1.0,
            rel_speed_bound: 1.0,
        };
        let partials = partials_t2(&ovrv, d1, d2);
        for &s in &s_grid {
            for &dv in &dv_grid {
                for &v in &v_grid {
                    let f = |s: f64, dv: f64, v: f64| {
                        ovrv_accel_attacked_t2(
                            &ovrv,
                            &atk,
                            &CfInput {
                                spacing: s,
                                rel_speed: dv,
                                speed: v,
                            },
                        )
                    };
                    assert!(rel_ok(
                        partials.wrt_spacing,
                        (f(s + h, dv, v) - f(s - h, dv, v)) / (2.0 * h)
                    ));
                    assert!(rel_ok(
                        partials.wrt_rel_speed,
                        (f(s, dv + h, v) - f(s, dv - h, v)) / (2.0 * h)
                    ));
                    assert!(rel_ok(
                        partials.wrt_speed,
                        (f(s, dv, v + h) - f(s, dv, v - h)) / (2.0 * h)
                    ));
                }
            }
        }
    }

    // zero-attack reductions are exact, not merely close
    let t1 = AttackTypeI {
        gain: 0.0,
        bound: 0.12,
    };
    let t2 = AttackTypeII {
        spacing_gain: 0.0,
        rel_speed_gain: 0.0,
        spacing_bound: 0.8,
        rel_speed_bound: 0.8,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5000 {
        let input = CfInput {
            spacing: rng.random_range(1.0..150.0),
            rel_speed: rng.random_range(-10.0..10.0),
            speed: rng.random_range(0.0..30.0),
        };
        let clean = ovrv_accel(&ovrv, &input);
        assert_eq!(ovrv_accel_attacked_t1(&ovrv, &t1, &input), clean);
        assert_eq!(ovrv_accel_attacked_t2(&ovrv, &t2, &input), clean);
    }
    assert_eq!(
        lambda2_tilde(&ovrv, 0.0).unwrap(),
        lambda2_ovrv_baseline(&ovrv)
    );
    assert_eq!(lambda2_hat(&ovrv, 0.0, 0.0), lambda2_ovrv_baseline(&ovrv));

    println!("acceptance 11 model-level checks: partials within 1e-6 relative of central differences; zero-attack reductions exact ... PASS");
}
