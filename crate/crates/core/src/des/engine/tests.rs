use std::path::Path;

use super::*;
use crate::queueing::QueueParams;
use crate::scenario::{Action, GlobalTimeMode};

fn single_mm1(horizon: f64) -> Scenario {
    let text = format!(
        r#"
horizon = {horizon}
[arrivals]
rate = 1.0
spatial = {{ kind = "line", min = 0.0, max = 0.0 }}
[travel]
kind = "line"
velocity = 1.0
[[hospitals]]
id = 0
location = 0.0
servers = 1
service = {{ kind = "exponential", rate = 2.0 }}
"#
    );
    Scenario::from_toml_str(&text, Path::new(".")).unwrap()
}

fn two_on_a_line(c: [u32; 2], buffer: Option<u32>, rate: f64, horizon: f64) -> Scenario {
    let buf = buffer.map(|b| format!("queue_buffer = {b}\n")).unwrap_or_default();
    let text = format!(
        r#"
horizon = {horizon}
[arrivals]
rate = {rate}
spatial = {{ kind = "line", min = 0.0, max = 10.0 }}
[travel]
kind = "line"
velocity = 40.0
[options]
trace = true
[[hospitals]]
id = 0
location = 0.0
servers = {c0}
{buf}service = {{ kind = "exponential", rate = 1.0 }}
[[hospitals]]
id = 1
location = 10.0
servers = {c1}
{buf}service = {{ kind = "exponential", rate = 1.0 }}
"#,
        c0 = c[0],
        c1 = c[1],
    );
    Scenario::from_toml_str(&text, Path::new(".")).unwrap()
}

#[test]
fn empty_system_has_undefined_score() {
    let mut s = single_mm1(10.0);
    s.arrivals.rate = 1e-12;
    let r = run_simulation(&s, &"A".parse().unwrap(), 1);
    assert_eq!(r.total_arrivals, 0);
    assert_eq!(r.hospitals[0].served, 0);
    assert_eq!(r.hospitals[0].score, None);
    assert_eq!(r.hospitals[0].total_time, 0.0);
    assert_eq!(r.global_time(GlobalTimeMode::Printed), None);
    assert_eq!(r.system_score(), None);
}

#[test]
fn mm1_matches_closed_form() {
    let s = single_mm1(1e5);
    let r = run_simulation(&s, &"A".parse().unwrap(), 2024);
    let oracle = QueueParams::new(1.0, 2.0, 1, None).unwrap();
    let h = &r.hospitals[0];
    assert!(
        (h.mean_queue_length / oracle.lq().unwrap() - 1.0).abs() < 0.05,
        "L_Q {}",
        h.mean_queue_length
    );
    assert!(
        (h.mean_queue / oracle.wq().unwrap() - 1.0).abs() < 0.05,
        "W_Q {}",
        h.mean_queue
    );
    assert!((h.utilization - 0.5).abs() < 0.01);
    assert!(!r.overcrowded);
    // Reported metrics are internally consistent.
    assert!((h.total_time - (h.mean_travel + h.mean_queue + h.mean_service)).abs() < 1e-12);
    assert!((h.score.unwrap() - h.served as f64 / h.total_time).abs() < 1e-9);
}

#[test]
fn deterministic_per_seed() {
    let s = two_on_a_line([2, 1], Some(0), 1.5, 2000.0);
    let p: StrategyProfile = "RR".parse().unwrap();
    assert_eq!(run_simulation(&s, &p, 5), run_simulation(&s, &p, 5));
    assert_ne!(run_simulation(&s, &p, 5), run_simulation(&s, &p, 6));
}

#[test]
fn patients_are_conserved() {
    for profile in ["AA", "AR", "RA", "RR"] {
        let s = two_on_a_line([2, 1], Some(0), 2.5, 500.0);
        let r = run_simulation(&s, &profile.parse().unwrap(), 11);
        assert_eq!(
            r.total_arrivals,
            r.served_total + r.in_system_at_end + r.in_transit_at_end + r.lost,
            "{profile}"
        );
        assert!(r.total_arrivals > 1000);
    }
}

#[test]
fn all_accept_never_redirects() {
    let s = two_on_a_line([1, 1], None, 1.8, 2000.0);
    let r = run_simulation(&s, &"AA".parse().unwrap(), 3);
    assert_eq!(r.redirected, 0);
    assert_eq!(r.forced_assignments, 0);
    assert!(r.trace.unwrap().iter().all(|t| t.n_rejections == 0));
}

#[test]
fn redirecting_at_capacity_moves_patients() {
    let s = two_on_a_line([2, 1], Some(0), 2.5, 2000.0);
    let r = run_simulation(&s, &"RR".parse().unwrap(), 3);
    assert!(r.redirected > 0);
    assert!(r.forced_assignments > 0);
    assert!(r.hospitals[1].rejections > r.hospitals[0].rejections);
}

#[test]
fn service_is_first_come_first_served() {
    let s = two_on_a_line([1, 1], Some(1), 1.6, 3000.0);
    let r = run_simulation(&s, &"RA".parse().unwrap(), 8);
    let trace = r.trace.unwrap();
    for j in 0..2 {
        let mut rows: Vec<_> = trace.iter().filter(|t| t.hospital_id == j).collect();
        rows.sort_by(|a, b| (a.request_time + a.travel).total_cmp(&(b.request_time + b.travel)));
        let starts: Vec<f64> = rows.iter().map(|t| t.request_time + t.travel + t.queue).collect();
        assert!(starts.windows(2).all(|w| w[1] >= w[0] - 1e-9), "hospital {j}");
    }
}

#[test]
fn utilization_converges_to_analytic_value() {
    // Hospitals at both ends of a uniform line each see half the demand.
    let s = two_on_a_line([2, 1], None, 1.2, 1e5);
    let r = run_simulation(&s, &"AA".parse().unwrap(), 99);
    let expected = [0.6 / 2.0, 0.6 / 1.0];
    for (j, e) in expected.iter().enumerate() {
        let u = r.hospitals[j].utilization;
        assert!((u / e - 1.0).abs() < 0.02, "hospital {j}: {u}");
    }
}

#[test]
fn relabeling_permutes_metrics() {
    let s = two_on_a_line([2, 1], Some(0), 2.2, 3000.0);
    let mut swapped = s.clone();
    swapped.hospitals.swap(0, 1);
    for profile in ["AR", "RR", "RA"] {
        let p: StrategyProfile = profile.parse().unwrap();
        let a = run_simulation(&s, &p, 17);
        let b = run_simulation(&swapped, &p.permuted(&[1, 0]), 17);
        for j in 0..2 {
            let (x, y) = (&a.hospitals[j], &b.hospitals[1 - j]);
            assert_eq!(x.id, y.id);
            assert_eq!(x.served, y.served);
            assert!((x.total_time - y.total_time).abs() < 1e-9);
            assert!((x.mean_queue_length - y.mean_queue_length).abs() < 1e-9);
        }
    }
}

#[test]
fn overload_is_flagged() {
    let s = two_on_a_line([1, 1], None, 3.0, 4000.0);
    let r = run_simulation(&s, &"AA".parse().unwrap(), 1);
    assert!(r.overcrowded);
    let s = two_on_a_line([1, 1], None, 1.0, 4000.0);
    let r = run_simulation(&s, &"AA".parse().unwrap(), 1);
    assert!(!r.overcrowded);
}

#[test]
fn loss_system_never_exceeds_capacity() {
    let mut s = single_mm1(5000.0);
    s.hospitals[0].queue_buffer = Some(2);
    s.hospitals[0].strategy = Action::Redirect;
    s.options.overflow = crate::scenario::Overflow::Lost;
    s.arrivals.rate = 3.0;
    let r = run_simulation(&s, &"R".parse().unwrap(), 4);
    assert!(r.lost > 0);
    assert!(r.hospitals[0].mean_queue_length <= 2.0);
}

#[test]
fn hourly_scaling_shapes_arrivals() {
    let mut s = single_mm1(24.0 * 400.0);
    let mut scale = vec![0.0; 24];
    scale[10] = 24.0;
    s.arrivals.hourly_scale = Some(scale);
    s.options.trace = true;
    let r = run_simulation(&s, &"A".parse().unwrap(), 1);
    let trace = r.trace.unwrap();
    assert!(!trace.is_empty());
    assert!(trace.iter().all(|t| crate::scenario::hour_of_day(t.request_time) == 10));
}
