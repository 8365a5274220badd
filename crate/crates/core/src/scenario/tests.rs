use std::path::Path;

use super::*;

pub(crate) const TWO_HOSPITAL_LINE: &str = r#"
horizon = 1000.0

[arrivals]
rate = 1.5
spatial = { kind = "line", min = 0.0, max = 10.0 }

[travel]
kind = "line"
velocity = 20.0

[[hospitals]]
id = 0
location = 0.0
servers = 2
queue_buffer = 0
service = { kind = "exponential", rate = 1.0 }

[[hospitals]]
id = 1
location = 10.0
servers = 1
queue_buffer = 0
service = { kind = "exponential", rate = 1.0 }
strategy = "R"
"#;

fn parse(text: &str) -> Result<Scenario> {
    Scenario::from_toml_str(text, Path::new("."))
}

/// Daily request profile with a morning and an evening peak.
pub(crate) fn rush_hour_profile() -> Vec<f64> {
    vec![
        0.45, 0.35, 0.30, 0.28, 0.30, 0.40, 0.65, 0.95, 1.30, 1.45, 1.50, 1.45, 1.35, 1.30, 1.30, 1.35, 1.40, 1.50,
        1.45, 1.30, 1.10, 0.90, 0.70, 0.55,
    ]
}

#[test]
fn minimal_two_hospital_config() {
    let s = parse(TWO_HOSPITAL_LINE).unwrap();
    assert_eq!(s.hospital_count(), 2);
    let caps: Vec<_> = s.hospitals.iter().map(|h| h.capacity().unwrap()).collect();
    assert_eq!(caps, vec![2, 1]);
    assert_eq!(s.hospitals[1].strategy, Action::Redirect);
    assert_eq!(s.warmup(), 100.0);
}

#[test]
fn zero_rate_is_rejected() {
    let text = TWO_HOSPITAL_LINE.replace("rate = 1.5", "rate = 0.0");
    match parse(&text) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "arrivals.rate"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn negative_capacity_names_the_field() {
    let text = TWO_HOSPITAL_LINE.replace("servers = 1", "servers = -1");
    let err = parse(&text).unwrap_err().to_string();
    assert!(err.contains("servers"), "{err}");
    let text = TWO_HOSPITAL_LINE.replace("servers = 1", "servers = 0");
    assert!(matches!(parse(&text), Err(Error::Validation { field, .. }) if field == "hospitals[1].servers"));
}

#[test]
fn rho_is_direct_ratio() {
    let mut text = String::from(
        "horizon = 100.0\n[arrivals]\nrate = 1.0\nspatial = { kind = \"line\", min = 0.0, max = 1.0 }\n[travel]\nkind = \"line\"\nvelocity = 1.0\n",
    );
    for i in 0..3 {
        text += &format!(
            "[[hospitals]]\nid = {i}\nlocation = {i}.0\nservers = 2\nservice = {{ kind = \"exponential\", rate = 1.0 }}\n"
        );
    }
    let s = parse(&text).unwrap();
    assert_eq!(s.stability_ratio(), 1.0 / 6.0);
}

#[test]
fn overload_is_loadable_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, TWO_HOSPITAL_LINE.replace("rate = 1.5", "rate = 3.5")).unwrap();
    let loaded = load_scenario(&path).unwrap();
    assert!(loaded.rho > 1.0);
    assert_eq!(loaded.warnings.len(), 1);

    std::fs::write(&path, TWO_HOSPITAL_LINE).unwrap();
    let loaded = load_scenario(&path).unwrap();
    assert_eq!(loaded.rho, 0.5);
    assert!(loaded.warnings.is_empty());
}

#[test]
fn schema_errors_are_parse_errors() {
    assert!(matches!(parse("horizon = \"soon\""), Err(Error::Parse { .. })));
    let text = TWO_HOSPITAL_LINE.replace("kind = \"line\"\nvelocity", "kind = \"teleport\"\nvelocity");
    assert!(matches!(parse(&text), Err(Error::Parse { .. })));
}

#[test]
fn mismatched_geometry_is_rejected() {
    let text = TWO_HOSPITAL_LINE.replace("location = 10.0", "location = [1.0, 2.0]");
    assert!(matches!(parse(&text), Err(Error::Validation { field, .. }) if field == "hospitals[1].location"));
}

#[test]
fn hourly_scale_is_normalised() {
    let scale: Vec<String> = (0..24).map(|h| format!("{}.0", 1 + h % 2)).collect();
    let text = TWO_HOSPITAL_LINE.replace(
        "rate = 1.5\n",
        &format!("rate = 1.5\nhourly_scale = [{}]\n", scale.join(", ")),
    );
    let s = parse(&text).unwrap();
    let sc = s.arrivals.hourly_scale.as_ref().unwrap();
    assert!((sc.iter().sum::<f64>() / 24.0 - 1.0).abs() < 1e-12);
    assert!((sc[1] / sc[0] - 2.0).abs() < 1e-12);
    let short = TWO_HOSPITAL_LINE.replace("rate = 1.5\n", "rate = 1.5\nhourly_scale = [1.0, 2.0]\n");
    assert!(parse(&short).is_err());
}

#[test]
fn round_trip_preserves_scenario() {
    let s = parse(TWO_HOSPITAL_LINE).unwrap();
    let again = parse(&s.to_toml_string()).unwrap();
    assert_eq!(s, again);
}

#[test]
fn files_are_inlined_relative_to_scenario() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("stent.txt"), "# minutes\n40\n55.5\n61\n\n70\n").unwrap();
    std::fs::write(
        dir.path().join("edges.csv"),
        "from_node,to_node,travel_minutes\np1,h0,10\np1,h1,25\np2,h0,30\np2,h1,5,2.0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("patients.csv"),
        "timestamp_hours,x,y,node_id\n0.5,0,0,p1\n1.5,0,0,p2\n",
    )
    .unwrap();
    let text = r#"
horizon = 48.0
warmup = 0.0
[arrivals]
rate = 0.7
spatial = { kind = "empirical", file = "patients.csv" }
[travel]
kind = "network"
file = "edges.csv"
traffic = true
[[hospitals]]
id = 0
location = "h0"
servers = 1
service = { kind = "kde", file = "stent.txt" }
[[hospitals]]
id = 1
location = "h1"
servers = 1
service = { kind = "exponential", rate = 1.0 }
"#;
    let path = dir.path().join("city.toml");
    std::fs::write(&path, text).unwrap();
    let s = load_scenario(&path).unwrap().scenario;
    match &s.hospitals[0].service {
        ServiceModel::Kde { samples, file, .. } => {
            assert_eq!(samples, &vec![40.0, 55.5, 61.0, 70.0]);
            assert!(file.is_none());
        }
        _ => panic!(),
    }
    let p2 = Position::Node(1);
    assert!((s.travel_hours(&p2, 1, 3.0) - 10.0 / 60.0).abs() < 1e-12);
    let mut quiet = s.clone();
    quiet.travel.set_traffic(false);
    assert!((quiet.travel_hours(&p2, 1, 3.0) - 5.0 / 60.0).abs() < 1e-12);
    assert_eq!(s.hospitals_by_travel(&Position::Node(0), 0.0)[0].0, 0);
    // Inlined scenarios reload to the same value.
    let again = Scenario::from_toml_str(&s.to_toml_string(), Path::new("/nonexistent")).unwrap();
    assert_eq!(s, again);
}

#[test]
fn missing_network_edge_is_reported() {
    let text = r#"
horizon = 48.0
[arrivals]
rate = 0.7
spatial = { kind = "empirical", nodes = ["p1"] }
[travel]
kind = "network"
edges = [{ from_node = "p1", to_node = "h0", travel_minutes = 3.0 }]
[[hospitals]]
id = 0
location = "h0"
servers = 1
service = { kind = "exponential", rate = 1.0 }
[[hospitals]]
id = 1
location = "h1"
servers = 1
service = { kind = "exponential", rate = 1.0 }
"#;
    let err = parse(text).unwrap_err().to_string();
    assert!(err.contains("h1"), "{err}");
}

#[test]
fn synthetic_patients_empty_and_deterministic() {
    let s = parse(TWO_HOSPITAL_LINE).unwrap();
    assert!(generate_synthetic_patients(&s, 0, 1).is_empty());
    let a = generate_synthetic_patients(&s, 200, 9);
    let b = generate_synthetic_patients(&s, 200, 9);
    assert_eq!(a, b);
    assert_ne!(a, generate_synthetic_patients(&s, 200, 10));
    assert!(a.iter().all(|r| (0.0..s.horizon).contains(&r.timestamp_hours)));
    assert!(a.windows(2).all(|w| w[0].timestamp_hours <= w[1].timestamp_hours));
    for r in &a {
        let expect = if r.x <= 5.0 { 0 } else { 1 };
        assert_eq!(r.nearest_hospital, Some(expect));
    }
}

#[test]
fn synthetic_hour_histogram_follows_scale() {
    let profile = rush_hour_profile();
    let list: Vec<String> = profile.iter().map(|v| v.to_string()).collect();
    let text = TWO_HOSPITAL_LINE
        .replace("horizon = 1000.0", "horizon = 720.0")
        .replace(
            "rate = 1.5\n",
            &format!("rate = 1.5\nhourly_scale = [{}]\n", list.join(", ")),
        );
    let s = parse(&text).unwrap();
    let scale = s.arrivals.hourly_scale.clone().unwrap();
    let n = 1000;
    let recs = generate_synthetic_patients(&s, n, 2024);
    let mut counts = [0usize; 24];
    for r in &recs {
        counts[hour_of_day(r.timestamp_hours)] += 1;
    }
    let chi2: f64 = (0..24)
        .map(|h| {
            let e = n as f64 * scale[h] / 24.0;
            (counts[h] as f64 - e).powi(2) / e
        })
        .sum();
    // 99.9% quantile of chi-square with 23 degrees of freedom.
    assert!(chi2 < 49.728, "chi2 = {chi2}");
}

#[test]
fn patient_records_round_trip() {
    let s = parse(TWO_HOSPITAL_LINE).unwrap();
    let recs = generate_synthetic_patients(&s, 25, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    write_patient_records(&path, &recs).unwrap();
    assert_eq!(read_patient_records(&path).unwrap(), recs);
}
