use levyhull_demo::{estimate_volumes_json, faces_curve_json, sample_hull_json};
use serde_json::Value;

#[test]
fn hull_contains_origin_and_is_seeded() {
    let a = sample_hull_json(1.5, 300, 7).unwrap();
    assert_eq!(a, sample_hull_json(1.5, 300, 7).unwrap());
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["path"].as_array().unwrap().len(), 2 * 301);
    let hull = v["hull"].as_array().unwrap();
    assert!(hull.len() >= 3);
    let pts: Vec<(f64, f64)> = hull.iter().map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap())).collect();
    for i in 0..pts.len() {
        let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
        assert!((b.0 - a.0) * (0.0 - a.1) - (b.1 - a.1) * (0.0 - a.0) >= -1e-9);
    }
}

#[test]
fn brownian_estimate_is_near_target() {
    let rows: Value = serde_json::from_str(&estimate_volumes_json(2.0, 500, 2000, 1).unwrap()).unwrap();
    let v1 = &rows[0];
    let (m, se, t) = (v1["mean"].as_f64().unwrap(), v1["stderr"].as_f64().unwrap(), v1["target"].as_f64().unwrap());
    assert!((m - t).abs() < 0.05 * t + 4.0 * se, "{m} {se} {t}");
}

#[test]
fn bad_input_is_an_error() {
    assert!(sample_hull_json(2.5, 10, 1).is_err());
    assert!(estimate_volumes_json(1.5, 10, 1_000_000, 1).is_err());
    assert!(faces_curve_json(1).is_err());
}

#[test]
fn faces_curve_decays() {
    let rows: Value = serde_json::from_str(&faces_curve_json(1000).unwrap()).unwrap();
    let exact: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["exact"].as_f64().unwrap()).collect();
    assert!(exact.len() > 2);
    assert_eq!(exact[0], 2.0);
    assert!(exact.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
}
