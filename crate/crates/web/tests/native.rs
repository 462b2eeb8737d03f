use ringflow_web::Ring;

fn reference() -> Ring {
    Ring::try_new(30_000.0, 383.3, 0.05, 140_000.0, 10.0, 12_000.0, 10.0).unwrap()
}

#[test]
fn profiles_cover_the_ring() {
    let ring = reference();
    let p = ring.try_pressure_profile(100.0, 301).unwrap();
    assert_eq!(p.len(), 301);
    assert_eq!(p[0], p[300]);
    let g = ring.try_gradient_profile(100.0, 31).unwrap();
    assert!((g[0] - 1.6334).abs() < 0.02);
    assert_eq!(g[12], 0.0);
    assert!(ring
        .try_pressure_profile(0.0, 11)
        .unwrap()
        .iter()
        .all(|&v| v == 125_000.0));
}

#[test]
fn coupling_point_and_admissible() {
    let ring = reference();
    let x = ring.try_coupling_point(100.0).unwrap();
    assert!(x > 12_000.0 && x < 13_000.0);
    let v: serde_json::Value = serde_json::from_str(&ring.try_admissible(300.0, 100_000.0).unwrap()).unwrap();
    assert!((v["g_total"].as_f64().unwrap() - 18.39).abs() < 0.05);
    assert_eq!(v["band"], "Permissible");
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(Ring::try_new(30_000.0, -1.0, 0.05, 140_000.0, 10.0, 12_000.0, 10.0).is_err());
    assert!(Ring::try_new(30_000.0, 383.3, 0.05, 140_000.0, 10.0, 40_000.0, 10.0).is_err());
    assert!(reference().try_coupling_point(0.0).is_err());
}
