use ringflow::scenario::{Format, Report, ReportSettings, Scenario};

fn reference_doc() -> String {
    std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/reference.toml"
    ))
    .unwrap()
}

#[test]
fn shipped_reference_scenario_matches_builtin() {
    let s = Scenario::from_toml(&reference_doc()).unwrap();
    assert_eq!(s, Scenario::reference());
}

#[test]
fn report_is_deterministic_and_complete() {
    let s = Scenario::reference();
    let settings = ReportSettings::standard(&s).unwrap();
    let report = Report::build(&s, &settings).unwrap();
    for name in [
        "coupling_point",
        "gradient",
        "drawdown",
        "admissible",
        "discrepancies",
    ] {
        assert!(report.table(name).is_some(), "missing {name}");
    }
    let csv = report.emit(Format::Csv);
    assert_eq!(csv, Report::build(&s, &settings).unwrap().emit(Format::Csv));
    assert!(csv.contains("self-consistent recomputation"));
    let json: serde_json::Value = serde_json::from_str(&report.emit(Format::Json)).unwrap();
    assert!(json.is_array() || json.is_object());
}

#[test]
fn drawdown_inlet_column_reaches_anchor() {
    let s = Scenario::reference();
    let settings = ReportSettings::standard(&s).unwrap();
    let report = Report::build(&s, &settings).unwrap();
    let t = report.table("drawdown").unwrap();
    let (g, x, time, p) = (
        t.numbers("g_total"),
        t.numbers("x_m"),
        t.numbers("t_s"),
        t.numbers("pressure_pa"),
    );
    let i = (0..g.len())
        .find(|&i| (g[i] - 14.0).abs() < 1e-9 && x[i] == 0.0 && time[i] == 300.0)
        .unwrap();
    assert!((p[i] - 105_971.0).abs() < 60.0, "{}", p[i]);
}
