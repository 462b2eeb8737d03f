use ringflow::oracle::{self, OracleGrid};
use ringflow::{PipelineConfig, SeriesOptions, WithdrawalPoint, WithdrawalSchedule};

fn cfg() -> PipelineConfig {
    PipelineConfig::reference()
}

fn coarse() -> OracleGrid {
    OracleGrid::new(300, 0.5, 100.0).unwrap()
}

#[test]
fn shifting_the_sink_shifts_the_field() {
    let c = cfg();
    let dx = c.length_m() / 300.0;
    let at = |cell: usize| {
        let sched = WithdrawalSchedule::single(cell as f64 * dx, 2.0, &c).unwrap();
        oracle::simulate(&c, &sched, coarse(), &[100.0])
            .unwrap()
            .snapshots[0]
            .pressure_pa
            .clone()
    };
    let base = at(40);
    let shifted = at(40 + 77);
    for j in 0..300 {
        let d = (shifted[(j + 77) % 300] - base[j]).abs();
        assert!(d < 1e-7, "cell {j}: {d}");
    }
}

#[test]
fn field_never_exceeds_nominal() {
    let c = cfg();
    let sched = WithdrawalSchedule::new(
        vec![
            WithdrawalPoint::new(3_000.0, 5.0),
            WithdrawalPoint::new(18_000.0, 1.5),
        ],
        &c,
    )
    .unwrap();
    let run = oracle::simulate(&c, &sched, coarse(), &[10.0, 50.0, 100.0]).unwrap();
    for snap in &run.snapshots {
        let max = snap.pressure_pa.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max <= run.nominal_pa + 1e-9, "t={}: {max}", snap.time_s);
    }
}

#[test]
fn coarse_grid_still_tracks_series() {
    let c = cfg();
    let sched = WithdrawalSchedule::single(12_000.0, 1.0, &c).unwrap();
    let mut run = oracle::simulate(&c, &sched, coarse(), &[50.0, 100.0]).unwrap();
    let metrics = oracle::compare_with_series(&mut run, &c, &sched, &SeriesOptions::default()).unwrap();
    for m in metrics {
        assert!(m.relative_l2 < 1e-3, "{m:?}");
        assert_eq!(m.compared_cells, 300 - 5);
    }
}

#[test]
fn no_withdrawal_stays_uniform() {
    let c = cfg();
    let run = oracle::simulate(&c, &WithdrawalSchedule::empty(), coarse(), &[100.0]).unwrap();
    let worst = run.snapshots[0]
        .pressure_pa
        .iter()
        .map(|p| (p - run.nominal_pa).abs())
        .fold(0.0, f64::max);
    // Roundoff only.
    assert!(worst < 1e-11 * run.nominal_pa, "{worst}");
}
