use proptest::prelude::*;

use ringflow::{
    classify_pressure_drop, find_coupling_point, invert_withdrawal, pressure_at_coupling, GradientMode,
    PipelineConfig, SafetyThresholds, SeriesOptions, SeriesSolver, WithdrawalPoint, WithdrawalSchedule,
};

fn cfg() -> PipelineConfig {
    PipelineConfig::reference()
}

fn solver(opts: SeriesOptions) -> SeriesSolver {
    SeriesSolver::new(cfg(), opts).unwrap()
}

fn band_rank(drop: f64) -> u8 {
    let th = SafetyThresholds::default();
    classify_pressure_drop(125_000.0, 125_000.0 * (1.0 - drop), &th)
        .unwrap()
        .band as u8
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_round_trips(g in 0.01f64..50.0, t in 1.0f64..2000.0, x in 500.0f64..29_500.0) {
        let s = solver(SeriesOptions::default());
        let p = pressure_at_coupling(&s, t, g, x).unwrap();
        let back = invert_withdrawal(&s, p, t, x).unwrap();
        prop_assert!((back - g).abs() <= 1e-6 * g.max(1.0), "{back} vs {g}");
    }

    #[test]
    fn withdrawal_response_is_linear(
        x1 in 0.0f64..30_000.0, g1 in 0.0f64..20.0,
        x2 in 0.0f64..30_000.0, g2 in 0.0f64..20.0,
        x in 0.0f64..=30_000.0, t in 0.5f64..1000.0,
        scale in 0.1f64..5.0,
    ) {
        prop_assume!(x1 != x2);
        let (x1, g1, x2, g2) = if x1 < x2 { (x1, g1, x2, g2) } else { (x2, g2, x1, g1) };
        let c = cfg();
        let s = solver(SeriesOptions::default());
        let a = WithdrawalSchedule::single(x1, g1, &c).unwrap();
        let b = WithdrawalSchedule::single(x2, g2, &c).unwrap();
        let both = WithdrawalSchedule::new(vec![WithdrawalPoint::new(x1, g1), WithdrawalPoint::new(x2, g2)], &c).unwrap();
        let scaled = WithdrawalSchedule::single(x1, scale * g1, &c).unwrap();
        let ra = s.withdrawal_response(x, t, &a).unwrap();
        let rb = s.withdrawal_response(x, t, &b).unwrap();
        let joint = s.withdrawal_response(x, t, &both).unwrap();
        prop_assert!((joint - (ra + rb)).abs() <= 1e-9 * (ra.abs() + rb.abs()).max(1e-300));
        let rs = s.withdrawal_response(x, t, &scaled).unwrap();
        prop_assert!((rs - scale * ra).abs() <= 1e-9 * (scale * ra).abs().max(1e-300));
    }

    #[test]
    fn classification_is_monotone(d1 in -0.5f64..1.0, d2 in -0.5f64..1.0) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(band_rank(lo) <= band_rank(hi));
    }

    #[test]
    fn coupling_point_is_independent_of_base_flow(g0 in 0.5f64..90.0, t in 20.0f64..5000.0) {
        let c = cfg().with_base_flow(g0).unwrap();
        let scaled = SeriesSolver::new(c, SeriesOptions::default()).unwrap();
        let s = solver(SeriesOptions::default());
        let empty = WithdrawalSchedule::empty();
        let a = find_coupling_point(&s, t, &empty, 100.0).unwrap().position_m;
        let b = find_coupling_point(&scaled, t, &empty, 100.0).unwrap().position_m;
        prop_assert!((a - b).abs() <= 0.02, "{a} vs {b}");
    }

    #[test]
    fn coupling_point_is_grid_step_invariant(step in 20.0f64..800.0, t in 20.0f64..5000.0) {
        let s = solver(SeriesOptions::default());
        let empty = WithdrawalSchedule::empty();
        let a = find_coupling_point(&s, t, &empty, 100.0).unwrap().position_m;
        let b = find_coupling_point(&s, t, &empty, step).unwrap().position_m;
        prop_assert!((a - b).abs() <= 0.5, "{a} vs {b}");
    }

    #[test]
    fn full_gradient_matches_central_difference(
        x in 100.0f64..29_900.0, t in 5.0f64..2000.0, accelerate in any::<bool>(),
    ) {
        let opts = SeriesOptions {
            gradient_mode: GradientMode::Full,
            closed_form_acceleration: accelerate,
            ..SeriesOptions::default()
        };
        let s = solver(opts);
        let c = cfg();
        let sched = WithdrawalSchedule::new(
            vec![WithdrawalPoint::new(12_000.0, 10.0), WithdrawalPoint::new(25_000.0, 4.0)],
            &c,
        ).unwrap();
        prop_assume!((x - 12_000.0).abs() > 50.0 && (x - 25_000.0).abs() > 50.0);
        let h = 0.1;
        let fd = (s.pressure(x + h, t, &sched).unwrap() - s.pressure(x - h, t, &sched).unwrap()) / (2.0 * h);
        let g = s.pressure_gradient(x, t, &sched).unwrap();
        prop_assert!((fd - g).abs() <= 1e-3, "x={x} t={t}: fd {fd} vs {g}");
    }

    #[test]
    fn ring_is_periodic_in_point_mode(x1 in 0.0f64..30_000.0, g in 0.0f64..30.0, t in 0.0f64..1e5) {
        let c = cfg();
        let s = solver(SeriesOptions::default());
        let sched = WithdrawalSchedule::single(x1, g, &c).unwrap();
        prop_assert_eq!(s.pressure(0.0, t, &sched).unwrap(), s.pressure(c.length_m(), t, &sched).unwrap());
    }
}
