//! Coupling-point location, withdrawal inversion, inlet-constrained maximum
//! withdrawal and pressure-drop classification.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GradientMode, SafetyThresholds, WithdrawalSchedule};
use crate::series::SeriesSolver;

/// Bisection stops once the bracket is narrower than this (m).
const POSITION_TOLERANCE_M: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingPoint {
    pub position_m: f64,
    pub pressure_pa: f64,
    pub time_s: f64,
    /// Second central difference of P at the position, step L/3000.
    pub second_difference: f64,
    pub concave: bool,
}

/// Scans (0, L) for the + → − sign change of dP/dx and refines it.
///
/// The gradient is the continuous one (no zero convention at withdrawal
/// positions). With `GradientMode::BaseOnly` withdrawals are ignored and the
/// point is located on the pre-connection field.
pub fn find_coupling_point(
    solver: &SeriesSolver,
    t: f64,
    schedule: &WithdrawalSchedule,
    grid_step: f64,
) -> Result<CouplingPoint> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::invalid(
            "grid_step",
            format!("must be > 0, got {grid_step}"),
        ));
    }
    let l = solver.config().length_m();
    let mode = solver.options().gradient_mode;
    let grad = |x: f64| solver.gradient_continuous(x, t, schedule, mode);

    let mut xs: Vec<f64> = (0..)
        .map(|k| k as f64 * grid_step)
        .take_while(|&x| x < l)
        .collect();
    xs.push(l);

    // Zero samples are skipped so an exact grid hit still brackets.
    let mut brackets = Vec::new();
    let mut last_positive: Option<f64> = None;
    for &x in &xs {
        let g = grad(x)?;
        if g > 0.0 {
            last_positive = Some(x);
        } else if g < 0.0 {
            if let Some(lo) = last_positive.take() {
                brackets.push((lo, x));
            }
        }
    }

    let mut roots = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        roots.push(bisect_descending(&grad, lo, hi)?);
    }

    match roots.as_slice() {
        [] => Err(Error::NoExtremum { time_s: t }),
        [x] => {
            let x = *x;
            let field = |x: f64| -> Result<f64> {
                match mode {
                    GradientMode::BaseOnly => solver.base_pressure(x, t),
                    GradientMode::Full => solver.pressure(x, t, schedule),
                }
            };
            let h = l / 3000.0;
            let lo = (x - h).max(0.0);
            let hi = (x + h).min(l);
            let centre = field(x)?;
            let second_difference = field(lo)? - 2.0 * centre + field(hi)?;
            Ok(CouplingPoint {
                position_m: x,
                pressure_pa: centre,
                time_s: t,
                second_difference,
                concave: second_difference < 0.0,
            })
        }
        _ => Err(Error::MultipleExtrema {
            time_s: t,
            candidates: roots,
        }),
    }
}

fn bisect_descending<F>(grad: &F, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while hi - lo >= POSITION_TOLERANCE_M {
        let mid = 0.5 * (lo + hi);
        let g = grad(mid)?;
        if g > 0.0 {
            lo = mid;
        } else if g < 0.0 {
            hi = mid;
        } else {
            return Ok(mid);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Denominator convention used when isolating the additional withdrawal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversionForm {
    /// (c²/L)(t + 2π·S_e): the exact inverse of [`pressure_at_coupling`].
    #[default]
    SelfConsistent,
    /// (c²/L)(t + 2·S_e), as the closed-form expression is usually printed.
    AsPrinted,
}

/// Pressure at a tap carrying the total flow G0 + g_new, where the withdrawal
/// cosine series collapses to Σ 1/n² terms.
pub fn pressure_at_coupling(solver: &SeriesSolver, t: f64, g_new: f64, x_new: f64) -> Result<f64> {
    check_tap(solver, x_new)?;
    if !(g_new.is_finite() && g_new >= 0.0) {
        return Err(Error::invalid("g_new", format!("must be >= 0, got {g_new}")));
    }
    let (intercept, slope) = coupling_affine(solver, t, x_new, InversionForm::SelfConsistent)?;
    Ok(intercept - slope * (solver.config().base_flow() + g_new))
}

/// P(x_new, t) = intercept − slope · G_total.
fn coupling_affine(solver: &SeriesSolver, t: f64, x_new: f64, form: InversionForm) -> Result<(f64, f64)> {
    let cfg = solver.config();
    let intercept = solver.base_pressure(x_new, t)?;
    let s_e = solver.s_e(t)?;
    let factor = match form {
        InversionForm::SelfConsistent => 2.0 * PI,
        InversionForm::AsPrinted => 2.0,
    };
    let slope = cfg.sound_speed_m_s().powi(2) / cfg.length_m() * (t + factor * s_e);
    Ok((intercept, slope))
}

fn check_tap(solver: &SeriesSolver, x_new: f64) -> Result<()> {
    let l = solver.config().length_m();
    if x_new > 0.0 && x_new < l {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x: x_new, length: l })
    }
}

/// Additional withdrawal g_new that puts the tap pressure at `p_target`.
pub fn invert_withdrawal(solver: &SeriesSolver, p_target: f64, t: f64, x_new: f64) -> Result<f64> {
    invert_withdrawal_with(solver, p_target, t, x_new, InversionForm::SelfConsistent)
}

pub fn invert_withdrawal_with(
    solver: &SeriesSolver,
    p_target: f64,
    t: f64,
    x_new: f64,
    form: InversionForm,
) -> Result<f64> {
    check_tap(solver, x_new)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid("time_s", format!("must be > 0, got {t}")));
    }
    let (intercept, slope) = coupling_affine(solver, t, x_new, form)?;
    let base_flow = solver.config().base_flow();
    let g_new = (intercept - p_target) / slope - base_flow;
    if g_new < -1e-9 * (1.0 + base_flow) {
        return Err(Error::NegativeWithdrawal { g_new });
    }
    Ok(g_new)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibleMethod {
    /// Inlet drop per unit flow is increasing, so the horizon binds.
    AffineInversion,
    /// Monotonicity failed; bisection on the sampled minimum.
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleWithdrawal {
    /// Largest total flow at the tap meeting the inlet constraint.
    pub g_total: f64,
    /// Time at which the inlet constraint binds, if any.
    pub binding_time_s: Option<f64>,
    pub cap_binding: bool,
    pub method: AdmissibleMethod,
    pub affine_g_total: Option<f64>,
    pub bisection_g_total: f64,
    /// Inlet pressure at the horizon with `g_total` applied.
    pub inlet_pressure_pa: f64,
}

const TIME_SAMPLES: usize = 600;
const FLOW_TOLERANCE: f64 = 1e-6;

/// Largest total withdrawal at `x_new` keeping P(0, t) ≥ `p_min` over
/// (0, horizon], capped at `g_max`.
pub fn max_admissible_withdrawal(
    solver: &SeriesSolver,
    horizon_s: f64,
    p_min: f64,
    g_max: f64,
    x_new: f64,
) -> Result<AdmissibleWithdrawal> {
    check_tap(solver, x_new)?;
    if !(horizon_s.is_finite() && horizon_s > 0.0) {
        return Err(Error::invalid(
            "horizon_s",
            format!("must be > 0, got {horizon_s}"),
        ));
    }
    if g_max.is_nan() || g_max < 0.0 {
        return Err(Error::invalid("g_max", format!("must be >= 0, got {g_max}")));
    }
    let unit = WithdrawalSchedule::single(x_new, 1.0, solver.config())?;
    let times: Vec<f64> = (1..=TIME_SAMPLES)
        .map(|k| horizon_s * k as f64 / TIME_SAMPLES as f64)
        .collect();
    // Inlet pressure is base(t) − G·drop(t).
    let mut samples = Vec::with_capacity(times.len());
    for &t in &times {
        let base = solver.base_pressure(0.0, t)?;
        let drop = -solver.withdrawal_response(0.0, t, &unit)?;
        samples.push((t, base, drop));
    }

    if let Some(&(t, base, _)) = samples.iter().find(|s| s.1 < p_min) {
        return Err(Error::InfeasibleConstraint {
            reason: format!("inlet pressure {base} Pa < p_min {p_min} Pa at t = {t} s with no withdrawal"),
        });
    }

    let monotone =
        samples.windows(2).all(|w| w[1].2 >= w[0].2) && samples.iter().all(|s| s.1 == samples[0].1);
    let affine = if monotone {
        let (_, base, drop) = *samples.last().expect("nonempty samples");
        Some(if drop > 0.0 {
            (base - p_min) / drop
        } else {
            f64::INFINITY
        })
    } else {
        None
    };

    let min_inlet = |g: f64| {
        samples
            .iter()
            .map(|&(_, base, drop)| base - g * drop)
            .fold(f64::INFINITY, f64::min)
    };
    let feasible = |g: f64| min_inlet(g) >= p_min;
    let bisection = {
        let mut lo = 0.0;
        let mut hi = if g_max.is_finite() { g_max } else { 1.0 };
        if feasible(hi) && !g_max.is_finite() {
            while feasible(hi) && hi < 1e12 {
                lo = hi;
                hi *= 2.0;
            }
        }
        if feasible(hi) {
            hi
        } else {
            let tol = FLOW_TOLERANCE;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };

    let uncapped = affine.unwrap_or(bisection);
    let cap_binding = uncapped >= g_max;
    let g_total = uncapped.min(g_max);
    let binding_time_s = if cap_binding {
        None
    } else {
        samples
            .iter()
            .min_by(|a, b| (a.1 - g_total * a.2).total_cmp(&(b.1 - g_total * b.2)))
            .map(|s| s.0)
    };
    let (_, base_h, drop_h) = *samples.last().expect("nonempty samples");
    Ok(AdmissibleWithdrawal {
        g_total,
        binding_time_s,
        cap_binding,
        method: if affine.is_some() {
            AdmissibleMethod::AffineInversion
        } else {
            AdmissibleMethod::Bisection
        },
        affine_g_total: affine.map(|g| g.min(g_max)),
        bisection_g_total: bisection.min(g_max),
        inlet_pressure_pa: base_h - g_total * drop_h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SafetyBand {
    Optimal,
    Permissible,
    Caution,
    Unsafe,
}

impl SafetyBand {
    pub fn as_str(self) -> &'static str {
        match self {
            SafetyBand::Optimal => "Optimal",
            SafetyBand::Permissible => "Permissible",
            SafetyBand::Caution => "Caution",
            SafetyBand::Unsafe => "Unsafe",
        }
    }
}

impl std::fmt::Display for SafetyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropClassification {
    pub drop_fraction: f64,
    pub band: SafetyBand,
}

/// Bands are closed on the upper end; the gap between the permissible and
/// unsafe limits is `Caution`. A pressure rise counts as `Optimal`.
pub fn classify_pressure_drop(
    p_nominal: f64,
    p_current: f64,
    thresholds: &SafetyThresholds,
) -> Result<DropClassification> {
    if !(p_nominal.is_finite() && p_nominal > 0.0) {
        return Err(Error::invalid(
            "p_nominal",
            format!("must be > 0, got {p_nominal}"),
        ));
    }
    if !p_current.is_finite() {
        return Err(Error::invalid("p_current", "must be finite"));
    }
    let drop_fraction = (p_nominal - p_current) / p_nominal;
    let band = if drop_fraction <= thresholds.optimal_max() {
        SafetyBand::Optimal
    } else if drop_fraction <= thresholds.permissible_max() {
        SafetyBand::Permissible
    } else if drop_fraction <= thresholds.unsafe_min() {
        SafetyBand::Caution
    } else {
        SafetyBand::Unsafe
    };
    Ok(DropClassification { drop_fraction, band })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PipelineConfig, SeriesOptions};

    fn solver() -> SeriesSolver {
        SeriesSolver::new(PipelineConfig::reference(), SeriesOptions::default()).unwrap()
    }

    fn tap() -> WithdrawalSchedule {
        WithdrawalSchedule::single(12_000.0, 10.0, &PipelineConfig::reference()).unwrap()
    }

    #[test]
    fn coupling_point_between_table_rows() {
        let cp = find_coupling_point(&solver(), 100.0, &tap(), 100.0).unwrap();
        assert!(cp.position_m > 12_000.0 && cp.position_m < 13_000.0, "{cp:?}");
        assert!(cp.concave);
    }

    #[test]
    fn coupling_point_late_time_root() {
        // Σ cos(nθ)/n² = 0 at θ = π(1 − 1/√3)
        let expected = 30_000.0 * (1.0 - 1.0 / 3f64.sqrt());
        let cp = find_coupling_point(&solver(), 1e6, &tap(), 100.0).unwrap();
        assert!((cp.position_m - expected).abs() < 1.0, "{}", cp.position_m);
    }

    #[test]
    fn no_extremum_at_t0() {
        assert!(matches!(
            find_coupling_point(&solver(), 0.0, &tap(), 100.0),
            Err(Error::NoExtremum { .. })
        ));
        assert!(find_coupling_point(&solver(), 10.0, &tap(), 0.0).is_err());
    }

    #[test]
    fn multiple_extrema_reported() {
        // Full gradient with two well-separated sinks produces two maxima.
        let cfg = PipelineConfig::reference().with_base_flow(0.0).unwrap();
        let opts = SeriesOptions {
            gradient_mode: GradientMode::Full,
            ..Default::default()
        };
        let s = SeriesSolver::new(cfg, opts).unwrap();
        let sched = WithdrawalSchedule::new(
            vec![
                crate::WithdrawalPoint::new(5_000.0, 1.0),
                crate::WithdrawalPoint::new(20_000.0, 1.0),
            ],
            &cfg,
        )
        .unwrap();
        match find_coupling_point(&s, 500.0, &sched, 100.0) {
            Err(Error::MultipleExtrema { candidates, .. }) => {
                assert_eq!(candidates.len(), 2);
                assert!((candidates[0] - 12_500.0).abs() < 0.5);
                assert!((candidates[1] - 27_500.0).abs() < 0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coupling_pressure_hand_value() {
        let p = pressure_at_coupling(&solver(), 100.0, 2.0, 12_000.0).unwrap();
        assert!((p - 125_587.0).abs() < 2.0, "{p}");
        assert_eq!(
            pressure_at_coupling(&solver(), 0.0, 7.0, 12_000.0).unwrap(),
            125_000.0
        );
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let p = pressure_at_coupling(&solver(), 60.0, k as f64 * 0.5, 12_000.0).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn coupling_pressure_matches_field_at_tap() {
        let s = solver();
        let sched = WithdrawalSchedule::single(12_000.0, 12.0, s.config()).unwrap();
        let field = s.pressure(12_000.0, 100.0, &sched).unwrap();
        let tap = pressure_at_coupling(&s, 100.0, 2.0, 12_000.0).unwrap();
        assert!((field - tap).abs() < 1e-8 * field);
    }

    #[test]
    fn inversion_examples() {
        let s = solver();
        let p = pressure_at_coupling(&s, 100.0, 2.0, 12_000.0).unwrap();
        assert!((invert_withdrawal(&s, p, 100.0, 12_000.0).unwrap() - 2.0).abs() < 1e-6);
        let p0 = pressure_at_coupling(&s, 100.0, 0.0, 12_000.0).unwrap();
        assert!(invert_withdrawal(&s, p0, 100.0, 12_000.0).unwrap().abs() < 1e-9);
        assert!((invert_withdrawal(&s, 125_587.0, 100.0, 12_000.0).unwrap() - 2.0).abs() < 1e-3);
        assert!(matches!(
            invert_withdrawal(&s, p0 + 100.0, 100.0, 12_000.0),
            Err(Error::NegativeWithdrawal { .. })
        ));
        assert!(invert_withdrawal(&s, p0, 0.0, 12_000.0).is_err());
    }

    #[test]
    fn printed_form_differs() {
        let s = solver();
        let p = pressure_at_coupling(&s, 100.0, 2.0, 12_000.0).unwrap();
        let printed = invert_withdrawal_with(&s, p, 100.0, 12_000.0, InversionForm::AsPrinted).unwrap();
        assert!((printed - 2.0).abs() > 0.1);
    }

    #[test]
    fn admissible_anchor() {
        let a = max_admissible_withdrawal(&solver(), 300.0, 100_000.0, f64::INFINITY, 12_000.0).unwrap();
        assert!((a.g_total - 18.39).abs() < 0.05, "{a:?}");
        assert_eq!(a.method, AdmissibleMethod::AffineInversion);
        assert!(!a.cap_binding);
        assert_eq!(a.binding_time_s, Some(300.0));
        let rel = (a.affine_g_total.unwrap() - a.bisection_g_total).abs() / a.g_total;
        assert!(rel < 1e-4);
        assert!((a.inlet_pressure_pa - 100_000.0).abs() < 1e-6);
    }

    #[test]
    fn admissible_edges() {
        let s = solver();
        let zero = max_admissible_withdrawal(&s, 300.0, 125_000.0, f64::INFINITY, 12_000.0).unwrap();
        assert_eq!(zero.g_total, 0.0);
        let capped = max_admissible_withdrawal(&s, 300.0, 100_000.0, 5.0, 12_000.0).unwrap();
        assert_eq!(capped.g_total, 5.0);
        assert!(capped.cap_binding);
        assert!(matches!(
            max_admissible_withdrawal(&s, 300.0, 130_000.0, f64::INFINITY, 12_000.0),
            Err(Error::InfeasibleConstraint { .. })
        ));
    }

    #[test]
    fn classification_bands() {
        let th = SafetyThresholds::default();
        let band = |drop: f64| {
            classify_pressure_drop(100.0, 100.0 * (1.0 - drop), &th)
                .unwrap()
                .band
        };
        assert_eq!(band(0.08), SafetyBand::Optimal);
        assert_eq!(band(0.15), SafetyBand::Permissible);
        assert_eq!(band(0.22), SafetyBand::Caution);
        assert_eq!(band(0.30), SafetyBand::Unsafe);
        assert_eq!(band(-0.05), SafetyBand::Optimal);
        let c = classify_pressure_drop(125_000.0, 100_000.0, &th).unwrap();
        assert_eq!(c.band, SafetyBand::Permissible);
        assert!(classify_pressure_drop(0.0, 1.0, &th).is_err());
    }
}
