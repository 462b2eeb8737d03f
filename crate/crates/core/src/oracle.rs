//! Finite-difference reference solution of the linearized ring model.
//!
//! Solves the forward diffusion equation with point sinks
//!
//! ```text
//! ∂P/∂t = D ∂²P/∂x² − c² Σ G_i δ(x − x_i),   D = c²/(2a)
//! ```
//!
//! on a periodic node grid x_j = jΔx, starting from the uniform nominal
//! pressure. Time stepping is Crank–Nicolson after a two half-step
//! backward-Euler start; every step is one cyclic tridiagonal solve. Each sink is deposited on its nearest node with
//! strength c²·G_i/Δx, so the ring sum drops by exactly dt·c²·ΣG_i/Δx per
//! step.
//!
//! Note the sign: the diffusion form is written with ∂P/∂t on the left. Its
//! periodic modes decay as e^{−D(2πn/L)²t} = e^{−αn²t}, the same rate as the
//! withdrawal cosine series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PipelineConfig, SeriesOptions, WithdrawalModel, WithdrawalSchedule};
use crate::series::SeriesSolver;

const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleGrid {
    cells: usize,
    dt_s: f64,
    horizon_s: f64,
}

impl OracleGrid {
    pub fn new(cells: usize, dt_s: f64, horizon_s: f64) -> Result<Self> {
        if cells < 64 {
            return Err(Error::invalid("cells", format!("must be >= 64, got {cells}")));
        }
        if !(dt_s.is_finite() && dt_s > 0.0) {
            return Err(Error::invalid("dt_s", format!("must be > 0, got {dt_s}")));
        }
        if !(horizon_s.is_finite() && horizon_s >= dt_s) {
            return Err(Error::invalid(
                "horizon_s",
                format!("must be >= dt_s, got {horizon_s}"),
            ));
        }
        Ok(Self {
            cells,
            dt_s,
            horizon_s,
        })
    }

    /// 3000 cells and dt = 0.05 s over the given horizon.
    pub fn reference(horizon_s: f64) -> Result<Self> {
        Self::new(3000, 0.05, horizon_s)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn horizon_s(&self) -> f64 {
        self.horizon_s
    }

    /// Twice the cells and half the time step.
    pub fn refined(&self) -> Self {
        Self {
            cells: self.cells * 2,
            dt_s: self.dt_s / 2.0,
            horizon_s: self.horizon_s,
        }
    }
}

/// Constant-coefficient periodic tridiagonal matrix
/// `lower·x[j−1] + diag·x[j] + upper·x[j+1]`, solved with the
/// Sherman–Morrison correction of a Thomas factorization.
#[derive(Debug, Clone)]
pub struct CyclicTridiagonal {
    lower: f64,
    diag: f64,
    upper: f64,
    // Thomas factorization of the corner-free matrix.
    modified_super: Vec<f64>,
    pivots: Vec<f64>,
    gamma: f64,
    correction: Vec<f64>,
    correction_scale: f64,
}

impl CyclicTridiagonal {
    pub fn new(n: usize, lower: f64, diag: f64, upper: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("n", "cyclic system needs at least 3 unknowns"));
        }
        let gamma = -diag;
        let mut main = vec![diag; n];
        main[0] = diag - gamma;
        main[n - 1] = diag - lower * upper / gamma;

        let mut modified_super = vec![0.0; n];
        let mut pivots = vec![0.0; n];
        pivots[0] = main[0];
        for j in 1..n {
            modified_super[j] = upper / pivots[j - 1];
            pivots[j] = main[j] - lower * modified_super[j];
            if pivots[j] == 0.0 {
                return Err(Error::ConvergenceFailure {
                    residual: f64::INFINITY,
                    tolerance: RESIDUAL_TOLERANCE,
                });
            }
        }
        let mut sys = Self {
            lower,
            diag,
            upper,
            modified_super,
            pivots,
            gamma,
            correction: Vec::new(),
            correction_scale: 0.0,
        };
        let mut u = vec![0.0; n];
        u[0] = gamma;
        u[n - 1] = upper;
        let z = sys.thomas(&u);
        let vz = z[0] + lower / gamma * z[n - 1];
        sys.correction_scale = 1.0 / (1.0 + vz);
        sys.correction = z;
        Ok(sys)
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    fn thomas(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = vec![0.0; n];
        y[0] = rhs[0] / self.pivots[0];
        for j in 1..n {
            y[j] = (rhs[j] - self.lower * y[j - 1]) / self.pivots[j];
        }
        for j in (0..n - 1).rev() {
            y[j] -= self.modified_super[j + 1] * y[j + 1];
        }
        y
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let mut y = self.thomas(rhs);
        let vy = y[0] + self.lower / self.gamma * y[n - 1];
        let f = vy * self.correction_scale;
        for (yj, zj) in y.iter_mut().zip(&self.correction) {
            *yj -= f * zj;
        }
        y
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                let prev = x[(j + n - 1) % n];
                let next = x[(j + 1) % n];
                self.lower * prev + self.diag * x[j] + self.upper * next
            })
            .collect()
    }

    /// Max-norm residual of `x` relative to the max norm of `rhs`.
    pub fn relative_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        let ax = self.apply(x);
        let scale = rhs
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        ax.iter().zip(rhs).fold(0.0f64, |m, (a, r)| m.max((a - r).abs())) / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub time_s: f64,
    pub pressure_pa: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRun {
    pub grid: OracleGrid,
    pub dx_m: f64,
    pub nominal_pa: f64,
    pub sink_cells: Vec<usize>,
    pub snapshots: Vec<Snapshot>,
    /// (t, ring-average pressure) after every step, starting at t = 0.
    pub mean_pressure_series: Vec<(f64, f64)>,
    pub comparison: Vec<SnapshotError>,
}

impl OracleRun {
    pub fn node_position(&self, j: usize) -> f64 {
        j as f64 * self.dx_m
    }

    pub fn snapshot_at(&self, time_s: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.time_s - time_s).abs() <= 0.5 * self.grid.dt_s)
    }
}

/// Integrates the ring model and records the field at `snapshot_times`,
/// which are rounded to the nearest step.
pub fn simulate(
    cfg: &PipelineConfig,
    schedule: &WithdrawalSchedule,
    grid: OracleGrid,
    snapshot_times: &[f64],
) -> Result<OracleRun> {
    let n = grid.cells;
    let dx = cfg.length_m() / n as f64;
    let dt = grid.dt_s;
    let nominal = cfg.nominal_pressure();

    let mut targets: Vec<usize> = Vec::with_capacity(snapshot_times.len());
    for &t in snapshot_times {
        if !(t.is_finite() && t >= 0.0 && t <= grid.horizon_s + 0.5 * dt) {
            return Err(Error::invalid(
                "snapshot_times",
                format!("{t} s is outside [0, {}] s", grid.horizon_s),
            ));
        }
        targets.push((t / dt).round() as usize);
    }
    targets.sort_unstable();
    targets.dedup();

    let c2 = cfg.sound_speed_m_s().powi(2);
    let mut sink = vec![0.0; n];
    let mut sink_cells = Vec::with_capacity(schedule.points().len());
    for p in schedule.points() {
        let j = ((p.position_m / dx).round() as usize) % n;
        sink[j] += c2 * p.rate / dx;
        sink_cells.push(j);
    }

    let k = cfg.diffusivity() * dt / (2.0 * dx * dx);
    let implicit = CyclicTridiagonal::new(n, -k, 1.0 + 2.0 * k, -k)?;

    let steps = (grid.horizon_s / dt).round() as usize;
    let last_step = targets.last().copied().unwrap_or(0).max(steps);
    let mut u = vec![nominal; n];
    let mut snapshots = Vec::with_capacity(targets.len());
    let mut mean_pressure_series = Vec::with_capacity(last_step + 1);
    mean_pressure_series.push((0.0, nominal));
    let mut next_target = targets.iter().peekable();
    let mut rhs = vec![0.0; n];

    for step in 0..=last_step {
        if step > 0 {
            if step == 1 {
                // Two backward-Euler half steps damp the stiff modes excited
                // by switching the sinks on. Same matrix as the CN step.
                for _ in 0..2 {
                    for j in 0..n {
                        rhs[j] = u[j] - 0.5 * dt * sink[j];
                    }
                    u = solve_checked(&implicit, &rhs)?;
                }
            } else {
                for j in 0..n {
                    let prev = u[(j + n - 1) % n];
                    let next = u[(j + 1) % n];
                    rhs[j] = u[j] + k * (prev - 2.0 * u[j] + next) - dt * sink[j];
                }
                u = solve_checked(&implicit, &rhs)?;
            }
            let mean = u.iter().sum::<f64>() / n as f64;
            mean_pressure_series.push((step as f64 * dt, mean));
        }
        while next_target.peek().is_some_and(|&&s| s == step) {
            snapshots.push(Snapshot {
                time_s: step as f64 * dt,
                pressure_pa: u.clone(),
            });
            next_target.next();
        }
    }

    Ok(OracleRun {
        grid,
        dx_m: dx,
        nominal_pa: nominal,
        sink_cells,
        snapshots,
        mean_pressure_series,
        comparison: Vec::new(),
    })
}

fn solve_checked(system: &CyclicTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let u = system.solve(rhs);
    let residual = system.relative_residual(&u, rhs);
    if residual <= RESIDUAL_TOLERANCE {
        Ok(u)
    } else {
        Err(Error::ConvergenceFailure {
            residual,
            tolerance: RESIDUAL_TOLERANCE,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotError {
    pub time_s: f64,
    /// ‖P_fd − P_series‖₂ / ‖P_series − P_nominal‖₂ over the compared nodes.
    pub relative_l2: f64,
    pub max_abs_pa: f64,
    pub compared_cells: usize,
}

/// Cells within this cyclic distance of a sink are left out of the metrics.
pub const EXCLUDED_NEIGHBOURS: usize = 2;

/// Compares every snapshot against nominal + withdrawal response of the
/// point-withdrawal series and stores the metrics in `run.comparison`.
pub fn compare_with_series(
    run: &mut OracleRun,
    cfg: &PipelineConfig,
    schedule: &WithdrawalSchedule,
    opts: &SeriesOptions,
) -> Result<Vec<SnapshotError>> {
    let point_opts = SeriesOptions {
        withdrawal_model: WithdrawalModel::Point,
        ..*opts
    };
    let solver = SeriesSolver::new(*cfg, point_opts)?;
    let n = run.grid.cells;
    let excluded = |j: usize| {
        run.sink_cells.iter().any(|&s| {
            let d = j.abs_diff(s);
            d.min(n - d) <= EXCLUDED_NEIGHBOURS
        })
    };

    let mut out = Vec::with_capacity(run.snapshots.len());
    for snap in &run.snapshots {
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        let mut max_abs = 0.0f64;
        let mut compared = 0;
        for (j, &p) in snap.pressure_pa.iter().enumerate() {
            if excluded(j) {
                continue;
            }
            let response = solver.withdrawal_response(run.node_position(j), snap.time_s, schedule)?;
            let series = run.nominal_pa + response;
            err2 += (p - series).powi(2);
            ref2 += response * response;
            max_abs = max_abs.max((p - series).abs());
            compared += 1;
        }
        let relative_l2 = if err2 == 0.0 { 0.0 } else { (err2 / ref2).sqrt() };
        out.push(SnapshotError {
            time_s: snap.time_s,
            relative_l2,
            max_abs_pa: max_abs,
            compared_cells: compared,
        });
    }
    run.comparison = out.clone();
    Ok(out)
}

/// Observed order p from errors on a grid and on its refinement
/// (Δx and dt both halved): e_coarse / e_fine = 2^p.
pub fn observed_order(coarse_error: f64, fine_error: f64) -> f64 {
    (coarse_error / fine_error).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub cells: usize,
    pub dt_s: f64,
    pub relative_l2: f64,
}

/// Relative L2 error at `time_s` on `levels` successively refined grids.
pub fn refinement_study(
    cfg: &PipelineConfig,
    schedule: &WithdrawalSchedule,
    coarsest: OracleGrid,
    levels: usize,
    time_s: f64,
    opts: &SeriesOptions,
) -> Result<Vec<RefinementLevel>> {
    let mut grid = coarsest;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let mut run = simulate(cfg, schedule, grid, &[time_s])?;
        let metrics = compare_with_series(&mut run, cfg, schedule, opts)?;
        out.push(RefinementLevel {
            cells: grid.cells,
            dt_s: grid.dt_s,
            relative_l2: metrics[0].relative_l2,
        });
        grid = grid.refined();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> PipelineConfig {
        PipelineConfig::reference()
    }

    #[test]
    fn cyclic_solver_inverts_apply() {
        let sys = CyclicTridiagonal::new(7, -0.3, 1.9, -0.45).unwrap();
        let x: Vec<f64> = (0..7).map(|j| (j as f64 * 1.3).sin() + 0.2).collect();
        let b = sys.apply(&x);
        let back = sys.solve(&b);
        for (a, e) in back.iter().zip(&x) {
            assert!((a - e).abs() < 1e-13);
        }
        assert!(sys.relative_residual(&back, &b) < 1e-14);
        assert!(CyclicTridiagonal::new(2, -1.0, 3.0, -1.0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(OracleGrid::new(63, 0.1, 1.0).is_err());
        assert!(OracleGrid::new(64, 0.0, 1.0).is_err());
        assert!(OracleGrid::new(64, 0.1, 0.05).is_err());
        assert!(OracleGrid::new(64, 0.1, 0.1).is_ok());
    }

    #[test]
    fn no_sinks_stays_uniform() {
        let grid = OracleGrid::new(200, 0.5, 20.0).unwrap();
        let run = simulate(&cfg(), &WithdrawalSchedule::empty(), grid, &[0.0, 10.0, 20.0]).unwrap();
        assert_eq!(run.snapshots.len(), 3);
        for s in &run.snapshots {
            assert!(s.pressure_pa.iter().all(|&p| (p - 125_000.0).abs() < 1e-9));
        }
    }

    #[test]
    fn mean_drop_is_linepack() {
        let c = cfg();
        let sched = WithdrawalSchedule::single(12_000.0, 1.0, &c).unwrap();
        let grid = OracleGrid::new(600, 0.25, 100.0).unwrap();
        let run = simulate(&c, &sched, grid, &[100.0]).unwrap();
        let (t, mean) = *run.mean_pressure_series.last().unwrap();
        let expected = c.sound_speed_m_s().powi(2) * t / c.length_m();
        assert!(((125_000.0 - mean) - expected).abs() < 1e-3 * expected);
        // Per-step conservation of the ring sum.
        let per_step = run.grid.dt_s() * c.sound_speed_m_s().powi(2) / run.dx_m;
        for w in run.mean_pressure_series.windows(2) {
            let sum_drop = (w[0].1 - w[1].1) * 600.0;
            assert!((sum_drop - per_step).abs() < 1e-6 * per_step);
        }
    }

    #[test]
    fn symmetric_about_sink() {
        let c = cfg();
        let sched = WithdrawalSchedule::single(12_000.0, 1.0, &c).unwrap();
        let grid = OracleGrid::new(600, 0.5, 60.0).unwrap();
        let run = simulate(&c, &sched, grid, &[60.0]).unwrap();
        let s = run.sink_cells[0];
        let f = &run.snapshots[0].pressure_pa;
        let drop_scale = 125_000.0 - f.iter().cloned().fold(f64::INFINITY, f64::min);
        for d in 1..300 {
            let a = f[(s + d) % 600];
            let b = f[(s + 600 - d) % 600];
            assert!((a - b).abs() <= 1e-6 * drop_scale, "{d}: {a} {b}");
        }
    }

    #[test]
    fn decay_rate_identity() {
        let c = cfg();
        let l = c.length_m();
        for n in 1..=5 {
            let nf = n as f64;
            let mode = c.diffusivity() * (2.0 * PI * nf / l).powi(2);
            assert!((c.alpha() * nf * nf - mode).abs() < 1e-12 * mode);
        }
    }

    #[test]
    fn rejects_snapshot_past_horizon() {
        let grid = OracleGrid::new(64, 0.5, 5.0).unwrap();
        assert!(simulate(&cfg(), &WithdrawalSchedule::empty(), grid, &[6.0]).is_err());
    }

    #[test]
    fn zero_time_snapshot_agrees_exactly() {
        let c = cfg();
        let sched = WithdrawalSchedule::single(12_000.0, 1.0, &c).unwrap();
        let grid = OracleGrid::new(128, 0.5, 1.0).unwrap();
        let mut run = simulate(&c, &sched, grid, &[0.0]).unwrap();
        let m = compare_with_series(&mut run, &c, &sched, &SeriesOptions::default()).unwrap();
        assert_eq!(m[0].relative_l2, 0.0);
        assert_eq!(m[0].max_abs_pa, 0.0);
    }
}
