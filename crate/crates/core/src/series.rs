//! Analytical pressure field of the ring as truncated trigonometric series.
//!
//! The field is the superposition of an inlet-driven sine series
//!
//! ```text
//! P1 − aG0L + 2aG0L · Σ sin(πnx/L)·(1 − e^{−n²rt})/(πn³)
//! ```
//!
//! and, for every withdrawal (x_i, G_i), a linepack term plus a periodic
//! cosine series
//!
//! ```text
//! −(c²t/L)·G_i − (2c²/(Lα))·G_i · Σ cos(2πn(x − x_i)/L)·(1 − e^{−n²rt})/n²
//! ```
//!
//! where `r` is the decay rate selected by [`DecayMode`](crate::DecayMode).
//!
//! With closed-form acceleration on, each series is split into its
//! stationary Fourier sum, evaluated exactly, minus the exponentially
//! decaying corrections. The corrections are summed until they are below
//! double precision, so the result is the infinite series rather than its
//! N-term truncation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{GradientMode, PipelineConfig, SeriesOptions, WithdrawalModel, WithdrawalSchedule};

const TAU: f64 = 2.0 * PI;

/// e^{-40} is far below f64 epsilon relative to the O(1) stationary sums.
const CORRECTION_EXPONENT: f64 = 40.0;
const MAX_CORRECTION_TERMS: usize = 2_000_000;

/// The three Fourier sums that occur in the field and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Harmonic {
    /// Σ sin(nθ)/n³
    SinCube,
    /// Σ cos(nθ)/n²
    CosSquare,
    /// Σ sin(nθ)/n
    SinLinear,
}

impl Harmonic {
    fn term(self, n: usize, theta: f64) -> f64 {
        let nf = n as f64;
        match self {
            Harmonic::SinCube => (nf * theta).sin() / (nf * nf * nf),
            Harmonic::CosSquare => (nf * theta).cos() / (nf * nf),
            Harmonic::SinLinear => (nf * theta).sin() / nf,
        }
    }

    /// Infinite sum for θ ∈ [0, 2π).
    pub fn closed_form(self, theta: f64) -> f64 {
        let t = theta;
        match self {
            Harmonic::SinCube => PI * PI * t / 6.0 - PI * t * t / 4.0 + t * t * t / 12.0,
            Harmonic::CosSquare => PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0,
            Harmonic::SinLinear => {
                if t == 0.0 {
                    0.0
                } else {
                    (PI - t) / 2.0
                }
            }
        }
    }
}

/// Σ_n term_n(θ)·(1 − e^{−n²·rate_t}) with `rate_t = rate · t`.
pub fn damped_sum(harmonic: Harmonic, theta: f64, rate_t: f64, opts: &SeriesOptions) -> f64 {
    if rate_t <= 0.0 {
        return 0.0;
    }
    let theta = theta.rem_euclid(TAU);
    if opts.closed_form_acceleration {
        let needed = (CORRECTION_EXPONENT / rate_t).sqrt().ceil() as usize;
        let terms = needed.clamp(opts.truncation_n, MAX_CORRECTION_TERMS);
        let correction: f64 = (1..=terms)
            .map(|n| {
                let nf = n as f64;
                harmonic.term(n, theta) * (-nf * nf * rate_t).exp()
            })
            .sum();
        harmonic.closed_form(theta) - correction
    } else {
        (1..=opts.truncation_n)
            .map(|n| {
                let nf = n as f64;
                harmonic.term(n, theta) * -(-nf * nf * rate_t).exp_m1()
            })
            .sum()
    }
}

/// One evaluated point of the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub position_m: f64,
    pub time_s: f64,
    pub pressure_pa: f64,
    pub gradient_pa_per_m: Option<f64>,
}

/// Evaluates the series field for one pipeline under fixed options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSolver {
    cfg: PipelineConfig,
    opts: SeriesOptions,
}

impl SeriesSolver {
    pub fn new(cfg: PipelineConfig, opts: SeriesOptions) -> Result<Self> {
        opts.validate()?;
        Ok(Self { cfg, opts })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn options(&self) -> &SeriesOptions {
        &self.opts
    }

    fn rate_t(&self, t: f64) -> f64 {
        self.opts.decay_rate(&self.cfg) * t
    }

    fn check(&self, x: f64, t: f64) -> Result<()> {
        let l = self.cfg.length_m();
        if !(x.is_finite() && (0.0..=l).contains(&x)) {
            return Err(Error::OutOfDomain { x, length: l });
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("time_s", format!("must be >= 0, got {t}")));
        }
        Ok(())
    }

    /// Angle 2π(x − x_i)/L with the offset reduced in metres first, so that
    /// x = 0 and x = L produce bit-identical angles.
    fn ring_angle(&self, x: f64, x_i: f64) -> f64 {
        let l = self.cfg.length_m();
        let mut d = (x - x_i).rem_euclid(l);
        if d >= l {
            d = 0.0;
        }
        TAU * d / l
    }

    /// Inlet-driven part of the field, independent of the withdrawals.
    pub fn base_pressure(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        let cfg = &self.cfg;
        let scale = 2.0 * cfg.linearization_a() * cfg.base_flow() * cfg.length_m();
        Ok(cfg.nominal_pressure() + scale * self.s_sin_unchecked(x, t))
    }

    fn s_sin_unchecked(&self, x: f64, t: f64) -> f64 {
        let l = self.cfg.length_m();
        // sin(0) = sin(nπ) = 0 for every mode.
        if x == 0.0 || x == l {
            return 0.0;
        }
        damped_sum(Harmonic::SinCube, PI * x / l, self.rate_t(t), &self.opts) / PI
    }

    /// Σ sin(πnx/L)·(1 − e^{−n²rt})/(πn³).
    pub fn s_sin(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        Ok(self.s_sin_unchecked(x, t))
    }

    /// Σ (1 − e^{−n²rt})/(απn²).
    pub fn s_e(&self, t: f64) -> Result<f64> {
        self.check(0.0, t)?;
        Ok(damped_sum(Harmonic::CosSquare, 0.0, self.rate_t(t), &self.opts) / (self.cfg.alpha() * PI))
    }

    /// Pressure change caused by a unit withdrawal at `x_i`, before any
    /// Heaviside masking.
    fn unit_response(&self, x: f64, x_i: f64, t: f64) -> f64 {
        let cfg = &self.cfg;
        let c2 = cfg.sound_speed_m_s().powi(2);
        let l = cfg.length_m();
        let linepack = c2 * t / l;
        let spread = 2.0 * c2 / (l * cfg.alpha())
            * damped_sum(
                Harmonic::CosSquare,
                self.ring_angle(x, x_i),
                self.rate_t(t),
                &self.opts,
            );
        -(linepack + spread)
    }

    fn active(&self, x: f64, x_i: f64) -> bool {
        match self.opts.withdrawal_model {
            WithdrawalModel::Point => true,
            WithdrawalModel::Heaviside => x >= x_i,
        }
    }

    /// Signed pressure contribution of all withdrawals.
    pub fn withdrawal_response(&self, x: f64, t: f64, schedule: &WithdrawalSchedule) -> Result<f64> {
        self.check(x, t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(schedule
            .points()
            .iter()
            .filter(|p| self.active(x, p.position_m))
            .map(|p| p.rate * self.unit_response(x, p.position_m, t))
            .sum())
    }

    pub fn pressure(&self, x: f64, t: f64, schedule: &WithdrawalSchedule) -> Result<f64> {
        Ok(self.base_pressure(x, t)? + self.withdrawal_response(x, t, schedule)?)
    }

    /// Spatial derivative without the zero convention at withdrawal points.
    pub(crate) fn gradient_continuous(
        &self,
        x: f64,
        t: f64,
        schedule: &WithdrawalSchedule,
        mode: GradientMode,
    ) -> Result<f64> {
        self.check(x, t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        let cfg = &self.cfg;
        let l = cfg.length_m();
        let rate_t = self.rate_t(t);
        let base = 2.0
            * cfg.linearization_a()
            * cfg.base_flow()
            * damped_sum(Harmonic::CosSquare, PI * x / l, rate_t, &self.opts);
        let withdrawals = match mode {
            GradientMode::BaseOnly => 0.0,
            GradientMode::Full => {
                let k = 4.0 * PI * cfg.sound_speed_m_s().powi(2) / (l * l * cfg.alpha());
                schedule
                    .points()
                    .iter()
                    .filter(|p| self.active(x, p.position_m))
                    .map(|p| {
                        let theta = self.ring_angle(x, p.position_m);
                        p.rate * k * damped_sum(Harmonic::SinLinear, theta, rate_t, &self.opts)
                    })
                    .sum()
            }
        };
        Ok(base + withdrawals)
    }

    /// dP/dx per the configured gradient mode. Exactly on a withdrawal
    /// position the delta contribution is regularized and 0 is returned.
    pub fn pressure_gradient(&self, x: f64, t: f64, schedule: &WithdrawalSchedule) -> Result<f64> {
        self.check(x, t)?;
        if self.on_withdrawal(x, schedule) {
            return Ok(0.0);
        }
        self.gradient_continuous(x, t, schedule, self.opts.gradient_mode)
    }

    fn on_withdrawal(&self, x: f64, schedule: &WithdrawalSchedule) -> bool {
        let wrapped = if x == self.cfg.length_m() { 0.0 } else { x };
        schedule.points().iter().any(|p| p.position_m == wrapped)
    }

    pub fn sample(&self, x: f64, t: f64, schedule: &WithdrawalSchedule) -> Result<ProfileSample> {
        Ok(ProfileSample {
            position_m: x,
            time_s: t,
            pressure_pa: self.pressure(x, t, schedule)?,
            gradient_pa_per_m: Some(self.pressure_gradient(x, t, schedule)?),
        })
    }

    /// dP/dx(0, t) − dP/dx(L, t) of the base field. The half-wave sine modes
    /// are not L-periodic, so this is nonzero for t > 0.
    pub fn gradient_periodicity_defect(&self, t: f64) -> Result<f64> {
        let empty = WithdrawalSchedule::empty();
        let at_inlet = self.gradient_continuous(0.0, t, &empty, GradientMode::BaseOnly)?;
        let at_end = self.gradient_continuous(self.cfg.length_m(), t, &empty, GradientMode::BaseOnly)?;
        Ok(at_inlet - at_end)
    }
}
