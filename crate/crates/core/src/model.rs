//! Physical parameters of a ring pipeline and the options that control how
//! the analytical series is evaluated.
//!
//! All flows are carried in linearized units (Pa·s/m). The linearization
//! coefficient is stored as `a`, never as `2a`; every formula in the crate
//! spells the factor out explicitly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and operating point of a single closed-loop pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    length_m: f64,
    sound_speed_m_s: f64,
    linearization_a: f64,
    inlet_pressure_pa: f64,
    base_flow: f64,
}

impl PipelineConfig {
    pub fn new(
        length_m: f64,
        sound_speed_m_s: f64,
        linearization_a: f64,
        inlet_pressure_pa: f64,
        base_flow: f64,
    ) -> Result<Self> {
        positive("length_m", length_m)?;
        positive("sound_speed_m_s", sound_speed_m_s)?;
        positive("linearization_a", linearization_a)?;
        positive("inlet_pressure_pa", inlet_pressure_pa)?;
        if !(base_flow.is_finite() && base_flow >= 0.0) {
            return Err(Error::invalid(
                "base_flow",
                format!("must be >= 0, got {base_flow}"),
            ));
        }
        let cfg = Self {
            length_m,
            sound_speed_m_s,
            linearization_a,
            inlet_pressure_pa,
            base_flow,
        };
        nominal_pressure(&cfg)?;
        Ok(cfg)
    }

    /// The ring used throughout the worked examples: P1 = 140 kPa, G0 = 10,
    /// a = 0.05 1/s, L = 30 km, c = 383.3 m/s.
    pub fn reference() -> Self {
        Self::new(30_000.0, 383.3, 0.05, 140_000.0, 10.0).expect("reference config is valid")
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn sound_speed_m_s(&self) -> f64 {
        self.sound_speed_m_s
    }

    pub fn linearization_a(&self) -> f64 {
        self.linearization_a
    }

    pub fn inlet_pressure_pa(&self) -> f64 {
        self.inlet_pressure_pa
    }

    pub fn base_flow(&self) -> f64 {
        self.base_flow
    }

    pub fn alpha(&self) -> f64 {
        alpha(self)
    }

    pub fn nominal_pressure(&self) -> f64 {
        self.inlet_pressure_pa - self.linearization_a * self.base_flow * self.length_m
    }

    /// Physical diffusivity c²/(2a) of the linearized model (m²/s).
    pub fn diffusivity(&self) -> f64 {
        self.sound_speed_m_s * self.sound_speed_m_s / (2.0 * self.linearization_a)
    }

    pub fn with_base_flow(&self, base_flow: f64) -> Result<Self> {
        Self::new(
            self.length_m,
            self.sound_speed_m_s,
            self.linearization_a,
            self.inlet_pressure_pa,
            base_flow,
        )
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

/// Mode decay-rate scale 2π²c²/(aL²) in 1/s.
pub fn alpha(cfg: &PipelineConfig) -> f64 {
    let c = cfg.sound_speed_m_s;
    let l = cfg.length_m;
    2.0 * PI * PI * c * c / (cfg.linearization_a * l * l)
}

/// Linear friction coefficient `2a = λ v / (2d)` from a quadratic friction
/// factor, a representative velocity and the pipe diameter.
pub fn derive_linearization(friction_lambda: f64, mean_velocity: f64, diameter: f64) -> Result<f64> {
    positive("friction_lambda", friction_lambda)?;
    positive("mean_velocity", mean_velocity)?;
    positive("diameter", diameter)?;
    Ok(friction_lambda * mean_velocity / (2.0 * diameter))
}

/// Uniform field value at t = 0: P1 − a·G0·L.
pub fn nominal_pressure(cfg: &PipelineConfig) -> Result<f64> {
    let p = cfg.nominal_pressure();
    if p > 0.0 {
        Ok(p)
    } else {
        Err(Error::invalid(
            "nominal_pressure",
            format!("P1 - a*G0*L must be > 0, got {p}"),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WithdrawalPoint {
    pub position_m: f64,
    pub rate: f64,
}

impl WithdrawalPoint {
    pub fn new(position_m: f64, rate: f64) -> Self {
        Self { position_m, rate }
    }
}

/// Point withdrawals ordered by position, all active from t = 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WithdrawalSchedule {
    points: Vec<WithdrawalPoint>,
}

impl WithdrawalSchedule {
    pub fn new(points: Vec<WithdrawalPoint>, cfg: &PipelineConfig) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.position_m.is_finite() && p.position_m >= 0.0 && p.position_m < cfg.length_m()) {
                return Err(Error::Validation {
                    path: format!("withdrawals[{i}].position_m"),
                    message: format!(
                        "position out of range: {} not in [0, {})",
                        p.position_m,
                        cfg.length_m()
                    ),
                });
            }
            if !(p.rate.is_finite() && p.rate >= 0.0) {
                return Err(Error::Validation {
                    path: format!("withdrawals[{i}].rate"),
                    message: format!("rate must be >= 0, got {}", p.rate),
                });
            }
            if i > 0 && p.position_m <= points[i - 1].position_m {
                return Err(Error::Validation {
                    path: format!("withdrawals[{i}].position_m"),
                    message: "positions must be strictly increasing".into(),
                });
            }
        }
        Ok(Self { points })
    }

    /// A single withdrawal of `rate` at `position_m`.
    pub fn single(position_m: f64, rate: f64, cfg: &PipelineConfig) -> Result<Self> {
        Self::new(vec![WithdrawalPoint::new(position_m, rate)], cfg)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[WithdrawalPoint] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Aggregate withdrawal Σ G_i.
    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.rate).sum()
    }
}

/// Which rate multiplies n² in the exponential time factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayMode {
    #[default]
    Alpha,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithdrawalModel {
    /// Every withdrawal acts on the whole ring.
    #[default]
    Point,
    /// Withdrawal terms act only at x ≥ x_i.
    Heaviside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Derivative of the inlet-driven sine series only.
    #[default]
    BaseOnly,
    /// Adds the derivative of the withdrawal cosine series.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    pub truncation_n: usize,
    pub decay_mode: DecayMode,
    pub withdrawal_model: WithdrawalModel,
    pub gradient_mode: GradientMode,
    /// Evaluate the stationary part of each series in closed form and only
    /// sum the exponential corrections.
    pub closed_form_acceleration: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            truncation_n: 100,
            decay_mode: DecayMode::Alpha,
            withdrawal_model: WithdrawalModel::Point,
            gradient_mode: GradientMode::BaseOnly,
            closed_form_acceleration: true,
        }
    }
}

impl SeriesOptions {
    pub fn validate(&self) -> Result<()> {
        if self.truncation_n == 0 {
            return Err(Error::invalid("truncation_n", "must be >= 1"));
        }
        Ok(())
    }

    /// Plain N-term partial sums, as the tables were originally computed.
    pub fn partial_sums(self) -> Self {
        Self {
            closed_form_acceleration: false,
            ..self
        }
    }

    pub fn decay_rate(&self, cfg: &PipelineConfig) -> f64 {
        match self.decay_mode {
            DecayMode::Alpha => cfg.alpha(),
            DecayMode::A => cfg.linearization_a(),
        }
    }
}

/// Inlet pressure-drop bands, as fractions of nominal pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafetyThresholds {
    optimal_max: f64,
    permissible_max: f64,
    unsafe_min: f64,
}

impl Default for SafetyThresholds {
    fn default() -> Self {
        Self {
            optimal_max: 0.10,
            permissible_max: 0.20,
            unsafe_min: 0.25,
        }
    }
}

impl SafetyThresholds {
    pub fn new(optimal_max: f64, permissible_max: f64, unsafe_min: f64) -> Result<Self> {
        let ordered = 0.0 < optimal_max
            && optimal_max <= permissible_max
            && permissible_max <= unsafe_min
            && unsafe_min < 1.0;
        if !ordered {
            return Err(Error::invalid(
                "safety",
                format!(
                    "need 0 < optimal_max <= permissible_max <= unsafe_min < 1, got \
                     {optimal_max}, {permissible_max}, {unsafe_min}"
                ),
            ));
        }
        Ok(Self {
            optimal_max,
            permissible_max,
            unsafe_min,
        })
    }

    pub fn optimal_max(&self) -> f64 {
        self.optimal_max
    }

    pub fn permissible_max(&self) -> f64 {
        self.permissible_max
    }

    pub fn unsafe_min(&self) -> f64 {
        self.unsafe_min
    }
}
