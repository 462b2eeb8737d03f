//! Scenario documents (TOML), tables and reports.
//!
//! A scenario document looks like:
//!
//! ```toml
//! [pipeline]
//! length_m = 30000.0
//! sound_speed_m_s = 383.3
//! linearization_a_per_s = 0.05
//! inlet_pressure_pa = 140000.0
//! base_flow = 10.0
//!
//! [[withdrawals]]
//! position_m = 12000.0
//! rate = 10.0
//!
//! [series]            # optional, defaults shown
//! truncation = 100
//! decay_mode = "alpha"          # or "a"
//! withdrawal_model = "point"    # or "heaviside"
//! gradient_mode = "base_only"   # or "full"
//! closed_form_acceleration = true
//!
//! [safety]            # optional, defaults shown
//! optimal_max = 0.10
//! permissible_max = 0.20
//! unsafe_min = 0.25
//! ```
//!
//! Unknown keys are rejected.

mod report;
mod table;

pub use report::{
    admissible_table, coupling_table, discrepancies, discrepancy_table, drawdown_table, gradient_table,
    Discrepancy, Report, ReportSettings,
};
pub use table::{format_sig6, Format, ScanAxis, Table, TableMetadata, Value};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    DecayMode, GradientMode, PipelineConfig, SafetyThresholds, SeriesOptions, WithdrawalModel,
    WithdrawalPoint, WithdrawalSchedule,
};
use crate::series::SeriesSolver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub withdrawals: Vec<WithdrawalPoint>,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub safety: SafetySection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub length_m: f64,
    pub sound_speed_m_s: f64,
    pub linearization_a_per_s: f64,
    pub inlet_pressure_pa: f64,
    pub base_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesSection {
    pub truncation: usize,
    pub decay_mode: DecayMode,
    pub withdrawal_model: WithdrawalModel,
    pub gradient_mode: GradientMode,
    pub closed_form_acceleration: bool,
}

impl Default for SeriesSection {
    fn default() -> Self {
        SeriesOptions::default().into()
    }
}

impl From<SeriesOptions> for SeriesSection {
    fn from(o: SeriesOptions) -> Self {
        Self {
            truncation: o.truncation_n,
            decay_mode: o.decay_mode,
            withdrawal_model: o.withdrawal_model,
            gradient_mode: o.gradient_mode,
            closed_form_acceleration: o.closed_form_acceleration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetySection {
    pub optimal_max: f64,
    pub permissible_max: f64,
    pub unsafe_min: f64,
}

impl Default for SafetySection {
    fn default() -> Self {
        let t = SafetyThresholds::default();
        Self {
            optimal_max: t.optimal_max(),
            permissible_max: t.permissible_max(),
            unsafe_min: t.unsafe_min(),
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: PipelineConfig,
    pub schedule: WithdrawalSchedule,
    pub options: SeriesOptions,
    pub thresholds: SafetyThresholds,
}

fn validation(path: &str, err: Error) -> Error {
    let message = match err {
        Error::InvalidParameter { reason, .. } => reason,
        Error::Validation { message, .. } => message,
        other => other.to_string(),
    };
    Error::Validation {
        path: path.to_string(),
        message,
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let located = |message: &str, span: Option<std::ops::Range<usize>>, path: Option<String>| {
            let at = span
                .map(|s| {
                    let (line, col) = line_col(text, s.start);
                    format!("line {line}, column {col}: ")
                })
                .unwrap_or_default();
            let path = path
                .filter(|p| !p.is_empty() && p != ".")
                .map(|p| format!("{p}: "))
                .unwrap_or_default();
            Error::Parse {
                message: format!("{at}{path}{message}"),
            }
        };
        let de = toml::Deserializer::parse(text).map_err(|e| located(e.message(), e.span(), None))?;
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            located(inner.message(), inner.span(), Some(path))
        })?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &ScenarioFile) -> Result<Self> {
        let p = &file.pipeline;
        let config = PipelineConfig::new(
            p.length_m,
            p.sound_speed_m_s,
            p.linearization_a_per_s,
            p.inlet_pressure_pa,
            p.base_flow,
        )
        .map_err(|e| {
            let field = match &e {
                Error::InvalidParameter {
                    name: "linearization_a",
                    ..
                } => "linearization_a_per_s",
                Error::InvalidParameter { name, .. } => name,
                _ => "",
            };
            validation(&format!("pipeline.{field}"), e)
        })?;
        let schedule = WithdrawalSchedule::new(file.withdrawals.clone(), &config)?;
        let s = &file.series;
        let options = SeriesOptions {
            truncation_n: s.truncation,
            decay_mode: s.decay_mode,
            withdrawal_model: s.withdrawal_model,
            gradient_mode: s.gradient_mode,
            closed_form_acceleration: s.closed_form_acceleration,
        };
        options
            .validate()
            .map_err(|e| validation("series.truncation", e))?;
        let f = &file.safety;
        let thresholds = SafetyThresholds::new(f.optimal_max, f.permissible_max, f.unsafe_min)
            .map_err(|e| validation("safety", e))?;
        Ok(Self {
            config,
            schedule,
            options,
            thresholds,
        })
    }

    /// The worked-example ring with its base flow drawn at 12 km.
    pub fn reference() -> Self {
        let config = PipelineConfig::reference();
        Self {
            schedule: WithdrawalSchedule::single(12_000.0, config.base_flow(), &config)
                .expect("reference schedule is valid"),
            config,
            options: SeriesOptions::default(),
            thresholds: SafetyThresholds::default(),
        }
    }

    pub fn to_file(&self) -> ScenarioFile {
        let c = &self.config;
        let t = &self.thresholds;
        ScenarioFile {
            pipeline: PipelineSection {
                length_m: c.length_m(),
                sound_speed_m_s: c.sound_speed_m_s(),
                linearization_a_per_s: c.linearization_a(),
                inlet_pressure_pa: c.inlet_pressure_pa(),
                base_flow: c.base_flow(),
            },
            withdrawals: self.schedule.points().to_vec(),
            series: self.options.into(),
            safety: SafetySection {
                optimal_max: t.optimal_max(),
                permissible_max: t.permissible_max(),
                unsafe_min: t.unsafe_min(),
            },
        }
    }

    /// Normalized document with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file()).expect("scenario serializes")
    }

    /// First 16 hex digits of the SHA-256 of the normalized document.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn solver(&self) -> Result<SeriesSolver> {
        SeriesSolver::new(self.config, self.options)
    }

    /// Tap position for new consumers: the first listed withdrawal.
    pub fn tap_position(&self) -> Option<f64> {
        self.schedule.points().first().map(|p| p.position_m)
    }

    pub fn metadata(&self) -> TableMetadata {
        TableMetadata {
            scenario_hash: self.hash(),
            series: self.options,
        }
    }
}
