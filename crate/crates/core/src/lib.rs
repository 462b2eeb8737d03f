//! Transient pressure field of ring (closed-loop) gas pipelines with point
//! withdrawals.
//!
//! * [`series`] evaluates the analytical Fourier-series field and gradient.
//! * [`optimizer`] locates the pressure maximum where new consumers are
//!   best connected, and sizes withdrawals against an inlet-pressure floor.
//! * [`oracle`] integrates the same linearized model by finite differences
//!   as an independent check of the series.
//! * [`scenario`] reads scenario files and produces tables and reports.

pub mod error;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod scenario;
pub mod series;

pub use error::{Error, Result};
pub use model::{
    alpha, derive_linearization, nominal_pressure, DecayMode, GradientMode, PipelineConfig, SafetyThresholds,
    SeriesOptions, WithdrawalModel, WithdrawalPoint, WithdrawalSchedule,
};
pub use optimizer::{
    classify_pressure_drop, find_coupling_point, invert_withdrawal, max_admissible_withdrawal,
    pressure_at_coupling, AdmissibleWithdrawal, CouplingPoint, DropClassification, SafetyBand,
};
pub use series::{ProfileSample, SeriesSolver};
