//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Three operations: pressure/gradient profiles, coupling point location,
//! admissible withdrawal with its safety band. The `try_*` methods carry the
//! logic and are usable natively; the exported wrappers turn errors into
//! JavaScript exceptions.

use serde_json::json;
use wasm_bindgen::prelude::*;

use ringflow::{
    classify_pressure_drop, find_coupling_point, max_admissible_withdrawal, Error, PipelineConfig,
    SafetyThresholds, SeriesOptions, SeriesSolver, WithdrawalSchedule,
};

const GRID_STEP_M: f64 = 100.0;

/// A ring with one tap.
#[wasm_bindgen]
pub struct Ring {
    solver: SeriesSolver,
    schedule: WithdrawalSchedule,
    tap_m: f64,
}

impl Ring {
    pub fn try_new(
        length_m: f64,
        sound_speed_m_s: f64,
        linearization_a_per_s: f64,
        inlet_pressure_pa: f64,
        base_flow: f64,
        tap_m: f64,
        tap_rate: f64,
    ) -> Result<Ring, Error> {
        let cfg = PipelineConfig::new(
            length_m,
            sound_speed_m_s,
            linearization_a_per_s,
            inlet_pressure_pa,
            base_flow,
        )?;
        let schedule = WithdrawalSchedule::single(tap_m, tap_rate, &cfg)?;
        Ok(Ring {
            solver: SeriesSolver::new(cfg, SeriesOptions::default())?,
            schedule,
            tap_m,
        })
    }

    fn positions(&self, samples: usize) -> Vec<f64> {
        let l = self.solver.config().length_m();
        let n = samples.max(2);
        (0..n).map(|k| l * k as f64 / (n - 1) as f64).collect()
    }

    pub fn try_pressure_profile(&self, t: f64, samples: usize) -> Result<Vec<f64>, Error> {
        self.positions(samples)
            .into_iter()
            .map(|x| self.solver.pressure(x, t, &self.schedule))
            .collect()
    }

    pub fn try_gradient_profile(&self, t: f64, samples: usize) -> Result<Vec<f64>, Error> {
        self.positions(samples)
            .into_iter()
            .map(|x| self.solver.pressure_gradient(x, t, &self.schedule))
            .collect()
    }

    pub fn try_coupling_point(&self, t: f64) -> Result<f64, Error> {
        Ok(find_coupling_point(&self.solver, t, &self.schedule, GRID_STEP_M)?.position_m)
    }

    /// JSON summary of the largest admissible total withdrawal at the tap.
    pub fn try_admissible(&self, horizon_s: f64, p_min: f64) -> Result<String, Error> {
        let x_new = if self.tap_m > 0.0 {
            self.tap_m
        } else {
            self.try_coupling_point(1e6)?
        };
        let a = max_admissible_withdrawal(&self.solver, horizon_s, p_min, f64::INFINITY, x_new)?;
        let cfg = self.solver.config();
        let class = classify_pressure_drop(
            cfg.nominal_pressure(),
            a.inlet_pressure_pa,
            &SafetyThresholds::default(),
        )?;
        Ok(json!({
            "x_new_m": x_new,
            "g_total": a.g_total,
            "g_new": a.g_total - cfg.base_flow(),
            "inlet_pressure_pa": a.inlet_pressure_pa,
            "drop_fraction": class.drop_fraction,
            "band": class.band.as_str(),
        })
        .to_string())
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Ring {
    /// Lengths in m, speeds in m/s, a in 1/s, pressure in Pa, flows in Pa·s/m.
    #[wasm_bindgen(constructor)]
    pub fn new(
        length_m: f64,
        sound_speed_m_s: f64,
        linearization_a_per_s: f64,
        inlet_pressure_pa: f64,
        base_flow: f64,
        tap_m: f64,
        tap_rate: f64,
    ) -> Result<Ring, JsError> {
        Ring::try_new(
            length_m,
            sound_speed_m_s,
            linearization_a_per_s,
            inlet_pressure_pa,
            base_flow,
            tap_m,
            tap_rate,
        )
        .map_err(js)
    }

    #[wasm_bindgen(js_name = nominalPressure)]
    pub fn nominal_pressure(&self) -> f64 {
        self.solver.config().nominal_pressure()
    }

    /// P at `samples` evenly spaced positions over [0, L].
    #[wasm_bindgen(js_name = pressureProfile)]
    pub fn pressure_profile(&self, t: f64, samples: usize) -> Result<Vec<f64>, JsError> {
        self.try_pressure_profile(t, samples).map_err(js)
    }

    #[wasm_bindgen(js_name = gradientProfile)]
    pub fn gradient_profile(&self, t: f64, samples: usize) -> Result<Vec<f64>, JsError> {
        self.try_gradient_profile(t, samples).map_err(js)
    }

    #[wasm_bindgen(js_name = couplingPoint)]
    pub fn coupling_point(&self, t: f64) -> Result<f64, JsError> {
        self.try_coupling_point(t).map_err(js)
    }

    pub fn admissible(&self, horizon_s: f64, p_min: f64) -> Result<String, JsError> {
        self.try_admissible(horizon_s, p_min).map_err(js)
    }
}
