//! Browser bindings for three small experiments: linear damping of a single mode,
//! a nonlinear run of the reference setup, and a two-pulse echo.
//!
//! Every function returns plain arrays so the page can draw them on a canvas.

use std::f64::consts::PI;

use vdl_core::linstab::{dispersion_roots, SearchBox};
use vdl_core::model::{sample_initial, DistributionState, Interaction, Perturbation, PhaseSpaceGrid, VelocityProfile};
use vdl_core::sim::{echo_experiment, predict_echo_time, run, Pulse, RunOptions};
use vdl_core::volterra::{cosine_source, fit_decay, solve_mode};
use wasm_bindgen::prelude::*;

const N_X: usize = 32;
const N_V: usize = 512;

fn js(e: vdl_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn interaction(amplitude: f64) -> Result<Interaction, JsError> {
    if amplitude >= 0.0 {
        Interaction::repulsive(amplitude)
    } else {
        Interaction::attractive(-amplitude)
    }
    .map_err(js)
}

fn initial(temperature: f64, pert: &[Perturbation], dt: f64) -> Result<DistributionState, JsError> {
    let p = VelocityProfile::maxwellian(temperature).map_err(js)?;
    let g = PhaseSpaceGrid::new(N_X, N_V, p.default_velocity_cutoff(), dt).map_err(js)?;
    sample_initial(&p, pert, &g).map_err(js)
}

/// A time series with optional summary numbers.
#[wasm_bindgen]
pub struct Series {
    times: Vec<f64>,
    values: Vec<f64>,
    extra: Vec<f64>,
}

#[wasm_bindgen]
impl Series {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// Experiment-specific scalars, documented on each constructor.
    #[wasm_bindgen(getter)]
    pub fn extra(&self) -> Vec<f64> {
        self.extra.clone()
    }
}

/// |ρ̂(t,1)| from the Volterra equation for a Maxwellian of the given temperature.
///
/// `extra` holds `[fitted rate, root decay rate, root frequency]`. Negative
/// `amplitude` selects an attractive interaction; the fitted rate is NaN when
/// the response does not decay.
#[wasm_bindgen]
pub fn linear_damping(temperature: f64, amplitude: f64, horizon: f64) -> Result<Series, JsError> {
    let p = VelocityProfile::maxwellian(temperature).map_err(js)?;
    let w = interaction(amplitude)?;
    let series = solve_mode(1, cosine_source(&p, 1, 1e-3), horizon, 1.0 / 128.0, &p, &w).map_err(js)?;
    let root = dispersion_roots(1, &p, &w, SearchBox::for_profile(&p), 24).map_err(js)?;
    let (rate, freq) = root.dominant().map_or((f64::NAN, f64::NAN), |r| (r.decay_rate(), r.frequency()));
    let fit = fit_decay(&series, (0.3 / temperature.sqrt(), horizon.min(2.0))).map_or(f64::NAN, |f| f.rate);
    Ok(Series { values: series.amplitudes(), times: series.times, extra: vec![fit, rate, freq] })
}

/// |ρ̂(t,k)| for k = 1, 2, 3 from the kinetic solver, interleaved per output time.
///
/// `extra` holds `[relative mass drift, relative L² drift]`.
#[wasm_bindgen]
pub fn nonlinear_run(epsilon: f64, amplitude: f64, horizon: f64) -> Result<Series, JsError> {
    let dt = 1.0 / 32.0;
    let s = initial(1.0, &[Perturbation::new(1, epsilon)], dt)?;
    let opts = RunOptions { horizon, dt, stride: 2, k_out: 3, ..Default::default() };
    let out = run(&s, &interaction(amplitude)?, &opts).map_err(js)?;
    let rec = &out.record;
    let values = rec.rows.iter().flat_map(|r| r.modes.iter().take(3).map(|z| z.norm())).collect();
    let extra = vec![rec.relative_drift(|d| d.mass), rec.relative_drift(|d| d.l2)];
    Ok(Series { times: rec.times(), values, extra })
}

/// Mode-2 density after kicks of modes 1 at t = 0 and 3 at `tau`, on the reference interaction.
///
/// `extra` holds `[predicted echo time, measured echo time, echo amplitude]`.
#[wasm_bindgen]
pub fn plasma_echo(tau: f64, amp1: f64, amp2: f64, horizon: f64) -> Result<Series, JsError> {
    let dt = 1.0 / 32.0;
    let base = initial(1.0, &[], dt)?;
    let w = interaction(1.0 / PI)?;
    let opts = RunOptions { horizon, dt, k_out: 3, ..Default::default() };
    let p1 = Pulse { mode: 1, amplitude: amp1, time: 0.0 };
    let p2 = Pulse { mode: 3, amplitude: amp2, time: tau };
    let res = echo_experiment(&base, &w, p1, p2, &opts).map_err(js)?;
    let predicted = predict_echo_time(2, -1, tau).unwrap_or(f64::NAN);
    let (time, amp) = res.for_mode(2).map_or((f64::NAN, f64::NAN), |p| (p.time, p.amplitude));
    Ok(Series { times: res.record.times(), values: res.record.mode_amplitudes(2), extra: vec![predicted, time, amp] })
}
