//! Strang-split advection: half free streaming, full velocity shift, half free streaming.
//!
//! Both substeps are exact phase multiplications. Streaming multiplies f̂(k, v_j) by
//! e^{−2iπk v_j s}; the velocity shift multiplies each x-row's velocity spectrum by
//! e^{−2iπη F(x_i) dt}. The force of the shift is evaluated on the half-streamed state.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    force_from_density, mixed_to_values, values_to_mixed, DistributionState, Interaction,
    PhaseSpaceGrid,
};
use crate::spectral::{self, compensated_sum};

/// Largest allowed `dt · max(1, max|F|)`: the velocity displacement per step.
pub const STEP_BOUND: f64 = 0.1;

/// Stability bound on `dt` for a force of sup-norm `f_max`.
pub fn max_stable_dt(f_max: f64) -> f64 {
    STEP_BOUND / f_max.max(1.0)
}

/// Smooth exponential damping of the top third of velocity frequencies.
pub fn filter_multipliers(n_v: usize) -> Vec<f64> {
    let m_n = (n_v / 2) as f64;
    (0..n_v)
        .map(|m| {
            let r = spectral::wavenumber(m, n_v).abs() as f64 / m_n;
            if r <= 2.0 / 3.0 {
                1.0
            } else {
                (-36.0 * (3.0 * (r - 2.0 / 3.0)).powi(8)).exp()
            }
        })
        .collect()
}

/// Multiplies f̂(k, v_j) (layout `[j][k]`) by e^{−2iπ k v_j s}; the Nyquist mode is cleared.
pub fn stream_mixed(grid: &PhaseSpaceGrid, mixed: &mut [Complex64], s: f64) {
    let n_x = grid.n_x;
    spectral::for_each_row(mixed, n_x, |j, row| {
        let v = grid.v(j);
        for (ki, z) in row.iter_mut().enumerate() {
            if ki == n_x / 2 {
                *z = Complex64::new(0.0, 0.0);
            } else {
                let k = spectral::wavenumber(ki, n_x) as f64;
                *z *= Complex64::from_polar(1.0, -2.0 * PI * k * v * s);
            }
        }
    });
}

/// Replaces each x-row `[i][·]` of `values` by f(x_i, v − shift_i), spectrally in v.
pub fn shift_rows(grid: &PhaseSpaceGrid, values: &mut [f64], shifts: &[f64], filter: Option<&[f64]>) {
    let n_v = grid.n_v;
    let fwd = spectral::forward_plan(n_v);
    let inv = spectral::inverse_plan(n_v);
    let two_v = 2.0 * grid.v_max;
    let scale = 1.0 / n_v as f64;
    spectral::for_each_row(values, n_v, |i, row| {
        let s = shifts[i];
        if s == 0.0 && filter.is_none() {
            return;
        }
        let mut buf: Vec<Complex64> = row.iter().map(|&f| Complex64::new(f, 0.0)).collect();
        fwd.process(&mut buf);
        for (m, z) in buf.iter_mut().enumerate() {
            let eta = spectral::wavenumber(m, n_v) as f64 / two_v;
            let mut mult = Complex64::from_polar(scale, -2.0 * PI * eta * s);
            if let Some(f) = filter {
                mult *= f[m];
            }
            *z *= mult;
        }
        inv.process(&mut buf);
        for (f, z) in row.iter_mut().zip(buf) {
            *f = z.re;
        }
    });
}

/// ρ̂(k) = ∫ f̂(k, v) dv from a mixed array.
pub fn density_from_mixed(grid: &PhaseSpaceGrid, mixed: &[Complex64]) -> Vec<Complex64> {
    let n_x = grid.n_x;
    let dv = grid.dv();
    (0..n_x)
        .map(|k| {
            let re = compensated_sum(mixed.chunks(n_x).map(|row| row[k].re));
            let im = compensated_sum(mixed.chunks(n_x).map(|row| row[k].im));
            Complex64::new(re, im) * dv
        })
        .collect()
}

/// Single-step advancer with cached configuration.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub grid: PhaseSpaceGrid,
    pub interaction: Interaction,
    pub dt: f64,
    filter: Option<Vec<f64>>,
}

/// Work products of one step that diagnostics and the Newton solver reuse.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub state: DistributionState,
    /// Force used in the velocity shift, on the spatial grid.
    pub force: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: PhaseSpaceGrid, interaction: Interaction, dt: f64, filter: bool) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            filter: filter.then(|| filter_multipliers(grid.n_v)),
            grid,
            interaction,
            dt,
        })
    }

    pub fn filter(&self) -> Option<&[f64]> {
        self.filter.as_deref()
    }

    /// Advances by one step of length `self.dt`.
    pub fn step(&self, state: &DistributionState) -> Result<StepOutput> {
        let g = &self.grid;
        if state.grid() != g {
            return Err(Error::invalid("state grid differs from the stepper grid"));
        }
        let mut mixed = state.mixed().to_vec();
        stream_mixed(g, &mut mixed, 0.5 * self.dt);
        let rho = density_from_mixed(g, &mixed);
        let (force, _) = force_from_density(g.n_x, &rho, &self.interaction);
        let f_max = force.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
        let time = state.time();
        if !f_max.is_finite() {
            return Err(Error::NumericalFailure {
                time,
                reason: "non-finite force".into(),
            });
        }
        if self.dt > max_stable_dt(f_max) {
            return Err(Error::NumericalFailure {
                time,
                reason: format!(
                    "dt = {} exceeds the stability bound {:.3e} for max|F| = {f_max:.3e}",
                    self.dt,
                    max_stable_dt(f_max)
                ),
            });
        }
        let mut values = mixed_to_values(g, &mixed);
        let shifts: Vec<f64> = force.iter().map(|f| f * self.dt).collect();
        shift_rows(g, &mut values, &shifts, self.filter());
        let mut mixed = values_to_mixed(g, &values);
        stream_mixed(g, &mut mixed, 0.5 * self.dt);
        if mixed.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NumericalFailure {
                time,
                reason: "non-finite distribution".into(),
            });
        }
        Ok(StepOutput {
            state: DistributionState::from_mixed(*g, time + self.dt, mixed)?,
            force,
        })
    }
}

/// One Strang step of the nonlinear equation.
pub fn step(state: &DistributionState, interaction: &Interaction, dt: f64) -> Result<DistributionState> {
    Stepper::new(*state.grid(), interaction.clone(), dt, false)?
        .step(state)
        .map(|o| o.state)
}

/// Kick f(x, v) ↦ f(x, v − 2πℓa sin(2πℓx)) from the external potential a cos(2πℓx).
pub fn apply_kick(state: &DistributionState, mode: i64, amplitude: f64) -> Result<DistributionState> {
    let g = *state.grid();
    let shifts: Vec<f64> = (0..g.n_x)
        .map(|i| 2.0 * PI * mode as f64 * amplitude * (2.0 * PI * mode as f64 * g.x(i)).sin())
        .collect();
    let mut values = state.values().to_vec();
    shift_rows(&g, &mut values, &shifts, None);
    DistributionState::from_values(g, state.time(), values)
}
