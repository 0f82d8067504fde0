//! Equilibria, interactions, phase-space grids, initial data and the self-consistent force.

mod grid;
mod interaction;
mod profile;
mod state;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use grid::PhaseSpaceGrid;
pub use interaction::{Interaction, InteractionKind, InteractionSign};
pub use profile::{ProfileKind, VelocityProfile};
pub use state::DistributionState;
pub(crate) use state::{mixed_to_values, values_to_mixed, velocity_derivative_rows};

use crate::error::{Error, Result};
use crate::spectral;

/// A cosine density packet `a cos(2πℓx)` multiplying the equilibrium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    pub mode: i64,
    pub amplitude: f64,
}

impl Perturbation {
    pub fn new(mode: i64, amplitude: f64) -> Self {
        Self { mode, amplitude }
    }
}

/// Equilibrium sampled on the velocity grid, rescaled so its discrete mass is exactly one.
pub fn discrete_profile(profile: &VelocityProfile, grid: &PhaseSpaceGrid) -> Result<Vec<f64>> {
    let f0: Vec<f64> = (0..grid.n_v).map(|j| profile.density(grid.v(j))).collect();
    let mass = grid.dv() * spectral::compensated_sum(f0.iter().copied());
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::invalid(
            "profile has no mass on the velocity grid; widen v_max",
        ));
    }
    Ok(f0.into_iter().map(|f| f / mass).collect())
}

/// f_i(x, v) = f⁰(v)·(1 + Σ a_ℓ cos(2πℓx)) on the grid.
pub fn sample_initial(
    profile: &VelocityProfile,
    perturbations: &[Perturbation],
    grid: &PhaseSpaceGrid,
) -> Result<DistributionState> {
    let f0 = discrete_profile(profile, grid)?;
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.n_x {
        let x = grid.x(i);
        let factor = 1.0
            + perturbations
                .iter()
                .map(|p| p.amplitude * (2.0 * PI * p.mode as f64 * x).cos())
                .sum::<f64>();
        for (j, &f) in f0.iter().enumerate() {
            let value = f * factor;
            if value < 0.0 {
                return Err(Error::Negativity {
                    x,
                    v: grid.v(j),
                    value,
                });
            }
            values.push(value);
        }
    }
    DistributionState::from_values(*grid, 0.0, values)
}

/// Self-consistent force together with the largest imaginary residue seen before discarding it.
pub fn force_field_with_residue(
    state: &DistributionState,
    interaction: &Interaction,
) -> Result<(Vec<f64>, f64)> {
    let grid = state.grid();
    let rho = state.density_modes();
    if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NumericalFailure {
            time: state.time(),
            reason: "non-finite density".into(),
        });
    }
    Ok(force_from_density(grid.n_x, &rho, interaction))
}

/// F(x_i) from density modes ρ̂ (FFT order): F̂(k) = −2iπk Ŵ(k) ρ̂(k), Nyquist dropped.
pub fn force_from_density(
    n_x: usize,
    rho: &[Complex64],
    interaction: &Interaction,
) -> (Vec<f64>, f64) {
    let mut buf: Vec<Complex64> = (0..n_x)
        .map(|idx| {
            if idx == n_x / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let k = spectral::wavenumber(idx, n_x);
            Complex64::new(0.0, -2.0 * PI * k as f64 * interaction.coeff(k)) * rho[idx]
        })
        .collect();
    spectral::inverse_plan(n_x).process(&mut buf);
    let residue = buf.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    (buf.into_iter().map(|z| z.re).collect(), residue)
}

/// F[f](x_i) = −∂_x W ∗ ρ on the spatial grid.
pub fn force_field(state: &DistributionState, interaction: &Interaction) -> Result<Vec<f64>> {
    force_field_with_residue(state, interaction).map(|(f, _)| f)
}
