//! Phase-space distributions with lazily synchronised physical and spectral views.

use std::sync::OnceLock;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::PhaseSpaceGrid;
use crate::error::{Error, Result};
use crate::spectral::{self, compensated_sum};

/// f(x, v) sampled on a [`PhaseSpaceGrid`].
///
/// Three views are kept coherent through write-once caches:
/// physical values `f(x_i, v_j)` stored `[i][j]`, the mixed transform
/// `f̂(k, v_j)` stored `[j][k]`, and the full transform `f̃(k, η_m)` stored `[k][m]`.
/// Any constructor fills one view and the others are derived on first use.
#[derive(Clone, Debug)]
pub struct DistributionState {
    grid: PhaseSpaceGrid,
    time: f64,
    values: OnceLock<Vec<f64>>,
    mixed: OnceLock<Vec<Complex64>>,
    spectral: OnceLock<Vec<Complex64>>,
}

impl DistributionState {
    pub fn from_values(grid: PhaseSpaceGrid, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} grid values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            time,
            values: OnceLock::from(values),
            mixed: OnceLock::new(),
            spectral: OnceLock::new(),
        })
    }

    pub fn from_mixed(grid: PhaseSpaceGrid, time: f64, mixed: Vec<Complex64>) -> Result<Self> {
        if mixed.len() != grid.len() {
            return Err(Error::invalid(format!(
                "expected {} mixed coefficients, got {}",
                grid.len(),
                mixed.len()
            )));
        }
        Ok(Self {
            grid,
            time,
            values: OnceLock::new(),
            mixed: OnceLock::from(mixed),
            spectral: OnceLock::new(),
        })
    }

    pub fn from_fn(grid: PhaseSpaceGrid, time: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n_x {
            let x = grid.x(i);
            values.extend((0..grid.n_v).map(|j| f(x, grid.v(j))));
        }
        Self {
            grid,
            time,
            values: OnceLock::from(values),
            mixed: OnceLock::new(),
            spectral: OnceLock::new(),
        }
    }

    pub fn zeros(grid: PhaseSpaceGrid, time: f64) -> Self {
        Self {
            grid,
            time,
            values: OnceLock::from(vec![0.0; grid.len()]),
            mixed: OnceLock::from(vec![Complex64::new(0.0, 0.0); grid.len()]),
            spectral: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Physical values, `[i_x][j_v]`.
    pub fn values(&self) -> &[f64] {
        self.values.get_or_init(|| {
            mixed_to_values(&self.grid, self.mixed.get().expect("state has no view"))
        })
    }

    /// f̂(k, v_j), `[j_v][k]` with k in FFT order.
    pub fn mixed(&self) -> &[Complex64] {
        self.mixed.get_or_init(|| {
            values_to_mixed(&self.grid, self.values.get().expect("state has no view"))
        })
    }

    /// f̃(k, η_m), `[k][m]` with both indices in FFT order.
    pub fn spectral(&self) -> &[Complex64] {
        self.spectral
            .get_or_init(|| mixed_to_spectral(&self.grid, self.mixed()))
    }

    /// f̃(k, η_m) for a signed wavenumber and signed velocity frequency index.
    pub fn spectral_at(&self, k: i64, m: i64) -> Option<Complex64> {
        let ki = spectral::slot(k, self.grid.n_x)?;
        let mi = spectral::slot(m, self.grid.n_v)?;
        Some(self.spectral()[ki * self.grid.n_v + mi])
    }

    /// f̂(k, ·) as a contiguous vector over the velocity grid.
    pub fn mixed_row(&self, k: i64) -> Option<Vec<Complex64>> {
        let ki = spectral::slot(k, self.grid.n_x)?;
        let n_x = self.grid.n_x;
        Some(self.mixed().chunks(n_x).map(|row| row[ki]).collect())
    }

    /// ρ̂(k) = ∫ f̂(k, v) dv for every k in FFT order.
    pub fn density_modes(&self) -> Vec<Complex64> {
        let n_x = self.grid.n_x;
        let dv = self.grid.dv();
        let mixed = self.mixed();
        (0..n_x)
            .map(|k| {
                let re = compensated_sum(mixed.chunks(n_x).map(|row| row[k].re));
                let im = compensated_sum(mixed.chunks(n_x).map(|row| row[k].im));
                Complex64::new(re, im) * dv
            })
            .collect()
    }

    pub fn density_mode(&self, k: i64) -> Complex64 {
        match spectral::slot(k, self.grid.n_x) {
            Some(ki) => {
                let n_x = self.grid.n_x;
                let mixed = self.mixed();
                let re = compensated_sum(mixed.chunks(n_x).map(|row| row[ki].re));
                let im = compensated_sum(mixed.chunks(n_x).map(|row| row[ki].im));
                Complex64::new(re, im) * self.grid.dv()
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Spatial average ⟨f⟩(v_j) = f̂(0, v_j).
    pub fn average_profile(&self) -> Vec<f64> {
        self.mixed().chunks(self.grid.n_x).map(|row| row[0].re).collect()
    }

    fn velocity_moment(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let avg = self.average_profile();
        g.dv() * compensated_sum(avg.iter().enumerate().map(|(j, f)| weight(g.v(j)) * f))
    }

    /// ∬ f dx dv.
    pub fn mass(&self) -> f64 {
        self.velocity_moment(|_| 1.0)
    }

    /// ∬ v f dx dv.
    pub fn momentum(&self) -> f64 {
        self.velocity_moment(|v| v)
    }

    /// ½ ∬ v² f dx dv.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.velocity_moment(|v| v * v)
    }

    /// ∬ f² dx dv.
    pub fn l2_squared(&self) -> f64 {
        let g = &self.grid;
        g.dv() * g.dx() * compensated_sum(self.values().iter().map(|f| f * f))
    }

    /// ∬ |f| dx dv.
    pub fn l1_norm(&self) -> f64 {
        let g = &self.grid;
        g.dv() * g.dx() * compensated_sum(self.values().iter().map(|f| f.abs()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        match self.mixed.get() {
            Some(m) => m.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            None => self.values().iter().all(|f| f.is_finite()),
        }
    }

    /// `a·self + b·other`, evaluated in whichever view both operands already hold.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::invalid("states live on different grids"));
        }
        if let (Some(x), Some(y)) = (self.mixed.get(), other.mixed.get()) {
            let out = x.iter().zip(y).map(|(p, q)| p * a + q * b).collect();
            return Self::from_mixed(self.grid, self.time, out);
        }
        let out = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(p, q)| a * p + b * q)
            .collect();
        Self::from_values(self.grid, self.time, out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn scaled(&self, a: f64) -> Self {
        match self.mixed.get() {
            Some(m) => Self::from_mixed(self.grid, self.time, m.iter().map(|z| z * a).collect())
                .expect("same grid"),
            None => Self::from_values(
                self.grid,
                self.time,
                self.values().iter().map(|f| f * a).collect(),
            )
            .expect("same grid"),
        }
    }

    /// ∂_v f computed spectrally in v (the Nyquist frequency is dropped).
    pub fn velocity_derivative(&self) -> Self {
        let g = self.grid;
        let mut out = self.values().to_vec();
        velocity_derivative_rows(&g, &mut out);
        Self::from_values(g, self.time, out).expect("same grid")
    }
}

/// Replaces each `[i][j]` row by its spectral v-derivative.
pub(crate) fn velocity_derivative_rows(grid: &PhaseSpaceGrid, values: &mut [f64]) {
    let n_v = grid.n_v;
    let fwd = spectral::forward_plan(n_v);
    let inv = spectral::inverse_plan(n_v);
    let mut buf: Vec<Complex64> = values.iter().map(|&f| Complex64::new(f, 0.0)).collect();
    spectral::process_rows(&fwd, &mut buf);
    let scale = 1.0 / n_v as f64;
    spectral::for_each_row(&mut buf, n_v, |_, row| {
        for (m, z) in row.iter_mut().enumerate() {
            *z = if m == n_v / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                *z * Complex64::new(0.0, 2.0 * PI * grid.eta(m) * scale)
            };
        }
    });
    spectral::process_rows(&inv, &mut buf);
    for (f, z) in values.iter_mut().zip(buf) {
        *f = z.re;
    }
}

pub(crate) fn values_to_mixed(grid: &PhaseSpaceGrid, values: &[f64]) -> Vec<Complex64> {
    let (n_x, n_v) = (grid.n_x, grid.n_v);
    let cplx: Vec<Complex64> = values.iter().map(|&f| Complex64::new(f, 0.0)).collect();
    let mut t = spectral::transpose(&cplx, n_x, n_v);
    spectral::process_rows(&spectral::forward_plan(n_x), &mut t);
    let scale = 1.0 / n_x as f64;
    t.iter_mut().for_each(|z| *z *= scale);
    t
}

pub(crate) fn mixed_to_values(grid: &PhaseSpaceGrid, mixed: &[Complex64]) -> Vec<f64> {
    let (n_x, n_v) = (grid.n_x, grid.n_v);
    let mut buf = mixed.to_vec();
    spectral::process_rows(&spectral::inverse_plan(n_x), &mut buf);
    let t = spectral::transpose(&buf, n_v, n_x);
    t.into_iter().map(|z| z.re).collect()
}

pub(crate) fn mixed_to_spectral(grid: &PhaseSpaceGrid, mixed: &[Complex64]) -> Vec<Complex64> {
    let (n_x, n_v) = (grid.n_x, grid.n_v);
    let mut t = spectral::transpose(mixed, n_v, n_x);
    spectral::process_rows(&spectral::forward_plan(n_v), &mut t);
    let dv = grid.dv();
    spectral::for_each_row(&mut t, n_v, |_, row| {
        for (m, z) in row.iter_mut().enumerate() {
            let parity = if spectral::wavenumber(m, n_v) % 2 == 0 { 1.0 } else { -1.0 };
            *z *= dv * parity;
        }
    });
    t
}

/// Inverse of [`mixed_to_spectral`].
#[cfg(test)]
pub(crate) fn spectral_to_mixed(grid: &PhaseSpaceGrid, spec: &[Complex64]) -> Vec<Complex64> {
    let (n_x, n_v) = (grid.n_x, grid.n_v);
    let mut buf = spec.to_vec();
    let dv = grid.dv();
    spectral::for_each_row(&mut buf, n_v, |_, row| {
        for (m, z) in row.iter_mut().enumerate() {
            let parity = if spectral::wavenumber(m, n_v) % 2 == 0 { 1.0 } else { -1.0 };
            *z *= parity / (dv * n_v as f64);
        }
    });
    spectral::process_rows(&spectral::inverse_plan(n_v), &mut buf);
    spectral::transpose(&buf, n_x, n_v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(16, 64, 6.0, 0.01).unwrap()
    }

    fn sample() -> DistributionState {
        DistributionState::from_fn(grid(), 0.0, |x, v| {
            (-(v - 0.3) * (v - 0.3) / 2.0).exp() * (1.0 + 0.2 * (2.0 * PI * x).cos())
                + 0.1 * (-(v * v)).exp() * (4.0 * PI * x).sin()
        })
    }

    #[test]
    fn view_round_trip() {
        let s = sample();
        let back = DistributionState::from_mixed(grid(), 0.0, s.mixed().to_vec()).unwrap();
        for (a, b) in s.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        let mixed = spectral_to_mixed(&grid(), s.spectral());
        for (a, b) in mixed.iter().zip(s.mixed()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn hermitian_in_k() {
        let s = sample();
        let n_x = 16;
        for row in s.mixed().chunks(n_x) {
            for k in 1..n_x / 2 {
                assert!((row[k] - row[n_x - k].conj()).norm() < 1e-16);
            }
        }
    }

    #[test]
    fn spectral_matches_direct_sum() {
        let s = sample();
        let g = grid();
        for (k, m) in [(0_i64, 0_i64), (1, 3), (-2, -5), (1, 31)] {
            let mut direct = Complex64::new(0.0, 0.0);
            for i in 0..g.n_x {
                for j in 0..g.n_v {
                    let phase = -2.0 * PI * (k as f64 * g.x(i) + m as f64 / 12.0 * g.v(j));
                    direct += Complex64::from_polar(s.values()[i * g.n_v + j], phase);
                }
            }
            direct *= g.dx() * g.dv();
            assert!((direct - s.spectral_at(k, m).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn moments_of_gaussian() {
        let g = PhaseSpaceGrid::new(8, 256, 10.0, 0.01).unwrap();
        let s = DistributionState::from_fn(g, 0.0, |_, v| (-0.5 * v * v).exp() / (2.0 * PI).sqrt());
        assert!((s.mass() - 1.0).abs() < 1e-13);
        assert!(s.momentum().abs() < 1e-14);
        assert!((s.kinetic_energy() - 0.5).abs() < 1e-13);
        assert!(s.l2_squared() <= s.sup_norm() * s.mass() * (1.0 + 1e-14));
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = PhaseSpaceGrid::new(8, 128, 8.0, 0.01).unwrap();
        let s = DistributionState::from_fn(g, 0.0, |_, v| (-v * v).exp());
        let d = s.velocity_derivative();
        for j in 0..g.n_v {
            let v = g.v(j);
            assert!((d.values()[j] + 2.0 * v * (-v * v).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_combination_in_either_view() {
        let a = sample();
        let b = sample().scaled(2.0);
        let c = a.combine(3.0, &b, -1.5).unwrap();
        assert!(c.values().iter().all(|f| f.abs() < 1e-14));
        let am = DistributionState::from_mixed(grid(), 0.0, a.mixed().to_vec()).unwrap();
        let d = am.sub(&DistributionState::from_mixed(grid(), 0.0, a.mixed().to_vec()).unwrap()).unwrap();
        assert!(d.mixed().iter().all(|z| z.norm() == 0.0));
    }
}
