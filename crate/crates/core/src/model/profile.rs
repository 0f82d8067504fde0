//! Homogeneous velocity profiles f⁰(v) and their Fourier transforms.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, QuadratureOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileKind {
    Maxwellian {
        temperature: f64,
    },
    /// Two Maxwellian beams of half mass each at `±beam_speed`.
    TwoStream {
        temperature: f64,
        beam_speed: f64,
    },
    /// Nodal values on a strictly increasing velocity table, renormalised to unit mass.
    Tabulated {
        velocities: Vec<f64>,
        values: Vec<f64>,
    },
}

/// Spatially homogeneous equilibrium f⁰(v) with unit mass.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityProfile {
    kind: ProfileKind,
    drift: f64,
}

fn gaussian(v: f64, temperature: f64) -> f64 {
    (-0.5 * v * v / temperature).exp() / (2.0 * PI * temperature).sqrt()
}

fn check_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be positive, got {t}")))
    }
}

impl VelocityProfile {
    pub fn maxwellian(temperature: f64) -> Result<Self> {
        check_temperature(temperature)?;
        Ok(Self {
            kind: ProfileKind::Maxwellian { temperature },
            drift: 0.0,
        })
    }

    pub fn two_stream(temperature: f64, beam_speed: f64) -> Result<Self> {
        check_temperature(temperature)?;
        if !beam_speed.is_finite() {
            return Err(Error::invalid("beam speed must be finite"));
        }
        Ok(Self {
            kind: ProfileKind::TwoStream {
                temperature,
                beam_speed,
            },
            drift: 0.0,
        })
    }

    /// Builds a tabulated profile; values are renormalised to unit trapezoidal mass.
    pub fn tabulated(velocities: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if velocities.len() != values.len() || velocities.len() < 3 {
            return Err(Error::invalid(
                "tabulated profile needs at least three (v, f) pairs",
            ));
        }
        if velocities.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("tabulated velocities must be strictly increasing"));
        }
        if let Some((i, f)) = values
            .iter()
            .enumerate()
            .find(|(_, f)| !(f.is_finite() && **f >= 0.0))
        {
            return Err(Error::invalid(format!(
                "tabulated profile value {f} at v = {} is not a nonnegative number",
                velocities[i]
            )));
        }
        let mass: f64 = velocities
            .windows(2)
            .zip(values.windows(2))
            .map(|(v, f)| 0.5 * (v[1] - v[0]) * (f[0] + f[1]))
            .sum();
        if !(mass > 0.0) {
            return Err(Error::invalid("tabulated profile has zero mass"));
        }
        Ok(Self {
            kind: ProfileKind::Tabulated {
                velocities,
                values: values.into_iter().map(|f| f / mass).collect(),
            },
            drift: 0.0,
        })
    }

    /// Reads a two-column CSV (`v, f`) with a header row.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let (v, f) = crate::io::read_two_columns(path)?;
        Self::tabulated(v, f)
    }

    /// Shifts the profile in velocity: f⁰(v) ↦ f⁰(v − u).
    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Width of the strip in which f⁰ is analytic; infinite for Gaussian mixtures, 0 for tables.
    pub fn lambda0(&self) -> f64 {
        match self.kind {
            ProfileKind::Tabulated { .. } => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// Velocity variance about the drift; sets the scale of scan windows and grids.
    pub fn effective_temperature(&self) -> f64 {
        match &self.kind {
            ProfileKind::Maxwellian { temperature } => *temperature,
            ProfileKind::TwoStream {
                temperature,
                beam_speed,
            } => temperature + beam_speed * beam_speed,
            ProfileKind::Tabulated { velocities, values } => {
                let w = trapezoid_weights(velocities);
                let mean: f64 = (0..values.len()).map(|i| w[i] * values[i] * velocities[i]).sum();
                (0..values.len())
                    .map(|i| w[i] * values[i] * (velocities[i] - mean).powi(2))
                    .sum()
            }
        }
    }

    /// Thermal spread of the individual Gaussian components (table: its variance).
    pub fn component_temperature(&self) -> f64 {
        match &self.kind {
            ProfileKind::Maxwellian { temperature } | ProfileKind::TwoStream { temperature, .. } => {
                *temperature
            }
            ProfileKind::Tabulated { .. } => self.effective_temperature(),
        }
    }

    /// Default velocity cutoff V of the phase-space grid.
    pub fn default_velocity_cutoff(&self) -> f64 {
        let spread = 6.0 * self.component_temperature().sqrt();
        match &self.kind {
            ProfileKind::Maxwellian { .. } => self.drift.abs() + spread,
            ProfileKind::TwoStream { beam_speed, .. } => {
                self.drift.abs() + beam_speed.abs() + spread
            }
            ProfileKind::Tabulated { velocities, .. } => {
                velocities[0].abs().max(velocities[velocities.len() - 1].abs())
            }
        }
    }

    /// f⁰(v).
    pub fn density(&self, v: f64) -> f64 {
        let w = v - self.drift;
        match &self.kind {
            ProfileKind::Maxwellian { temperature } => gaussian(w, *temperature),
            ProfileKind::TwoStream {
                temperature,
                beam_speed,
            } => 0.5 * (gaussian(w - beam_speed, *temperature) + gaussian(w + beam_speed, *temperature)),
            ProfileKind::Tabulated { velocities, values } => interpolate(velocities, values, w),
        }
    }

    /// f̃⁰(η) = ∫ f⁰(v) e^{−2iπηv} dv.
    pub fn fourier(&self, eta: f64) -> Result<Complex64> {
        let shift = Complex64::from_polar(1.0, -2.0 * PI * eta * self.drift);
        let base = match &self.kind {
            ProfileKind::Maxwellian { temperature } => {
                Complex64::new((-2.0 * PI * PI * temperature * eta * eta).exp(), 0.0)
            }
            ProfileKind::TwoStream {
                temperature,
                beam_speed,
            } => Complex64::new(
                (-2.0 * PI * PI * temperature * eta * eta).exp()
                    * (2.0 * PI * beam_speed * eta).cos(),
                0.0,
            ),
            ProfileKind::Tabulated { velocities, values } => {
                let band = resolvable_band(velocities);
                if eta.abs() > band {
                    return Err(Error::UnresolvedTail {
                        eta: eta.abs(),
                        band,
                    });
                }
                let w = trapezoid_weights(velocities);
                (0..values.len())
                    .map(|i| Complex64::from_polar(w[i] * values[i], -2.0 * PI * eta * velocities[i]))
                    .sum()
            }
        };
        Ok(base * shift)
    }

    /// Upper bound on |f̃⁰(η)|, used to truncate semi-infinite integrals.
    pub fn fourier_envelope(&self, eta: f64) -> Result<f64> {
        match &self.kind {
            ProfileKind::Maxwellian { temperature } | ProfileKind::TwoStream { temperature, .. } => {
                Ok((-2.0 * PI * PI * temperature * eta * eta).exp())
            }
            ProfileKind::Tabulated { .. } => self.fourier(eta).map(|z| z.norm()),
        }
    }

    /// Largest |η| at which f̃⁰ can be evaluated.
    pub fn fourier_band(&self) -> f64 {
        match &self.kind {
            ProfileKind::Tabulated { velocities, .. } => resolvable_band(velocities),
            _ => f64::INFINITY,
        }
    }

    /// Marginal φ_k(z) of f⁰ along the direction of k; in one dimension f⁰(z·sign k).
    pub fn marginal(&self, k: i64, z: f64) -> Result<f64> {
        if k == 0 {
            return Err(Error::invalid("marginal undefined for k = 0"));
        }
        Ok(self.density(z * k.signum() as f64))
    }

    /// Mass of f⁰ outside `[-cut, cut]`.
    pub fn tail_mass(&self, cut: f64) -> f64 {
        let opts = QuadratureOptions {
            abs_tol: 1e-22,
            rel_tol: 1e-10,
            ..Default::default()
        };
        match &self.kind {
            ProfileKind::Tabulated { velocities, values } => {
                let w = trapezoid_weights(velocities);
                (0..values.len())
                    .filter(|&i| (velocities[i] + self.drift).abs() > cut)
                    .map(|i| w[i] * values[i])
                    .sum()
            }
            _ => {
                let reach = self.default_velocity_cutoff() * 4.0 + 40.0;
                if cut >= reach {
                    return 0.0;
                }
                let right = integrate_real(|v| self.density(v), cut, reach, opts).unwrap_or(f64::NAN);
                let left = integrate_real(|v| self.density(v), -reach, -cut, opts).unwrap_or(f64::NAN);
                right + left
            }
        }
    }
}

fn trapezoid_weights(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (v[i + 1] - v[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

fn resolvable_band(v: &[f64]) -> f64 {
    let h = v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    0.5 / h
}

fn interpolate(v: &[f64], f: &[f64], x: f64) -> f64 {
    if x < v[0] || x > v[v.len() - 1] {
        return 0.0;
    }
    let i = match v.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => return f[i],
        Err(i) => i,
    };
    let t = (x - v[i - 1]) / (v[i] - v[i - 1]);
    f[i - 1] + t * (f[i] - f[i - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_transform(p: &VelocityProfile, eta: f64, reach: f64) -> Complex64 {
        // Composite Simpson oracle of the defining integral.
        let n = 40_000;
        let h = 2.0 * reach / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let v = -reach + h * i as f64;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += Complex64::from_polar(w * p.density(v), -2.0 * PI * eta * v);
        }
        acc * h / 3.0
    }

    #[test]
    fn maxwellian_unit_mass_at_zero_frequency() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        assert_eq!(p.fourier(0.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn maxwellian_transform_matches_quadrature() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let v = p.fourier(0.5).unwrap();
        assert!((v.re - 7.191_883_355_826_368e-3).abs() < 1e-15);
        for eta in [0.0, 0.25, 0.5, 1.0, 1.7, 3.0] {
            let exact = p.fourier(eta).unwrap();
            let oracle = quad_transform(&p, eta, 12.0);
            let scale = exact.norm().max(1e-300);
            assert!(
                (exact - oracle).norm() <= 1e-10 * scale + 1e-15,
                "eta={eta}: {exact} vs {oracle}"
            );
        }
    }

    #[test]
    fn two_stream_transform_matches_quadrature() {
        let p = VelocityProfile::two_stream(1.0, 2.0).unwrap();
        for eta in [0.0, 0.1, 0.3, 0.55] {
            let expected = (-2.0 * PI * PI * eta * eta).exp() * (4.0 * PI * eta).cos();
            let got = p.fourier(eta).unwrap();
            assert!((got.re - expected).abs() < 1e-15);
            assert!((quad_transform(&p, eta, 14.0) - got).norm() < 1e-11);
        }
    }

    #[test]
    fn drift_only_changes_phase() {
        let p = VelocityProfile::maxwellian(0.7).unwrap();
        let q = p.clone().with_drift(0.9);
        for eta in [0.1, 0.4, 1.1] {
            let a = p.fourier(eta).unwrap().norm();
            let b = q.fourier(eta).unwrap().norm();
            assert!((a - b).abs() < 1e-16);
            assert!((quad_transform(&q, eta, 12.0) - q.fourier(eta).unwrap()).norm() < 1e-11);
        }
    }

    #[test]
    fn marginal_values() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        assert!((p.marginal(1, 0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        for z in [-1.3, 0.2, 2.5] {
            assert_eq!(p.marginal(-1, z).unwrap(), p.marginal(1, -z).unwrap());
            assert_eq!(p.marginal(-1, z).unwrap(), p.marginal(1, z).unwrap());
        }
        assert!(matches!(p.marginal(0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn two_stream_marginal_has_bump_at_beam() {
        let p = VelocityProfile::two_stream(0.05, 2.0).unwrap();
        let h = 1e-4;
        let d = |z: f64| (p.marginal(1, z + h).unwrap() - p.marginal(1, z - h).unwrap()) / (2.0 * h);
        // φ' changes sign from + to − across z = 2: local maximum.
        assert!(d(1.9) > 0.0 && d(2.1) < 0.0);
        // z φ'(z) > 0 on the inner flank.
        assert!(1.9 * d(1.9) > 0.0);
    }

    #[test]
    fn tabulated_profile_normalised_and_band_checked() {
        let v: Vec<f64> = (0..=200).map(|i| -8.0 + 0.08 * i as f64).collect();
        let f: Vec<f64> = v.iter().map(|&x| 3.0 * gaussian(x, 1.0)).collect();
        let p = VelocityProfile::tabulated(v, f).unwrap();
        assert!((p.fourier(0.0).unwrap().re - 1.0).abs() < 1e-12);
        let exact = (-2.0 * PI * PI * 0.3_f64.powi(2)).exp();
        assert!((p.fourier(0.3).unwrap().re - exact).abs() < 1e-10);
        assert!(matches!(p.fourier(7.0), Err(Error::UnresolvedTail { .. })));
        assert_eq!(p.lambda0(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(VelocityProfile::maxwellian(0.0).is_err());
        assert!(VelocityProfile::maxwellian(-1.0).is_err());
        assert!(VelocityProfile::tabulated(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(VelocityProfile::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn tail_mass_of_default_cutoff() {
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let tail = p.tail_mass(6.0);
        // erfc(6/√2) = 1.973e-9
        assert!((tail - 1.973_175_290_075_214e-9).abs() < 1e-17);
    }
}
