use crate::error::{Error, Result};

/// Discretisation of 𝕋¹ × [−V, V) with `n_x` spatial nodes and `n_v` velocity nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub n_x: usize,
    pub n_v: usize,
    pub v_max: f64,
    pub dt: f64,
}

impl PhaseSpaceGrid {
    pub fn new(n_x: usize, n_v: usize, v_max: f64, dt: f64) -> Result<Self> {
        for (name, n) in [("n_x", n_x), ("n_v", n_v)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "{name} must be a power of two no smaller than 8, got {n}"
                )));
            }
        }
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(Error::invalid(format!("v_max must be positive, got {v_max}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            n_x,
            n_v,
            v_max,
            dt,
        })
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_v
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.n_v as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n_x as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.v_max + j as f64 * self.dv()
    }

    pub fn velocities(&self) -> Vec<f64> {
        (0..self.n_v).map(|j| self.v(j)).collect()
    }

    /// Velocity frequency of FFT slot `m`: η = m / (2V).
    pub fn eta(&self, m: usize) -> f64 {
        crate::spectral::wavenumber(m, self.n_v) as f64 / (2.0 * self.v_max)
    }

    pub fn eta_max(&self) -> f64 {
        self.n_v as f64 / (4.0 * self.v_max)
    }

    /// Largest resolved spatial wavenumber.
    pub fn k_max(&self) -> i64 {
        self.n_x as i64 / 2 - 1
    }

    /// Free-streaming recurrence time 1/(k·Δv) of the first mode.
    pub fn recurrence_time(&self) -> f64 {
        1.0 / self.dv()
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let g = PhaseSpaceGrid::new(32, 512, 6.0, 1.0 / 64.0).unwrap();
        assert_eq!(g.dv(), 12.0 / 512.0);
        assert_eq!(g.v(0), -6.0);
        assert!((g.recurrence_time() - 42.666_666_666_666_664).abs() < 1e-12);
        assert_eq!(g.eta(1), 1.0 / 12.0);
        assert_eq!(g.eta(511), -1.0 / 12.0);
        assert_eq!(g.k_max(), 15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(PhaseSpaceGrid::new(4, 64, 1.0, 0.1).is_err());
        assert!(PhaseSpaceGrid::new(24, 64, 1.0, 0.1).is_err());
        assert!(PhaseSpaceGrid::new(16, 64, -1.0, 0.1).is_err());
        assert!(PhaseSpaceGrid::new(16, 64, 1.0, -0.1).is_err());
    }
}
