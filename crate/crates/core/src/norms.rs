//! Analytic norms of phase-space data: the hybrid gliding norm 𝒵, the spatial algebra
//! norm ℱ, and the sup/weighted-integral norm used to size initial perturbations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::DistributionState;
use crate::spectral::{self, compensated_sum};

/// Velocity integrability exponent of the hybrid norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lp {
    One,
    Two,
    Infinity,
}

impl Lp {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Lp::One),
            "2" => Ok(Lp::Two),
            "inf" | "infinity" | "∞" => Ok(Lp::Infinity),
            other => Err(Error::invalid(format!("p must be 1, 2 or inf, got '{other}'"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Lp::One => "1",
            Lp::Two => "2",
            Lp::Infinity => "inf",
        }
    }

    /// ‖u‖_{L^p} on a uniform grid of spacing `dv`.
    pub fn norm(self, u: &[Complex64], dv: f64) -> f64 {
        match self {
            Lp::One => dv * compensated_sum(u.iter().map(|z| z.norm())),
            Lp::Two => (dv * compensated_sum(u.iter().map(|z| z.norm_sqr()))).sqrt(),
            Lp::Infinity => u.iter().fold(0.0, |m, z| m.max(z.norm())),
        }
    }
}

/// Regularity indices (λ, μ, γ, p, τ) of the hybrid norm, plus β and the index shift b.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormIndices {
    pub lambda: f64,
    pub mu: f64,
    pub gamma: f64,
    pub p: Lp,
    pub tau: f64,
    pub beta: f64,
    pub b: f64,
}

impl Default for NormIndices {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            mu: 0.0,
            gamma: 0.0,
            p: Lp::One,
            tau: 0.0,
            beta: 0.0,
            b: 0.0,
        }
    }
}

impl NormIndices {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("b", self.b),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !self.tau.is_finite() {
            return Err(Error::invalid("tau must be finite"));
        }
        Ok(())
    }
}

/// Value of the hybrid norm with its truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZNorm {
    pub value: f64,
    pub converged: bool,
    /// Contribution of the last evaluated derivative shell.
    pub tail: f64,
    pub shells: usize,
}

pub const DEFAULT_N_MAX: usize = 40;

/// Σ_k e^{2πμ|k|}(1+|k|)^γ Σ_{n ≤ n_max} λⁿ/n! ‖(∂_v + 2iπτk)ⁿ f̂(k, ·)‖_{L^p}.
///
/// Derivatives act spectrally in v. Shells are summed in increasing `n`; evaluation stops
/// early once every remaining term is provably decreasing and the current shell is below
/// roundoff of the running total. `converged` is false when the last shell still exceeds
/// `tail_tol · value`.
pub fn hybrid_norm_z(
    state: &DistributionState,
    idx: &NormIndices,
    n_max: usize,
    tail_tol: f64,
) -> Result<ZNorm> {
    idx.validate()?;
    let g = *state.grid();
    let (n_x, n_v) = (g.n_x, g.n_v);
    let dv = g.dv();
    let mixed = state.mixed();
    let fwd = spectral::forward_plan(n_v);
    let inv = spectral::inverse_plan(n_v);
    let eta_max = g.eta_max();

    // Per-mode shell contributions, combined in a fixed order afterwards.
    let per_mode: Vec<Vec<f64>> = (0..n_x)
        .into_par_iter()
        .map(|ki| {
            let k = spectral::wavenumber(ki, n_x);
            let weight = (2.0 * PI * idx.mu * k.abs() as f64).exp() * (1.0 + k.abs() as f64).powf(idx.gamma);
            let mut coeffs: Vec<Complex64> = mixed.chunks(n_x).map(|row| row[ki]).collect();
            if coeffs.iter().all(|z| z.norm() == 0.0) {
                return vec![0.0];
            }
            fwd.process(&mut coeffs);
            let inv_n = 1.0 / n_v as f64;
            coeffs.iter_mut().for_each(|z| *z *= inv_n);
            let symbols: Vec<Complex64> = (0..n_v)
                .map(|m| Complex64::new(0.0, 2.0 * PI * idx.lambda * (g.eta(m) + idx.tau * k as f64)))
                .collect();
            let bound = 2.0 * PI * idx.lambda * (eta_max + (idx.tau * k as f64).abs());
            let mut shells = Vec::with_capacity(n_max + 1);
            let mut buf = coeffs.clone();
            let mut total = 0.0;
            for n in 0..=n_max {
                if n > 0 {
                    let inv_nf = 1.0 / n as f64;
                    for (c, s) in coeffs.iter_mut().zip(&symbols) {
                        *c *= s * inv_nf;
                    }
                }
                buf.copy_from_slice(&coeffs);
                inv.process(&mut buf);
                let shell = weight * idx.p.norm(&buf, dv);
                total += shell;
                shells.push(shell);
                if n > 0 && bound < (n + 1) as f64 && shell <= f64::EPSILON * 1e-2 * total {
                    break;
                }
            }
            shells
        })
        .collect();

    let depth = per_mode.iter().map(Vec::len).max().unwrap_or(1);
    let mut shell_totals = vec![0.0; depth];
    for shells in &per_mode {
        for (n, s) in shells.iter().enumerate() {
            shell_totals[n] += s;
        }
    }
    let value = compensated_sum(shell_totals.iter().copied());
    let tail = *shell_totals.last().unwrap_or(&0.0);
    let finished_early = depth < n_max + 1;
    Ok(ZNorm {
        value,
        converged: value.is_finite() && (finished_early || tail <= tail_tol * value),
        tail,
        shells: depth,
    })
}

/// Σ_k |ĝ(k)| e^{2πw|k|}(1+|k|)^γ over coefficients in FFT order; `homogeneous` drops k = 0.
pub fn algebra_norm_f(coefficients: &[Complex64], width: f64, gamma: f64, homogeneous: bool) -> f64 {
    let n = coefficients.len();
    compensated_sum(coefficients.iter().enumerate().filter_map(|(i, c)| {
        let k = spectral::wavenumber(i, n).abs() as f64;
        if homogeneous && k == 0.0 {
            None
        } else {
            Some(c.norm() * (2.0 * PI * width * k).exp() * (1.0 + k).powf(gamma))
        }
    }))
}

/// Normalised Fourier coefficients ĝ(k) = (1/N) Σ g(x_i) e^{−2iπkx_i} in FFT order.
pub fn spatial_coefficients(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    spectral::forward_plan(n).process(&mut buf);
    buf.iter_mut().for_each(|z| *z /= n as f64);
    buf
}

/// Exact coefficients of the product of two trigonometric polynomials given in FFT order.
///
/// The output has length `a.len() + b.len()` so no frequency wraps around.
pub fn trig_product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len() + b.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate() {
        let k = spectral::wavenumber(i, a.len());
        for (j, y) in b.iter().enumerate() {
            let l = spectral::wavenumber(j, b.len());
            out[(k + l).rem_euclid(n as i64) as usize] += x * y;
        }
    }
    out
}

/// Outcome of testing ‖fg‖ ≤ ‖f‖·‖g‖ on random pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgebraCheck {
    pub pairs: usize,
    /// Pairs with ‖fg‖ > (1 + 1e-12)‖f‖‖g‖.
    pub violations: usize,
    /// Largest ‖fg‖ / (‖f‖‖g‖).
    pub worst_ratio: f64,
}

/// Draws `pairs` random trigonometric polynomials of degree ≤ `degree` (coefficients uniform in
/// the unit square, scaled by e^{−2π w|k|}) and tests the algebra inequality of the
/// `(width, gamma)` norm.
pub fn algebra_check(seed: u64, pairs: usize, degree: usize, width: f64, gamma: f64) -> AlgebraCheck {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = (2 * degree + 2).next_power_of_two();
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let k = spectral::wavenumber(i, n).unsigned_abs() as usize;
                if k > degree {
                    Complex64::new(0.0, 0.0)
                } else {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    z * (-2.0 * PI * width * k as f64).exp()
                }
            })
            .collect()
    };
    let mut check = AlgebraCheck { pairs, violations: 0, worst_ratio: 0.0 };
    for _ in 0..pairs {
        let (f, g) = (draw(&mut rng), draw(&mut rng));
        let lhs = algebra_norm_f(&trig_product(&f, &g), width, gamma, false);
        let rhs = algebra_norm_f(&f, width, gamma, false) * algebra_norm_f(&g, width, gamma, false);
        let ratio = lhs / rhs;
        check.worst_ratio = check.worst_ratio.max(ratio);
        if ratio > 1.0 + 1e-12 {
            check.violations += 1;
        }
    }
    check
}

/// sup-plus-integral norm with its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedNorm {
    pub value: f64,
    pub sup_term: f64,
    pub integral_term: f64,
    /// (k, m) where the supremum is attained.
    pub argmax: (i64, i64),
    /// True when the supremum sits on the outermost η frequencies.
    pub truncation_dominated: bool,
}

/// sup_{k,η} |f̃(k,η)| e^{2πλ|η|} e^{2πμ|k|} + ∬ |f| e^{2πβ|v|} dv dx on the grid.
pub fn norm_lambda_mu_beta(
    state: &DistributionState,
    lambda: f64,
    mu: f64,
    beta: f64,
) -> Result<WeightedNorm> {
    for (name, v) in [("lambda", lambda), ("mu", mu), ("beta", beta)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
        }
    }
    let g = *state.grid();
    if 2.0 * PI * beta * g.v_max > 300.0 * std::f64::consts::LN_10 {
        return Err(Error::invalid(format!(
            "beta = {beta} makes the velocity weight exceed 1e300 at |v| = {}",
            g.v_max
        )));
    }
    let (n_x, n_v) = (g.n_x, g.n_v);
    let spec = state.spectral();
    let mut sup = 0.0_f64;
    let mut argmax = (0, 0);
    for ki in 0..n_x {
        let k = spectral::wavenumber(ki, n_x);
        let wk = (2.0 * PI * mu * k.abs() as f64).exp();
        for mi in 0..n_v {
            let m = spectral::wavenumber(mi, n_v);
            let val = spec[ki * n_v + mi].norm() * wk * (2.0 * PI * lambda * g.eta(mi).abs()).exp();
            if val > sup {
                sup = val;
                argmax = (k, m);
            }
        }
    }
    let values = state.values();
    let integral = g.dx()
        * g.dv()
        * compensated_sum(values.chunks(n_v).flat_map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, f)| f.abs() * (2.0 * PI * beta * g.v(j).abs()).exp())
        }));
    let edge = (n_v / 2) as i64;
    Ok(WeightedNorm {
        value: sup + integral,
        sup_term: sup,
        integral_term: integral,
        argmax,
        truncation_dominated: sup > 0.0 && argmax.1.abs() >= edge - 1,
    })
}
