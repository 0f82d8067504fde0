//! Characteristics of the self-consistent flow and the finite-time scattering deviation.

use super::run::ForceHistory;
use crate::error::{Error, Result};

/// Integrates Ẋ = V, V̇ = F(s, X) from time `t` to time `tau` with classical RK4.
///
/// Steps are aligned with half the history spacing so the piecewise-linear time
/// interpolation of F is smooth inside each step. `X` is returned unwrapped.
pub fn characteristics(
    history: &ForceHistory,
    t: f64,
    tau: f64,
    points: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if !history.covers(t, tau) {
        return Err(Error::invalid(format!(
            "force history {:?} does not cover [{}, {}]",
            history.span(),
            t.min(tau),
            t.max(tau)
        )));
    }
    if t == tau {
        return Ok(points.to_vec());
    }
    let spacing = history.spacing();
    let base = if spacing.is_finite() { 0.5 * spacing } else { (tau - t).abs() / 64.0 };
    let n = ((tau - t).abs() / base).ceil().max(1.0) as usize;
    let h = (tau - t) / n as f64;
    points
        .iter()
        .map(|&(x, v)| {
            let (mut x, mut v) = (x, v);
            for i in 0..n {
                let s = t + h * i as f64;
                let f = |s: f64, x: f64| history.eval(s.clamp(t.min(tau), t.max(tau)), x.rem_euclid(1.0));
                let k1x = v;
                let k1v = f(s, x)?;
                let k2x = v + 0.5 * h * k1v;
                let k2v = f(s + 0.5 * h, x + 0.5 * h * k1x)?;
                let k3x = v + 0.5 * h * k2v;
                let k3v = f(s + 0.5 * h, x + 0.5 * h * k2x)?;
                let k4x = v + h * k3v;
                let k4v = f(s + h, x + h * k3x)?;
                x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
                v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
            Ok((x, v))
        })
        .collect()
}

/// Sup-norm of Ω_{t,τ} − Id over a sample set, with the component fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringDeviation {
    pub sup: f64,
    /// Position deviation (minimal image on the torus) per sample.
    pub dx: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Ω_{t,τ}(x, v) = (X, V)_{t,τ}(x + v(t − τ), v) compared with (x, v).
pub fn scattering_deviation(
    history: &ForceHistory,
    t: f64,
    tau: f64,
    samples: &[(f64, f64)],
) -> Result<ScatteringDeviation> {
    let starts: Vec<(f64, f64)> = samples.iter().map(|&(x, v)| (x + v * (t - tau), v)).collect();
    let ends = characteristics(history, t, tau, &starts)?;
    let mut dx = Vec::with_capacity(samples.len());
    let mut dv = Vec::with_capacity(samples.len());
    let mut sup = 0.0_f64;
    for (&(x, v), &(xe, ve)) in samples.iter().zip(&ends) {
        let d = xe - x;
        let d = d - d.round();
        dx.push(d);
        dv.push(ve - v);
        sup = sup.max(d.abs()).max((ve - v).abs());
    }
    Ok(ScatteringDeviation { sup, dx, dv })
}

/// Uniform sample grid of `n_x × n_v` points on `[0, 1) × [−v_max, v_max]`.
pub fn sample_grid(n_x: usize, n_v: usize, v_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n_x * n_v);
    for i in 0..n_x {
        for j in 0..n_v {
            let v = if n_v == 1 { 0.0 } else { -v_max + 2.0 * v_max * j as f64 / (n_v - 1) as f64 };
            out.push((i as f64 / n_x as f64, v));
        }
    }
    out
}
