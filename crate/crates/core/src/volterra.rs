//! Linear response of a single density mode: ρ̂(t) = S(t) + ∫₀ᵗ K⁰(t−τ) ρ̂(τ) dτ.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::{fmt_sci_digits, CsvTable};
use crate::model::{Interaction, VelocityProfile};

const BLOWUP: f64 = 1e12;

/// K⁰(t, k) = −4π² Ŵ(k) f̃⁰(kt) |k|² t.
pub fn kernel_k0(
    t: f64,
    k: i64,
    profile: &VelocityProfile,
    interaction: &Interaction,
) -> Result<Complex64> {
    let w = interaction.coeff(k);
    if w == 0.0 || t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kf = k as f64;
    Ok(profile.fourier(kf * t)? * (-4.0 * PI * PI * w * kf * kf * t))
}

/// Time samples of one density mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSeries {
    pub k: i64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub rho: Vec<Complex64>,
    pub source: Vec<Complex64>,
}

impl ModeSeries {
    pub fn amplitudes(&self) -> Vec<f64> {
        self.rho.iter().map(|z| z.norm()).collect()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(["t", "re_rho", "im_rho", "abs_rho"]);
        for (t, z) in self.times.iter().zip(&self.rho) {
            table.push_raw(
                [*t, z.re, z.im, z.norm()]
                    .iter()
                    .map(|&x| fmt_sci_digits(x, 11))
                    .collect(),
            );
        }
        table
    }

    /// Reads the `t, re_rho, im_rho, abs_rho` layout written by [`ModeSeries::to_csv`].
    pub fn read_csv(path: impl AsRef<Path>, k: i64) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut times = Vec::new();
        let mut rho = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let num = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse(format!("{}: bad column {i}", path.display())))
            };
            times.push(num(0)?);
            rho.push(Complex64::new(num(1)?, num(2)?));
        }
        let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Self {
            k,
            dt,
            source: vec![Complex64::new(0.0, 0.0); rho.len()],
            times,
            rho,
        })
    }
}

/// Solves the mode equation with the trapezoidal convolution rule.
///
/// Because K⁰(0) = 0 the scheme is explicit: each step costs one pass over the history.
pub fn solve_mode(
    k: i64,
    source: impl Fn(f64) -> Complex64,
    horizon: f64,
    dt: f64,
    profile: &VelocityProfile,
    interaction: &Interaction,
) -> Result<ModeSeries> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::invalid(format!("horizon must be nonnegative, got {horizon}")));
    }
    let steps = (horizon / dt).round();
    if steps > 1e7 {
        return Err(Error::invalid("horizon/dt exceeds 1e7 steps"));
    }
    let n = steps as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let kernel = times
        .iter()
        .map(|&t| kernel_k0(t, k, profile, interaction))
        .collect::<Result<Vec<_>>>()?;
    let src: Vec<Complex64> = times.iter().map(|&t| source(t)).collect();
    let mut rho = Vec::with_capacity(n + 1);
    rho.push(src[0]);
    for i in 1..=n {
        let mut acc = kernel[i] * rho[0] * 0.5;
        for j in 1..i {
            acc += kernel[i - j] * rho[j];
        }
        let value = src[i] + acc * dt;
        if !(value.norm() <= BLOWUP) {
            return Err(Error::Blowup {
                time: times[i],
                value: value.norm(),
            });
        }
        rho.push(value);
    }
    Ok(ModeSeries {
        k,
        dt,
        times,
        rho,
        source: src,
    })
}

/// Source f̃ᵢ(k, kt) of cosine data `ε cos(2πℓx)·f⁰(v)` in mode `k = ±ℓ`.
pub fn cosine_source(
    profile: &VelocityProfile,
    k: i64,
    amplitude: f64,
) -> impl Fn(f64) -> Complex64 + '_ {
    move |t| {
        profile
            .fourier(k as f64 * t)
            .map(|z| z * (0.5 * amplitude))
            .unwrap_or(Complex64::new(0.0, 0.0))
    }
}

/// Result of an exponential envelope fit.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    /// Decay rate λ (≥ 0 for damped signals).
    pub rate: f64,
    /// Oscillation frequency estimated as π / mean peak spacing.
    pub frequency: f64,
    pub r_squared: f64,
    pub peaks: Vec<(f64, f64)>,
    /// Set when R² < [`NON_EXPONENTIAL_R2`].
    pub non_exponential: bool,
}

pub const NON_EXPONENTIAL_R2: f64 = 0.99;

/// Local maxima of `values` within `[t_a, t_b]`, refined by a parabola through log-amplitudes.
pub fn local_peaks(times: &[f64], values: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if !(b > a && b >= c) || times[i] < window.0 || times[i] > window.1 || b <= 0.0 {
            continue;
        }
        let h = times[i + 1] - times[i];
        let (la, lb, lc) = (a.max(f64::MIN_POSITIVE).ln(), b.ln(), c.max(f64::MIN_POSITIVE).ln());
        let denom = la - 2.0 * lb + lc;
        let (t, v) = if denom < 0.0 && la.is_finite() && lc.is_finite() {
            let off = 0.5 * (la - lc) / denom;
            if off.abs() <= 1.0 {
                (times[i] + off * h, (lb - 0.25 * (la - lc) * off).exp())
            } else {
                (times[i], b)
            }
        } else {
            (times[i], b)
        };
        peaks.push((t, v));
    }
    peaks
}

/// Least-squares line through `(x, y)`: returns (slope, intercept, R²).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fits `log peak ≈ c − λ t` over the local maxima of `|values|` inside `window`.
pub fn fit_decay_samples(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let peaks = local_peaks(times, values, window);
    if peaks.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} local maxima in [{}, {}], need at least 5",
            peaks.len(),
            window.0,
            window.1
        )));
    }
    let logs: Vec<(f64, f64)> = peaks.iter().map(|&(t, v)| (t, v.ln())).collect();
    let (slope, _, r_squared) = linear_fit(&logs);
    let spacing = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
    Ok(DecayFit {
        rate: -slope,
        frequency: PI / spacing,
        r_squared,
        peaks,
        non_exponential: r_squared < NON_EXPONENTIAL_R2,
    })
}

pub fn fit_decay(series: &ModeSeries, window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_samples(&series.times, &series.amplitudes(), window)
}

/// Fits `log |value| ≈ c + σ t` on all samples inside `window`: returns (σ, R²).
pub fn fit_growth(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= window.0 && **t <= window.1 && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} samples in [{}, {}], need at least 3",
            pts.len(),
            window.0,
            window.1
        )));
    }
    let (slope, _, r2) = linear_fit(&pts);
    Ok((slope, r2))
}
