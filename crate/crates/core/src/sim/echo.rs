//! Two-pulse plasma echoes and the echo kernel of the nonlinear estimate.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::run::{run_with, RunOptions, TrajectoryRecord};
use super::step::apply_kick;
use crate::error::{Error, Result};
use crate::model::{DistributionState, Interaction};

/// Forward echo time t = τ(k − ℓ)/k of a response at mode `k` fed by mode `l` at time `tau`.
///
/// `None` when `k = 0`, `k = ℓ` or the echo would not come after `tau`.
pub fn predict_echo_time(k: i64, l: i64, tau: f64) -> Option<f64> {
    if k == 0 || k == l {
        return None;
    }
    let t = tau * (k - l) as f64 / k as f64;
    (t > tau).then_some(t)
}

/// Instantaneous kick from the external potential `amplitude · cos(2π mode x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub mode: i64,
    pub amplitude: f64,
    pub time: f64,
}

/// A detected echo burst of mode `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EchoPeak {
    pub k: i64,
    /// Centre of the burst: centroid of |ρ̂(t,k)|² over a window of a few phase-mixing times.
    pub time: f64,
    /// Output time of the largest sample in the burst.
    pub max_time: f64,
    pub amplitude: f64,
    /// Source mode ℓ of the pairing and its predicted time, when a forward echo exists.
    pub source_mode: i64,
    pub predicted: Option<f64>,
}

impl EchoPeak {
    pub fn error(&self) -> Option<f64> {
        self.predicted.map(|p| self.time - p)
    }
}

#[derive(Debug)]
pub struct EchoResult {
    pub record: TrajectoryRecord,
    pub peaks: Vec<EchoPeak>,
    pub noise_floor: f64,
    pub stride_time: f64,
}

impl EchoResult {
    /// The peak of mode `k` with a forward prediction, if any.
    pub fn for_mode(&self, k: i64) -> Option<&EchoPeak> {
        self.peaks.iter().find(|p| p.k == k && p.predicted.is_some())
    }
}

/// Response modes k = m₁ + m₂ (m₁ = ±ℓ₁, m₂ = ±ℓ₂, k > 0) with source mode m₁ = k − m₂.
pub fn combination_modes(l1: i64, l2: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for m1 in [l1, -l1] {
        for m2 in [l2, -l2] {
            let k = m1 + m2;
            if k > 0 && !out.contains(&(k, m1)) {
                out.push((k, m1));
            }
        }
    }
    out.sort();
    out
}

/// Runs the nonlinear solver with two kicks and locates echo bursts after the second pulse.
///
/// `opts.k_out` is raised as needed to record every combination mode.
pub fn echo_experiment(
    base: &DistributionState,
    interaction: &Interaction,
    pulse1: Pulse,
    pulse2: Pulse,
    opts: &RunOptions,
) -> Result<EchoResult> {
    if pulse1.mode == 0 || pulse2.mode == 0 {
        return Err(Error::invalid("pulse modes must be nonzero"));
    }
    if !(pulse2.time > pulse1.time) || pulse1.time < base.time() {
        return Err(Error::invalid("pulses must satisfy t0 <= t1 < t2"));
    }
    let combos = combination_modes(pulse1.mode, pulse2.mode);
    let k_need = combos.iter().map(|c| c.0).max().unwrap_or(1) as usize;
    let mut opts = opts.clone();
    opts.k_out = opts.k_out.max(k_need);
    let step_of = |t: f64| ((t - base.time()) / opts.dt).round() as usize;
    let (n1, n2) = (step_of(pulse1.time), step_of(pulse2.time));
    for (n, p) in [(n1, pulse1), (n2, pulse2)] {
        if (n as f64 * opts.dt + base.time() - p.time).abs() > 1e-9 {
            return Err(Error::invalid(format!("pulse time {} is not on the time grid", p.time)));
        }
    }
    let out = run_with(base, interaction, &opts, |n, s| {
        let mut kicked = None;
        for (m, p) in [(n1, pulse1), (n2, pulse2)] {
            if n == m && p.amplitude != 0.0 {
                kicked = Some(apply_kick(kicked.as_ref().unwrap_or(s), p.mode, p.amplitude)?);
            }
        }
        Ok(kicked)
    })?
    .into_result()?;
    let record = out.record;
    let noise_floor = 10.0 * f64::EPSILON * base.mass().abs();
    let width = phase_mixing_time(base);
    let times = record.times();
    let mut peaks = Vec::new();
    for &(k, m1) in &combos {
        let amps = record.mode_amplitudes(k as usize);
        if let Some(peak) = locate_burst(&times, &amps, pulse2.time, width / k as f64, noise_floor) {
            peaks.push(EchoPeak {
                k,
                time: peak.0,
                max_time: peak.1,
                amplitude: peak.2,
                source_mode: m1,
                predicted: predict_echo_time(k, m1, pulse2.time),
            });
        }
    }
    if peaks.is_empty() {
        return Err(Error::NoEcho(format!(
            "no combination mode exceeds the noise floor {noise_floor:e} after t = {}",
            pulse2.time
        )));
    }
    Ok(EchoResult {
        record,
        peaks,
        noise_floor,
        stride_time: opts.dt * opts.stride as f64,
    })
}

/// 1/(2π σ_v) where σ_v² is the velocity variance of ⟨f⟩.
fn phase_mixing_time(state: &DistributionState) -> f64 {
    let mass = state.mass();
    let mean = state.momentum() / mass;
    let var = (2.0 * state.kinetic_energy() / mass - mean * mean).max(1e-12);
    1.0 / (2.0 * PI * var.sqrt())
}

/// Strongest burst after `after`: returns (centroid, argmax time, max amplitude).
///
/// The centroid of |ρ̂|² is iterated over a window of ±4 `width`, which brackets the
/// whole burst even when the density vanishes at its centre.
fn locate_burst(times: &[f64], amps: &[f64], after: f64, width: f64, floor: f64) -> Option<(f64, f64, f64)> {
    let start = times.iter().position(|&t| t > after)?;
    let (mut imax, mut amax) = (None, floor);
    for i in start + 1..amps.len().saturating_sub(1) {
        if amps[i] > amax && amps[i] > amps[i - 1] && amps[i] >= amps[i + 1] {
            imax = Some(i);
            amax = amps[i];
        }
    }
    let imax = imax?;
    let half = 4.0 * width;
    let mut c = times[imax];
    for _ in 0..20 {
        let (mut w, mut wt) = (0.0, 0.0);
        for (&t, &a) in times.iter().zip(amps).skip(start) {
            if (t - c).abs() <= half {
                w += a * a;
                wt += a * a * t;
            }
        }
        let next = wt / w;
        if (next - c).abs() < 1e-12 {
            c = next;
            break;
        }
        c = next;
    }
    Some((c, times[imax], amax))
}

/// Echo-kernel value at one `(t, τ)` with the pair achieving the supremum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    pub k: i64,
    pub l: i64,
}

/// (1+τ) sup over 0<|k|,|ℓ|≤cutoff of e^{−2π dλ |k(t−τ)+ℓτ|} e^{−2π dμ |ℓ|} / (1+|k−ℓ|^γ).
pub fn echo_kernel(t: f64, tau: f64, dlambda: f64, dmu: f64, gamma: f64, cutoff: i64) -> Result<KernelValue> {
    if !(0.0..=t).contains(&tau) {
        return Err(Error::invalid(format!("need 0 <= tau <= t, got tau = {tau}, t = {t}")));
    }
    if !(dlambda > 0.0) || dmu < 0.0 || cutoff < 1 {
        return Err(Error::invalid("need dlambda > 0, dmu >= 0, cutoff >= 1"));
    }
    let mut best = KernelValue { value: -1.0, k: 0, l: 0 };
    for k in (-cutoff..=cutoff).filter(|&k| k != 0) {
        for l in (-cutoff..=cutoff).filter(|&l| l != 0) {
            let phase = (k as f64 * (t - tau) + l as f64 * tau).abs();
            let v = (-2.0 * PI * (dlambda * phase + dmu * l.abs() as f64)).exp()
                / (1.0 + ((k - l).abs() as f64).powf(gamma));
            if v > best.value {
                best = KernelValue { value: v, k, l };
            }
        }
    }
    best.value *= 1.0 + tau;
    Ok(best)
}

/// Kernel parameters shared by sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub dlambda: f64,
    pub dmu: f64,
    pub gamma: f64,
    pub cutoff: i64,
}

/// Kernel on `n + 1` equally spaced τ in [0, t].
pub fn kernel_sweep(t: f64, n: usize, p: KernelParams) -> Result<Vec<(f64, KernelValue)>> {
    (0..=n)
        .into_par_iter()
        .map(|i| {
            let tau = (t * i as f64 / n as f64).min(t);
            echo_kernel(t, tau, p.dlambda, p.dmu, p.gamma, p.cutoff).map(|v| (tau, v))
        })
        .collect()
}

/// Interior local maxima of a sweep, each with the resonant time kt/(k−ℓ) of its pair.
pub fn kernel_peaks(t: f64, sweep: &[(f64, KernelValue)]) -> Vec<(f64, KernelValue, f64)> {
    let mut out = Vec::new();
    for w in sweep.windows(3) {
        let (a, b, c) = (w[0].1.value, w[1].1.value, w[2].1.value);
        if b > a && b >= c {
            let v = w[1].1;
            let resonance = v.k as f64 * t / (v.k - v.l) as f64;
            out.push((w[1].0, v, resonance));
        }
    }
    out
}

/// (1/t) ∫₀ᵗ kernel dτ by the trapezoid rule on `n` panels.
pub fn kernel_mean(t: f64, n: usize, p: KernelParams) -> Result<f64> {
    let sweep = kernel_sweep(t, n, p)?;
    let h = t / n as f64;
    let inner: f64 = sweep.iter().map(|s| s.1.value).sum();
    let ends = 0.5 * (sweep[0].1.value + sweep[n].1.value);
    Ok(h * (inner - ends) / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions() {
        assert_eq!(predict_echo_time(2, -1, 10.0), Some(15.0));
        assert_eq!(predict_echo_time(3, -1, 9.0), Some(12.0));
        assert_eq!(predict_echo_time(1, 2, 5.0), None);
        assert_eq!(predict_echo_time(2, 2, 5.0), None);
        assert_eq!(predict_echo_time(0, 1, 5.0), None);
        assert_eq!(predict_echo_time(2, -1, 5.0), Some(7.5));
    }

    #[test]
    fn combinations() {
        assert_eq!(combination_modes(1, 3), vec![(2, -1), (4, 1)]);
    }

    #[test]
    fn kernel_at_tau_zero() {
        let (dl, dm, g) = (0.05, 0.02, 1.5);
        let t = 4.0;
        let kv = echo_kernel(t, 0.0, dl, dm, g, 6).unwrap();
        let best_l = (1..=6)
            .flat_map(|l| [l, -l])
            .map(|l: i64| (-2.0 * PI * dm * l.abs() as f64).exp() / (1.0 + ((1 - l).abs() as f64).powf(g)))
            .fold(0.0, f64::max);
        let expect = (-2.0 * PI * dl * t).exp() * best_l;
        assert!((kv.value - expect).abs() < 1e-15 * expect);
        assert_eq!(kv.k.abs(), 1);
    }

    #[test]
    fn kernel_resonances() {
        let t = 30.0;
        let p = KernelParams { dlambda: 0.1, dmu: 0.0, gamma: 1.0, cutoff: 4 };
        let sweep = kernel_sweep(t, 6000, p).unwrap();
        let peaks = kernel_peaks(t, &sweep);
        assert!(!peaks.is_empty());
        for (tau, _, res) in peaks {
            assert!((tau - res).abs() <= t / 6000.0 + 1e-12, "{tau} vs {res}");
        }
    }

    #[test]
    fn kernel_rejects_bad_tau() {
        assert!(echo_kernel(1.0, 2.0, 0.1, 0.0, 1.0, 3).is_err());
    }
}
