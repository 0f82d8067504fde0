//! Linear stability of homogeneous equilibria.
//!
//! Two complex functionals of a mode `k` are exposed and kept apart:
//!
//! * [`curly_l`]: 𝓛(k, ξ) = −4π² Ŵ(k) ∫₀^∞ e^{2π|k|ξ̄t} |f̃⁰(kt)| |k|² t dt, whose distance
//!   from 1 over the strip `0 ≤ Re ξ < λ` is the stability margin κ;
//! * [`k_hat0`]: K̂⁰(k, ξ) = ∫₀^∞ K⁰(t, k) e^{−2π|k|ξt} dt, whose zeros of `K̂⁰ − 1`
//!   are the dispersion roots. A root ξ₀ contributes `e^{2π|k|ξ₀t}` to ρ̂(t, k), so
//!   `Re ξ₀ < 0` is damped and `Re ξ₀ > 0` unstable.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{fmt_sci, CsvTable};
use crate::model::{Interaction, ProfileKind, VelocityProfile};
use crate::quadrature::{integrate, QuadratureOptions};
use crate::volterra::kernel_k0;

/// Upper integration limit where `envelope` has passed its peak and dropped below `rel·peak`.
fn truncation_time(envelope: impl Fn(f64) -> f64, step: f64, rel: f64) -> Result<(f64, f64)> {
    let mut peak = 0.0_f64;
    let mut peak_t = 0.0;
    for i in 1..=400_000 {
        let t = step * i as f64;
        let e = envelope(t);
        if !e.is_finite() {
            return Err(Error::Divergent(format!("integrand envelope overflows at t = {t}")));
        }
        if e > peak {
            peak = e;
            peak_t = t;
        }
        if t > peak_t && e <= rel * peak {
            return Ok((t, peak));
        }
        if peak == 0.0 && i > 64 {
            return Ok((t, 0.0));
        }
    }
    Err(Error::Divergent(
        "integrand envelope does not decay; profile not analytic enough for this ξ".into(),
    ))
}

/// Sampling step resolving the decay of f̃⁰(kt).
fn time_step(profile: &VelocityProfile, k: i64) -> f64 {
    let sigma = profile.component_temperature().sqrt();
    1.0 / (32.0 * PI * sigma * k.unsigned_abs() as f64)
}

fn oscillation_panels(frequency: f64, length: f64) -> usize {
    ((frequency.abs() * length).ceil() as usize).clamp(8, 2000)
}

/// 𝓛(k, ξ), evaluated to relative tolerance `tol`.
pub fn curly_l(
    k: i64,
    xi: Complex64,
    profile: &VelocityProfile,
    interaction: &Interaction,
    tol: f64,
) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::invalid("curly_l is undefined for k = 0"));
    }
    if !(xi.re >= 0.0) {
        return Err(Error::invalid(format!("Re ξ must be nonnegative, got {}", xi.re)));
    }
    if xi.re >= profile.lambda0() {
        return Err(Error::Divergent(format!(
            "Re ξ = {} reaches the analyticity width {} of the profile",
            xi.re,
            profile.lambda0()
        )));
    }
    let w = interaction.coeff(k);
    if w == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let kk = k.unsigned_abs() as f64;
    let kf = k as f64;
    let prefactor = -4.0 * PI * PI * w * kk * kk;
    let growth = 2.0 * PI * kk * xi.re;
    let envelope = |t: f64| {
        profile
            .fourier_envelope(kf * t)
            .map(|e| (growth * t).exp() * e * t)
            .unwrap_or(f64::INFINITY)
    };
    let (t_max, peak) = truncation_time(envelope, time_step(profile, k), tol * 1e-2)?;
    let freq = kk * xi.im;
    let opts = QuadratureOptions {
        abs_tol: tol * 1e-2 * peak * t_max,
        rel_tol: tol,
        max_intervals: 20_000,
        initial_panels: oscillation_panels(freq, t_max),
    };
    let mut failure = None;
    let q = integrate(
        |t| match profile.fourier(kf * t) {
            Ok(f) => Complex64::from_polar(f.norm() * t * (growth * t).exp(), -2.0 * PI * freq * t),
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        0.0,
        t_max,
        opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(q.value * prefactor)
}

/// K̂⁰(k, ξ) and its ξ-derivative.
pub fn k_hat0(
    k: i64,
    xi: Complex64,
    profile: &VelocityProfile,
    interaction: &Interaction,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    if k == 0 {
        return Err(Error::invalid("K̂⁰ is undefined for k = 0"));
    }
    if profile.lambda0().is_finite() {
        return Err(Error::invalid(
            "K̂⁰ off the real axis needs an entire profile transform (Gaussian-type profile)",
        ));
    }
    let w = interaction.coeff(k);
    if w == 0.0 {
        return Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let kk = k.unsigned_abs() as f64;
    let kf = k as f64;
    let rate = 2.0 * PI * kk;
    let scale = 4.0 * PI * PI * w.abs() * kk * kk;
    let envelope = |t: f64| {
        profile
            .fourier_envelope(kf * t)
            .map(|e| scale * e * t * (1.0 + rate * t) * (-rate * xi.re * t).exp())
            .unwrap_or(f64::INFINITY)
    };
    let (t_max, peak) = truncation_time(envelope, time_step(profile, k), tol * 1e-3)?;
    let opts = QuadratureOptions {
        abs_tol: tol * 1e-3 * peak * t_max,
        rel_tol: tol,
        max_intervals: 20_000,
        initial_panels: oscillation_panels(kk * xi.im, t_max),
    };
    let eval = |derivative: bool| -> Result<Complex64> {
        let mut failure = None;
        let q = integrate(
            |t| match kernel_k0(t, k, profile, interaction) {
                Ok(kv) => {
                    let weight = (-rate * xi * t).exp();
                    if derivative {
                        kv * weight * (-rate * t)
                    } else {
                        kv * weight
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            0.0,
            t_max,
            opts,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(q.value),
        }
    };
    Ok((eval(false)?, eval(true)?))
}

/// Smallest |𝓛(k, ξ) − 1| found for one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeScan {
    pub k: i64,
    pub min_distance: f64,
    pub argmin: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    /// Width λ of the strip `0 ≤ Re ξ < λ`.
    pub lambda_band: f64,
    pub k_max: i64,
    pub n_re: usize,
    pub n_im: usize,
    pub kappa_required: f64,
    pub tol: f64,
    /// Refinement stops once the compass step is below this resolution.
    pub resolution: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            lambda_band: 0.3,
            k_max: 8,
            n_re: 64,
            n_im: 64,
            kappa_required: 0.5,
            tol: 1e-8,
            resolution: 1e-4,
        }
    }
}

/// Outcome of scanning |𝓛 − 1| over the strip.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub modes: Vec<ModeScan>,
    pub kappa_est: f64,
    pub argmin_k: i64,
    pub argmin_xi: Complex64,
    pub kappa_required: f64,
    pub im_window: f64,
}

impl ScanResult {
    pub fn passed(&self) -> bool {
        self.kappa_est >= self.kappa_required
    }
}

/// Half-width of the scanned Im ξ window: 2(1 + √T)·k_max, with T the profile variance.
pub fn im_window(profile: &VelocityProfile, k_max: i64) -> f64 {
    2.0 * (1.0 + profile.effective_temperature().sqrt()) * k_max as f64
}

/// Scans |𝓛(k, ξ) − 1| for `1 ≤ k ≤ k_max`; 𝓛(−k, ξ) = 𝓛(k, ξ) and 𝓛(k, ξ̄) is the
/// conjugate of 𝓛(k, ξ), so only `k > 0` and `Im ξ ≥ 0` are sampled.
pub fn condl_scan(
    profile: &VelocityProfile,
    interaction: &Interaction,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    if !(opts.lambda_band > 0.0) || opts.lambda_band >= profile.lambda0() {
        return Err(Error::invalid(format!(
            "band λ = {} must lie in (0, {})",
            opts.lambda_band,
            profile.lambda0()
        )));
    }
    if opts.k_max < 1 || opts.n_re < 2 || opts.n_im < 2 {
        return Err(Error::invalid("scan needs k_max ≥ 1 and at least 2×2 cells"));
    }
    let window = im_window(profile, opts.k_max);
    let d_re = opts.lambda_band / opts.n_re as f64;
    let d_im = window / (opts.n_im - 1) as f64;
    let mut modes = Vec::with_capacity(opts.k_max as usize);
    for k in 1..=opts.k_max {
        let cells: Vec<(usize, usize)> = (0..opts.n_re)
            .flat_map(|i| (0..opts.n_im).map(move |j| (i, j)))
            .collect();
        let values: Vec<Result<f64>> = cells
            .par_iter()
            .map(|&(i, j)| {
                let xi = Complex64::new(i as f64 * d_re, j as f64 * d_im);
                curly_l(k, xi, profile, interaction, opts.tol).map(|l| (l - 1.0).norm())
            })
            .collect();
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        for (&(i, j), v) in cells.iter().zip(values) {
            let v = v?;
            if v < best.0 {
                best = (v, Complex64::new(i as f64 * d_re, j as f64 * d_im));
            }
        }
        let refined = refine_minimum(k, best, (d_re, d_im), window, opts, profile, interaction)?;
        modes.push(ModeScan {
            k,
            min_distance: refined.0,
            argmin: refined.1,
        });
    }
    let worst = modes
        .iter()
        .min_by(|a, b| a.min_distance.total_cmp(&b.min_distance))
        .expect("k_max ≥ 1");
    Ok(ScanResult {
        kappa_est: worst.min_distance,
        argmin_k: worst.k,
        argmin_xi: worst.argmin,
        modes,
        kappa_required: opts.kappa_required,
        im_window: window,
    })
}

/// Compass search with step halving, started from the best grid cell and kept inside the
/// scanned rectangle `[0, λ) × [0, window]`.
fn refine_minimum(
    k: i64,
    start: (f64, Complex64),
    spacing: (f64, f64),
    window: f64,
    opts: &ScanOptions,
    profile: &VelocityProfile,
    interaction: &Interaction,
) -> Result<(f64, Complex64)> {
    let re_hi = opts.lambda_band * (1.0 - 1e-12);
    let eval = |xi: Complex64| -> Result<f64> {
        curly_l(k, xi, profile, interaction, opts.tol).map(|l| (l - 1.0).norm())
    };
    let (mut best, mut at) = start;
    let (mut h_re, mut h_im) = (0.5 * spacing.0, 0.5 * spacing.1);
    while h_re.max(h_im) >= opts.resolution {
        let mut moved = false;
        for (dr, di) in [(h_re, 0.0), (-h_re, 0.0), (0.0, h_im), (0.0, -h_im)] {
            let cand = Complex64::new((at.re + dr).clamp(0.0, re_hi), (at.im + di).clamp(0.0, window));
            if cand == at {
                continue;
            }
            let v = eval(cand)?;
            if v < best {
                best = v;
                at = cand;
                moved = true;
            }
        }
        if !moved {
            h_re *= 0.5;
            h_im *= 0.5;
        }
    }
    Ok((best, at))
}

/// Result of the sign test behind condition (a).
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionA {
    pub holds: bool,
    /// First mode with Ŵ(k) < 0, if any.
    pub negative_mode: Option<i64>,
    /// Location and value of the largest z·φ′_k(z) on the grid.
    pub worst: (i64, f64, f64),
}

/// Default z grid: 4001 points on the profile's velocity cutoff.
pub fn default_z_grid(profile: &VelocityProfile) -> Vec<f64> {
    let cut = profile.default_velocity_cutoff();
    (0..=4000).map(|i| -cut + 2.0 * cut * i as f64 / 4000.0).collect()
}

/// Ŵ(k) ≥ 0 for `1 ≤ |k| ≤ k_max` and z·φ′_k(z) ≤ 10⁻¹² on `z_grid`.
pub fn condition_a(
    profile: &VelocityProfile,
    interaction: &Interaction,
    z_grid: &[f64],
    k_max: i64,
) -> Result<ConditionA> {
    if z_grid.is_empty() {
        return Err(Error::invalid("empty z grid"));
    }
    let negative_mode = (1..=k_max).find(|&k| interaction.coeff(k) < 0.0);
    let h = 1e-5 * profile.component_temperature().sqrt().max(1e-3);
    let mut worst = (1, z_grid[0], f64::NEG_INFINITY);
    // In one dimension φ_{−k}(z) = φ_k(−z), so both orientations cover every mode.
    for k in [1_i64, -1] {
        for &z in z_grid {
            let d = (profile.marginal(k, z + h)? - profile.marginal(k, z - h)?) / (2.0 * h);
            let v = z * d;
            if v > worst.2 {
                worst = (k, z, v);
            }
        }
    }
    Ok(ConditionA {
        holds: negative_mode.is_none() && worst.2 <= 1e-12,
        negative_mode,
        worst,
    })
}

/// m = 4π² max|Ŵ(k)| · sup_σ ∫₀^∞ |f̃⁰(rσ)| r dr; condition (b) holds when m < 1.
///
/// Profiles whose transform is only known on a finite band give `f64::INFINITY`.
pub fn condition_b(profile: &VelocityProfile, interaction: &Interaction, k_max: i64) -> Result<f64> {
    let w_max = interaction.max_abs_coeff(k_max.max(1) as u64);
    if w_max == 0.0 {
        return Ok(0.0);
    }
    if let ProfileKind::Tabulated { .. } = profile.kind() {
        return Ok(f64::INFINITY);
    }
    let mut sup = 0.0_f64;
    for sigma in [1.0, -1.0] {
        let envelope = |r: f64| {
            profile
                .fourier_envelope(sigma * r)
                .map(|e| e * r)
                .unwrap_or(f64::INFINITY)
        };
        let step = 1.0 / (32.0 * PI * profile.component_temperature().sqrt());
        let (r_max, peak) = match truncation_time(envelope, step, 1e-18) {
            Ok(v) => v,
            Err(Error::Divergent(_)) => return Ok(f64::INFINITY),
            Err(e) => return Err(e),
        };
        let opts = QuadratureOptions {
            abs_tol: 1e-18 * peak * r_max,
            rel_tol: 1e-13,
            max_intervals: 20_000,
            initial_panels: 16,
        };
        let q = integrate(
            |r| {
                Complex64::new(
                    profile.fourier(sigma * r).map(|z| z.norm()).unwrap_or(f64::NAN) * r,
                    0.0,
                )
            },
            0.0,
            r_max,
            opts,
        )?;
        sup = sup.max(q.value.re);
    }
    Ok(4.0 * PI * PI * w_max * sup)
}

/// A zero of K̂⁰(k, ·) − 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionRoot {
    pub k: i64,
    pub xi: Complex64,
    pub residual: f64,
}

impl DispersionRoot {
    /// 2π|k| Re ξ₀: positive for unstable modes.
    pub fn growth_rate(&self) -> f64 {
        2.0 * PI * self.k.unsigned_abs() as f64 * self.xi.re
    }

    /// 2π|k| |Re ξ₀|.
    pub fn decay_rate(&self) -> f64 {
        self.growth_rate().abs()
    }

    /// 2π|k| |Im ξ₀|.
    pub fn frequency(&self) -> f64 {
        2.0 * PI * self.k.unsigned_abs() as f64 * self.xi.im.abs()
    }

    pub fn is_unstable(&self) -> bool {
        self.xi.re > 0.0
    }
}

/// Rectangle of the complex ξ-plane searched for roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SearchBox {
    /// Box scaled by the profile: deep damping is cut at −3√T so the weight e^{−2π|k|ξt}
    /// never outgrows the Gaussian by more than e^{4.5}.
    pub fn for_profile(profile: &VelocityProfile) -> Self {
        let tc = profile.component_temperature().sqrt();
        let te = profile.effective_temperature().sqrt();
        let im = 2.0 * (1.0 + te);
        Self {
            re: (-3.0 * tc, 2.0 * te + 3.0 * tc),
            im: (-im, im),
        }
    }

    fn contains_loosely(&self, z: Complex64) -> bool {
        let pad_re = 0.25 * (self.re.1 - self.re.0);
        let pad_im = 0.25 * (self.im.1 - self.im.0);
        z.re >= self.re.0 - pad_re
            && z.re <= self.re.1 + pad_re
            && z.im >= self.im.0 - pad_im
            && z.im <= self.im.1 + pad_im
    }
}

/// Roots found by [`dispersion_roots`], dominant (largest Re ξ) first.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSearch {
    pub roots: Vec<DispersionRoot>,
    pub diagnostic: Option<String>,
}

impl RootSearch {
    pub fn dominant(&self) -> Option<&DispersionRoot> {
        self.roots.first()
    }
}

const ROOT_TOL: f64 = 1e-8;
const QUAD_TOL: f64 = 1e-13;

/// Damped Newton iteration on K̂⁰(k, ξ) = 1 from an `n_seeds × n_seeds` grid of seeds.
pub fn dispersion_roots(
    k: i64,
    profile: &VelocityProfile,
    interaction: &Interaction,
    search: SearchBox,
    n_seeds: usize,
) -> Result<RootSearch> {
    if interaction.coeff(k) == 0.0 {
        return Ok(RootSearch {
            roots: Vec::new(),
            diagnostic: Some(format!("Ŵ({k}) = 0, so K̂⁰ ≡ 0 has no roots")),
        });
    }
    let n = n_seeds.max(1);
    let seeds: Vec<Complex64> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                let fr = (i as f64 + 0.5) / n as f64;
                let fi = (j as f64 + 0.5) / n as f64;
                Complex64::new(
                    search.re.0 + fr * (search.re.1 - search.re.0),
                    search.im.0 + fi * (search.im.1 - search.im.0),
                )
            })
        })
        .collect();
    let outcomes: Vec<Result<Option<DispersionRoot>>> = seeds
        .par_iter()
        .map(|&seed| newton_from(k, seed, profile, interaction, &search))
        .collect();
    let mut roots: Vec<DispersionRoot> = Vec::new();
    let mut failures = 0;
    for outcome in outcomes {
        match outcome {
            Ok(Some(root)) => {
                if roots.iter().all(|r| (r.xi - root.xi).norm() > 1e-6) {
                    roots.push(root);
                }
            }
            Ok(None) | Err(Error::Quadrature(_)) | Err(Error::Divergent(_)) => failures += 1,
            Err(e) => return Err(e),
        }
    }
    roots.sort_by(|a, b| b.xi.re.total_cmp(&a.xi.re).then(a.xi.im.total_cmp(&b.xi.im)));
    let diagnostic = if roots.is_empty() {
        Some(format!("no seed out of {} converged", seeds.len()))
    } else if failures > 0 {
        Some(format!("{failures} of {} seeds did not converge", seeds.len()))
    } else {
        None
    };
    Ok(RootSearch { roots, diagnostic })
}

fn newton_from(
    k: i64,
    seed: Complex64,
    profile: &VelocityProfile,
    interaction: &Interaction,
    search: &SearchBox,
) -> Result<Option<DispersionRoot>> {
    let max_step = 0.25 * ((search.re.1 - search.re.0).powi(2) + (search.im.1 - search.im.0).powi(2)).sqrt();
    let mut z = seed;
    let (mut val, mut der) = k_hat0(k, z, profile, interaction, QUAD_TOL)?;
    let mut res = (val - 1.0).norm();
    for _ in 0..100 {
        if res < 1e-12 {
            break;
        }
        if der.norm() == 0.0 {
            return Ok(None);
        }
        let mut step = (val - 1.0) / der;
        if step.norm() > max_step {
            step *= max_step / step.norm();
        }
        let mut alpha = 1.0;
        loop {
            let cand = z - step * alpha;
            if !search.contains_loosely(cand) {
                alpha *= 0.5;
            } else {
                let (v, d) = k_hat0(k, cand, profile, interaction, QUAD_TOL)?;
                let r = (v - 1.0).norm();
                if r < res {
                    z = cand;
                    val = v;
                    der = d;
                    res = r;
                    break;
                }
                alpha *= 0.5;
            }
            if alpha < 1e-8 {
                return Ok(if res < ROOT_TOL { Some(root(k, z, res)) } else { None });
            }
        }
        if (step * alpha).norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    Ok((res < ROOT_TOL).then(|| root(k, z, res)))
}

fn root(k: i64, xi: Complex64, residual: f64) -> DispersionRoot {
    DispersionRoot { k, xi, residual }
}

/// Scan, sufficient conditions and dispersion roots for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub scan: ScanResult,
    pub condition_a: ConditionA,
    pub condition_b: f64,
    /// Dominant root per mode `1..=k_max` (modes without roots are absent).
    pub roots: Vec<DispersionRoot>,
}

impl StabilityReport {
    pub fn build(
        profile: &VelocityProfile,
        interaction: &Interaction,
        opts: &ScanOptions,
        root_modes: i64,
        n_seeds: usize,
    ) -> Result<Self> {
        let scan = condl_scan(profile, interaction, opts)?;
        let condition_a = condition_a(profile, interaction, &default_z_grid(profile), opts.k_max)?;
        let condition_b = condition_b(profile, interaction, opts.k_max)?;
        let mut roots = Vec::new();
        if profile.lambda0().is_infinite() {
            let search = SearchBox::for_profile(profile);
            for k in 1..=root_modes {
                if let Some(r) = dispersion_roots(k, profile, interaction, search, n_seeds)?.dominant() {
                    roots.push(*r);
                }
            }
        }
        Ok(Self {
            scan,
            condition_a,
            condition_b,
            roots,
        })
    }

    /// One row per scanned mode.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "k",
            "min_abs_L_minus_1",
            "argmin_re_xi",
            "argmin_im_xi",
            "root_re_xi",
            "root_im_xi",
            "decay_rate",
            "frequency",
        ]);
        for m in &self.scan.modes {
            let root = self.roots.iter().find(|r| r.k == m.k);
            let mut row = vec![m.k.to_string()];
            row.extend(
                [
                    m.min_distance,
                    m.argmin.re,
                    m.argmin.im,
                    root.map_or(f64::NAN, |r| r.xi.re),
                    root.map_or(f64::NAN, |r| r.xi.im),
                    root.map_or(f64::NAN, |r| -r.growth_rate()),
                    root.map_or(f64::NAN, |r| r.frequency()),
                ]
                .iter()
                .map(|&x| fmt_sci(x)),
            );
            t.push_raw(row);
        }
        t
    }

    pub fn summary(&self) -> String {
        format!(
            "kappa={:.6e} at k={} xi={:.4}{:+.4}i condL={} condition_a={} condition_b_margin={:.6e} condition_b={}",
            self.scan.kappa_est,
            self.scan.argmin_k,
            self.scan.argmin_xi.re,
            self.scan.argmin_xi.im,
            if self.scan.passed() { "pass" } else { "fail" },
            self.condition_a.holds,
            self.condition_b,
            self.condition_b < 1.0
        )
    }
}
