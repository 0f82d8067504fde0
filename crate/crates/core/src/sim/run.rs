//! Time loop, conserved-quantity diagnostics and the stored force history.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::step::Stepper;
use crate::error::{Error, Result};
use crate::io::{fmt_sci, CsvTable, Series};
use crate::model::{DistributionState, Interaction};
use crate::spectral::{self, compensated_sum};

/// Conserved quantities and damping diagnostics of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub mass: f64,
    pub momentum: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    pub l2: f64,
    /// Σ_{k≠0} (2π|k|)^r |ρ̂(k)|.
    pub cr_proxy: f64,
    /// ‖∂_v f‖_{L²}.
    pub grad_v: f64,
    /// ‖∂_v (f − ⟨f⟩)‖_{L²}: the filamenting, spatially inhomogeneous part.
    pub grad_v_inhomogeneous: f64,
    /// ρ̂(k) for k = 1..=k_out.
    pub modes: Vec<Complex64>,
}

/// Evaluates [`Diagnostics`] with C^r order `r` and `k_out` recorded modes.
pub fn diagnostics(state: &DistributionState, interaction: &Interaction, r: f64, k_out: usize) -> Diagnostics {
    let g = state.grid();
    let n_x = g.n_x;
    let rho = state.density_modes();
    let potential = 0.5
        * compensated_sum((0..n_x).filter(|&i| i != n_x / 2).map(|i| {
            let k = spectral::wavenumber(i, n_x);
            interaction.coeff(k) * rho[i].norm_sqr()
        }));
    let cr_proxy = compensated_sum((1..n_x).filter(|&i| i != n_x / 2).map(|i| {
        let k = spectral::wavenumber(i, n_x).abs() as f64;
        (2.0 * PI * k).powf(r) * rho[i].norm()
    }));
    let l2 = compensated_sum(state.mixed().iter().map(|z| z.norm_sqr())) * g.dv();
    let spec = state.spectral();
    let n_v = g.n_v;
    let (mut all, mut inhom) = (Vec::with_capacity(n_x), Vec::with_capacity(n_x));
    for ki in 0..n_x {
        let s = compensated_sum(spec[ki * n_v..(ki + 1) * n_v].iter().enumerate().map(|(m, z)| {
            if m == n_v / 2 {
                0.0
            } else {
                (2.0 * PI * g.eta(m)).powi(2) * z.norm_sqr()
            }
        }));
        all.push(s);
        if ki != 0 {
            inhom.push(s);
        }
    }
    let norm = 1.0 / (2.0 * g.v_max);
    let kinetic = state.kinetic_energy();
    Diagnostics {
        time: state.time(),
        mass: state.mass(),
        momentum: state.momentum(),
        kinetic,
        potential,
        energy: kinetic + potential,
        l2,
        cr_proxy,
        grad_v: (norm * compensated_sum(all)).sqrt(),
        grad_v_inhomogeneous: (norm * compensated_sum(inhom)).sqrt(),
        modes: (1..=k_out as i64)
            .map(|k| spectral::slot(k, n_x).map_or(Complex64::new(0.0, 0.0), |i| rho[i]))
            .collect(),
    }
}

/// Spatial force fields at increasing times, stored as Fourier coefficients F̂(k).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForceHistory {
    pub times: Vec<f64>,
    coefficients: Vec<Vec<Complex64>>,
}

impl ForceHistory {
    /// Builds a history from fields sampled on a uniform spatial grid.
    pub fn from_fields(times: Vec<f64>, fields: &[Vec<f64>]) -> Result<Self> {
        if times.len() != fields.len() || times.is_empty() {
            return Err(Error::invalid("force history needs one field per time"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("force history times must increase strictly"));
        }
        let mut h = Self::default();
        for (t, f) in times.into_iter().zip(fields) {
            h.push(t, f);
        }
        Ok(h)
    }

    pub fn push(&mut self, time: f64, field: &[f64]) {
        self.times.push(time);
        self.coefficients.push(crate::norms::spatial_coefficients(field));
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        let tol = 1e-9;
        self.span()
            .is_some_and(|(lo, hi)| a.min(b) >= lo - tol && a.max(b) <= hi + tol)
    }

    fn eval_snapshot(&self, idx: usize, x: f64) -> f64 {
        let c = &self.coefficients[idx];
        let n = c.len();
        let mut acc = c[0].re;
        for ki in 1..n / 2 {
            let k = ki as f64;
            acc += 2.0 * (c[ki] * Complex64::from_polar(1.0, 2.0 * PI * k * x)).re;
        }
        acc
    }

    /// F(t, x): linear in time between snapshots, trigonometric in space.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let (lo, hi) = self.span().ok_or_else(|| Error::invalid("empty force history"))?;
        if !(t >= lo - 1e-9 && t <= hi + 1e-9) {
            return Err(Error::invalid(format!("t = {t} outside the force history [{lo}, {hi}]")));
        }
        if self.times.len() == 1 {
            return Ok(self.eval_snapshot(0, x));
        }
        let i = match self.times.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => return Ok(self.eval_snapshot(i, x)),
            Err(i) => i.clamp(1, self.times.len() - 1),
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Ok((1.0 - w) * self.eval_snapshot(i - 1, x) + w * self.eval_snapshot(i, x))
    }

    /// sup_x |F(t_i, x)| at each stored time, measured on `n` sample points.
    pub fn amplitudes(&self, n: usize) -> Vec<f64> {
        (0..self.times.len())
            .map(|i| {
                (0..n)
                    .map(|q| self.eval_snapshot(i, q as f64 / n as f64).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Smallest spacing between stored times.
    pub fn spacing(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Options of a nonlinear run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub horizon: f64,
    pub dt: f64,
    /// Output every `stride` steps.
    pub stride: usize,
    pub filter: bool,
    pub k_out: usize,
    /// Order r of the C^r proxy.
    pub cr_order: f64,
    /// Keep full states at output times.
    pub keep_states: bool,
    /// Lifts the recurrence-time guard (the caller accepts spurious revivals).
    pub allow_recurrence: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            horizon: 20.0,
            dt: 1.0 / 64.0,
            stride: 1,
            filter: false,
            k_out: 4,
            cr_order: 1.0,
            keep_states: false,
            allow_recurrence: false,
        }
    }
}

/// Fraction of the recurrence time a run may cover.
pub const RECURRENCE_FRACTION: f64 = 0.5;

/// Time series produced by a run.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<Diagnostics>,
    /// ⟨f⟩(t, v) at output times.
    pub averages: Vec<Vec<f64>>,
    pub states: Vec<DistributionState>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    /// |ρ̂(t, k)| for `1 ≤ k ≤ k_out`.
    pub fn mode_amplitudes(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.modes[k - 1].norm()).collect()
    }

    /// max_t |q(t) − q(0)| / |q(0)| for a diagnostic selector.
    pub fn relative_drift(&self, q: impl Fn(&Diagnostics) -> f64) -> f64 {
        let q0 = q(&self.rows[0]);
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        self.rows
            .iter()
            .map(|r| (q(r) - q0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// max_t |P(t) − P(0)| relative to the thermal momentum scale M·√(2K/M).
    pub fn momentum_drift(&self) -> f64 {
        let first = &self.rows[0];
        let scale = (2.0 * first.kinetic * first.mass).abs().sqrt().max(f64::MIN_POSITIVE);
        self.rows
            .iter()
            .map(|r| (r.momentum - first.momentum).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Roundoff level of mode `k`: median of |ρ̂(t,k)| over the last quarter of the record.
    pub fn noise_level(&self, k: usize) -> f64 {
        let a = self.mode_amplitudes(k);
        let mut tail: Vec<f64> = a[a.len() - a.len().div_ceil(4)..].to_vec();
        tail.sort_by(f64::total_cmp);
        tail[tail.len() / 2]
    }

    /// Largest relative rise between successive local maxima of |ρ̂(t,k)| after `after`,
    /// counting only maxima above `10 ×` [`Self::noise_level`].
    pub fn envelope_increase(&self, k: usize, after: f64) -> f64 {
        let floor = 10.0 * self.noise_level(k);
        let times = self.times();
        let peaks: Vec<f64> = crate::volterra::local_peaks(&times, &self.mode_amplitudes(k), (after, f64::INFINITY))
            .into_iter()
            .map(|p| p.1)
            .filter(|&v| v > floor)
            .collect();
        peaks
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[0])
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> CsvTable {
        let k_out = self.rows.first().map_or(0, |r| r.modes.len());
        let mut header: Vec<String> = [
            "t", "mass", "momentum", "kinetic", "potential", "energy", "l2", "cr_proxy", "grad_v", "grad_v_inhom",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for k in 1..=k_out {
            header.push(format!("re_rho_{k}"));
            header.push(format!("im_rho_{k}"));
            header.push(format!("abs_rho_{k}"));
        }
        let mut t = CsvTable::new(header);
        for r in &self.rows {
            let mut row = vec![
                r.time, r.mass, r.momentum, r.kinetic, r.potential, r.energy, r.l2, r.cr_proxy, r.grad_v,
                r.grad_v_inhomogeneous,
            ];
            for z in &r.modes {
                row.extend([z.re, z.im, z.norm()]);
            }
            t.push_numeric(&row);
        }
        t
    }

    /// log|ρ̂(t, k)| series for plotting.
    pub fn mode_series(&self) -> Vec<Series> {
        let k_out = self.rows.first().map_or(0, |r| r.modes.len());
        let times = self.times();
        (1..=k_out)
            .map(|k| Series {
                name: format!("|rho_{k}|"),
                points: times.iter().copied().zip(self.mode_amplitudes(k)).collect(),
            })
            .collect()
    }

    /// Relative drift of mass, energy and L² against time.
    pub fn drift_series(&self) -> Vec<Series> {
        let first = &self.rows[0];
        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        let pick: [(&str, fn(&Diagnostics) -> f64); 3] =
            [("mass", |d| d.mass), ("energy", |d| d.energy), ("l2", |d| d.l2)];
        pick.iter()
            .map(|(name, f)| Series {
                name: format!("{name} drift"),
                points: self.rows.iter().map(|r| (r.time, rel(f(r), f(first)))).collect(),
            })
            .collect()
    }

    /// CSV of ⟨f⟩(t, v): one row per output time, one column per velocity node.
    pub fn averages_csv(&self, velocities: &[f64]) -> CsvTable {
        let mut header = vec!["t".to_string()];
        header.extend(velocities.iter().map(|v| format!("v={}", fmt_sci(*v))));
        let mut t = CsvTable::new(header);
        for (r, avg) in self.rows.iter().zip(&self.averages) {
            let mut row = vec![r.time];
            row.extend(avg);
            t.push_numeric(&row);
        }
        t
    }
}

/// Run product; `failure` is set when the loop stopped early, the record then ends at the
/// last good time.
#[derive(Debug)]
pub struct RunOutput {
    pub record: TrajectoryRecord,
    pub forces: ForceHistory,
    pub final_state: DistributionState,
    pub failure: Option<Error>,
}

impl RunOutput {
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(_) => Err(self.failure.expect("checked")),
            None => Ok(self),
        }
    }
}

/// Number of steps covering `horizon` with step `dt`; the horizon must be a multiple of `dt`.
pub fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    let n = (horizon / dt).round();
    if (n * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::invalid(format!(
            "horizon {horizon} is not a whole number of steps dt = {dt}"
        )));
    }
    Ok(n as usize)
}

/// Highest |k| whose velocity profile f̂(k, ·) is above roundoff of the largest one.
pub fn highest_excited_mode(state: &DistributionState) -> i64 {
    let n_x = state.grid().n_x;
    let mut peak = vec![0.0_f64; n_x];
    for row in state.mixed().chunks(n_x) {
        for (p, z) in peak.iter_mut().zip(row) {
            *p = p.max(z.norm());
        }
    }
    let top = peak.iter().copied().fold(0.0, f64::max);
    (0..n_x)
        .filter(|&i| peak[i] > 1e-12 * top)
        .map(|i| crate::spectral::wavenumber(i, n_x).abs())
        .max()
        .unwrap_or(0)
}

/// Rejects horizons beyond [`RECURRENCE_FRACTION`] of the recurrence time of the highest
/// excited mode, t_rec / k.
pub fn check_recurrence(state: &DistributionState, horizon: f64) -> Result<()> {
    let k = highest_excited_mode(state).max(1);
    let limit = RECURRENCE_FRACTION * state.grid().recurrence_time() / k as f64;
    if horizon > limit {
        return Err(Error::invalid(format!(
            "horizon {horizon} exceeds {RECURRENCE_FRACTION}·t_rec/k = {limit:.3} for mode k = {k}; refine n_v or shorten the run"
        )));
    }
    Ok(())
}

/// Nonlinear evolution from `initial` with diagnostics every `stride` steps.
pub fn run(initial: &DistributionState, interaction: &Interaction, opts: &RunOptions) -> Result<RunOutput> {
    run_with(initial, interaction, opts, |_, _| Ok(None))
}

/// [`run`] with a hook called before each step; returning a state replaces the current one
/// (used for instantaneous kicks).
pub fn run_with(
    initial: &DistributionState,
    interaction: &Interaction,
    opts: &RunOptions,
    mut hook: impl FnMut(usize, &DistributionState) -> Result<Option<DistributionState>>,
) -> Result<RunOutput> {
    if opts.stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    if !opts.allow_recurrence {
        check_recurrence(initial, opts.horizon)?;
    }
    let steps = step_count(opts.horizon, opts.dt)?;
    let stepper = Stepper::new(*initial.grid(), interaction.clone(), opts.dt, opts.filter)?;
    let mut record = TrajectoryRecord::default();
    let mut forces = ForceHistory::default();
    let mut state = initial.clone();
    let mut failure = None;
    let observe = |s: &DistributionState, record: &mut TrajectoryRecord| {
        record.rows.push(diagnostics(s, interaction, opts.cr_order, opts.k_out));
        record.averages.push(s.average_profile());
        if opts.keep_states {
            record.states.push(s.clone());
        }
    };
    for n in 0..steps {
        match hook(n, &state) {
            Ok(Some(s)) => state = s,
            Ok(None) => {}
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if n % opts.stride == 0 {
            observe(&state, &mut record);
        }
        let (field, _) = crate::model::force_field_with_residue(&state, interaction)?;
        forces.push(state.time(), &field);
        match stepper.step(&state) {
            Ok(out) => state = out.state.with_time(opts.dt * (n + 1) as f64 + initial.time()),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if failure.is_none() {
        if steps % opts.stride == 0 {
            observe(&state, &mut record);
        }
        let (field, _) = crate::model::force_field_with_residue(&state, interaction)?;
        forces.push(state.time(), &field);
    }
    Ok(RunOutput {
        record,
        forces,
        final_state: state,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_initial, PhaseSpaceGrid, Perturbation, VelocityProfile};

    fn grid() -> PhaseSpaceGrid {
        PhaseSpaceGrid::new(16, 128, 6.0, 1.0 / 32.0).unwrap()
    }

    #[test]
    fn homogeneous_maxwellian_moments() {
        let g = PhaseSpaceGrid::new(16, 128, 9.0, 1.0 / 32.0).unwrap();
        let s = sample_initial(&VelocityProfile::maxwellian(1.0).unwrap(), &[], &g).unwrap();
        let d = diagnostics(&s, &Interaction::repulsive(1.0 / PI).unwrap(), 1.0, 2);
        assert!((d.mass - 1.0).abs() < 1e-13);
        assert!(d.momentum.abs() < 1e-14);
        assert!((d.kinetic - 0.5).abs() < 1e-12);
        assert!(d.potential.abs() < 1e-20);
        assert!(d.l2 <= s.sup_norm() * d.mass);
        assert!((d.l2 - s.l2_squared()).abs() < 1e-13);
        assert!(d.grad_v_inhomogeneous < 1e-14);
    }

    #[test]
    fn unperturbed_run_stays_homogeneous() {
        let s = sample_initial(&VelocityProfile::maxwellian(1.0).unwrap(), &[], &grid()).unwrap();
        let opts = RunOptions { horizon: 2.0, dt: 1.0 / 32.0, k_out: 3, ..Default::default() };
        let out = run(&s, &Interaction::repulsive(1.0 / PI).unwrap(), &opts).unwrap();
        assert!(out.failure.is_none());
        for k in 1..=3 {
            assert!(out.record.mode_amplitudes(k).iter().all(|a| *a < 1e-13));
        }
        assert_eq!(out.record.rows.len(), 65);
        assert!(out.record.times().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn recurrence_guard() {
        let s = DistributionState::zeros(grid(), 0.0);
        let limit = RECURRENCE_FRACTION * grid().recurrence_time();
        assert!(check_recurrence(&s, limit * 0.99).is_ok());
        assert!(check_recurrence(&s, limit * 1.01).is_err());

        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let s = sample_initial(&p, &[Perturbation::new(1, 0.1), Perturbation::new(3, 1e-3)], &grid()).unwrap();
        assert_eq!(highest_excited_mode(&s), 3);
        assert!(check_recurrence(&s, limit / 3.0 * 0.99).is_ok());
        assert!(check_recurrence(&s, limit / 3.0 * 1.01).is_err());
    }

    #[test]
    fn horizon_must_fit_steps() {
        assert_eq!(step_count(1.0, 0.25).unwrap(), 4);
        assert!(step_count(1.0, 0.3).is_err());
    }

    #[test]
    fn history_interpolates_in_time_and_space() {
        let n = 16;
        let field = |a: f64| (0..n).map(|i| a * (2.0 * PI * i as f64 / n as f64).cos()).collect::<Vec<_>>();
        let h = ForceHistory::from_fields(vec![0.0, 1.0], &[field(1.0), field(3.0)]).unwrap();
        let v = h.eval(0.25, 0.1).unwrap();
        assert!((v - 1.5 * (2.0 * PI * 0.1).cos()).abs() < 1e-14);
        assert!(h.eval(1.5, 0.0).is_err());
        assert!(ForceHistory::from_fields(vec![1.0, 0.5], &[field(1.0), field(1.0)]).is_err());
    }

    #[test]
    fn failed_run_keeps_partial_record() {
        let s = sample_initial(
            &VelocityProfile::maxwellian(1.0).unwrap(),
            &[Perturbation::new(1, 0.5)],
            &grid(),
        )
        .unwrap();
        let opts = RunOptions { horizon: 2.0, dt: 1.0 / 32.0, ..Default::default() };
        let out = run_with(&s, &Interaction::free(), &opts, |n, _| {
            if n == 10 {
                Err(Error::NumericalFailure { time: 10.0 / 32.0, reason: "test".into() })
            } else {
                Ok(None)
            }
        })
        .unwrap();
        assert_eq!(out.record.rows.len(), 10);
        assert!(out.into_result().is_err());
    }
}
