//! Newton iteration f^n = f⁰ + h¹ + … + hⁿ for the nonlinear equation.
//!
//! Each level solves the linearization of the discrete split-step map around the previous
//! partial sum. For the level-(n+1) increment,
//!
//! h_{m+1} = DS(fⁿ_m)[h_m] + (S(fⁿ_m) − fⁿ_{m+1}),
//!
//! where S is one Strang step. The source is the one-step defect of fⁿ, the discrete form
//! of the quadratic term −F[hⁿ]·∂_v hⁿ. Inside DS the coupling F[h]·∂_v f̄ enters
//! explicitly as a first-order shift correction of the velocity substep.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::model::{
    force_field, force_from_density, mixed_to_values, values_to_mixed, velocity_derivative_rows,
    DistributionState, Interaction,
};
use crate::norms::{hybrid_norm_z, NormIndices};
use crate::sim::run::step_count;
use crate::sim::step::{density_from_mixed, max_stable_dt, shift_rows, stream_mixed, Stepper};

/// Result of one linearized step.
#[derive(Clone, Debug)]
pub struct LinearizedStep {
    /// S(f̄): the background advanced by the nonlinear step.
    pub background: DistributionState,
    /// DS(f̄)[h].
    pub increment: DistributionState,
}

/// Applies one Strang step to `background` and its derivative to `h`.
pub fn linearized_step(stepper: &Stepper, background: &DistributionState, h: &DistributionState) -> Result<LinearizedStep> {
    let g = stepper.grid;
    if background.grid() != &g || h.grid() != &g {
        return Err(Error::invalid("grids of background, increment and stepper differ"));
    }
    let dt = stepper.dt;
    let time = background.time();
    let half = |s: &DistributionState| {
        let mut m = s.mixed().to_vec();
        stream_mixed(&g, &mut m, 0.5 * dt);
        m
    };
    let fb = half(background);
    let hb = half(h);
    let (force, _) = force_from_density(g.n_x, &density_from_mixed(&g, &fb), &stepper.interaction);
    let f_max = force.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
    if !f_max.is_finite() || dt > max_stable_dt(f_max) {
        return Err(Error::NumericalFailure {
            time,
            reason: format!("background force {f_max:.3e} violates the step bound"),
        });
    }
    let (force_h, _) = force_from_density(g.n_x, &density_from_mixed(&g, &hb), &stepper.interaction);
    let shifts: Vec<f64> = force.iter().map(|f| f * dt).collect();
    let mut w = mixed_to_values(&g, &fb);
    shift_rows(&g, &mut w, &shifts, stepper.filter());
    let mut a = mixed_to_values(&g, &hb);
    shift_rows(&g, &mut a, &shifts, stepper.filter());
    let mut dw = w.clone();
    velocity_derivative_rows(&g, &mut dw);
    for (i, fh) in force_h.iter().enumerate() {
        let c = dt * fh;
        for j in 0..g.n_v {
            a[i * g.n_v + j] -= c * dw[i * g.n_v + j];
        }
    }
    let finish = |values: &[f64]| {
        let mut m = values_to_mixed(&g, values);
        stream_mixed(&g, &mut m, 0.5 * dt);
        DistributionState::from_mixed(g, time + dt, m)
    };
    let increment = finish(&a)?;
    if !increment.is_finite() {
        return Err(Error::NumericalFailure {
            time,
            reason: "non-finite increment".into(),
        });
    }
    Ok(LinearizedStep {
        background: finish(&w)?,
        increment,
    })
}

/// Solves the linearized equation along `background` (one state per step) from `h0`,
/// adding `source(m)` after step `m`. Returns h at every `stride`-th step and at the end.
pub fn linearized_solve(
    stepper: &Stepper,
    background: &[DistributionState],
    h0: &DistributionState,
    mut source: impl FnMut(usize) -> Option<DistributionState>,
    stride: usize,
) -> Result<Vec<DistributionState>> {
    if background.is_empty() || stride == 0 {
        return Err(Error::invalid("need a nonempty background and stride >= 1"));
    }
    let steps = background.len() - 1;
    let mut h = h0.clone();
    let mut out = vec![h.clone()];
    for (m, fb) in background[..steps].iter().enumerate() {
        let mut next = linearized_step(stepper, fb, &h)?.increment;
        if let Some(s) = source(m) {
            next = next.add(&s)?;
        }
        h = next;
        if (m + 1) % stride == 0 || m + 1 == steps {
            out.push(h.clone());
        }
    }
    Ok(out)
}

/// Norm used for δ_n.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaNorm {
    /// ‖h‖_{L¹} + ‖h‖_{L∞}.
    L1PlusLinf,
    /// 𝒵 norm with the per-level width λ_n = λ(½ + 2^{−n−1}).
    Z { indices: NormIndices, n_max: usize },
}

impl DeltaNorm {
    pub fn label(&self) -> &'static str {
        match self {
            DeltaNorm::L1PlusLinf => "l1+linf",
            DeltaNorm::Z { .. } => "z",
        }
    }

    pub fn evaluate(&self, h: &DistributionState, level: usize) -> Result<f64> {
        match self {
            DeltaNorm::L1PlusLinf => Ok(h.l1_norm() + h.sup_norm()),
            DeltaNorm::Z { indices, n_max } => {
                let idx = NormIndices {
                    lambda: level_lambda(indices.lambda, level),
                    ..*indices
                };
                Ok(hybrid_norm_z(h, &idx, *n_max, 1e-14)?.value)
            }
        }
    }
}

/// λ_n = λ(½ + 2^{−n−1}).
pub fn level_lambda(lambda: f64, level: usize) -> f64 {
    lambda * (0.5 + 0.5_f64.powi(level as i32 + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOptions {
    pub n_max: usize,
    pub horizon: f64,
    pub dt: f64,
    /// Stored-time spacing in steps for δ_n, r_n and kept increments.
    pub stride: usize,
    pub norm: DeltaNorm,
    /// Levels stop once δ_n falls to this value.
    pub tolerance: f64,
    pub keep_increments: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            n_max: 4,
            horizon: 5.0,
            dt: 1.0 / 64.0,
            stride: 8,
            norm: DeltaNorm::L1PlusLinf,
            tolerance: 1e-13,
            keep_increments: false,
        }
    }
}

/// Largest admissible number of levels.
pub const MAX_LEVELS: usize = 6;

#[derive(Clone, Debug)]
pub struct NewtonIterate {
    pub level: usize,
    /// δ_n: max over stored times of the configured norm of hⁿ.
    pub delta: f64,
    /// r_n: max over stored times of ‖F[hⁿ]·∂_v hⁿ‖_{L¹}.
    pub residual: f64,
    /// max_m ‖S(fⁿ_m) − fⁿ_{m+1}‖_{L¹}, filled once the next level (or the final pass) ran.
    pub step_defect: Option<f64>,
    /// min over stored times and nodes of fⁿ.
    pub min_partial_sum: f64,
    /// hⁿ at stored times when requested.
    pub increments: Vec<DistributionState>,
    pub wall_seconds: f64,
}

#[derive(Debug)]
pub struct NewtonResult {
    pub iterates: Vec<NewtonIterate>,
    /// f^{n_final} at stored times.
    pub trajectory: Vec<DistributionState>,
    pub final_state: DistributionState,
    /// Set when δ dropped below the tolerance before `n_max`.
    pub converged: bool,
}

impl NewtonResult {
    /// Per-level summary: n, δ_n, r_n, one-step defect, min of the partial sum.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["n", "delta", "residual", "step_defect", "min_partial_sum"]);
        for it in &self.iterates {
            t.push_numeric(&[
                it.level as f64,
                it.delta,
                it.residual,
                it.step_defect.unwrap_or(f64::NAN),
                it.min_partial_sum,
            ]);
        }
        t
    }

    /// Wall time per level, kept apart from the deterministic summary.
    pub fn timings_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["n", "wall_seconds"]);
        for it in &self.iterates {
            t.push_numeric(&[it.level as f64, it.wall_seconds]);
        }
        t
    }
}

/// ‖F[h]·∂_v h‖_{L¹(dx dv)}.
pub fn quadratic_term_l1(h: &DistributionState, interaction: &Interaction) -> Result<f64> {
    let g = h.grid();
    let force = force_field(h, interaction)?;
    let dh = h.velocity_derivative();
    let d = dh.values();
    let mut acc = 0.0;
    for (i, f) in force.iter().enumerate() {
        acc += f.abs() * d[i * g.n_v..(i + 1) * g.n_v].iter().map(|x| x.abs()).sum::<f64>();
    }
    Ok(acc * g.dx() * g.dv())
}

/// r_n for stored increments.
pub fn residual(increments: &[DistributionState], interaction: &Interaction) -> Result<f64> {
    increments
        .iter()
        .map(|h| quadratic_term_l1(h, interaction))
        .try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))
}

/// Runs up to `opts.n_max` Newton levels from `initial` around the homogeneous `equilibrium`.
pub fn newton_solve(
    initial: &DistributionState,
    equilibrium: &DistributionState,
    interaction: &Interaction,
    opts: &NewtonOptions,
) -> Result<NewtonResult> {
    if opts.n_max == 0 || opts.n_max > MAX_LEVELS {
        return Err(Error::invalid(format!("n_max must lie in 1..={MAX_LEVELS}")));
    }
    if opts.stride == 0 {
        return Err(Error::invalid("stride must be at least 1"));
    }
    let g = *initial.grid();
    if equilibrium.grid() != &g {
        return Err(Error::invalid("equilibrium and initial data use different grids"));
    }
    let steps = step_count(opts.horizon, opts.dt)?;
    let stepper = Stepper::new(g, interaction.clone(), opts.dt, false)?;
    let t0 = initial.time();
    let stored = |m: usize| m % opts.stride == 0 || m == steps;
    let mut traj: Vec<DistributionState> = (0..=steps)
        .map(|m| equilibrium.clone().with_time(t0 + opts.dt * m as f64))
        .collect();
    let mut iterates: Vec<NewtonIterate> = Vec::new();
    let mut converged = false;
    for level in 1..=opts.n_max {
        let clock = Instant::now();
        let mut h = if level == 1 {
            initial.sub(&traj[0])?
        } else {
            DistributionState::zeros(g, t0)
        };
        let (mut delta, mut resid, mut defect, mut min_sum) = (0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
        let mut kept = Vec::new();
        for m in 0..=steps {
            let next = if m < steps {
                let ls = linearized_step(&stepper, &traj[m], &h)?;
                let s = ls.background.sub(&traj[m + 1])?;
                defect = defect.max(s.l1_norm());
                Some(ls.increment.add(&s)?)
            } else {
                None
            };
            if stored(m) {
                delta = delta.max(opts.norm.evaluate(&h, level)?);
                resid = resid.max(quadratic_term_l1(&h, interaction)?);
                if opts.keep_increments {
                    kept.push(h.clone());
                }
            }
            traj[m] = traj[m].add(&h)?;
            if stored(m) {
                min_sum = min_sum.min(traj[m].min_value());
            }
            if let Some(n) = next {
                h = n;
            }
        }
        if let Some(prev) = iterates.last_mut() {
            prev.step_defect = Some(defect);
        }
        if let Some(prev) = iterates.last() {
            if delta > prev.delta && delta > opts.tolerance {
                return Err(Error::NewtonDivergence {
                    level,
                    previous: prev.delta,
                    current: delta,
                });
            }
        }
        iterates.push(NewtonIterate {
            level,
            delta,
            residual: resid,
            step_defect: None,
            min_partial_sum: min_sum,
            increments: kept,
            wall_seconds: clock.elapsed().as_secs_f64(),
        });
        if delta <= opts.tolerance {
            converged = true;
            break;
        }
    }
    let mut defect = 0.0_f64;
    for m in 0..steps {
        let s = stepper.step(&traj[m])?.state.sub(&traj[m + 1])?;
        defect = defect.max(s.l1_norm());
    }
    if let Some(last) = iterates.last_mut() {
        last.step_defect = Some(defect);
    }
    let final_state = traj[steps].clone();
    let trajectory = traj
        .into_iter()
        .enumerate()
        .filter(|(m, _)| stored(*m))
        .map(|(_, s)| s)
        .collect();
    Ok(NewtonResult {
        iterates,
        trajectory,
        final_state,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_initial, Perturbation, PhaseSpaceGrid, VelocityProfile};
    use std::f64::consts::PI;

    fn setup(eps: f64) -> (DistributionState, DistributionState, Interaction) {
        let g = PhaseSpaceGrid::new(16, 128, 6.0, 1.0 / 32.0).unwrap();
        let p = VelocityProfile::maxwellian(1.0).unwrap();
        let f0 = sample_initial(&p, &[], &g).unwrap();
        let fi = sample_initial(&p, &[Perturbation::new(1, eps)], &g).unwrap();
        (fi, f0, Interaction::repulsive(1.0 / PI).unwrap())
    }

    #[test]
    fn zero_increment_stays_zero() {
        let (_, f0, w) = setup(0.0);
        let st = Stepper::new(*f0.grid(), w, 1.0 / 32.0, false).unwrap();
        let bg: Vec<_> = (0..=10).map(|m| f0.clone().with_time(m as f64 / 32.0)).collect();
        let hs = linearized_solve(&st, &bg, &DistributionState::zeros(*f0.grid(), 0.0), |_| None, 1).unwrap();
        assert!(hs.iter().all(|h| h.sup_norm() == 0.0));
    }

    #[test]
    fn free_background_is_transport() {
        let (fi, f0, _) = setup(0.1);
        let g = *f0.grid();
        let st = Stepper::new(g, Interaction::free(), 1.0 / 32.0, false).unwrap();
        let h0 = fi.sub(&f0).unwrap();
        let bg: Vec<_> = (0..=8).map(|m| f0.clone().with_time(m as f64 / 32.0)).collect();
        let hs = linearized_solve(&st, &bg, &h0, |_| None, 8).unwrap();
        let mut expect = h0.mixed().to_vec();
        stream_mixed(&g, &mut expect, 0.25);
        let err = hs.last().unwrap().mixed().iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn equilibrium_terminates_at_first_level() {
        let (_, f0, w) = setup(0.0);
        let opts = NewtonOptions { horizon: 1.0, dt: 1.0 / 32.0, ..Default::default() };
        let r = newton_solve(&f0, &f0, &w, &opts).unwrap();
        assert_eq!(r.iterates.len(), 1);
        assert!(r.converged);
        assert!(r.iterates[0].delta <= 1e-13);
    }

    #[test]
    fn linearization_is_a_derivative() {
        let (fi, f0, w) = setup(0.05);
        let st = Stepper::new(*f0.grid(), w, 1.0 / 32.0, false).unwrap();
        let dir = fi.sub(&f0).unwrap();
        let ls = linearized_step(&st, &fi, &dir).unwrap();
        let errs: Vec<f64> = [1e-2, 5e-3]
            .iter()
            .map(|&e| {
                let plus = st.step(&fi.combine(1.0, &dir, e).unwrap()).unwrap().state;
                let base = &ls.background;
                plus.sub(base).unwrap().combine(1.0, &ls.increment, -e).unwrap().sup_norm()
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn level_widths_shrink() {
        assert_eq!(level_lambda(0.4, 0), 0.4);
        assert!((level_lambda(0.4, 1) - 0.3).abs() < 1e-15);
        assert!(level_lambda(0.4, 6) > 0.2);
    }

    #[test]
    fn rejects_too_many_levels() {
        let (fi, f0, w) = setup(1e-3);
        let opts = NewtonOptions { n_max: 7, ..Default::default() };
        assert!(newton_solve(&fi, &f0, &w, &opts).is_err());
    }
}
