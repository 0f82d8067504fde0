//! Randomised invariants of the solver, the configuration layer and the analytic helpers.

use std::path::Path;

use proptest::prelude::*;
use vdl_core::cli::{Assertion, ExperimentConfig, Subcommand};
use vdl_core::model::{sample_initial, DistributionState, Interaction, Perturbation, PhaseSpaceGrid, VelocityProfile};
use vdl_core::newton::level_lambda;
use vdl_core::norms::algebra_check;
use vdl_core::sim::{apply_kick, characteristics, max_stable_dt, predict_echo_time, step, ForceHistory, STEP_BOUND};
use vdl_core::volterra::{cosine_source, solve_mode};

fn small_grid(dt: f64) -> PhaseSpaceGrid {
    PhaseSpaceGrid::new(16, 128, 7.0, dt).unwrap()
}

fn perturbed(temperature: f64, amps: &[f64], dt: f64) -> DistributionState {
    let p = VelocityProfile::maxwellian(temperature).unwrap();
    let pert: Vec<Perturbation> = amps
        .iter()
        .enumerate()
        .map(|(i, &a)| Perturbation::new(i as i64 + 1, a))
        .collect();
    sample_initial(&p, &pert, &small_grid(dt)).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_step_conserves_mass_and_l2(
        temperature in 0.5..1.5_f64,
        amps in prop::collection::vec(-0.1..0.1_f64, 1..4),
        amplitude in 0.0..1.0_f64,
        attractive in any::<bool>(),
        dt in 0.005..0.05_f64,
    ) {
        let s = perturbed(temperature, &amps, dt);
        let w = if attractive { Interaction::attractive(amplitude) } else { Interaction::repulsive(amplitude) }.unwrap();
        let next = step(&s, &w, dt).unwrap();
        prop_assert!((next.mass() - s.mass()).abs() <= 1e-13 * s.mass());
        let l2 = (next.l2_squared() - s.l2_squared()).abs() / s.l2_squared();
        prop_assert!(l2 <= 1e-10, "l2 drift {l2:e}");
        prop_assert!((next.time() - s.time() - dt).abs() < 1e-15);
    }

    #[test]
    fn free_transport_composes(amps in prop::collection::vec(-0.2..0.2_f64, 1..4), a in 0.005..0.05_f64, b in 0.005..0.05_f64) {
        let s = perturbed(1.0, &amps, a);
        let w = Interaction::free();
        let two = step(&step(&s, &w, a).unwrap(), &w, b).unwrap();
        let one = step(&s, &w, a + b).unwrap();
        prop_assert!(max_abs_diff(two.values(), one.values()) < 1e-13);
    }

    #[test]
    fn kicks_invert(mode in 1_i64..4, amplitude in -0.05..0.05_f64, amps in prop::collection::vec(-0.2..0.2_f64, 1..3)) {
        let s = perturbed(1.0, &amps, 0.01);
        let back = apply_kick(&apply_kick(&s, mode, amplitude).unwrap(), mode, -amplitude).unwrap();
        prop_assert!(max_abs_diff(back.values(), s.values()) < 1e-13);
        let kicked = apply_kick(&s, mode, amplitude).unwrap();
        prop_assert!((kicked.mass() - s.mass()).abs() < 1e-14);
    }

    #[test]
    fn free_characteristics_are_straight_lines(
        pts in prop::collection::vec((0.0..1.0_f64, -4.0..4.0_f64), 1..8),
        t in 0.0..2.0_f64,
        tau in 0.0..2.0_f64,
    ) {
        let times: Vec<f64> = (0..=16).map(|i| i as f64 / 8.0).collect();
        let fields = vec![vec![0.0; 8]; times.len()];
        let history = ForceHistory::from_fields(times, &fields).unwrap();
        let out = characteristics(&history, t, tau, &pts).unwrap();
        for ((x, v), (x1, v1)) in pts.iter().zip(&out) {
            prop_assert!((x1 - (x + v * (tau - t))).abs() < 1e-12);
            prop_assert!((v1 - v).abs() < 1e-14);
        }
    }

    #[test]
    fn free_volterra_returns_the_source(temperature in 0.3..3.0_f64, k in 1_i64..5) {
        let p = VelocityProfile::maxwellian(temperature).unwrap();
        let s = solve_mode(k, cosine_source(&p, k, 1e-3), 2.0, 1.0 / 32.0, &p, &Interaction::free()).unwrap();
        for (rho, src) in s.rho.iter().zip(&s.source) {
            prop_assert!((rho - src).norm() == 0.0);
        }
    }

    #[test]
    fn echo_prediction_is_consistent(k in -6_i64..7, l in -6_i64..7, tau in 0.1..20.0_f64) {
        match predict_echo_time(k, l, tau) {
            Some(t) => {
                prop_assert!(t > tau);
                prop_assert!((k as f64 * t - (k - l) as f64 * tau).abs() < 1e-9 * t.max(1.0) * k.abs() as f64);
            }
            None => prop_assert!(k == 0 || k == l || (k - l) as f64 / k as f64 <= 1.0),
        }
    }

    #[test]
    fn algebra_inequality_never_fails(seed in any::<u64>(), width in 0.0..0.3_f64, gamma in 0.0..3.0_f64) {
        let c = algebra_check(seed, 20, 6, width, gamma);
        prop_assert_eq!(c.violations, 0);
    }

    #[test]
    fn step_bound_is_respected(f_max in 0.0..1e4_f64) {
        let dt = max_stable_dt(f_max);
        prop_assert!(dt * f_max.max(1.0) <= STEP_BOUND * (1.0 + 1e-15));
    }

    #[test]
    fn level_widths_decrease(lambda in 0.01..1.0_f64, n in 0_usize..10) {
        let a = level_lambda(lambda, n);
        let b = level_lambda(lambda, n + 1);
        prop_assert!(b < a && b > 0.5 * lambda);
    }

    #[test]
    fn config_file_and_flags_agree(
        n_v in prop::sample::select(vec![64_usize, 128, 256, 1024]),
        horizon in 1_u32..40,
        amplitude in 0.0..2.0_f64,
        temperature in 0.1..4.0_f64,
    ) {
        let pairs = [
            ("grid.n_v", n_v.to_string()),
            ("run.horizon", horizon.to_string()),
            ("interaction.amplitude", format!("{amplitude:e}")),
            ("profile.temperature", format!("{temperature}")),
        ];
        let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let sets: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let from_file = ExperimentConfig::parse(Subcommand::Simulate, Some((&text, Path::new("p.conf"))), &[]).unwrap();
        let from_flags = ExperimentConfig::parse(Subcommand::Simulate, None, &sets).unwrap();
        prop_assert_eq!(from_file.resolved_text(), from_flags.resolved_text());
        let reparsed = ExperimentConfig::parse(Subcommand::Simulate, Some((&from_file.resolved_text(), Path::new("r"))), &[]).unwrap();
        prop_assert_eq!(reparsed, from_file);
    }

    #[test]
    fn assertions_parse_and_compare(metric in "[a-z][a-z_0-9]{0,12}", value in -1e6..1e6_f64, x in -1e6..1e6_f64) {
        for (op, expect) in [(">=", x >= value), ("<=", x <= value), (">", x > value), ("<", x < value)] {
            let a: Assertion = format!("{metric}{op}{value:e}").parse().unwrap();
            prop_assert_eq!(&a.metric, &metric);
            prop_assert_eq!(a.holds(x), expect);
        }
    }
}

#[test]
fn drifting_profile_moves_momentum() {
    let p = VelocityProfile::maxwellian(1.0).unwrap().with_drift(0.5);
    let g = PhaseSpaceGrid::new(8, 256, 10.0, 0.01).unwrap();
    let s = sample_initial(&p, &[], &g).unwrap();
    assert!((s.momentum() - 0.5 * s.mass()).abs() < 1e-13, "{} {}", s.momentum(), s.mass());
    assert!((s.kinetic_energy() - 0.5 * (1.0 + 0.25)).abs() < 1e-13);
    assert!(s.min_value() >= 0.0);
}
