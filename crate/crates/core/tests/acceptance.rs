//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line and then asserts.
//!
//! The benchmark is a Maxwellian of unit temperature with the repulsive interaction
//! Ŵ(k) = (1/π)/k² on a 32 × 512 grid, V = 6, dt = 1/64.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use vdl_core::linstab::{condition_a, condition_b, default_z_grid, dispersion_roots, StabilityReport, ScanOptions, SearchBox};
use vdl_core::model::{sample_initial, DistributionState, Interaction, Perturbation, PhaseSpaceGrid, VelocityProfile};
use vdl_core::newton::{newton_solve, NewtonOptions, NewtonResult};
use vdl_core::norms::{algebra_check, algebra_norm_f, hybrid_norm_z, spatial_coefficients, Lp, NormIndices};
use vdl_core::sim::{
    echo_experiment, kernel_peaks, kernel_sweep, predict_echo_time, run, EchoResult, KernelParams, Pulse, RunOptions,
    TrajectoryRecord,
};
use vdl_core::sim::step::stream_mixed;
use vdl_core::volterra::{cosine_source, fit_decay, fit_decay_samples, fit_growth, solve_mode};

const FIT_WINDOW: (f64, f64) = (0.3, 2.0);

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!("[{id}] {:<4} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn maxwellian() -> VelocityProfile {
    VelocityProfile::maxwellian(1.0).unwrap()
}

fn benchmark_w() -> Interaction {
    Interaction::repulsive(1.0 / PI).unwrap()
}

fn grid(dt: f64) -> PhaseSpaceGrid {
    PhaseSpaceGrid::new(32, 512, 6.0, dt).unwrap()
}

fn initial(eps: f64, dt: f64) -> DistributionState {
    sample_initial(&maxwellian(), &[Perturbation::new(1, eps)], &grid(dt)).unwrap()
}

struct LinearRate {
    rate: f64,
    root: f64,
    r_squared: f64,
    seconds: f64,
}

fn linear_rate() -> &'static LinearRate {
    static CELL: OnceLock<LinearRate> = OnceLock::new();
    CELL.get_or_init(|| {
        let (p, w) = (maxwellian(), benchmark_w());
        let start = Instant::now();
        let series = solve_mode(1, cosine_source(&p, 1, 1e-3), 20.0, 1.0 / 64.0, &p, &w).unwrap();
        let fit = fit_decay(&series, FIT_WINDOW).unwrap();
        let roots = dispersion_roots(1, &p, &w, SearchBox::for_profile(&p), 24).unwrap();
        let seconds = start.elapsed().as_secs_f64();
        LinearRate {
            rate: fit.rate,
            root: roots.dominant().unwrap().decay_rate(),
            r_squared: fit.r_squared,
            seconds,
        }
    })
}

struct BenchmarkRun {
    record: TrajectoryRecord,
    seconds: f64,
}

fn benchmark_run(eps: f64, dt: f64) -> BenchmarkRun {
    let start = Instant::now();
    let opts = RunOptions { horizon: 20.0, dt, k_out: 2, ..Default::default() };
    let out = run(&initial(eps, dt), &benchmark_w(), &opts).unwrap().into_result().unwrap();
    BenchmarkRun { record: out.record, seconds: start.elapsed().as_secs_f64() }
}

fn reference_run() -> &'static BenchmarkRun {
    static CELL: OnceLock<BenchmarkRun> = OnceLock::new();
    CELL.get_or_init(|| benchmark_run(1e-3, 1.0 / 64.0))
}

fn nonlinear_rate(record: &TrajectoryRecord) -> f64 {
    fit_decay_samples(&record.times(), &record.mode_amplitudes(1), FIT_WINDOW).unwrap().rate
}

#[test]
fn c1_linear_consistency() {
    let lr = linear_rate();
    let err = (lr.rate - lr.root).abs() / lr.root;
    let ok = err < 0.05 && lr.r_squared >= 0.99 && lr.seconds < 10.0;
    report(
        1,
        "linear consistency",
        ok,
        format!(
            "fit rate {:.5}, root rate {:.5}, rel err {:.2e}, R² {:.6}, {:.2} s",
            lr.rate, lr.root, err, lr.r_squared, lr.seconds
        ),
    );
    assert!(ok);
}

#[test]
fn c2_nonlinear_damping() {
    let lr = linear_rate();
    let run = reference_run();
    let rate = nonlinear_rate(&run.record);
    let err = (rate - lr.rate).abs() / lr.rate;
    let rise = run.record.envelope_increase(1, 2.0);
    let ok = err < 0.10 && rise <= 0.05 && run.seconds < 300.0;
    report(
        2,
        "nonlinear Landau damping",
        ok,
        format!(
            "rate {rate:.5} vs linear {:.5} (rel err {err:.2e}), envelope rise after t=2 {rise:.2e}, {:.2} s",
            lr.rate, run.seconds
        ),
    );
    assert!(ok);
}

#[test]
fn c3_perturbative_regime() {
    let big = nonlinear_rate(&reference_run().record);
    let small = nonlinear_rate(&benchmark_run(1e-4, 1.0 / 64.0).record);
    let change = (small - big).abs() / big;
    let ok = change < 0.02;
    report(3, "perturbative regime", ok, format!("rate {big:.6} at 1e-3, {small:.6} at 1e-4, change {change:.2e}"));
    assert!(ok);
}

#[test]
fn c4_free_transport_exactness() {
    // V = 8 keeps the Maxwellian tail below roundoff; mode 3 recurs at 32/3, so stop at 5.
    let g = PhaseSpaceGrid::new(32, 512, 8.0, 1.0 / 64.0).unwrap();
    let p = maxwellian();
    let pert = [Perturbation::new(1, 0.1), Perturbation::new(2, 0.05), Perturbation::new(3, 0.02)];
    let fi = sample_initial(&p, &pert, &g).unwrap();
    let opts = RunOptions { horizon: 5.0, k_out: 3, ..Default::default() };
    let out = run(&fi, &Interaction::free(), &opts).unwrap().into_result().unwrap();
    let mut worst = 0.0_f64;
    for row in &out.record.rows {
        for (i, pm) in pert.iter().enumerate() {
            let k = pm.mode as f64;
            let exact = 0.5 * pm.amplitude * p.fourier(k * row.time).unwrap();
            worst = worst.max((row.modes[i] - exact).norm());
        }
    }
    let ok = worst <= 1e-10;
    report(4, "free-transport exactness", ok, format!("max |rho(t,k) - f_i(k,kt)| = {worst:.2e} over k = 1..3"));
    assert!(ok);
}

#[test]
fn c5_conservation() {
    let rec = &reference_run().record;
    let mass = rec.relative_drift(|d| d.mass);
    let l2 = rec.relative_drift(|d| d.l2);
    let energy = rec.relative_drift(|d| d.energy);
    let momentum = rec.momentum_drift();
    let fine = benchmark_run(1e-3, 1.0 / 128.0).record.relative_drift(|d| d.energy);
    let ratio = energy / fine;
    let ok = mass < 1e-12 && l2 < 1e-8 && energy < 1e-4 && momentum < 1e-4 && (3.0..=5.0).contains(&ratio);
    report(
        5,
        "conservation",
        ok,
        format!(
            "mass {mass:.1e}, L² {l2:.1e}, energy {energy:.2e}, momentum {momentum:.1e}, dt-halving energy ratio {ratio:.3}"
        ),
    );
    assert!(ok);
}

#[test]
fn c6_norm_identities() {
    // (i) x-only data.
    let g = PhaseSpaceGrid::new(16, 128, 8.0, 0.01).unwrap();
    let gx = |x: f64| 1.0 + 0.5 * (2.0 * PI * x).cos() + 0.25 * (4.0 * PI * x).sin() - 0.1 * (8.0 * PI * x).cos();
    let s = DistributionState::from_fn(g, 0.0, |x, _| gx(x));
    let idx = NormIndices { lambda: 0.05, mu: 0.03, gamma: 2.0, p: Lp::Infinity, tau: 1.3, ..Default::default() };
    let z = hybrid_norm_z(&s, &idx, 200, 1e-15).unwrap();
    let c = spatial_coefficients(&(0..g.n_x).map(|i| gx(g.x(i))).collect::<Vec<_>>());
    let f = algebra_norm_f(&c, idx.lambda * idx.tau + idx.mu, idx.gamma, false);
    let x_only = (z.value - f).abs() / f;

    // (ii) gliding invariance: free transport by t shifts τ by t.
    let g = PhaseSpaceGrid::new(16, 256, 8.0, 0.01).unwrap();
    let p = maxwellian();
    let fi = sample_initial(&p, &[Perturbation::new(1, 0.2), Perturbation::new(3, 0.1)], &g).unwrap();
    let mut gliding = 0.0_f64;
    for t in [0.25, 0.5, 1.0] {
        let mut mixed = fi.mixed().to_vec();
        stream_mixed(&g, &mut mixed, t);
        let moved = DistributionState::from_mixed(g, t, mixed).unwrap();
        for p_norm in [Lp::One, Lp::Two, Lp::Infinity] {
            let base = NormIndices { lambda: 0.1, mu: 0.02, gamma: 1.0, p: p_norm, tau: 0.4, ..Default::default() };
            let glided = NormIndices { tau: base.tau + t, ..base };
            let a = hybrid_norm_z(&fi, &base, 200, 1e-15).unwrap().value;
            let b = hybrid_norm_z(&moved, &glided, 200, 1e-15).unwrap().value;
            let c = hybrid_norm_z(&moved, &NormIndices { tau: base.tau - t, ..base }, 200, 1e-15).unwrap().value;
            gliding = gliding.max(((a - b).abs() / a).min((a - c).abs() / a));
        }
    }

    // (iii) algebra inequality.
    let check = algebra_check(2024, 200, 8, 0.1, 1.0);

    let ok = x_only <= 1e-12 && gliding <= 1e-8 && check.pairs == 200 && check.violations == 0;
    report(
        6,
        "norm identities",
        ok,
        format!(
            "x-only rel diff {x_only:.1e}, gliding rel diff {gliding:.1e}, algebra {}/{} violations (worst ratio {:.4})",
            check.violations, check.pairs, check.worst_ratio
        ),
    );
    assert!(ok);
}

fn echo_run(dt: f64, stride: usize, amplitude: f64) -> EchoResult {
    let base = sample_initial(&maxwellian(), &[], &grid(dt)).unwrap();
    let p1 = Pulse { mode: 1, amplitude, time: 0.0 };
    let p2 = Pulse { mode: 3, amplitude, time: 5.0 };
    let opts = RunOptions { horizon: 10.0, dt, stride, k_out: 4, ..Default::default() };
    echo_experiment(&base, &benchmark_w(), p1, p2, &opts).unwrap()
}

#[test]
fn c7_echo() {
    let predicted = predict_echo_time(2, -1, 5.0).unwrap();
    let mut lines = Vec::new();
    let mut within = true;
    let mut times = Vec::new();
    for (dt, stride) in [(1.0 / 32.0, 1), (1.0 / 64.0, 1), (1.0 / 128.0, 1), (1.0 / 128.0, 2), (1.0 / 128.0, 4)] {
        let res = echo_run(dt, stride, 1e-3);
        let peak = res.for_mode(2).expect("echo in mode 2");
        let strides = (peak.time - predicted).abs() / res.stride_time;
        within &= strides <= 2.0;
        lines.push(format!("dt 1/{:.0} stride {stride}: {:.4} ({strides:.2} strides)", 1.0 / dt, peak.time));
        times.push(peak.time);
    }
    // Successive dt refinements (first three runs) must not move the measurement further apart.
    let d1 = (times[0] - times[1]).abs();
    let d2 = (times[1] - times[2]).abs();
    let converging = d2 <= d1.max(1e-3);
    // Stride refinement at fixed dt must approach the same time.
    let stride_spread = times[2..].iter().fold(0.0_f64, |m, t| m.max((t - times[2]).abs()));
    let stride_ok = stride_spread <= 2.0 / 128.0;

    let full = echo_run(1.0 / 64.0, 1, 1e-3).for_mode(2).unwrap().amplitude;
    let half = echo_run(1.0 / 64.0, 1, 5e-4).for_mode(2).unwrap().amplitude;
    let ratio = full / half;
    let quadratic = (ratio - 4.0).abs() <= 0.8;

    let params = KernelParams { dlambda: 0.1, dmu: 0.0, gamma: 1.0, cutoff: 4 };
    let mut kernel_ok = true;
    let mut kernel_peaks_seen = 0;
    let mut kernel_worst = 0.0_f64;
    for t in [10.0, 20.0, 40.0] {
        let n = 2000;
        let sweep = kernel_sweep(t, n, params).unwrap();
        let peaks = kernel_peaks(t, &sweep);
        kernel_ok &= !peaks.is_empty();
        for (tau, v, _) in &peaks {
            let resonance = v.k as f64 * t / (v.k - v.l) as f64;
            kernel_worst = kernel_worst.max((tau - resonance).abs() / (t / n as f64));
            kernel_peaks_seen += 1;
        }
    }
    kernel_ok &= kernel_worst <= 1.0;

    let ok = within && converging && stride_ok && quadratic && kernel_ok;
    report(
        7,
        "plasma echo",
        ok,
        format!(
            "predicted {predicted}; {}; dt diffs {d1:.2e} then {d2:.2e}; stride spread {stride_spread:.2e}; amplitude ratio {ratio:.3}; {kernel_peaks_seen} kernel peaks, worst offset {kernel_worst:.2} resolution cells",
            lines.join(", ")
        ),
    );
    assert!(ok);
}

fn newton_benchmark(dt: f64) -> (NewtonResult, DistributionState) {
    let fi = initial(1e-3, dt);
    let f0 = sample_initial(&maxwellian(), &[], &grid(dt)).unwrap();
    let opts = NewtonOptions { horizon: 5.0, dt, stride: 8, keep_increments: true, ..Default::default() };
    (newton_solve(&fi, &f0, &benchmark_w(), &opts).unwrap(), fi)
}

fn l2_distance(a: &DistributionState, b: &DistributionState) -> f64 {
    let cell = a.grid().dx() * a.grid().dv();
    (a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() * cell).sqrt()
}

#[test]
fn c8_newton_scheme() {
    let dt = 1.0 / 64.0;
    let (res, fi) = newton_benchmark(dt);
    let deltas: Vec<f64> = res.iterates.iter().map(|i| i.delta).collect();
    let mut contraction = 0.0_f64;
    for w in deltas.windows(2).take(3) {
        if w[0] > 1e-8 {
            contraction = contraction.max(w[1] / w[0].powf(1.5));
        }
    }
    let quadratic = contraction <= 1.0 && deltas.len() >= 2;

    let w = benchmark_w();
    let opts = RunOptions { horizon: 5.0, dt, ..Default::default() };
    let direct = run(&fi, &w, &opts).unwrap().into_result().unwrap().final_state;
    let fine_opts = RunOptions { dt: dt / 2.0, ..opts };
    let fine = run(&initial(1e-3, dt / 2.0), &w, &fine_opts).unwrap().into_result().unwrap().final_state;
    let distance = l2_distance(&direct, &res.final_state);
    let floor = l2_distance(&direct, &fine);
    let matches_direct = distance <= 10.0 * floor;

    // ∫h¹ dv against the Volterra solution on a 16× finer time grid.
    let p = maxwellian();
    let sub = 16;
    let series = solve_mode(1, cosine_source(&p, 1, 1e-3), 5.0, dt / sub as f64, &p, &w).unwrap();
    let h1 = &res.iterates[0].increments;
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for (m, h) in h1.iter().enumerate() {
        let reference = series.rho[m * 8 * sub];
        diff = diff.max((h.density_mode(1) - reference).norm());
        scale = scale.max(reference.norm());
    }
    let linear = diff / scale;
    let linear_ok = !h1.is_empty() && linear <= 1e-3;

    let ok = quadratic && matches_direct && linear_ok;
    report(
        8,
        "Newton scheme",
        ok,
        format!(
            "deltas {:?}, max delta_n+1/delta_n^1.5 {contraction:.2e}; direct distance {distance:.1e} vs floor {floor:.1e}; h1 vs Volterra {linear:.1e}",
            deltas.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

#[test]
fn c9_stability_criteria() {
    let (p, w) = (maxwellian(), benchmark_w());
    let bench = StabilityReport::build(&p, &w, &ScanOptions::default(), 1, 24).unwrap();
    let bench_ok = bench.condition_a.holds && bench.scan.kappa_est >= 0.5;

    let mut margin_err = 0.0_f64;
    for (t, a) in [(1.0, 1.0 / PI), (0.5, 0.2), (2.0, 1.5), (0.25, 0.01)] {
        let m = condition_b(&VelocityProfile::maxwellian(t).unwrap(), &Interaction::repulsive(a).unwrap(), 8).unwrap();
        margin_err = margin_err.max((m - a / t).abs());
    }
    let margin_ok = margin_err <= 1e-8;

    let ts = VelocityProfile::two_stream(0.05, 2.0).unwrap();
    let w5 = Interaction::repulsive(5.0).unwrap();
    let fails_a = !condition_a(&ts, &w5, &default_z_grid(&ts), 8).unwrap().holds;
    let root = *dispersion_roots(1, &ts, &w5, SearchBox::for_profile(&ts), 24).unwrap().dominant().unwrap();
    let g = PhaseSpaceGrid::new(32, 512, ts.default_velocity_cutoff(), 1.0 / 64.0).unwrap();
    let fi = sample_initial(&ts, &[Perturbation::new(1, 1e-6)], &g).unwrap();
    let out = run(&fi, &w5, &RunOptions { horizon: 3.0, k_out: 1, ..Default::default() }).unwrap().into_result().unwrap();
    let (growth, _) = fit_growth(&out.record.times(), &out.record.mode_amplitudes(1), (1.0, 3.0)).unwrap();
    let growth_err = (growth - root.growth_rate()).abs() / root.growth_rate();
    let two_stream_ok = fails_a && root.is_unstable() && growth_err <= 0.10;

    let ok = bench_ok && margin_ok && two_stream_ok;
    report(
        9,
        "stability criteria",
        ok,
        format!(
            "benchmark (a) {} kappa {:.3}; max |m - A/T| {margin_err:.1e}; two-stream (a) {}, root growth {:.4}, nonlinear growth {growth:.4} (rel err {growth_err:.2e})",
            bench.condition_a.holds,
            bench.scan.kappa_est,
            !fails_a,
            root.growth_rate()
        ),
    );
    assert!(ok);
}
