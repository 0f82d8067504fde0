//! The `vdl` experiment runner: configuration, subcommand dispatch and output files.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
//! 3 failed `--assert`.

pub mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser};
use sha2::{Digest, Sha256};

pub use config::{Assertion, ExperimentConfig, Subcommand, KEYS};

use crate::error::{Error, Result};
use crate::io::{fmt_sci, svg_line_plot, write_snapshot, CsvTable, Series};
use crate::linstab::{dispersion_roots, SearchBox, StabilityReport};
use crate::newton::{newton_solve, DeltaNorm, NewtonOptions};
use crate::norms::{algebra_check, hybrid_norm_z, norm_lambda_mu_beta, DEFAULT_N_MAX};
use crate::sim::{
    echo_experiment, kernel_mean, kernel_peaks, kernel_sweep, run, sample_grid, scattering_deviation, KernelParams,
    Pulse, RunOptions, RunOutput,
};
use crate::volterra::{cosine_source, fit_decay, fit_growth, solve_mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ASSERT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "vdl", version, about = "Landau damping laboratory for the Vlasov-Poisson equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Stability scan, sufficient conditions and dispersion roots
    Stability(Common),
    /// Linear response of one mode through the Volterra equation
    Volterra(Common),
    /// Nonlinear run with conservation diagnostics
    Simulate(Common),
    /// Two-pulse echo experiment and echo-kernel sweep
    Echo(Common),
    /// Newton iteration with per-level sizes and residuals
    Newton(Common),
    /// Analytic norms of the initial data and the algebra check
    Norms(Common),
    /// Scattering deviation of the computed characteristics
    Characteristics(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file of `key = value` lines
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set grid.n_v=256` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (falls back to $VDL_OUT, then ./vdl-out/<subcommand>)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Metric check such as `kappa>=0.5` (repeatable)
    #[arg(long = "assert", value_name = "EXPR")]
    asserts: Vec<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (Subcommand, Common) {
        match self {
            Command::Stability(c) => (Subcommand::Stability, c),
            Command::Volterra(c) => (Subcommand::Volterra, c),
            Command::Simulate(c) => (Subcommand::Simulate, c),
            Command::Echo(c) => (Subcommand::Echo, c),
            Command::Newton(c) => (Subcommand::Newton, c),
            Command::Norms(c) => (Subcommand::Norms, c),
            Command::Characteristics(c) => (Subcommand::Characteristics, c),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Parse(_) | Error::Io(_) | Error::Negativity { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Files written by a run plus its scalar metrics.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    pub metrics: BTreeMap<String, f64>,
    svg: bool,
}

impl Outputs {
    fn new(dir: &Path, svg: bool) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            metrics: BTreeMap::new(),
            svg,
        }
    }

    fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        self.write(name, table.to_csv_string()?.as_bytes())
    }

    fn plot(&mut self, name: &str, title: &str, x_label: &str, series: &[Series], log_y: bool) -> Result<()> {
        if self.svg {
            self.write(name, svg_line_plot(title, x_label, series, log_y).as_bytes())?;
        }
        Ok(())
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    fn finish(&mut self) -> Result<()> {
        let mut t = CsvTable::new(["metric", "value"]);
        let rows: Vec<Vec<String>> = self
            .metrics
            .iter()
            .map(|(k, v)| vec![k.clone(), fmt_sci(*v)])
            .collect();
        for r in rows {
            t.push_raw(r);
        }
        self.csv("metrics.csv", &t)?;
        let mut names = self.files.clone();
        names.sort();
        let mut manifest = String::new();
        for n in names {
            let bytes = std::fs::read(self.dir.join(&n))?;
            manifest.push_str(&format!("{}  {}\n", hex::encode(Sha256::digest(&bytes)), n));
        }
        std::fs::write(self.dir.join("manifest"), manifest)?;
        Ok(())
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (sub, common) = cli.command.split();
    let prepared = prepare(sub, &common);
    let (cfg, asserts, dir) = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("vdl {sub}: {e}");
            return EXIT_USAGE;
        }
    };
    let threads = common.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("vdl {sub}: thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    pool.install(|| execute(&cfg, &asserts, &dir))
}

fn prepare(sub: Subcommand, common: &Common) -> Result<(ExperimentConfig, Vec<Assertion>, PathBuf)> {
    let text = match &common.config {
        Some(p) => Some(
            std::fs::read_to_string(p)
                .map_err(|e| Error::Parse(format!("cannot read config `{}`: {e}", p.display())))?,
        ),
        None => None,
    };
    let cfg = ExperimentConfig::parse(
        sub,
        text.as_deref().zip(common.config.as_deref()),
        &common.sets,
    )?;
    let asserts = common
        .asserts
        .iter()
        .map(|a| a.parse())
        .collect::<Result<Vec<Assertion>>>()?;
    let dir = common
        .out
        .clone()
        .or_else(|| std::env::var_os("VDL_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("vdl-out").join(sub.name()));
    Ok((cfg, asserts, dir))
}

/// Runs a resolved configuration, writing into `dir`; returns the exit code.
pub fn execute(cfg: &ExperimentConfig, asserts: &[Assertion], dir: &Path) -> i32 {
    let sub = cfg.subcommand;
    if let Err(e) = std::fs::create_dir_all(dir) {
        eprintln!("vdl {sub}: cannot create `{}`: {e}", dir.display());
        return EXIT_USAGE;
    }
    let mut out = Outputs::new(dir, cfg.flag("output.svg"));
    if let Err(e) = out.write("resolved_config", cfg.resolved_text().as_bytes()) {
        eprintln!("vdl {sub}: {e}");
        return EXIT_USAGE;
    }
    let result = dispatch(cfg, &mut out);
    if let Err(e) = out.finish() {
        eprintln!("vdl {sub}: {e}");
        return EXIT_USAGE;
    }
    if let Err(e) = result {
        eprintln!("vdl {sub}: {e}");
        return exit_code(&e);
    }
    let mut code = EXIT_OK;
    for a in asserts {
        match out.metrics.get(&a.metric) {
            None => {
                let known: Vec<&str> = out.metrics.keys().map(|s| s.as_str()).collect();
                eprintln!("vdl {sub}: --assert `{}`: unknown metric; available: {}", a.text, known.join(", "));
                return EXIT_USAGE;
            }
            Some(&v) if a.holds(v) => println!("assert ok: {} ({} = {})", a.text, a.metric, fmt_sci(v)),
            Some(&v) => {
                println!("assert FAILED: {} ({} = {})", a.text, a.metric, fmt_sci(v));
                code = EXIT_ASSERT;
            }
        }
    }
    code
}

/// Runs the subcommand of `cfg`, recording files and metrics in `out`.
pub fn dispatch(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    match cfg.subcommand {
        Subcommand::Stability => stability(cfg, out),
        Subcommand::Volterra => volterra(cfg, out),
        Subcommand::Simulate => simulate(cfg, out),
        Subcommand::Echo => echo(cfg, out),
        Subcommand::Newton => newton(cfg, out),
        Subcommand::Norms => norms(cfg, out),
        Subcommand::Characteristics => characteristics(cfg, out),
    }
}

fn bool_metric(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn stability(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let profile = cfg.profile()?;
    let interaction = cfg.interaction()?;
    let report = StabilityReport::build(
        &profile,
        &interaction,
        &cfg.scan_options(),
        cfg.int("stability.root_modes"),
        cfg.count("stability.seeds"),
    )?;
    out.csv("stability.csv", &report.to_csv())?;
    println!("{}", report.summary());
    out.metric("kappa", report.scan.kappa_est);
    out.metric("condl_pass", bool_metric(report.scan.passed()));
    out.metric("argmin_k", report.scan.argmin_k as f64);
    out.metric("condition_a", bool_metric(report.condition_a.holds));
    out.metric("condition_b", report.condition_b);
    out.metric("roots_found", report.roots.len() as f64);
    if let Some(r) = report.roots.iter().max_by(|a, b| a.growth_rate().total_cmp(&b.growth_rate())) {
        out.metric("root_k", r.k as f64);
        out.metric("growth_rate", r.growth_rate());
        out.metric("decay_rate", r.decay_rate());
        out.metric("frequency", r.frequency());
        out.metric("unstable", bool_metric(r.is_unstable()));
    }
    Ok(())
}

fn fit_window(cfg: &ExperimentConfig) -> (f64, f64) {
    (cfg.real("fit.start"), cfg.real("fit.end"))
}

fn volterra(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let profile = cfg.profile()?;
    let interaction = cfg.interaction()?;
    let k = cfg.int("volterra.k");
    let amp = cfg.real("perturbation.amplitude");
    let series = solve_mode(
        k,
        cosine_source(&profile, k, amp),
        cfg.real("run.horizon"),
        cfg.real("run.dt"),
        &profile,
        &interaction,
    )?;
    out.csv(&format!("volterra_k{k}.csv"), &series.to_csv())?;
    let pts: Vec<(f64, f64)> = series.times.iter().copied().zip(series.amplitudes()).collect();
    out.plot(
        &format!("volterra_k{k}.svg"),
        &format!("|rho(t,{k})| from the Volterra equation"),
        "t",
        &[Series { name: format!("|rho_{k}|"), points: pts }],
        true,
    )?;
    let window = fit_window(cfg);
    match fit_decay(&series, window) {
        Ok(fit) => {
            out.metric("decay_rate", fit.rate);
            out.metric("frequency", fit.frequency);
            out.metric("r_squared", fit.r_squared);
            out.metric("non_exponential", bool_metric(fit.non_exponential));
            if profile.lambda0().is_infinite() {
                let roots = dispersion_roots(k, &profile, &interaction, SearchBox::for_profile(&profile), 24)?;
                if let Some(r) = roots.dominant() {
                    out.metric("root_decay_rate", r.decay_rate());
                    out.metric("rate_error", (fit.rate - r.decay_rate()).abs() / r.decay_rate().abs());
                }
            }
        }
        Err(e) => eprintln!("vdl volterra: no decay fit: {e}"),
    }
    if let Ok((g, r2)) = fit_growth(&series.times, &series.amplitudes(), window) {
        out.metric("growth_rate", g);
        out.metric("growth_r_squared", r2);
    }
    Ok(())
}

fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    RunOptions {
        horizon: cfg.real("run.horizon"),
        dt: cfg.real("run.dt"),
        stride: cfg.count("run.stride"),
        filter: cfg.flag("run.filter"),
        k_out: cfg.count("run.k_out"),
        cr_order: cfg.real("run.cr_order"),
        keep_states: false,
        allow_recurrence: cfg.flag("run.allow_recurrence"),
    }
}

fn write_run(cfg: &ExperimentConfig, out: &mut Outputs, run: &RunOutput) -> Result<()> {
    let rec = &run.record;
    out.csv("trajectory.csv", &rec.to_csv())?;
    out.csv("averages.csv", &rec.averages_csv(&run.final_state.grid().velocities()))?;
    if rec.rows.is_empty() {
        return Ok(());
    }
    out.plot("modes.svg", "log |rho(t,k)|", "t", &rec.mode_series(), true)?;
    out.plot("drift.svg", "relative drift of conserved quantities", "t", &rec.drift_series(), true)?;
    out.metric("rows", rec.rows.len() as f64);
    out.metric("final_time", rec.rows.last().map_or(0.0, |r| r.time));
    out.metric("mass_drift", rec.relative_drift(|d| d.mass));
    out.metric("l2_drift", rec.relative_drift(|d| d.l2));
    out.metric("energy_drift", rec.relative_drift(|d| d.energy));
    out.metric("momentum_drift", rec.momentum_drift());
    if cfg.flag("run.snapshot") && run.failure.is_none() {
        write_snapshot(out.dir.join("final_state.bin"), &run.final_state)?;
        out.files.push("final_state.bin".into());
    }
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let state = cfg.initial_state()?;
    let interaction = cfg.interaction()?;
    let result = run(&state, &interaction, &run_options(cfg))?;
    write_run(cfg, out, &result)?;
    let k = cfg.int("perturbation.mode").unsigned_abs() as usize;
    let rec = &result.record;
    if k <= cfg.count("run.k_out") && rec.rows.len() > 4 {
        let window = fit_window(cfg);
        let times = rec.times();
        let amps = rec.mode_amplitudes(k);
        if let Ok(fit) = crate::volterra::fit_decay_samples(&times, &amps, window) {
            out.metric("decay_rate", fit.rate);
            out.metric("frequency", fit.frequency);
            out.metric("r_squared", fit.r_squared);
        }
        if let Ok((g, r2)) = fit_growth(&times, &amps, window) {
            out.metric("growth_rate", g);
            out.metric("growth_r_squared", r2);
        }
        out.metric("envelope_increase", rec.envelope_increase(k, window.0));
        out.metric("noise_level", rec.noise_level(k));
    }
    match result.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn echo(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let params = KernelParams {
        dlambda: cfg.real("echo.kernel_dlambda"),
        dmu: cfg.real("echo.kernel_dmu"),
        gamma: cfg.real("echo.kernel_gamma"),
        cutoff: cfg.int("echo.kernel_cutoff"),
    };
    let t = cfg.real("echo.kernel_t");
    let n = cfg.count("echo.kernel_samples");
    let sweep = kernel_sweep(t, n, params)?;
    let mut table = CsvTable::new(["tau", "kernel", "k", "l"]);
    for (tau, v) in &sweep {
        table.push_raw(vec![fmt_sci(*tau), fmt_sci(v.value), v.k.to_string(), v.l.to_string()]);
    }
    out.csv("kernel.csv", &table)?;
    let peaks = kernel_peaks(t, &sweep);
    let mut table = CsvTable::new(["tau", "kernel", "k", "l", "resonance"]);
    let mut worst = 0.0_f64;
    for (tau, v, res) in &peaks {
        worst = worst.max((tau - res).abs());
        table.push_raw(vec![fmt_sci(*tau), fmt_sci(v.value), v.k.to_string(), v.l.to_string(), fmt_sci(*res)]);
    }
    out.csv("kernel_peaks.csv", &table)?;
    out.plot(
        "kernel.svg",
        &format!("echo kernel at t = {t}"),
        "tau",
        &[Series { name: "K(t,tau)".into(), points: sweep.iter().map(|(tau, v)| (*tau, v.value)).collect() }],
        true,
    )?;
    out.metric("kernel_peaks", peaks.len() as f64);
    out.metric("kernel_max_offset", worst);
    out.metric("kernel_resolution", t / n as f64);
    out.metric("kernel_mean", kernel_mean(t, n, params)?);

    let base = cfg.equilibrium()?;
    let interaction = cfg.interaction()?;
    let p1 = Pulse { mode: cfg.int("echo.mode1"), amplitude: cfg.real("echo.amplitude1"), time: 0.0 };
    let p2 = Pulse { mode: cfg.int("echo.mode2"), amplitude: cfg.real("echo.amplitude2"), time: cfg.real("echo.time2") };
    let res = echo_experiment(&base, &interaction, p1, p2, &run_options(cfg))?;
    out.csv("trajectory.csv", &res.record.to_csv())?;
    out.plot("modes.svg", "log |rho(t,k)|", "t", &res.record.mode_series(), true)?;
    let mut table = CsvTable::new(["k", "time", "max_time", "amplitude", "source_mode", "predicted"]);
    for p in &res.peaks {
        table.push_raw(vec![
            p.k.to_string(),
            fmt_sci(p.time),
            fmt_sci(p.max_time),
            fmt_sci(p.amplitude),
            p.source_mode.to_string(),
            p.predicted.map_or_else(|| "none".into(), fmt_sci),
        ]);
    }
    out.csv("echo_peaks.csv", &table)?;
    if let Some(p) = res.peaks.iter().find(|p| p.predicted.is_some()) {
        let predicted = p.predicted.expect("filtered");
        out.metric("echo_k", p.k as f64);
        out.metric("echo_time", p.time);
        out.metric("echo_predicted", predicted);
        out.metric("echo_error_strides", (p.time - predicted).abs() / res.stride_time);
        out.metric("echo_amplitude", p.amplitude);
    }
    out.metric("noise_floor", res.noise_floor);
    Ok(())
}

fn newton(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let fi = cfg.initial_state()?;
    let f0 = cfg.equilibrium()?;
    let interaction = cfg.interaction()?;
    let norm = match cfg.text("newton.norm") {
        "z" => DeltaNorm::Z { indices: cfg.norm_indices()?, n_max: cfg.count("norms.n_max") },
        _ => DeltaNorm::L1PlusLinf,
    };
    let opts = NewtonOptions {
        n_max: cfg.count("newton.n_max"),
        horizon: cfg.real("newton.horizon"),
        dt: cfg.real("run.dt"),
        stride: cfg.count("newton.stride"),
        norm,
        tolerance: cfg.real("newton.tolerance"),
        keep_increments: false,
    };
    let res = newton_solve(&fi, &f0, &interaction, &opts)?;
    out.csv("newton.csv", &res.to_csv())?;
    let deltas: Vec<(f64, f64)> = res.iterates.iter().map(|i| (i.level as f64, i.delta)).collect();
    let resid: Vec<(f64, f64)> = res.iterates.iter().map(|i| (i.level as f64, i.residual)).collect();
    out.plot(
        "newton.svg",
        "Newton level sizes",
        "n",
        &[Series { name: "delta_n".into(), points: deltas }, Series { name: "r_n".into(), points: resid }],
        true,
    )?;
    for it in &res.iterates {
        eprintln!("vdl newton: level {} took {:.3} s", it.level, it.wall_seconds);
        out.metric(format!("delta_{}", it.level), it.delta);
        out.metric(format!("residual_{}", it.level), it.residual);
    }
    out.metric("levels", res.iterates.len() as f64);
    out.metric("converged", bool_metric(res.converged));
    out.metric(
        "min_partial_sum",
        res.iterates.iter().map(|i| i.min_partial_sum).fold(f64::INFINITY, f64::min),
    );
    let contraction = res
        .iterates
        .windows(2)
        .filter(|w| w[0].delta > 1e-8)
        .map(|w| w[1].delta / w[0].delta.powf(1.5))
        .fold(0.0, f64::max);
    out.metric("max_contraction", contraction);
    if cfg.flag("newton.compare") {
        let ropts = RunOptions { horizon: opts.horizon, ..run_options(cfg) };
        let direct = run(&fi, &interaction, &ropts)?.into_result()?;
        let diff = direct.final_state.sub(&res.final_state)?;
        out.metric("direct_distance", diff.l2_squared().sqrt());
    }
    Ok(())
}

fn norms(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let state = cfg.initial_state()?;
    let idx = cfg.norm_indices()?;
    let z = hybrid_norm_z(&state, &idx, cfg.count("norms.n_max").max(1).min(DEFAULT_N_MAX * 10), 1e-14)?;
    let w = norm_lambda_mu_beta(&state, idx.lambda, idx.mu, idx.beta)?;
    let check = algebra_check(
        cfg.int("seed") as u64,
        cfg.count("norms.pairs"),
        cfg.count("norms.degree"),
        idx.lambda * idx.tau + idx.mu,
        idx.gamma,
    );
    let mut t = CsvTable::new(["quantity", "value"]);
    let rows = [
        ("z_norm", z.value),
        ("z_converged", bool_metric(z.converged)),
        ("z_tail", z.tail),
        ("z_shells", z.shells as f64),
        ("weighted_norm", w.value),
        ("weighted_sup_term", w.sup_term),
        ("weighted_integral_term", w.integral_term),
        ("weighted_truncation_dominated", bool_metric(w.truncation_dominated)),
        ("algebra_pairs", check.pairs as f64),
        ("algebra_violations", check.violations as f64),
        ("algebra_worst_ratio", check.worst_ratio),
    ];
    for (k, v) in rows {
        t.push_raw(vec![k.to_string(), fmt_sci(v)]);
        out.metric(k, v);
    }
    out.csv("norms.csv", &t)?;
    Ok(())
}

fn characteristics(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let state = cfg.initial_state()?;
    let interaction = cfg.interaction()?;
    let opts = run_options(cfg);
    let result = run(&state, &interaction, &opts)?.into_result()?;
    let history = &result.forces;
    let t0 = state.time();
    let end = opts.horizon + t0;
    let samples = sample_grid(
        cfg.count("characteristics.samples_x"),
        cfg.count("characteristics.samples_v"),
        cfg.real("characteristics.v_sample"),
    );
    let amps = history.amplitudes(4 * state.grid().n_x);
    let force_on = |a: f64, b: f64| {
        history
            .times
            .iter()
            .zip(&amps)
            .filter(|(s, _)| **s >= a - 1e-12 && **s <= b + 1e-12)
            .fold(0.0_f64, |m, (_, f)| m.max(*f))
    };
    let header = ["tau", "t", "deviation", "deviation_over_min_gap_1", "max_force"];

    let gap = cfg.real("characteristics.gap");
    if gap > opts.horizon {
        return Err(Error::invalid("characteristics.gap exceeds run.horizon"));
    }
    let count = cfg.count("characteristics.count");
    let mut table = CsvTable::new(header);
    let mut fixed_gap = Vec::new();
    for i in 0..count {
        let tau = if count == 1 { t0 } else { t0 + (end - gap - t0) * i as f64 / (count - 1) as f64 };
        let d = scattering_deviation(history, tau + gap, tau, &samples)?;
        let f = force_on(tau, tau + gap);
        table.push_numeric(&[tau, tau + gap, d.sup, d.sup / gap.min(1.0), f]);
        fixed_gap.push((d.sup, f));
    }
    out.csv("scattering_fixed_gap.csv", &table)?;
    let bound_ratio = fixed_gap
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|(d, f)| d / (f * gap.max(0.5 * gap * gap)))
        .fold(0.0, f64::max);
    out.metric("force_bound_ratio", bound_ratio);
    out.metric("max_deviation", fixed_gap.iter().map(|p| p.0).fold(0.0, f64::max));

    let tau = cfg.real("characteristics.tau") + t0;
    let mut table = CsvTable::new(header);
    let mut ratios = Vec::new();
    for j in 0..cfg.count("characteristics.gaps") {
        let g = 0.125 * 2f64.powi(j as i32);
        if tau + g > end + 1e-12 {
            break;
        }
        let d = scattering_deviation(history, tau + g, tau, &samples)?;
        let ratio = d.sup / g.min(1.0);
        table.push_numeric(&[tau, tau + g, d.sup, ratio, force_on(tau, tau + g)]);
        ratios.push(ratio);
    }
    out.csv("scattering_shape.csv", &table)?;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    out.metric("ratio_max", hi);
    out.metric("ratio_spread", if lo > 0.0 { hi / lo } else { f64::INFINITY });
    Ok(())
}
