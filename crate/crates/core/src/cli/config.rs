//! Flat `key = value` experiment configuration with typed, range-checked keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linstab::ScanOptions;
use crate::model::{
    sample_initial, DistributionState, Interaction, InteractionSign, Perturbation, PhaseSpaceGrid,
    VelocityProfile,
};
use crate::norms::{Lp, NormIndices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Subcommand {
    Stability,
    Volterra,
    Simulate,
    Echo,
    Newton,
    Norms,
    Characteristics,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Stability,
        Subcommand::Volterra,
        Subcommand::Simulate,
        Subcommand::Echo,
        Subcommand::Newton,
        Subcommand::Norms,
        Subcommand::Characteristics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Stability => "stability",
            Subcommand::Volterra => "volterra",
            Subcommand::Simulate => "simulate",
            Subcommand::Echo => "echo",
            Subcommand::Newton => "newton",
            Subcommand::Norms => "norms",
            Subcommand::Characteristics => "characteristics",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown subcommand `{s}`")))
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    /// Real in (lo, ∞) when `open`, [lo, ∞) otherwise, capped at `hi`.
    Real { lo: f64, open: bool, hi: f64 },
    /// Like `Real`, or the literal `auto`.
    RealOrAuto { lo: f64, open: bool, hi: f64 },
    Int { lo: i64, hi: i64, nonzero: bool },
    PowerOfTwo { lo: usize, hi: usize },
    Flag,
    Choice(&'static [&'static str]),
    /// Existing file path, or empty for none.
    File,
}

const ANY: f64 = f64::INFINITY;

const fn real(lo: f64, open: bool, hi: f64) -> Kind {
    Kind::Real { lo, open, hi }
}

const fn int(lo: i64, hi: i64) -> Kind {
    Kind::Int { lo, hi, nonzero: false }
}

/// One configuration key with its default.
pub struct KeySpec {
    pub key: &'static str,
    kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

macro_rules! keys {
    ($($key:literal : $kind:expr, $default:literal, $help:literal;)*) => {
        &[$(KeySpec { key: $key, kind: $kind, default: $default, help: $help }),*]
    };
}

/// Every accepted key; anything else is rejected.
pub static KEYS: &[KeySpec] = keys! {
    "seed": int(0, i64::MAX), "0", "seed of randomized checks";
    "profile.kind": Kind::Choice(&["maxwellian", "two_stream", "tabulated"]), "maxwellian", "equilibrium family";
    "profile.temperature": real(0.0, true, ANY), "1", "temperature (per beam for two_stream)";
    "profile.beam_speed": real(0.0, false, ANY), "2", "two_stream beam speed v0";
    "profile.drift": real(-ANY, false, ANY), "0", "mean velocity shift";
    "profile.file": Kind::File, "", "two-column CSV (v, f) for tabulated profiles";
    "interaction.kind": Kind::Choice(&["power", "free", "tabulated"]), "power", "interaction family";
    "interaction.sign": Kind::Choice(&["repulsive", "attractive"]), "repulsive", "sign of W for power laws";
    "interaction.amplitude": real(0.0, false, ANY), "0.3183098861837907", "A in W(k) = ±A/|k|^(1+gamma)";
    "interaction.gamma": real(1.0, false, ANY), "1", "decay exponent gamma >= 1";
    "interaction.file": Kind::File, "", "two-column CSV (k, W(k)) for tabulated interactions";
    "grid.n_x": Kind::PowerOfTwo { lo: 8, hi: 1 << 14 }, "32", "spatial modes";
    "grid.n_v": Kind::PowerOfTwo { lo: 8, hi: 1 << 16 }, "512", "velocity nodes";
    "grid.v_max": Kind::RealOrAuto { lo: 0.0, open: true, hi: ANY }, "auto", "velocity cutoff V (auto: |u|+|v0|+6 sqrt(T))";
    "run.horizon": real(0.0, true, 1e6), "20", "final time";
    "run.dt": real(0.0, true, 1.0), "0.015625", "time step";
    "run.stride": int(1, 1 << 30), "1", "steps between outputs";
    "run.filter": Kind::Flag, "false", "smooth high-eta filter";
    "run.k_out": int(1, 1 << 12), "4", "recorded density modes";
    "run.cr_order": real(0.0, false, ANY), "1", "order r of the C^r proxy";
    "run.allow_recurrence": Kind::Flag, "false", "lift the recurrence-time guard";
    "run.snapshot": Kind::Flag, "false", "write the final state as a binary snapshot";
    "perturbation.mode": Kind::Int { lo: -(1 << 12), hi: 1 << 12, nonzero: true }, "1", "mode l of the initial density packet";
    "perturbation.amplitude": real(0.0, false, 1.0), "0.001", "amplitude of the packet (1 + a cos(2 pi l x))";
    "fit.start": real(0.0, false, ANY), "0.3", "start of the rate-fit window";
    "fit.end": real(0.0, true, ANY), "2", "end of the rate-fit window";
    "stability.k_max": int(1, 1 << 12), "8", "largest mode of the scan";
    "stability.lambda": real(0.0, true, ANY), "0.3", "width of the scanned strip";
    "stability.n_re": int(2, 1 << 14), "64", "scan points along Re xi";
    "stability.n_im": int(2, 1 << 14), "64", "scan points along Im xi";
    "stability.kappa_required": real(0.0, false, 1.0), "0.5", "required margin kappa";
    "stability.root_modes": int(0, 64), "3", "modes with a dispersion-root search";
    "stability.seeds": int(1, 4096), "24", "Newton seeds per root search";
    "volterra.k": Kind::Int { lo: -(1 << 12), hi: 1 << 12, nonzero: true }, "1", "mode of the Volterra solve";
    "norms.lambda": real(0.0, false, ANY), "0.1", "analytic width lambda";
    "norms.mu": real(0.0, false, ANY), "0", "spatial width mu";
    "norms.gamma": real(0.0, false, ANY), "0", "Sobolev correction gamma";
    "norms.p": Kind::Choice(&["1", "2", "inf"]), "1", "velocity Lebesgue exponent";
    "norms.tau": real(-ANY, false, ANY), "0", "gliding time tau";
    "norms.beta": real(0.0, false, ANY), "0", "velocity weight beta";
    "norms.b": real(0.0, false, ANY), "0", "index shift b";
    "norms.n_max": int(1, 400), "40", "derivative shells of the Z norm";
    "norms.pairs": int(0, 1 << 20), "200", "random pairs of the algebra check";
    "norms.degree": int(1, 1 << 10), "8", "degree of the random trigonometric polynomials";
    "echo.mode1": Kind::Int { lo: -(1 << 12), hi: 1 << 12, nonzero: true }, "1", "mode of the first kick";
    "echo.amplitude1": real(-ANY, false, ANY), "0.001", "potential amplitude of the first kick";
    "echo.mode2": Kind::Int { lo: -(1 << 12), hi: 1 << 12, nonzero: true }, "3", "mode of the second kick";
    "echo.amplitude2": real(-ANY, false, ANY), "0.001", "potential amplitude of the second kick";
    "echo.time2": real(0.0, true, ANY), "5", "time of the second kick";
    "echo.kernel_t": real(0.0, true, ANY), "30", "time t of the kernel sweep";
    "echo.kernel_dlambda": real(0.0, true, ANY), "0.1", "lambda gap of the kernel";
    "echo.kernel_dmu": real(0.0, false, ANY), "0", "mu gap of the kernel";
    "echo.kernel_gamma": real(0.0, false, ANY), "1", "gamma of the kernel";
    "echo.kernel_cutoff": int(1, 1 << 10), "4", "mode cutoff of the kernel supremum";
    "echo.kernel_samples": int(2, 1 << 22), "3000", "tau panels of the kernel sweep";
    "newton.n_max": int(1, 6), "4", "Newton levels";
    "newton.norm": Kind::Choice(&["l1+linf", "z"]), "l1+linf", "norm of delta_n";
    "newton.tolerance": real(0.0, false, ANY), "1e-13", "stop once delta_n falls below";
    "newton.horizon": real(0.0, true, 1e6), "5", "final time of the Newton levels";
    "newton.stride": int(1, 1 << 30), "8", "steps between stored times";
    "newton.compare": Kind::Flag, "true", "compare with a direct run";
    "characteristics.gap": real(0.0, true, ANY), "1", "t - tau of the scattering sweep";
    "characteristics.count": int(1, 1 << 16), "10", "tau values of the fixed-gap sweep";
    "characteristics.tau": real(0.0, false, ANY), "0.5", "source time of the doubling-gap sweep";
    "characteristics.gaps": int(1, 40), "7", "gaps 1/8, 1/4, ... of the doubling-gap sweep";
    "characteristics.samples_x": int(1, 1 << 12), "16", "sample points in x";
    "characteristics.samples_v": int(1, 1 << 12), "16", "sample points in v";
    "characteristics.v_sample": real(0.0, false, ANY), "3", "velocity half-range of the samples";
    "output.svg": Kind::Flag, "true", "write SVG plots";
};

fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.key == key)
}

fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

/// Validates `raw` for `key` and returns its canonical text.
fn canonical(key: &str, raw: &str, files_relative_to: Option<&Path>) -> std::result::Result<String, String> {
    let spec = spec(key).ok_or_else(|| format!("unknown key `{key}`"))?;
    let raw = raw.trim();
    let real_in = |lo: f64, open: bool, hi: f64| -> std::result::Result<String, String> {
        let x: f64 = raw.parse().map_err(|_| format!("`{key}` expects a number, got `{raw}`"))?;
        let ok = x.is_finite() && (if open { x > lo } else { x >= lo }) && x <= hi;
        if !ok {
            let lb = if open { "(" } else { "[" };
            return Err(format!("`{key}` = {raw} is out of range {lb}{lo}, {hi}]"));
        }
        Ok(fmt_real(x))
    };
    match spec.kind {
        Kind::Real { lo, open, hi } => real_in(lo, open, hi),
        Kind::RealOrAuto { lo, open, hi } => {
            if raw == "auto" {
                Ok("auto".into())
            } else {
                real_in(lo, open, hi)
            }
        }
        Kind::Int { lo, hi, nonzero } => {
            let n: i64 = raw.parse().map_err(|_| format!("`{key}` expects an integer, got `{raw}`"))?;
            if n < lo || n > hi || (nonzero && n == 0) {
                let nz = if nonzero { ", nonzero" } else { "" };
                return Err(format!("`{key}` = {raw} is out of range [{lo}, {hi}]{nz}"));
            }
            Ok(n.to_string())
        }
        Kind::PowerOfTwo { lo, hi } => {
            let n: usize = raw.parse().map_err(|_| format!("`{key}` expects an integer, got `{raw}`"))?;
            if !n.is_power_of_two() || n < lo || n > hi {
                return Err(format!("`{key}` = {raw} must be a power of two in [{lo}, {hi}]"));
            }
            Ok(n.to_string())
        }
        Kind::Flag => match raw {
            "true" | "yes" | "1" | "on" => Ok("true".into()),
            "false" | "no" | "0" | "off" => Ok("false".into()),
            _ => Err(format!("`{key}` expects true or false, got `{raw}`")),
        },
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(raw.to_string())
            } else {
                Err(format!("`{key}` = {raw} must be one of {}", options.join(", ")))
            }
        }
        Kind::File => {
            if raw.is_empty() {
                return Ok(String::new());
            }
            let mut path = PathBuf::from(raw);
            if path.is_relative() {
                if let Some(base) = files_relative_to {
                    path = base.join(path);
                }
            }
            if !path.is_file() {
                return Err(format!("`{key}`: file `{}` does not exist", path.display()));
            }
            Ok(path.to_string_lossy().into_owned())
        }
    }
}

/// Fully resolved configuration of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    values: BTreeMap<&'static str, String>,
}

/// Splits `key = value` at the first `=`; `#` starts a comment.
fn split_assignment(line: &str) -> Option<std::result::Result<(String, String), String>> {
    let line = line.split('#').next().unwrap_or("").trim();
    if line.is_empty() {
        return None;
    }
    Some(match line.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => Err(format!("expected `key = value`, got `{line}`")),
    })
}

impl ExperimentConfig {
    /// All keys at their defaults.
    pub fn defaults(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            values: KEYS
                .iter()
                .map(|k| {
                    let v = canonical(k.key, k.default, None).unwrap_or_else(|_| k.default.to_string());
                    (k.key, v)
                })
                .collect(),
        }
    }

    /// Parses config text (the contents of `origin`), then applies `key=value` overrides.
    pub fn parse(subcommand: Subcommand, text: Option<(&str, &Path)>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::defaults(subcommand);
        if let Some((text, origin)) = text {
            let base = origin.parent();
            let mut seen = BTreeMap::new();
            for (n, line) in text.lines().enumerate() {
                let at = format!("{}:{}", origin.display(), n + 1);
                let Some(kv) = split_assignment(line) else { continue };
                let (k, v) = kv.map_err(|e| Error::Parse(format!("{at}: {e}")))?;
                if let Some(prev) = seen.insert(k.clone(), n + 1) {
                    return Err(Error::Parse(format!("{at}: `{k}` already set on line {prev}")));
                }
                cfg.assign(&k, &v, base).map_err(|e| Error::Parse(format!("{at}: {e}")))?;
            }
        }
        for (i, o) in overrides.iter().enumerate() {
            let at = format!("--set #{} `{o}`", i + 1);
            let (k, v) = match split_assignment(o) {
                Some(kv) => kv.map_err(|e| Error::Parse(format!("{at}: {e}")))?,
                None => return Err(Error::Parse(format!("{at}: empty assignment"))),
            };
            cfg.assign(&k, &v, None).map_err(|e| Error::Parse(format!("{at}: {e}")))?;
        }
        cfg.resolve()?;
        Ok(cfg)
    }

    fn assign(&mut self, key: &str, value: &str, base: Option<&Path>) -> std::result::Result<(), String> {
        if key == "subcommand" {
            return if value == self.subcommand.name() {
                Ok(())
            } else {
                Err(format!("config is for `{value}`, invoked as `{}`", self.subcommand))
            };
        }
        let v = canonical(key, value, base)?;
        let k = spec(key).expect("validated").key;
        self.values.insert(k, v);
        Ok(())
    }

    /// Cross-key checks and replacement of `auto` values.
    fn resolve(&mut self) -> Result<()> {
        if self.real("fit.end") <= self.real("fit.start") {
            return Err(Error::Parse("`fit.end` must exceed `fit.start`".into()));
        }
        for (kind_key, file_key, needs) in [
            ("profile.kind", "profile.file", "tabulated"),
            ("interaction.kind", "interaction.file", "tabulated"),
        ] {
            if self.text(kind_key) == needs && self.text(file_key).is_empty() {
                return Err(Error::Parse(format!("`{kind_key}` = tabulated requires `{file_key}`")));
            }
        }
        if self.text("grid.v_max") == "auto" {
            let v = self.profile().map_err(|e| Error::Parse(format!("profile: {e}")))?.default_velocity_cutoff();
            self.values.insert("grid.v_max", fmt_real(v));
        }
        Ok(())
    }

    /// `key = value` lines, sorted, preceded by the subcommand.
    pub fn resolved_text(&self) -> String {
        let mut s = format!("subcommand = {}\n", self.subcommand);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn text(&self, key: &str) -> &str {
        self.values.get(key).unwrap_or_else(|| panic!("no key {key}"))
    }

    pub fn real(&self, key: &str) -> f64 {
        self.text(key).parse().unwrap_or_else(|_| panic!("{key} is not numeric"))
    }

    pub fn int(&self, key: &str) -> i64 {
        self.text(key).parse().unwrap_or_else(|_| panic!("{key} is not an integer"))
    }

    pub fn count(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn flag(&self, key: &str) -> bool {
        self.text(key) == "true"
    }

    pub fn profile(&self) -> Result<VelocityProfile> {
        let p = match self.text("profile.kind") {
            "maxwellian" => VelocityProfile::maxwellian(self.real("profile.temperature"))?,
            "two_stream" => VelocityProfile::two_stream(self.real("profile.temperature"), self.real("profile.beam_speed"))?,
            _ => VelocityProfile::from_csv(self.text("profile.file"))?,
        };
        Ok(p.with_drift(self.real("profile.drift")))
    }

    pub fn interaction(&self) -> Result<Interaction> {
        let gamma = self.real("interaction.gamma");
        match self.text("interaction.kind") {
            "free" => Ok(Interaction::free()),
            "tabulated" => Interaction::from_csv(self.text("interaction.file"), gamma),
            _ => {
                let sign = if self.text("interaction.sign") == "attractive" {
                    InteractionSign::Attractive
                } else {
                    InteractionSign::Repulsive
                };
                Interaction::power(sign, self.real("interaction.amplitude"), gamma)
            }
        }
    }

    pub fn grid(&self) -> Result<PhaseSpaceGrid> {
        PhaseSpaceGrid::new(
            self.count("grid.n_x"),
            self.count("grid.n_v"),
            self.real("grid.v_max"),
            self.real("run.dt"),
        )
    }

    pub fn initial_state(&self) -> Result<DistributionState> {
        let a = self.real("perturbation.amplitude");
        let perts = if a == 0.0 {
            vec![]
        } else {
            vec![Perturbation::new(self.int("perturbation.mode"), a)]
        };
        sample_initial(&self.profile()?, &perts, &self.grid()?)
    }

    pub fn equilibrium(&self) -> Result<DistributionState> {
        sample_initial(&self.profile()?, &[], &self.grid()?)
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            lambda_band: self.real("stability.lambda"),
            k_max: self.int("stability.k_max"),
            n_re: self.count("stability.n_re"),
            n_im: self.count("stability.n_im"),
            kappa_required: self.real("stability.kappa_required"),
            ..ScanOptions::default()
        }
    }

    pub fn norm_indices(&self) -> Result<NormIndices> {
        let idx = NormIndices {
            lambda: self.real("norms.lambda"),
            mu: self.real("norms.mu"),
            gamma: self.real("norms.gamma"),
            p: Lp::parse(self.text("norms.p"))?,
            tau: self.real("norms.tau"),
            beta: self.real("norms.beta"),
            b: self.real("norms.b"),
        };
        idx.validate()?;
        Ok(idx)
    }
}

/// Comparison of an `--assert` expression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Ge,
    Le,
    Gt,
    Lt,
    Eq,
}

/// `metric OP number`, e.g. `kappa>=0.5`.
#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub metric: String,
    pub op: Comparison,
    pub value: f64,
    pub text: String,
}

impl FromStr for Assertion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = [
            (">=", Comparison::Ge),
            ("<=", Comparison::Le),
            ("==", Comparison::Eq),
            (">", Comparison::Gt),
            ("<", Comparison::Lt),
        ];
        for (sym, op) in ops {
            if let Some((m, v)) = s.split_once(sym) {
                let metric = m.trim().to_string();
                let value: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("--assert `{s}`: `{}` is not a number", v.trim())))?;
                if metric.is_empty() {
                    return Err(Error::Parse(format!("--assert `{s}`: missing metric name")));
                }
                return Ok(Self { metric, op, value, text: s.to_string() });
            }
        }
        Err(Error::Parse(format!("--assert `{s}`: expected metric>=value (or <=, >, <, ==)")))
    }
}

impl Assertion {
    pub fn holds(&self, x: f64) -> bool {
        match self.op {
            Comparison::Ge => x >= self.value,
            Comparison::Le => x <= self.value,
            Comparison::Gt => x > self.value,
            Comparison::Lt => x < self.value,
            Comparison::Eq => x == self.value,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for k in KEYS {
            if !matches!(k.kind, Kind::File) {
                canonical(k.key, k.default, None).unwrap_or_else(|e| panic!("{e}"));
            }
        }
        let c = ExperimentConfig::parse(Subcommand::Simulate, Some(("", Path::new("empty.conf"))), &[]).unwrap();
        assert_eq!(c.count("grid.n_v"), 512);
        assert_eq!(c.real("grid.v_max"), 6.0);
    }

    #[test]
    fn range_violation_names_key() {
        let e = ExperimentConfig::parse(Subcommand::Simulate, Some(("run.dt = -0.1\n", Path::new("a.conf"))), &[])
            .unwrap_err()
            .to_string();
        assert!(e.contains("run.dt") && e.contains("a.conf:1"), "{e}");
        let e = ExperimentConfig::parse(Subcommand::Simulate, None, &["run.dt=-0.1".into()])
            .unwrap_err()
            .to_string();
        assert!(e.contains("run.dt") && e.contains("--set #1"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        let p = Path::new("b.conf");
        assert!(ExperimentConfig::parse(Subcommand::Echo, Some(("grid.nv = 4\n", p)), &[]).is_err());
        assert!(ExperimentConfig::parse(Subcommand::Echo, Some(("run.dt = 0.1\nrun.dt = 0.2\n", p)), &[]).is_err());
        assert!(ExperimentConfig::parse(Subcommand::Echo, Some(("grid.n_v = 100\n", p)), &[]).is_err());
        assert!(ExperimentConfig::parse(Subcommand::Echo, Some(("subcommand = newton\n", p)), &[]).is_err());
    }

    #[test]
    fn file_and_flags_resolve_identically() {
        let text = "# benchmark\ngrid.n_v = 256   # finer later\nrun.horizon = 10\ninteraction.amplitude = 0.5\n";
        let a = ExperimentConfig::parse(Subcommand::Simulate, Some((text, Path::new("c.conf"))), &[]).unwrap();
        let b = ExperimentConfig::parse(
            Subcommand::Simulate,
            None,
            &["grid.n_v=256".into(), "run.horizon = 10.0".into(), "interaction.amplitude=5e-1".into()],
        )
        .unwrap();
        assert_eq!(a.resolved_text(), b.resolved_text());
        let again = ExperimentConfig::parse(Subcommand::Simulate, Some((&a.resolved_text(), Path::new("r"))), &[]).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn flags_override_file() {
        let c = ExperimentConfig::parse(
            Subcommand::Simulate,
            Some(("run.horizon = 10\n", Path::new("d.conf"))),
            &["run.horizon=4".into()],
        )
        .unwrap();
        assert_eq!(c.real("run.horizon"), 4.0);
    }

    #[test]
    fn assertions() {
        let a: Assertion = "kappa>=0.5".parse().unwrap();
        assert!(a.holds(0.5) && !a.holds(0.49));
        let b: Assertion = "energy_drift < 1e-4".parse().unwrap();
        assert_eq!(b.metric, "energy_drift");
        assert!(b.holds(1e-5));
        assert!("kappa".parse::<Assertion>().is_err());
        assert!("kappa>=x".parse::<Assertion>().is_err());
    }
}
