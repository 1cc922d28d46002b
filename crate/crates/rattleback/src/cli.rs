//! Command-line front end: `simulate | certify | monodromy | invariants | sweep`.
//!
//! Every command reads a JSON config, applies flag overrides, validates the
//! result, and only then computes. Output is written in one piece at the
//! end, so a failed run leaves no partial file behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::invariants;
use crate::linalg::{self, CMat3};
use crate::model::{Params, RigidBodyParams, State};
use crate::monodromy::{self, Numerics};
use crate::simulate::{self, IntegratorConfig};
use crate::variational;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rattleback", version, about = "Rattleback simulation and numerical non-integrability certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the equations of motion and write a CSV trajectory.
    Simulate(Flags),
    /// Run the full certification pipeline and emit a report.
    Certify(Flags),
    /// Compute the monodromy group of the variational equations.
    Monodromy(Flags),
    /// Search for polynomial invariants of a monodromy group.
    Invariants(Flags),
    /// Certify every point of a one-parameter grid, one JSON line each.
    Sweep(Flags),
}

#[derive(Debug, Clone, clap::Args)]
pub struct Flags {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Energy level, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Loop radius around each singular point.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Basepoint of the loops, `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub basepoint: Option<String>,
    #[arg(long)]
    pub max_degree: Option<u32>,
    /// Seed for the random probes of the conjugacy search.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(x) => Complex64::new(x, 0.0),
            ComplexValue::Pair([a, b]) => Complex64::new(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub omega: [f64; 3],
    pub gamma: [f64; 3],
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinProbeConfig {
    pub w0: f64,
    pub tilt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: Option<Params>,
    pub rigid_body: Option<RigidBodyParams>,
    pub h: Option<ComplexValue>,
    pub initial_state: Option<InitialState>,
    pub t_end: Option<f64>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    pub spin_probe: Option<SpinProbeConfig>,
    #[serde(default)]
    pub numerics: Numerics,
    /// Explicit generators for `invariants`, each a row-major 3×3 matrix of
    /// `[re, im]` pairs.
    pub generators: Option<Vec<[[[f64; 2]; 3]; 3]>>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_config_error() { EXIT_CONFIG } else { EXIT_NUMERICAL };
        CliError { code, message: e.to_string() }
    }
}

fn parse_complex(s: &str, what: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num =
        |t: &str| t.parse::<f64>().map_err(|_| CliError::config(format!("--{what}: cannot parse '{t}' as a number")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(CliError::config(format!("--{what}: expected 're' or 're,im', got '{s}'"))),
    }
}

/// Reads and parses the config, reporting JSON errors with line and column.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

impl RunConfig {
    /// Folds flag overrides into the config.
    pub fn apply(&mut self, f: &Flags) -> Result<(), CliError> {
        if let Some(h) = &f.h {
            let z = parse_complex(h, "h")?;
            self.h = Some(ComplexValue::Pair([z.re, z.im]));
        }
        if let Some(t) = f.t_end {
            self.t_end = Some(t);
        }
        if let Some(r) = f.rel_tol {
            self.integrator.rel_tol = r;
        }
        if let Some(a) = f.abs_tol {
            self.integrator.abs_tol = a;
        }
        if let Some(r) = f.radius {
            self.numerics.radius = Some(r);
        }
        if let Some(b) = &f.basepoint {
            self.numerics.basepoint = Some(parse_complex(b, "basepoint")?);
        }
        if let Some(d) = f.max_degree {
            self.numerics.max_degree = d;
        }
        if let Some(s) = f.seed {
            self.numerics.seed = s;
        }
        Ok(())
    }

    fn energy(&self) -> Result<Complex64, CliError> {
        let h: Complex64 = self.h.map(Into::into).unwrap_or(Complex64::new(1.0, 0.0));
        if h.norm() == 0.0 || !h.re.is_finite() || !h.im.is_finite() {
            return Err(CliError::config("h must be non-zero and finite"));
        }
        Ok(h)
    }

    fn body(&self) -> Result<Body<'_>, CliError> {
        match (&self.params, &self.rigid_body) {
            (Some(p), None) => Ok(Body::Rattleback(p)),
            (None, Some(rb)) => {
                rb.validate()?;
                Ok(Body::Rigid(rb))
            }
            (Some(_), Some(_)) => Err(CliError::config("give either 'params' or 'rigid_body', not both")),
            (None, None) => Err(CliError::config("missing 'params' or 'rigid_body'")),
        }
    }

    fn fuchsian(&self) -> Result<variational::FuchsianData, CliError> {
        let h = self.energy()?;
        Ok(match self.body()? {
            Body::Rattleback(p) => variational::residues(p, h)?,
            Body::Rigid(rb) => variational::residues_rigid(rb, h)?,
        })
    }
}

enum Body<'a> {
    Rattleback(&'a Params),
    Rigid(&'a RigidBodyParams),
}

/// JSON writer printing every float with 17 significant digits.
struct Sig17<F>(F);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl<F: serde_json::ser::Formatter> serde_json::ser::Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{}", simulate::format_f64(value))
        } else {
            w.write_all(b"null")
        }
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializable");
    buf.push(b'\n');
    buf
}

pub fn to_json_line<T: Serialize>(value: &T) -> Vec<u8> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(serde_json::ser::CompactFormatter));
    value.serialize(&mut ser).expect("serializable");
    buf.push(b'\n');
    buf
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError { code: EXIT_CONFIG, message: format!("cannot write output: {e}") };
    match out {
        Some(p) => fs::write(p, bytes).map_err(io_err),
        None => io::stdout().lock().write_all(bytes).map_err(io_err),
    }
}

#[derive(Serialize)]
struct SpinSummary {
    positive: simulate::SpinProbe,
    negative: simulate::SpinProbe,
}

#[derive(Serialize)]
struct SimulateSummary {
    h0: f64,
    h_drift: f64,
    l_drift: f64,
    steps: usize,
    samples: usize,
    final_omega: [f64; 3],
    final_gamma: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    spin_probe: Option<SpinSummary>,
}

fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let params = match cfg.body()? {
        Body::Rattleback(p) => p,
        Body::Rigid(_) => return Err(CliError::config("simulate needs 'params'")),
    };
    let init = cfg.initial_state.ok_or_else(|| CliError::config("simulate needs 'initial_state'"))?;
    let t_end = cfg.t_end.ok_or_else(|| CliError::config("simulate needs 't_end'"))?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(CliError::config("t_end must be positive"));
    }
    cfg.integrator.validate()?;
    let state0 = State::new(init.omega, init.gamma)?;
    if let Some(sp) = &cfg.spin_probe {
        if !(sp.t_end > 0.0 && sp.t_end.is_finite() && sp.tilt.is_finite() && sp.w0.is_finite()) {
            return Err(CliError::config("spin_probe needs finite w0, tilt and a positive t_end"));
        }
    }

    let traj = simulate::integrate(&state0, params, t_end, &cfg.integrator)?;
    let spin_probe = match &cfg.spin_probe {
        Some(sp) => Some(SpinSummary {
            positive: simulate::spin_reversal_probe(params, sp.w0.abs(), sp.tilt, sp.t_end, &cfg.integrator)?,
            negative: simulate::spin_reversal_probe(params, -sp.w0.abs(), sp.tilt, sp.t_end, &cfg.integrator)?,
        }),
        None => None,
    };
    let last = traj.last();
    let summary = SimulateSummary {
        h0: traj.energies[0],
        h_drift: traj.h_drift,
        l_drift: traj.l_drift,
        steps: traj.steps,
        samples: traj.times.len(),
        final_omega: last.omega.into(),
        final_gamma: last.gamma.into(),
        spin_probe,
    };
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    // CSV goes to --out with the summary on stdout, or both share the
    // terminal with the summary on stderr
    match out {
        Some(_) => {
            emit(out, &csv)?;
            emit(None, &to_json_pretty(&summary))
        }
        None => {
            emit(None, &csv)?;
            io::stderr().write_all(&to_json_pretty(&summary)).map_err(|e| CliError::config(e.to_string()))
        }
    }
}

fn certify(cfg: &RunConfig, h: Complex64) -> Result<monodromy::IntegrabilityReport, Error> {
    match (&cfg.params, &cfg.rigid_body) {
        (Some(p), _) => monodromy::integrability_report(p, h, &cfg.numerics),
        (None, Some(rb)) => monodromy::integrability_report_rigid(rb, h, &cfg.numerics),
        (None, None) => unreachable!("validated before"),
    }
}

fn cmd_certify(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    cfg.body()?;
    let h = cfg.energy()?;
    cfg.numerics.validate()?;
    let report = certify(cfg, h)?;
    emit(out, &to_json_pretty(&report))
}

#[derive(Serialize)]
struct MonodromyOutput {
    lambda: [Complex64; 3],
    exponentials: [Complex64; 3],
    monodromy: monodromy::MonodromyGroup,
}

fn cmd_monodromy(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    cfg.numerics.validate()?;
    let fd = cfg.fuchsian()?;
    let group = cfg.numerics.group(&fd)?;
    let o = MonodromyOutput { lambda: fd.lambda, exponentials: monodromy::exponentials(&fd.lambda), monodromy: group };
    emit(out, &to_json_pretty(&o))
}

fn cmd_invariants(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    cfg.numerics.validate()?;
    let (gens, reference): (Vec<CMat3>, Option<Vec<CMat3>>) = match &cfg.generators {
        Some(g) => {
            if g.is_empty() {
                return Err(CliError::config("'generators' must not be empty"));
            }
            let mats = g
                .iter()
                .map(|m| {
                    let rows = m.map(|r| r.map(|[a, b]| Complex64::new(a, b)));
                    if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                        return Err(CliError::config("generator entries must be finite"));
                    }
                    Ok(linalg::from_rows(&rows))
                })
                .collect::<Result<_, _>>()?;
            (mats, None)
        }
        None => {
            let fd = cfg.fuchsian()?;
            let group = cfg.numerics.group(&fd)?;
            (group.generators().to_vec(), Some(group.reference.to_vec()))
        }
    };
    let bases =
        invariants::invariants_up_to(&gens, cfg.numerics.max_degree, cfg.numerics.invariant_tol, reference.as_deref());
    let list: Vec<invariants::PolynomialJson> = bases.iter().flat_map(|b| b.to_json()).collect();
    emit(out, &to_json_pretty(&list))
}

const SWEEP_PARAMETERS: [&str; 10] = ["delta", "I1", "I2", "I3", "b1", "b2", "b3", "m", "g", "h"];

fn sweep_point(cfg: &RunConfig, parameter: &str, value: f64) -> Result<monodromy::IntegrabilityReport, Error> {
    let base = cfg.params.as_ref().expect("validated before");
    let mut h = cfg.energy().map_err(|e| Error::InvalidParameter(e.message))?;
    let mut b = base.b;
    let (mut m, mut g) = (base.m, base.g);
    let mut pr = base.principal;
    match parameter {
        "h" => h = Complex64::new(value, 0.0),
        "b1" => b[0] = value,
        "b2" => b[1] = value,
        "b3" => b[2] = value,
        "m" => m = value,
        "g" => g = value,
        name => {
            let p = pr.as_mut().expect("validated before");
            match name {
                "delta" => p.delta = value,
                "I1" => p.i1 = value,
                "I2" => p.i2 = value,
                _ => p.i3 = value,
            }
        }
    }
    let params = match pr {
        Some(p) => Params::from_principal(p.i1, p.i2, p.i3, p.delta, b, m, g)?,
        None => Params::new(base.inertia, b, m, g)?,
    };
    monodromy::integrability_report(&params, h, &cfg.numerics)
}

#[derive(Serialize)]
struct SweepLine {
    index: usize,
    parameter: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<monodromy::IntegrabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<SweepError>,
}

#[derive(Serialize)]
struct SweepError {
    kind: &'static str,
    message: String,
}

fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::config("sweep needs a 'sweep' section"))?;
    if !SWEEP_PARAMETERS.contains(&sw.parameter.as_str()) {
        return Err(CliError::config(format!(
            "unknown sweep parameter '{}'; expected one of {SWEEP_PARAMETERS:?}",
            sw.parameter
        )));
    }
    if sw.values.is_empty() || sw.values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::config("sweep values must be a non-empty list of finite numbers"));
    }
    let params = match cfg.body()? {
        Body::Rattleback(p) => p,
        Body::Rigid(_) => return Err(CliError::config("sweep needs 'params'")),
    };
    if ["delta", "I1", "I2", "I3"].contains(&sw.parameter.as_str()) && params.principal.is_none() {
        return Err(CliError::config(format!("sweeping '{}' needs params given by principal moments", sw.parameter)));
    }
    cfg.energy()?;
    cfg.numerics.validate()?;

    let lines: Vec<Vec<u8>> = sw
        .values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let (report, error) = match sweep_point(cfg, &sw.parameter, value) {
                Ok(r) => (Some(r), None),
                Err(e) => {
                    let kind = if e.is_config_error() { "config" } else { "numerical" };
                    (None, Some(SweepError { kind, message: e.to_string() }))
                }
            };
            to_json_line(&SweepLine { index, parameter: sw.parameter.clone(), value, report, error })
        })
        .collect();
    emit(out, &lines.concat())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let flags = match &cli.command {
        Command::Simulate(f)
        | Command::Certify(f)
        | Command::Monodromy(f)
        | Command::Invariants(f)
        | Command::Sweep(f) => f,
    };
    let mut cfg = load_config(&flags.config)?;
    cfg.apply(flags)?;
    let out = flags.out.as_deref();
    match &cli.command {
        Command::Simulate(_) => cmd_simulate(&cfg, out),
        Command::Certify(_) => cmd_certify(&cfg, out),
        Command::Monodromy(_) => cmd_monodromy(&cfg, out),
        Command::Invariants(_) => cmd_invariants(&cfg, out),
        Command::Sweep(_) => cmd_sweep(&cfg, out),
    }
}

/// Entry point shared by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_flags() {
        assert_eq!(parse_complex("1.5", "h").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("1,-2", "h").unwrap(), Complex64::new(1.0, -2.0));
        assert!(parse_complex("1,2,3", "h").is_err());
        assert!(parse_complex("x", "h").is_err());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = String::from_utf8(to_json_line(&[0.1f64, -2.0, 1e-300])).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,-2.0000000000000000e0,1.0000000000000000e-300]\n");
        let v: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, vec![0.1, -2.0, 1e-300]);
    }

    #[test]
    fn config_schema() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"params": {"I1": 0.5, "I2": 0.6, "I3": 0.8, "delta": 1.3, "b": [1, 2, 3], "m": 1, "g": 1}, "h": [1, 0.5]}"#,
        )
        .unwrap();
        assert_eq!(cfg.energy().unwrap(), Complex64::new(1.0, 0.5));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"numerics": {"tol": 1e-10, "extra": 0}}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"h": 2}"#).unwrap();
        assert_eq!(cfg.energy().unwrap(), Complex64::new(2.0, 0.0));
        assert!(cfg.body().is_err());
    }
}
