//! Command-line schema, presets and the JSON configuration file.
//!
//! A `--config` file is a JSON object whose keys are long flag names
//! (`{"e": 0.2, "resonance": "2:1", "refine": true}`). Its entries are
//! spliced in right after the subcommand, so flags given explicitly on the
//! command line override them.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use er3bp_core::center_manifold::{HaloBranch, KappaOrder};
use er3bp_core::integrator::IntegratorOptions;
use er3bp_core::synthesis::{AnomalyModel, Family};
use er3bp_core::{Point, SystemParams};
use serde_json::Value;

use crate::error::{io_at, CliError, CliResult};

pub const TOLERANCE_ENV: &str = "ER3BP_DEFAULT_TOL";

#[derive(Debug, Parser)]
#[command(name = "er3bp", version, about = "Collinear-point dynamics of the elliptic restricted three-body problem")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Named parameter set; used when --mu is absent.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Mass ratio in (0, 0.5].
    #[arg(long, global = true, conflicts_with = "preset")]
    pub mu: Option<f64>,
    /// Eccentricity; defaults to the preset's value, or 0 with --mu.
    #[arg(long, global = true)]
    pub e: Option<f64>,
    #[arg(long, global = true, default_value = "L1")]
    pub point: Point,
    /// Directory for CSV, SVG and JSON outputs.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// JSON file of flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Integrator tolerance (relative and absolute); overrides ER3BP_DEFAULT_TOL.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Normal-form model as JSON, in place of the built-in Earth-Moon L1 table.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Print JSON on standard output instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    EarthMoon,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collinear point positions and quintic residuals.
    Points,
    /// Linear frequencies and the eccentric frequency series.
    Linear(LinearArgs),
    /// Analytic orbit from the series, optionally refined.
    Orbit(OrbitArgs),
    /// Halo bifurcation energy.
    Bifurcation,
    /// Integrate explicit initial conditions.
    Integrate(IntegrateArgs),
    /// Write the normal-form model as JSON.
    Model,
}

impl Command {
    pub const NAMES: [&'static str; 6] = ["points", "linear", "orbit", "bifurcation", "integrate", "model"];
}

#[derive(Debug, Clone, Args)]
pub struct LinearArgs {
    /// Write the frequency series over an eccentricity grid.
    #[arg(long)]
    pub sweep_e: bool,
    #[arg(long, default_value_t = 0.5)]
    pub e_max: f64,
    #[arg(long, default_value_t = 51)]
    pub e_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Planar,
    Vertical,
    Halo,
    Lissajous,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Planar => Family::Planar,
            FamilyArg::Vertical => Family::Vertical,
            FamilyArg::Halo => Family::Halo,
            FamilyArg::Lissajous => Family::Lissajous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    North,
    South,
}

impl From<BranchArg> for HaloBranch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::North => HaloBranch::North,
            BranchArg::South => HaloBranch::South,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnomalyArg {
    True,
    Mean,
}

impl From<AnomalyArg> for AnomalyModel {
    fn from(a: AnomalyArg) -> Self {
        match a {
            AnomalyArg::True => AnomalyModel::True,
            AnomalyArg::Mean => AnomalyModel::Mean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaArg {
    /// Leading-order coefficients for `e >= AUTO_KAPPA_SWITCH`, the full
    /// normal form below.
    Auto,
    Leading,
    Full,
}

/// Eccentricity at which `auto` switches to the leading-order frequencies.
/// The published resonant amplitudes at `e = 0.2` follow the leading-order
/// relation and those at the Earth-Moon eccentricity the full one.
pub const AUTO_KAPPA_SWITCH: f64 = 0.1;

impl KappaArg {
    pub fn resolve(self, e: f64) -> KappaOrder {
        match self {
            KappaArg::Auto if e >= AUTO_KAPPA_SWITCH => KappaOrder::Leading,
            KappaArg::Auto | KappaArg::Full => KappaOrder::Full,
            KappaArg::Leading => KappaOrder::Leading,
        }
    }
}

/// `m:n`, both positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resonance {
    pub m: u32,
    pub n: u32,
}

impl std::str::FromStr for Resonance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (m, n) = s.split_once(':').ok_or_else(|| format!("expected m:n, got {s:?}"))?;
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("{t:?}: {e}"));
        let (m, n) = (parse(m)?, parse(n)?);
        if m == 0 || n == 0 {
            return Err("resonance terms must be positive".into());
        }
        Ok(Self { m, n })
    }
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    #[arg(value_enum)]
    pub family: FamilyArg,
    /// Lock the mode frequency to m:n and solve for the amplitude.
    #[arg(long)]
    pub resonance: Option<Resonance>,
    #[arg(long)]
    pub jy: Option<f64>,
    #[arg(long)]
    pub jz: Option<f64>,
    /// Halo energy in local units; the total action is energy / Omega_z.
    #[arg(long, conflicts_with = "ecal")]
    pub energy: Option<f64>,
    /// Halo total action.
    #[arg(long)]
    pub ecal: Option<f64>,
    #[arg(long, value_enum, default_value = "north")]
    pub branch: BranchArg,
    /// Initial in-plane phase; the default puts a planar orbit on the symmetric section.
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub theta_y0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta_z0: f64,
    #[arg(long, value_enum, default_value = "mean")]
    pub anomaly: AnomalyArg,
    /// Truncation of the amplitude-frequency relation.
    #[arg(long, value_enum, default_value = "auto")]
    pub kappa_order: KappaArg,
    /// Number of 2π anomaly spans to sample; defaults to n of the resonance, else 1.
    #[arg(long)]
    pub periods: Option<u32>,
    #[arg(long, default_value_t = 721)]
    pub samples: usize,
    /// Upper end of the amplitude search.
    #[arg(long, default_value_t = 5.0)]
    pub max_action: f64,
    /// Refine the planar orbit into a periodic solution.
    #[arg(long)]
    pub refine: bool,
    /// Convergence threshold on the half-period and crossing errors.
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 40)]
    pub max_iters: usize,
    /// Largest admissible change of X0 during refinement.
    #[arg(long, default_value_t = 0.02)]
    pub bracket_width: f64,
}

/// Six comma-separated finite numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub [f64; 6]);

impl std::str::FromStr for StateVector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        let array: [f64; 6] = values.try_into().map_err(|v: Vec<f64>| format!("expected 6 values, got {}", v.len()))?;
        if array.iter().any(|v| !v.is_finite()) {
            return Err("state values must be finite".into());
        }
        Ok(Self(array))
    }
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    /// Initial `X,Y,Z,X',Y',Z'`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub state: StateVector,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub f0: f64,
    /// Final anomaly; may be below f0.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "span", required_unless_present = "span")]
    pub f_end: Option<f64>,
    /// Anomaly span added to f0.
    #[arg(long, allow_hyphen_values = true)]
    pub span: Option<f64>,
    /// Equally spaced output samples; default is one row per integrator step.
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Settings shared by every subcommand after presets, environment and
/// flags are combined.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub point: Point,
    pub output_dir: PathBuf,
    pub tolerance: Option<f64>,
    pub model: Option<PathBuf>,
    pub json: bool,
}

impl Resolved {
    pub fn from_args(global: &GlobalArgs, env_tol: Option<&str>) -> CliResult<Self> {
        let params = match (global.mu, global.preset) {
            (Some(mu), _) => SystemParams::new(mu, global.e.unwrap_or(0.0))?,
            (None, Some(Preset::EarthMoon) | None) => SystemParams::earth_moon().with_eccentricity(
                global.e.unwrap_or(SystemParams::EARTH_MOON_E),
            )?,
        };
        let tolerance = match (global.tol, env_tol) {
            (Some(t), _) => Some(t),
            (None, Some(text)) => Some(
                text.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::validation(format!("{TOLERANCE_ENV}={text:?} is not a number")))?,
            ),
            (None, None) => None,
        };
        if let Some(t) = tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(CliError::validation(format!("tolerance {t} must lie in (0, 1)")));
            }
        }
        Ok(Self {
            params,
            point: global.point,
            output_dir: global.output_dir.clone(),
            tolerance,
            model: global.model.clone(),
            json: global.json,
        })
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        match self.tolerance {
            Some(t) => IntegratorOptions::with_tolerances(t, t),
            None => IntegratorOptions::default(),
        }
    }

    pub fn output_path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

/// Turns a JSON object of flag values into command-line tokens.
pub fn config_tokens(value: &Value, origin: &Path) -> CliResult<Vec<OsString>> {
    let bad = |message: String| CliError::validation(format!("{}: {message}", origin.display()));
    let object = value.as_object().ok_or_else(|| bad("configuration must be a JSON object".into()))?;
    let mut out = Vec::new();
    for (key, v) in object {
        if key == "config" {
            return Err(bad("nested config files are not supported".into()));
        }
        let flag = OsString::from(format!("--{}", key.replace('_', "-")));
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => {
                out.push(flag);
                out.push(n.to_string().into());
            }
            Value::String(s) => {
                out.push(flag);
                out.push(s.into());
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(bad(format!("{key}: arrays may hold numbers or strings only"))),
                    })
                    .collect::<CliResult<_>>()?;
                out.push(flag);
                out.push(parts.join(",").into());
            }
            Value::Object(_) => return Err(bad(format!("{key}: nested objects are not flags"))),
        }
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let text = a.to_string_lossy();
        if text == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(rest) = text.strip_prefix("--config=") {
            return Some(PathBuf::from(rest));
        }
    }
    None
}

/// Splices the tokens of a `--config` file after the subcommand name.
pub fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(io_at(&path))?;
    let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
    let tokens = config_tokens(&value, &path)?;
    let at = args
        .iter()
        .position(|a| Command::NAMES.iter().any(|n| a == *n))
        .ok_or_else(|| CliError::validation("no subcommand given"))?;
    let mut out = args;
    out.splice(at + 1..at + 1, tokens);
    Ok(out)
}
