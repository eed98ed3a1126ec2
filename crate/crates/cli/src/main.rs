//! `surftrap` command-line front end. Every subcommand prints its result as
//! JSON (or CSV where asked) and, with `--out DIR`, writes the result, its
//! array artifacts and a run manifest into `DIR`.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 when the physics fails
//! (no trap, no convergence, particle lost).

mod commands;
mod manifest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;
use surftrap::geometry::CanonicalKind;
use surftrap::units::{parse_quantity, Dimension};

#[derive(Debug, Parser)]
#[command(name = "surftrap", version, about = "Pseudopotential analysis of RF trap cross-sections")]
struct Cli {
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for result.json, CSV artifacts and manifest.json.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Solve a geometry and characterize its trap.
    Analyze(AnalyzeArgs),
    /// Closed-form line-charge references and the finite-conductor fit.
    Oracle(OracleArgs),
    /// Miniaturization limits at fixed q and surface field.
    Scaling(ScalingArgs),
    /// RF power dissipated in the leads and the substrate.
    Dissipation(DissipationArgs),
    /// Corner frequency of an RC filter.
    Rolloff(RolloffArgs),
    /// Substrate material table.
    Materials(MaterialsArgs),
    /// Depth and frequency of the three-layer trap against aspect ratio.
    ScanAspect(ScanAspectArgs),
    /// Field change near the trap from a dielectric substrate.
    Dielectric(DielectricArgs),
    /// Full RF-driven trajectory and its spectrum.
    Traj(TrajArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Oracle(_) => "oracle",
            Command::Scaling(_) => "scaling",
            Command::Dissipation(_) => "dissipation",
            Command::Rolloff(_) => "rolloff",
            Command::Materials(_) => "materials",
            Command::ScanAspect(_) => "scan-aspect",
            Command::Dielectric(_) => "dielectric",
            Command::Traj(_) => "traj",
        }
    }
}

fn quantity(dim: Dimension) -> impl Fn(&str) -> Result<f64, String> + Clone {
    move |s: &str| parse_quantity(s, dim).map_err(|e| e.to_string())
}

fn length(s: &str) -> Result<f64, String> {
    quantity(Dimension::Length)(s)
}
fn voltage(s: &str) -> Result<f64, String> {
    quantity(Dimension::Voltage)(s)
}
fn frequency(s: &str) -> Result<f64, String> {
    quantity(Dimension::Frequency)(s)
}
fn mass(s: &str) -> Result<f64, String> {
    quantity(Dimension::Mass)(s)
}
fn field(s: &str) -> Result<f64, String> {
    quantity(Dimension::ElectricField)(s)
}
fn resistance(s: &str) -> Result<f64, String> {
    quantity(Dimension::Resistance)(s)
}
fn capacitance(s: &str) -> Result<f64, String> {
    quantity(Dimension::Capacitance)(s)
}

/// `INDEX=VOLTAGE`, e.g. `0=2.5V`.
fn static_voltage(s: &str) -> Result<(usize, f64), String> {
    let (i, v) = s.split_once('=').ok_or_else(|| format!("`{s}`: expected INDEX=VOLTAGE, e.g. 0=2V"))?;
    let i = i.trim().parse().map_err(|_| format!("`{i}` is not a control index"))?;
    Ok((i, voltage(v)?))
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineChoice {
    TwoLayer,
    FourRod,
}

/// Geometry, drive, species and solver settings shared by `analyze` and `traj`.
#[derive(Debug, Args, Serialize)]
pub struct TrapArgs {
    /// Canonical geometry.
    #[arg(long, conflicts_with = "geometry", required_unless_present = "geometry")]
    pub kind: Option<CanonicalKind>,
    /// Geometry document.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Characteristic length of a canonical geometry.
    #[arg(long, value_parser = length, default_value = "50um")]
    pub d: f64,
    #[arg(long, value_parser = length)]
    pub thickness: Option<f64>,
    /// Surface electrode width.
    #[arg(long, value_parser = length)]
    pub width: Option<f64>,
    #[arg(long, value_parser = length)]
    pub gap: Option<f64>,
    /// Five-wire outer ground width.
    #[arg(long, value_parser = length)]
    pub outer_width: Option<f64>,
    /// Aspect ratio of layered geometries.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Relative width imbalance of the five-wire RF rails.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rf_skew: f64,
    /// Peak RF amplitude, e.g. 100V.
    #[arg(long, value_parser = voltage)]
    pub v0: f64,
    /// RF drive frequency, e.g. 100MHz.
    #[arg(long, value_parser = frequency)]
    pub freq: f64,
    /// Ion mass, e.g. 9u.
    #[arg(long, value_parser = mass)]
    pub mass: f64,
    /// Ion charge in units of e.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub charge: f64,
    /// Control electrode voltage, INDEX=VOLTAGE; repeatable.
    #[arg(long = "static", value_parser = static_voltage)]
    pub statics: Vec<(usize, f64)>,
    /// Grid spacing in units of d.
    #[arg(long, default_value_t = 0.025)]
    pub h_over_d: f64,
    /// Relative convergence tolerance of the relaxation.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Outer grounded-box margin in units of d.
    #[arg(long, default_value_t = 8.0)]
    pub margin_d: f64,
    /// Report frequency and depth relative to a stored baseline.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineChoice>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub trap: TrapArgs,
    /// Number of pseudopotential contour levels to export (0 for none).
    #[arg(long, default_value_t = 0)]
    pub contours: usize,
    /// Highest contour level, in multiples of the trap depth above the minimum.
    #[arg(long, default_value_t = 2.0)]
    pub contour_cap: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Finite-conductor wire diameter in units of the charge separation.
    #[arg(long, default_value_t = 0.2)]
    pub diameter: f64,
    /// Skip the finite-conductor fit.
    #[arg(long)]
    pub no_fit: bool,
    /// Nodes per side of the exported Υ maps (0 for none).
    #[arg(long, default_value_t = 0)]
    pub map_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ScalingArgs {
    #[arg(long, default_value = "be-quadrupole")]
    pub preset: String,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = mass)]
    pub mass: Option<f64>,
    /// Surface field limit, e.g. 1MV/m.
    #[arg(long, value_parser = field)]
    pub e0: Option<f64>,
    /// Trap radius to evaluate; repeatable.
    #[arg(long, value_parser = length)]
    pub radius: Vec<f64>,
    /// Depth in units of ħω to reach; repeatable.
    #[arg(long)]
    pub target_ratio: Vec<f64>,
    /// Write a radius scan for each `--scan-field`.
    #[arg(long)]
    pub scan: bool,
    #[arg(long, value_parser = length, default_value = "1nm")]
    pub r_from: f64,
    #[arg(long, value_parser = length, default_value = "1mm")]
    pub r_to: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Surface field for the scan; repeatable (default: the preset's).
    #[arg(long, value_parser = field)]
    pub scan_field: Vec<f64>,
    /// Ion-electrode distance for the heating-regime classification.
    #[arg(long, value_parser = length, requires = "skin_depth")]
    pub distance: Option<f64>,
    #[arg(long, value_parser = length, requires = "distance")]
    pub skin_depth: Option<f64>,
    #[arg(long, value_parser = length, requires = "distance")]
    pub patch_size: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct DissipationArgs {
    /// RF electrode to ground capacitance, e.g. 3pF.
    #[arg(long, value_parser = capacitance)]
    pub capacitance: f64,
    /// RF drive frequency, e.g. 100MHz.
    #[arg(long, value_parser = frequency)]
    pub freq: f64,
    #[arg(long, value_parser = voltage)]
    pub v0: f64,
    #[arg(long, value_parser = resistance)]
    pub r_lead: f64,
    #[arg(long)]
    pub tan_delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RolloffArgs {
    #[arg(long, value_parser = resistance)]
    pub resistance: f64,
    #[arg(long, value_parser = capacitance)]
    pub capacitance: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
pub struct MaterialsArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Show one material only.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanAspectArgs {
    /// Aspect ratios to scan, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2.2,3.3,5,7.5,11,15")]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = 0.02)]
    pub h_over_d: f64,
    /// Electrode thickness over slot width.
    #[arg(long, default_value_t = 0.02)]
    pub thickness_over_width: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct DielectricArgs {
    /// Substrate relative permittivity.
    #[arg(long, default_value_t = 10.0)]
    pub eps: f64,
    /// Inter-electrode gap over electrode width; repeatable.
    #[arg(long, default_values_t = [0.25])]
    pub gap_over_width: Vec<f64>,
    #[arg(long, value_parser = length, default_value = "50um")]
    pub d: f64,
    #[arg(long, default_value_t = 0.025)]
    pub h_over_d: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrajArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub trap: TrapArgs,
    /// Initial displacement from the trap minimum, in units of d.
    #[arg(long, default_value_t = 0.02, allow_hyphen_values = true)]
    pub dx: f64,
    #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
    pub dy: f64,
    /// Duration in secular periods of the slower axis.
    #[arg(long, default_value_t = 40.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 100)]
    pub steps_per_period: usize,
    /// Number of spectral peaks to report.
    #[arg(long, default_value_t = 6)]
    pub peaks: usize,
}

/// How a run failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Physics(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Physics(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = cli.command.name();
    let out = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Usage(m) => ("error", m),
                Failure::Physics(m) => ("physics failure", m),
            };
            eprintln!("surftrap {name}: {kind}: {msg}");
            return ExitCode::from(f.code());
        }
    };
    if let Some(dir) = &cli.out {
        let params = serde_json::to_value(&cli.command).expect("arguments serialize");
        if let Err(e) = manifest::write_run(dir, name, params, cli.seed, &out) {
            eprintln!("surftrap {name}: error: writing {}: {e}", dir.display());
            return ExitCode::from(1);
        }
    }
    match &out.stdout {
        Some(text) => print!("{text}"),
        None => print!("{}", manifest::pretty(&out.result)),
    }
    ExitCode::SUCCESS
}
