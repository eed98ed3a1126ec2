//! End-to-end analysis of one geometry: field solves, pseudopotential and
//! trap characterization, with a provenance record.

use crate::geometry::{rf_voltages, ConfigError, CrossSectionGeometry, DriveConfig, Species, StaticConfig};
use crate::laplace::{
    field_of, make_grid, solve_configuration, DielectricMap, Hierarchy, LaplaceError, Potential, SolverSettings,
};
use crate::pseudo::{characterize, normalize_against, pseudopotential_field, Baseline, PseudoError, PseudoField, TrapCharacterization};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Laplace(#[from] LaplaceError),
    #[error(transparent)]
    Pseudo(#[from] PseudoError),
}

#[derive(Debug, Clone)]
pub struct AnalysisRequest {
    pub geometry: CrossSectionGeometry,
    pub drive: DriveConfig,
    pub species: Species,
    pub statics: StaticConfig,
    pub settings: SolverSettings,
    pub eps: DielectricMap,
    pub baseline: Option<Baseline>,
}

impl AnalysisRequest {
    pub fn new(geometry: CrossSectionGeometry, drive: DriveConfig, species: Species) -> Self {
        AnalysisRequest {
            geometry,
            drive,
            species,
            statics: StaticConfig::zero(),
            settings: SolverSettings::default(),
            eps: DielectricMap::Uniform,
            baseline: None,
        }
    }
}

/// Numerical and model choices behind a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub geometry_label: String,
    pub geometry_hash: String,
    pub d: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 2],
    pub margin_d: f64,
    pub tol: f64,
    pub sor_omega: f64,
    pub cascade_levels: usize,
    pub stencil: String,
    pub outer_boundary: String,
    pub dielectric: DielectricMap,
    pub rf_residual: f64,
    pub rf_sweeps: usize,
    pub static_residual: Option<f64>,
    pub static_voltages: StaticConfig,
    pub interpolation: String,
    pub baseline: Option<String>,
}

pub struct Analysis {
    pub characterization: TrapCharacterization,
    pub rf: Potential,
    pub static_pot: Option<Potential>,
    pub pseudo: PseudoField,
    pub provenance: Provenance,
}

pub fn analyze(req: &AnalysisRequest) -> Result<Analysis, AnalysisError> {
    let g = &req.geometry;
    req.statics.check(g)?;
    let grid = make_grid(g, &req.settings)?;
    let mut hier = Hierarchy::build(g, grid, req.eps, req.settings.cascade)?;
    hier.omega = req.settings.omega;
    let (rf, rf_run) = solve_configuration(&hier, &rf_voltages(g, req.drive.v0), req.settings.tol)?;
    let sv = req.statics.electrode_voltages(g);
    let (static_pot, static_res) = if sv.iter().any(|&v| v != 0.0) {
        let (p, run) = solve_configuration(&hier, &sv, req.settings.tol)?;
        (Some(p), Some(run.residual.max))
    } else {
        (None, None)
    };
    let pseudo = pseudopotential_field(&field_of(&rf), req.species, req.drive.omega);
    let mut tc = characterize(&pseudo, static_pot.as_ref(), req.species, req.drive, g)?;
    if let Some(b) = &req.baseline {
        normalize_against(&mut tc, b);
    }
    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        geometry_label: g.label.clone(),
        geometry_hash: g.hash(),
        d: g.d,
        h: grid.h,
        nx: grid.nx,
        ny: grid.ny,
        origin: [grid.origin.x, grid.origin.y],
        margin_d: req.settings.margin_d,
        tol: req.settings.tol,
        sor_omega: req.settings.omega.unwrap_or_else(|| hier.fine().optimal_omega()),
        cascade_levels: hier.levels.len(),
        stencil: "5-point, Shortley-Weller at electrode surfaces, harmonic ε across interfaces".into(),
        outer_boundary: "grounded box".into(),
        dielectric: req.eps,
        rf_residual: rf_run.residual.max,
        rf_sweeps: rf_run.sweeps,
        static_residual: static_res,
        static_voltages: req.statics.clone(),
        interpolation: "bicubic Hermite, central-difference node derivatives".into(),
        baseline: req.baseline.map(|b| b.label.to_string()),
    };
    Ok(Analysis { characterization: tc, rf, static_pot, pseudo, provenance })
}
