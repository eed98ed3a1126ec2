use crate::analysis::{analyze, AnalysisError, AnalysisRequest};
use crate::geometry::{
    build_canonical, rf_voltages, CanonicalKind, CanonicalParams, CrossSectionGeometry, DriveConfig, GeometryError, Point,
    Species,
};
use crate::laplace::{field_of, make_grid, solve_configuration, DielectricMap, Hierarchy, SolverSettings};
use serde::{Deserialize, Serialize};

/// Electrode thickness of the study geometry, in units of `d`.
pub const STUDY_THICKNESS_D: f64 = 0.05;
/// Width of its outer ground electrodes, in units of `d`; wide enough that
/// field reaching the substrate past their outer edges is negligible.
pub const STUDY_OUTER_WIDTH_D: f64 = 10.0;

/// Five-wire trap on a substrate with gaps of `gap_over_width` times the
/// electrode width.
pub fn dielectric_study_geometry(d: f64, gap_over_width: f64) -> Result<CrossSectionGeometry, GeometryError> {
    let mut p = CanonicalParams::new(d);
    p.gap = Some(gap_over_width * p.width());
    p.thickness = Some(STUDY_THICKNESS_D * d);
    p.outer_width = Some(STUDY_OUTER_WIDTH_D * d);
    build_canonical(CanonicalKind::FiveWire, &p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricSensitivity {
    pub eps: f64,
    /// Top of the dielectric (the electrodes' underside).
    pub substrate_y: f64,
    pub r_min: Point,
    pub radius: f64,
    /// `max |E_ε − E_1|` over the disc divided by `max |E_1|` over the disc.
    pub relative_difference: f64,
    pub nodes: usize,
}

/// RF field change when the half-space below the electrodes is filled with
/// a dielectric of permittivity `eps`, over a disc of radius `0.2·d` around
/// the vacuum trap minimum.
pub fn dielectric_sensitivity(
    g: &CrossSectionGeometry,
    eps: f64,
    settings: &SolverSettings,
) -> Result<DielectricSensitivity, AnalysisError> {
    let floor = g.substrate_y.unwrap_or_else(|| g.bounds().y0);
    let mut req = AnalysisRequest::new(g.clone(), DriveConfig { v0: 1.0, omega: 1.0 }, Species { mass: 1.0, charge: 1.0 });
    req.settings = settings.clone();
    let vac = analyze(&req)?;
    let r_min = vac.characterization.r_min;
    let radius = 0.2 * g.d;
    let grid = make_grid(g, settings)?;
    let hier = Hierarchy::build(g, grid, DielectricMap::Substrate { y_top: floor, eps }, settings.cascade)?;
    let (pot, _) = solve_configuration(&hier, &rf_voltages(g, 1.0), settings.tol)?;
    let (e1, e2) = (field_of(&vac.rf), field_of(&pot));
    let (mut diff, mut scale, mut nodes) = (0.0f64, 0.0f64, 0);
    for p in 0..grid.len() {
        let (i, j) = grid.ij(p);
        if grid.node(i, j).dist(r_min) > radius || vac.rf.disc.is_fixed(p) {
            continue;
        }
        nodes += 1;
        scale = scale.max(e1.magnitude_sq(p).sqrt());
        diff = diff.max((e2.ex[p] - e1.ex[p]).hypot(e2.ey[p] - e1.ey[p]));
    }
    Ok(DielectricSensitivity { eps, substrate_y: floor, r_min, radius, relative_difference: diff / scale, nodes })
}
