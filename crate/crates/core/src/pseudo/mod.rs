//! Ponderomotive pseudopotential, trap characterization and trajectories.

mod baseline;
mod landscape;
mod model;
mod traj;

pub use baseline::{Baseline, FOUR_ROD_BASELINE, TWO_LAYER_BASELINE};
pub use landscape::{Escape, Landscape, StationaryKind, StationaryPoint};
pub use traj::{
    driven_micromotion_amplitude, micromotion_ratio, secular_frequency, simulate_trajectory, spectrum_peaks,
    SpectralError, Trajectory, TrajectorySample,
};

use crate::geometry::{CrossSectionGeometry, DriveConfig, Point, Species};
use crate::interp::sym_eigen;
use crate::laplace::{field_of, Discretization, FieldMap, Grid, Potential};
use model::FieldModel;
use crate::units::ELEMENTARY_CHARGE;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudoError {
    #[error("no local minimum of the total potential inside the search region")]
    NoMinimum,
    #[error("Newton refinement left the interpolation region near {0:?}")]
    RefinementFailed(Point),
    #[error("stationary point at ({x:.4e}, {y:.4e}) m is a saddle, not a minimum (Hessian eigenvalues {l1:.3e}, {l2:.3e})")]
    Saddle { x: f64, y: f64, l1: f64, l2: f64 },
    #[error("the basin around the minimum never reaches a sink")]
    NoEscape,
    #[error("characterizations differ in {0}; cannot normalize")]
    Mismatch(&'static str),
}

/// `U = Q²|E|²/(4mΩ²)` on grid nodes (joules). Electrode nodes hold 0.
#[derive(Debug, Clone)]
pub struct PseudoField {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub species: Species,
    pub omega: f64,
    pub disc: Arc<Discretization>,
    /// The RF field at peak amplitude that `u` was built from.
    pub field: FieldMap,
}

/// Pseudopotential of an RF field given at its peak amplitude.
pub fn pseudopotential_field(rf: &FieldMap, species: Species, omega: f64) -> PseudoField {
    let k = species.charge * species.charge / (4.0 * species.mass * omega * omega);
    let u = (0..rf.grid.len()).map(|p| k * rf.magnitude_sq(p)).collect();
    PseudoField { grid: rf.grid, u, species, omega, disc: rf.disc.clone(), field: rf.clone() }
}

/// Everything extracted at a trap minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapCharacterization {
    pub r_min: Point,
    /// Hessian of the total potential `[[xx, xy], [xy, yy]]` (J/m²).
    pub hessian: [[f64; 2]; 2],
    /// Secular angular frequencies, stiffer axis first (rad/s).
    pub secular_frequencies: [f64; 2],
    /// Stability parameters; positive for the axis of larger RF curvature.
    pub q_params: [f64; 2],
    /// Principal-axis angles from the substrate-parallel direction (deg, in (-90, 90]),
    /// in the order of `secular_frequencies`.
    pub principal_axes: [f64; 2],
    /// Depth in eV.
    pub depth: f64,
    pub escape_point: Point,
    /// Depth was taken where the basin touches a sink rather than at a saddle.
    pub depth_flagged: bool,
    /// Eigenvalues of the RF-only pseudopotential Hessian (J/m²).
    pub rf_curvatures: [f64; 2],
    /// Measured distance from `r_min` to the nearest electrode surface (m).
    pub nearest_distance: f64,
    /// `λ_rf·4mΩ²d⁴/(Q²V0²)` with `λ_rf` the mean RF curvature and `d` the measured distance.
    pub eta: f64,
    /// `depth·4mΩ²d²/(Q²V0²)`.
    pub delta: f64,
    pub normalized_f: Option<f64>,
    pub normalized_u: Option<f64>,
    pub species: Species,
    pub drive: DriveConfig,
}

fn angle_norm(a: f64) -> f64 {
    let mut a = a % 180.0;
    if a <= -90.0 {
        a += 180.0;
    }
    if a > 90.0 {
        a -= 180.0;
    }
    a
}

/// Where to look for the trap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRegion {
    pub d: f64,
    pub hint: Option<Point>,
    pub floor_y: Option<f64>,
}

impl SearchRegion {
    pub fn of(g: &CrossSectionGeometry) -> Self {
        SearchRegion { d: g.d, hint: g.trap_hint, floor_y: g.substrate_y }
    }
}

/// Locates the trap minimum of pseudo + Q·φ_static and characterizes it.
pub fn characterize(
    pseudo: &PseudoField,
    static_pot: Option<&Potential>,
    species: Species,
    drive: DriveConfig,
    geometry: &CrossSectionGeometry,
) -> Result<TrapCharacterization, PseudoError> {
    let total: Vec<f64> = match static_pot {
        Some(s) => pseudo.u.iter().zip(&s.values).map(|(u, v)| u + species.charge * v).collect(),
        None => pseudo.u.clone(),
    };
    let region = SearchRegion::of(geometry);
    let land = Landscape { grid: pseudo.grid, values: &total, disc: &pseudo.disc, floor_y: region.floor_y };

    let d = region.d;
    let near = |p: Point| {
        let (dist, _) = geometry.nearest_electrode(p);
        dist >= 0.25 * d && dist <= 3.0 * d && region.floor_y.map_or(true, |y| p.y > y)
    };
    let minima = land.local_minima(near);
    let seed = match region.hint {
        Some(hint) => minima.iter().min_by(|a, b| a.0.dist(hint).total_cmp(&b.0.dist(hint))),
        None => minima.iter().min_by(|a, b| a.1.total_cmp(&b.1)),
    }
    .ok_or(PseudoError::NoMinimum)?
    .0;

    let (coarse, _) = land.newton(seed, true, pseudo.grid.h).ok_or(PseudoError::RefinementFailed(seed))?;
    let static_field = static_pot.map(field_of);
    let k = species.charge * species.charge / (4.0 * species.mass * pseudo.omega * pseudo.omega);
    let model = FieldModel::new(&pseudo.field, static_field.as_ref(), k, species.charge);
    let Some((r_min, der)) = model.refine(coarse, pseudo.grid.h) else {
        let d = model.at(coarse).ok_or(PseudoError::RefinementFailed(coarse))?;
        let (l1, l2, _) = sym_eigen(d.hess[0], d.hess[1], d.hess[2]);
        if l2 <= 0.0 {
            return Err(PseudoError::Saddle { x: coarse.x, y: coarse.y, l1, l2 });
        }
        return Err(PseudoError::RefinementFailed(coarse));
    };
    let [hxx, hxy, hyy] = der.hess;
    let (l1, l2, ang) = sym_eigen(hxx, hxy, hyy);
    if l2 <= 0.0 {
        return Err(PseudoError::Saddle { x: r_min.x, y: r_min.y, l1, l2 });
    }
    let m = species.mass;
    let secular = [(l1 / m).sqrt(), (l2 / m).sqrt()];
    let axes = [angle_norm(ang), angle_norm(ang + 90.0)];

    let (r1, r2, _) = sym_eigen(der.rf_hess[0], der.rf_hess[1], der.rf_hess[2]);
    let q1 = 2.0 * std::f64::consts::SQRT_2 * (r1.max(0.0) / m).sqrt() / drive.omega;
    let q2 = 2.0 * std::f64::consts::SQRT_2 * (r2.max(0.0) / m).sqrt() / drive.omega;
    let s = land.sample(r_min).ok_or(PseudoError::RefinementFailed(r_min))?;

    let esc = land.escape(r_min).ok_or(PseudoError::NoEscape)?;
    let depth_j = (esc.level - s.v).max(0.0);

    let (dist, _) = geometry.nearest_electrode(r_min);
    let unit = species.charge * species.charge * drive.v0 * drive.v0 / (4.0 * m * drive.omega * drive.omega);
    let eta = 0.5 * (r1 + r2) * dist.powi(4) / unit;
    let delta = depth_j * dist * dist / unit;

    Ok(TrapCharacterization {
        r_min,
        hessian: [[hxx, hxy], [hxy, hyy]],
        secular_frequencies: secular,
        q_params: [q1, -q2],
        principal_axes: axes,
        depth: depth_j / ELEMENTARY_CHARGE,
        escape_point: esc.point,
        depth_flagged: esc.flagged,
        rf_curvatures: [r1, r2],
        nearest_distance: dist,
        eta,
        delta,
        normalized_f: None,
        normalized_u: None,
        species,
        drive,
    })
}

/// Depth of the pseudopotential alone around `r_min` (eV) and the escape point.
pub fn trap_depth(pseudo: &PseudoField, r_min: Point, floor_y: Option<f64>) -> Result<(f64, Escape), PseudoError> {
    let land = Landscape { grid: pseudo.grid, values: &pseudo.u, disc: &pseudo.disc, floor_y };
    let (_, s) = land.newton(r_min, true, pseudo.grid.h).ok_or(PseudoError::RefinementFailed(r_min))?;
    let esc = land.escape(r_min).ok_or(PseudoError::NoEscape)?;
    Ok(((esc.level - s.v).max(0.0) / ELEMENTARY_CHARGE, esc))
}

/// Frequency and depth ratios against `baseline`.
pub fn compare_to_reference(
    tc: &TrapCharacterization,
    baseline: &TrapCharacterization,
) -> Result<(f64, f64), PseudoError> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if !close(tc.species.mass, baseline.species.mass) || !close(tc.species.charge, baseline.species.charge) {
        return Err(PseudoError::Mismatch("species"));
    }
    if !close(tc.drive.v0, baseline.drive.v0) || !close(tc.drive.omega, baseline.drive.omega) {
        return Err(PseudoError::Mismatch("drive"));
    }
    Ok(((tc.eta / baseline.eta).sqrt(), tc.delta / baseline.delta))
}

/// Ratios against stored dimensionless baseline constants.
pub fn normalize_against(tc: &mut TrapCharacterization, b: &Baseline) {
    tc.normalized_f = Some((tc.eta / b.eta).sqrt());
    tc.normalized_u = Some(tc.delta / b.delta);
}

#[cfg(test)]
mod tests {
    use super::angle_norm;

    #[test]
    fn angles_fold_into_half_open_range() {
        assert_eq!(angle_norm(90.0), 90.0);
        assert_eq!(angle_norm(-90.0), 90.0);
        assert_eq!(angle_norm(135.0), -45.0);
        assert_eq!(angle_norm(-30.0), -30.0);
    }
}
