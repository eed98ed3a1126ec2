use std::sync::OnceLock;
use surftrap::analysis::{analyze, Analysis, AnalysisRequest};
use surftrap::geometry::*;
use surftrap::laplace::{field_of, SolverSettings};
use surftrap::pseudo::*;

const D: f64 = 50e-6;

fn request(kind: CanonicalKind, p: CanonicalParams, v0: f64) -> AnalysisRequest {
    let g = build_canonical(kind, &p).unwrap();
    AnalysisRequest::new(g, DriveConfig::new(v0, 2.0 * std::f64::consts::PI * 100e6).unwrap(), Species::ion(9.0))
}

fn run(kind: CanonicalKind) -> Analysis {
    analyze(&request(kind, CanonicalParams::new(D), 100.0)).unwrap()
}

fn four_rod() -> &'static Analysis {
    static A: OnceLock<Analysis> = OnceLock::new();
    A.get_or_init(|| run(CanonicalKind::FourRod))
}

fn five_wire() -> &'static Analysis {
    static A: OnceLock<Analysis> = OnceLock::new();
    A.get_or_init(|| run(CanonicalKind::FiveWire))
}

#[test]
fn zero_field_gives_zero_pseudopotential() {
    let rf = &four_rod().rf;
    let flat = rf.with_values(vec![0.0; rf.values.len()], vec![0.0; rf.electrode_values.len()]);
    let u = pseudopotential_field(&field_of(&flat), Species::ion(9.0), 1e8);
    assert!(u.u.iter().all(|&x| x == 0.0));
}

#[test]
fn ideal_quadrupole_matches_closed_form() {
    let rf = &four_rod().rf;
    let grid = rf.grid;
    let (v0, r0) = (100.0, D);
    let values: Vec<f64> = (0..grid.len())
        .map(|p| {
            let (i, j) = grid.ij(p);
            let q = grid.node(i, j);
            v0 * (q.x * q.x - q.y * q.y) / (2.0 * r0 * r0)
        })
        .collect();
    let quad = rf.with_values(values, rf.electrode_values.clone());
    let species = Species::ion(9.0);
    let omega = 2.0 * std::f64::consts::PI * 100e6;
    let u = pseudopotential_field(&field_of(&quad), species, omega);
    let u2 = pseudopotential_field(&field_of(&quad), species, 2.0 * omega);
    let k = species.charge * species.charge * v0 * v0 / (4.0 * species.mass * omega * omega * r0.powi(4));
    let mut checked = 0;
    for p in 0..grid.len() {
        let (i, j) = grid.ij(p);
        let q = grid.node(i, j);
        if q.x.hypot(q.y) > 0.8 * D || rf.disc.is_fixed(p) || rf.disc.arms(p).iter().any(|a| a.is_cut()) {
            continue;
        }
        let want = k * (q.x * q.x + q.y * q.y);
        assert!((u.u[p] - want).abs() <= 1e-9 * want.max(k * D * D), "{} {}", u.u[p], want);
        assert!((4.0 * u2.u[p] - u.u[p]).abs() <= 1e-12 * u.u[p].max(1e-300));
        checked += 1;
    }
    assert!(checked > 1000);
}

#[test]
fn pseudopotential_is_never_negative() {
    assert!(five_wire().pseudo.u.iter().all(|&u| u >= 0.0));
    assert!(four_rod().pseudo.u.iter().all(|&u| u >= 0.0));
}

#[test]
fn four_rod_secular_frequencies_are_degenerate() {
    let tc = &four_rod().characterization;
    let [a, b] = tc.secular_frequencies;
    assert!((a / b - 1.0).abs() < 0.01, "{a} {b}");
    assert!((tc.q_params[0] + tc.q_params[1]).abs() < 0.01 * tc.q_params[0].abs());
    assert!(tc.r_min.x.hypot(tc.r_min.y) < 1e-3 * D);
}

#[test]
fn hessian_is_symmetric_and_positive_at_minimum() {
    for tc in [&four_rod().characterization, &five_wire().characterization] {
        let h = tc.hessian;
        assert_eq!(h[0][1], h[1][0]);
        assert!(h[0][0] > 0.0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0.0);
        assert!(tc.depth > 0.0);
    }
    // the four-rod basin reaches a rod before any saddle between rods
    assert!(four_rod().characterization.depth_flagged);
    assert!(!five_wire().characterization.depth_flagged);
}

fn axes_close(got: f64, want: f64, tol: f64) -> bool {
    let diff = (got - want).rem_euclid(180.0);
    diff.min(180.0 - diff) <= tol
}

// Axes are set by a static bias between the control electrodes and the RF
// rails; the pseudopotential alone is isotropic at the null.
fn biased_axes(kind: CanonicalKind, p: CanonicalParams) -> [f64; 2] {
    let mut req = request(kind, p, 100.0);
    let mut statics = StaticConfig::zero();
    for k in 0..req.geometry.control_count() {
        statics = statics.set(k, 1.0);
    }
    req.statics = statics;
    analyze(&req).unwrap().characterization.principal_axes
}

fn tilt(axes: [f64; 2]) -> f64 {
    axes.iter().map(|&a| a.rem_euclid(90.0)).map(|a| a.min(90.0 - a)).fold(0.0, f64::max)
}

#[test]
fn symmetric_five_wire_axes_are_horizontal_and_vertical() {
    let tc = &five_wire().characterization;
    assert!(tc.r_min.x.abs() < 1e-3 * D);
    for [a, b] in [tc.principal_axes, biased_axes(CanonicalKind::FiveWire, CanonicalParams::new(D))] {
        assert!((axes_close(a, 0.0, 1.0) && axes_close(b, 90.0, 1.0)) || (axes_close(a, 90.0, 1.0) && axes_close(b, 0.0, 1.0)), "{a} {b}");
    }
}

fn wide_outer() -> CanonicalParams {
    let mut p = CanonicalParams::new(D);
    p.outer_width = Some(10.0 * D);
    p
}

#[test]
fn skewed_rails_rotate_axes_by_thirty_degrees() {
    let mut p = wide_outer();
    p.rf_skew = 0.5;
    let axes = biased_axes(CanonicalKind::FiveWire, p);
    assert!((tilt(axes) - 30.0).abs() <= 3.0, "{axes:?}");
}

#[test]
fn four_wire_axes_are_diagonal() {
    let axes = biased_axes(CanonicalKind::FourWire, wide_outer());
    for a in axes {
        assert!(axes_close(a, 45.0, 3.0) || axes_close(a, -45.0, 3.0), "{axes:?}");
    }
}

#[test]
fn depth_scales_with_square_of_amplitude() {
    let base = &five_wire().characterization;
    let twice = analyze(&request(CanonicalKind::FiveWire, CanonicalParams::new(D), 200.0)).unwrap().characterization;
    assert!((twice.depth / base.depth - 4.0).abs() < 1e-9, "{}", twice.depth / base.depth);
    assert!((twice.secular_frequencies[0] / base.secular_frequencies[0] - 2.0).abs() < 1e-9);
    assert!((twice.delta / base.delta - 1.0).abs() < 1e-9);
}

#[test]
fn baseline_against_itself_is_unity() {
    let tc = &five_wire().characterization;
    assert_eq!(compare_to_reference(tc, tc).unwrap(), (1.0, 1.0));
    let mut other = tc.clone();
    other.drive.omega *= 2.0;
    assert!(compare_to_reference(tc, &other).is_err());
}

#[test]
fn coarse_and_default_grids_agree() {
    let mut req = request(CanonicalKind::FiveWire, CanonicalParams::new(D), 100.0);
    req.settings = SolverSettings { h_over_d: 1.0 / 20.0, ..SolverSettings::default() };
    let coarse = analyze(&req).unwrap().characterization;
    let fine = &five_wire().characterization;
    assert!((coarse.eta / fine.eta - 1.0).abs() < 0.03, "{} {}", coarse.eta, fine.eta);
    assert!((coarse.r_min.y - fine.r_min.y).abs() < 0.02 * D);
}

#[test]
fn five_wire_has_one_minimum_and_one_saddle_above_it() {
    let a = five_wire();
    let tc = &a.characterization;
    let land = Landscape { grid: a.pseudo.grid, values: &a.pseudo.u, disc: &a.pseudo.disc, floor_y: None };
    let region = |p: Point| p.x.abs() < 0.8 * D && p.y > 0.3 * D && p.y < 3.0 * D;
    let pts = land.stationary_points(region, 2, 0.05 * D);
    let minima: Vec<_> = pts.iter().filter(|p| p.kind == StationaryKind::Minimum).collect();
    let saddles: Vec<_> = pts.iter().filter(|p| p.kind == StationaryKind::Saddle).collect();
    assert_eq!((minima.len(), saddles.len()), (1, 1), "{pts:?}");
    assert!(minima[0].position.dist(tc.r_min) < 0.01 * D);
    let s = saddles[0].position;
    assert!(s.x.abs() < 0.01 * D && s.y > tc.r_min.y, "{s:?}");
    assert!(s.dist(tc.escape_point) < 0.02 * D);
}
