use std::f64::consts::PI;
use std::sync::OnceLock;
use surftrap::analysis::{analyze, Analysis, AnalysisRequest};
use surftrap::geometry::*;
use surftrap::laplace::field_of;
use surftrap::pseudo::*;

const D: f64 = 50e-6;
const V0: f64 = 100.0;

fn species() -> Species {
    Species::ion(9.0)
}

fn four_rod() -> &'static Analysis {
    static A: OnceLock<Analysis> = OnceLock::new();
    A.get_or_init(|| {
        let g = build_canonical(CanonicalKind::FourRod, &CanonicalParams::new(D)).unwrap();
        analyze(&AnalysisRequest::new(g, DriveConfig::new(V0, 2.0 * PI * 100e6).unwrap(), species())).unwrap()
    })
}

// Drive frequency giving stability parameter `q` on the four-rod trap.
fn drive_for(q: f64) -> DriveConfig {
    let tc = &four_rod().characterization;
    let omega = tc.drive.omega * (tc.q_params[0] / q).sqrt();
    DriveConfig::new(V0, omega).unwrap()
}

fn characterize_at(drive: DriveConfig) -> TrapCharacterization {
    let a = four_rod();
    let g = build_canonical(CanonicalKind::FourRod, &CanonicalParams::new(D)).unwrap();
    let ps = pseudopotential_field(&field_of(&a.rf), species(), drive.omega);
    characterize(&ps, None, species(), drive, &g).unwrap()
}

// Starts `offset` away from the minimum along the first principal axis.
fn run(drive: DriveConfig, offset: f64, secular_periods: f64) -> (Trajectory, TrapCharacterization) {
    let tc = characterize_at(drive);
    let a = tc.principal_axes[0].to_radians();
    let r0 = Point::new(tc.r_min.x + offset * a.cos(), tc.r_min.y + offset * a.sin());
    let duration = secular_periods * 2.0 * PI / tc.secular_frequencies[1];
    let traj = simulate_trajectory(&four_rod().rf, None, species(), drive, r0, [0.0, 0.0], duration, 100).unwrap();
    (traj, tc)
}

#[test]
fn ion_at_minimum_stays_put() {
    let (traj, tc) = run(drive_for(0.21), 0.0, 40.0);
    let worst = traj.samples.iter().map(|s| (s.x - tc.r_min.x).hypot(s.y - tc.r_min.y)).fold(0.0, f64::max);
    assert!(worst < 1e-3 * D, "{}", worst / D);
    assert!(micromotion_ratio(&traj).is_err());
}

#[test]
fn micromotion_is_half_q() {
    for q in [0.1, 0.21, 0.3] {
        let (traj, tc) = run(drive_for(q), 0.02 * D, 40.0);
        assert!((tc.q_params[0] / q - 1.0).abs() < 1e-6, "{:?}", tc.q_params);
        let ratio = micromotion_ratio(&traj).unwrap();
        assert!((ratio / (q / 2.0) - 1.0).abs() < 0.1, "q {q}: {ratio}");
    }
}

#[test]
fn secular_frequency_matches_hessian() {
    for q in [0.1, 0.21, 0.3] {
        let (traj, tc) = run(drive_for(q), 0.02 * D, 40.0);
        let w = secular_frequency(&traj).unwrap();
        let near = tc.secular_frequencies.iter().map(|&h| (w / h - 1.0).abs()).fold(f64::INFINITY, f64::min);
        assert!(near < 0.02, "q {q}: {w} vs {:?}", tc.secular_frequencies);
    }
}

#[test]
fn spectrum_has_secular_line_and_sidebands() {
    let drive = drive_for(0.21);
    let (traj, tc) = run(drive, 0.02 * D, 40.0);
    let peaks = spectrum_peaks(&traj, 6);
    let w = tc.secular_frequencies[0];
    for want in [w, drive.omega - w, drive.omega + w] {
        assert!(peaks.iter().any(|&(f, _)| (f / want - 1.0).abs() < 0.01), "{want}: {peaks:?}");
    }
    assert!((peaks[0].0 / w - 1.0).abs() < 0.01);
}

#[test]
fn too_short_or_coarse_runs_are_rejected() {
    let drive = drive_for(0.21);
    let tc = characterize_at(drive);
    let rf = &four_rod().rf;
    let err = simulate_trajectory(rf, None, species(), drive, tc.r_min, [0.0; 2], 1e-6, 20).unwrap_err();
    assert_eq!(err, SpectralError::StepTooLarge(20));
    let short = 5.0 * 2.0 * PI / tc.secular_frequencies[0];
    let traj = simulate_trajectory(rf, None, species(), drive, Point::new(0.02 * D, 0.0), [0.0; 2], short, 100).unwrap();
    assert!(matches!(secular_frequency(&traj), Err(SpectralError::TooShort(_))));
}

#[test]
fn energy_is_conserved_without_rf() {
    let rf = &four_rod().rf;
    let grid = rf.grid;
    let (m, q) = (species().mass, species().charge);
    let ws = 2.0 * PI * 1e6;
    let k = m * ws * ws / (2.0 * q);
    let bowl: Vec<f64> = (0..grid.len())
        .map(|p| {
            let (i, j) = grid.ij(p);
            let r = grid.node(i, j);
            k * (r.x * r.x + r.y * r.y)
        })
        .collect();
    let statics = rf.with_values(bowl, rf.electrode_values.clone());
    let off = rf.with_values(vec![0.0; grid.len()], vec![0.0; rf.electrode_values.len()]);
    let drive = DriveConfig::new(V0, 100.0 * ws).unwrap();
    let duration = 100.0 * 2.0 * PI / ws;
    let traj = simulate_trajectory(&off, Some(&statics), species(), drive, Point::new(0.2 * D, 0.0), [0.0, 0.3 * D * ws], duration, 100).unwrap();
    let energy = |s: &TrajectorySample| 0.5 * m * (s.vx * s.vx + s.vy * s.vy) + q * k * (s.x * s.x + s.y * s.y);
    let e0 = energy(&traj.samples[0]);
    let drift = traj.samples.iter().map(|s| (energy(s) / e0 - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-6, "{drift}");
}

#[test]
fn driven_micromotion_grows_linearly_with_static_push() {
    let g = build_canonical(CanonicalKind::FourRod, &CanonicalParams::new(D)).unwrap();
    let drive = drive_for(0.21);
    let mut per_metre = Vec::new();
    for vs in [0.25, 0.5, 1.0] {
        let mut req = AnalysisRequest::new(g.clone(), drive, species());
        req.statics = StaticConfig::zero().set(0, vs);
        let a = analyze(&req).unwrap();
        let tc = &a.characterization;
        let shift = tc.r_min.x.hypot(tc.r_min.y);
        let duration = 40.0 * 2.0 * PI / tc.secular_frequencies[1];
        let traj = simulate_trajectory(&a.rf, a.static_pot.as_ref(), species(), drive, tc.r_min, [0.0; 2], duration, 100).unwrap();
        let [ax, ay] = driven_micromotion_amplitude(&traj).unwrap();
        per_metre.push((ax.hypot(ay) / shift, shift));
    }
    assert!(per_metre[2].1 > 3.5 * per_metre[0].1);
    for &(k, _) in &per_metre {
        assert!((k / per_metre[0].0 - 1.0).abs() < 0.05, "{per_metre:?}");
        assert!((k / (0.21 / 2.0) - 1.0).abs() < 0.1, "{per_metre:?}");
    }
}
