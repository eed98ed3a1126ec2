use std::f64::consts::PI;
use surftrap::analysis::{analyze, AnalysisRequest};
use surftrap::geometry::*;
use surftrap::pseudo::*;

fn run(kind: CanonicalKind, d: f64, baseline: Option<Baseline>) -> TrapCharacterization {
    let g = build_canonical(kind, &CanonicalParams::new(d)).unwrap();
    let mut req = AnalysisRequest::new(g, DriveConfig::new(100.0, 2.0 * PI * 100e6).unwrap(), Species::ion(9.0));
    req.baseline = baseline;
    analyze(&req).unwrap().characterization
}

#[test]
fn stored_baselines_match_a_fresh_solve() {
    for (kind, b) in [(CanonicalKind::TwoLayer, TWO_LAYER_BASELINE), (CanonicalKind::FourRod, FOUR_ROD_BASELINE)] {
        let tc = run(kind, 50e-6, Some(b));
        assert!((tc.eta / b.eta - 1.0).abs() < 1e-4, "{}: eta {}", b.label, tc.eta);
        assert!((tc.delta / b.delta - 1.0).abs() < 1e-4, "{}: delta {}", b.label, tc.delta);
        assert!((tc.normalized_f.unwrap() - 1.0).abs() < 1e-4);
        assert!((tc.normalized_u.unwrap() - 1.0).abs() < 1e-4);
    }
}

#[test]
fn dimensionless_constants_do_not_depend_on_scale() {
    let a = run(CanonicalKind::FourRod, 50e-6, None);
    let b = run(CanonicalKind::FourRod, 200e-6, None);
    assert!((a.eta / b.eta - 1.0).abs() < 1e-9, "{} {}", a.eta, b.eta);
    assert!((a.delta / b.delta - 1.0).abs() < 1e-9);
    // physical quantities carry the scale
    assert!((a.secular_frequencies[0] / b.secular_frequencies[0] - 16.0).abs() < 1e-6);
}

#[test]
fn stored_and_computed_normalization_agree() {
    let five = run(CanonicalKind::FiveWire, 50e-6, Some(FOUR_ROD_BASELINE));
    let rod = run(CanonicalKind::FourRod, 50e-6, None);
    let (f, u) = compare_to_reference(&five, &rod).unwrap();
    assert!((five.normalized_f.unwrap() / f - 1.0).abs() < 1e-4);
    assert!((five.normalized_u.unwrap() / u - 1.0).abs() < 1e-4);
}
