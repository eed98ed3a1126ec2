use num_complex::Complex64;
use surftrap::analytic::*;

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_charge_potential() {
    let sys = LineChargeSystem::new("pair", vec![LineCharge::new(0.0, 0.0, 1.0).unwrap(), LineCharge::new(100.0, 0.0, 1e-300).unwrap()]).unwrap();
    let (w, _) = complex_potential_and_field(&sys, c(2.0, 0.0)).unwrap();
    assert!((w.re + 2f64.ln()).abs() < 1e-12, "{w}");
    assert!(matches!(complex_potential_and_field(&sys, c(0.0, 0.0)), Err(AnalyticError::AtCharge(_))));
    assert!(LineCharge::new(0.0, 0.0, 0.0).is_err());
    assert!(LineChargeSystem::new("one", vec![LineCharge::new(0.0, 0.0, 1.0).unwrap()]).is_err());
}

#[test]
fn quadrupole_centre_is_field_free() {
    let (_, e) = complex_potential_and_field(&LineChargeSystem::quadrupole(), c(0.0, 0.0)).unwrap();
    assert!(e.norm() < 1e-15);
}

#[test]
fn quadrupole_potential_has_closed_form() {
    let sys = LineChargeSystem::quadrupole();
    // fixed pseudo-random points away from the charges
    let mut s = 0x2545f491u64;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s % 10_000) as f64 / 10_000.0 * 4.0 - 2.0
    };
    for _ in 0..10 {
        let z = c(next(), next());
        let (w, _) = complex_potential_and_field(&sys, z).unwrap();
        let closed = ((z * z + 1.0) / (z * z - 1.0)).ln();
        // the logarithms agree up to a branch
        let d = w - closed;
        let k = (d.im / (2.0 * std::f64::consts::PI)).round();
        assert!((d - c(0.0, 2.0 * std::f64::consts::PI * k)).norm() < 1e-12, "{z}: {w} vs {closed}");
    }
}

#[test]
fn upsilon_at_landmarks() {
    let q = LineChargeSystem::quadrupole();
    assert_eq!(upsilon(&q, c(0.0, 0.0)).unwrap(), 0.0);
    let a = 1.0 / (2.0 * 3f64.sqrt()).sqrt();
    assert!(rel(upsilon(&q, c(a, a)).unwrap(), 3.0 * 3f64.sqrt()) < 1e-12);
    let s = LineChargeSystem::four_wire_surface(1.0);
    assert!(upsilon(&s, c(0.0, 3f64.sqrt() / 2.0)).unwrap() < 1e-24);
}

#[test]
fn reference_constants() {
    let s3 = 3f64.sqrt();
    let q = reference_quadrupole();
    assert_eq!(q.curvature_at_min, 32.0);
    assert_eq!(q.maxima.len(), 4);
    for m in &q.maxima {
        assert!(rel(m.re.abs(), 1.0 / (2.0 * s3).sqrt()) < 1e-12 && rel(m.im.abs(), 1.0 / (2.0 * s3).sqrt()) < 1e-12);
    }
    let s = reference_four_wire_surface();
    assert!(rel(s.curvature_at_min / q.curvature_at_min, 1.0 / 12.0) < 1e-12);
    assert!(rel(s.upsilon_at_max, 1.0 / (7.0 + 4.0 * s3)) < 1e-12);
    assert!(rel(s.frequency_ratio_vs_quadrupole, 1.0 / (2.0 * s3)) < 1e-12);
    assert!((s.frequency_ratio_vs_quadrupole - 0.29).abs() < 0.005);
    assert!(rel(1.0 / s.depth_ratio_vs_quadrupole, 3.0 * (12.0 + 7.0 * s3)) < 1e-12);
    assert!((1.0 / s.depth_ratio_vs_quadrupole - 72.0).abs() < 0.5);
}

// Every closed-form point appears in the search result. The search also
// reports saddles on the charge line, which sit far above the barrier.
fn contains(points: &[Complex64], want: &[Complex64], tol: f64) -> bool {
    want.iter().all(|w| points.iter().any(|p| (p - w).norm() < tol))
}

#[test]
fn numerical_search_recovers_closed_forms() {
    for (sys, exact) in [
        (LineChargeSystem::quadrupole(), reference_quadrupole()),
        (LineChargeSystem::four_wire_surface(1.0), reference_four_wire_surface()),
    ] {
        let found = analyze_system(&sys).unwrap();
        assert!(contains(&found.minima, &exact.minima, 1e-9) && found.minima.len() == exact.minima.len(), "{:?}", found.minima);
        assert!(contains(&found.maxima, &exact.maxima, 1e-9), "{:?}", found.maxima);
        assert!(rel(found.curvature_at_min, exact.curvature_at_min) < 1e-9);
        assert!(rel(found.upsilon_at_max, exact.upsilon_at_max) < 1e-9);
        assert!(rel(found.depth_ratio_vs_quadrupole, exact.depth_ratio_vs_quadrupole) < 1e-9);
    }
}

#[test]
fn closed_form_points_are_stationary() {
    for (sys, exact) in [
        (LineChargeSystem::quadrupole(), reference_quadrupole()),
        (LineChargeSystem::four_wire_surface(1.0), reference_four_wire_surface()),
    ] {
        for z in exact.minima.iter().chain(&exact.maxima) {
            let d = upsilon_derivatives(&sys, *z).unwrap();
            assert!(d.grad[0].hypot(d.grad[1]) < 1e-9, "{z}: {:?}", d.grad);
        }
        for z in &exact.minima {
            assert!(upsilon(&sys, *z).unwrap() < 1e-10);
        }
    }
}

#[test]
fn upsilon_decay_follows_lowest_multipole() {
    let slope = |sys: &LineChargeSystem, a: f64| {
        let z = Complex64::from_polar(1e3, a);
        let u1 = upsilon(sys, z).unwrap();
        assert!(u1 > 0.0);
        (u1 / upsilon(sys, 2.0 * z).unwrap()).log2()
    };
    for a in [0.3, 1.1, 2.0] {
        let s = slope(&LineChargeSystem::four_wire_surface(1.0), a);
        assert!((s - 4.0).abs() < 1e-3, "{s}");
        // no dipole moment: the field falls off one power faster
        let s = slope(&LineChargeSystem::quadrupole(), a);
        assert!((s - 6.0).abs() < 1e-3, "{s}");
    }
}

#[test]
fn upsilon_is_never_negative() {
    let sys = LineChargeSystem::four_wire_surface(1.35);
    for i in 0..40 {
        for j in 0..40 {
            if let Ok(u) = upsilon(&sys, c(-3.0 + 0.151 * i as f64, -3.0 + 0.151 * j as f64)) {
                assert!(u >= 0.0);
            }
        }
    }
}

#[test]
fn finite_conductor_fit_matches_reference_values() {
    let fit = finite_conductor_fit(0.2).unwrap();
    assert!((fit.charge_ratio - 1.35).abs() <= 0.02, "{}", fit.charge_ratio);
    let r = &fit.result;
    let top = r.minima.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!((top - 1.18).abs() <= 0.02, "{:?}", r.minima);
    assert!(r.minima.iter().all(|z| z.re.abs() < 1e-9));
    assert!(r.maxima.iter().any(|z| (z.im.abs() - 1.96).abs() <= 0.03 && z.re.abs() < 1e-9), "{:?}", r.maxima);
    assert!((r.frequency_ratio_vs_quadrupole - 0.16).abs() <= 0.01, "{}", r.frequency_ratio_vs_quadrupole);
    assert!((1.0 / r.depth_ratio_vs_quadrupole - 200.0).abs() <= 10.0, "{}", 1.0 / r.depth_ratio_vs_quadrupole);
    for w in &fit.wires {
        assert!(w.axis_mismatch < 0.05, "{w:?}");
        assert!(rel(w.mean_diameter, 0.2) < 1e-3);
    }
}

#[test]
fn thin_wires_have_equal_charges() {
    // the ratio approaches one like 1/ln(1/diameter)
    let mut last = f64::INFINITY;
    for d in [0.1, 1e-2, 1e-4, 1e-6] {
        let r = finite_conductor_fit(d).unwrap().charge_ratio;
        assert!(r > 1.0 && r < last, "{d}: {r}");
        assert!((r - 1.0) * (1.0 / d).ln() < 1.1, "{d}: {r}");
        last = r;
    }
    assert!(last < 1.08);
    assert!(matches!(finite_conductor_fit(0.6), Err(AnalyticError::BadDiameter { .. })));
}

#[test]
fn thin_wire_geometry_places_discs_on_charges() {
    let sys = LineChargeSystem::four_wire_surface(1.0);
    let g = thin_wire_geometry(&sys, 0.02, 1e-3, c(0.0, 3f64.sqrt() / 2.0)).unwrap();
    assert_eq!(g.electrodes.len(), 4);
    assert!(rel(g.d, (1.0 - 0.02) * 1e-3) < 1e-12);
    assert_eq!(g.rf_indices().len(), 2);
}

#[test]
fn upsilon_export_has_header_and_rows() {
    let csv = upsilon_csv(&LineChargeSystem::quadrupole(), 2.0, 5);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,y,value");
    // (±1, 0) and (0, ±1) are charges
    assert_eq!(lines.len(), 1 + 25 - 4);
}
