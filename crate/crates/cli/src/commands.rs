use crate::manifest::Output;
use crate::*;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fs;
use surftrap::analysis::{analyze, Analysis, AnalysisError, AnalysisRequest};
use surftrap::analytic::{
    analyze_system, finite_conductor_fit, reference_four_wire_surface, reference_quadrupole, upsilon_csv, AnalyticError,
    LineChargeSystem,
};
use surftrap::contour::{contour_csv, export_contours, LevelPolicy};
use surftrap::engineering::{
    aspect_ratio_exponents, dielectric_sensitivity, dielectric_study_geometry, dissipated_power, material, materials_csv,
    materials_db, rc_rolloff, AspectSettings, DissipationInput, STUDY_OUTER_WIDTH_D, STUDY_THICKNESS_D,
};
use surftrap::geometry::{build_canonical, parse_spec_file, CanonicalParams, CrossSectionGeometry, DriveConfig, Point, Species, StaticConfig};
use surftrap::laplace::{LaplaceError, SolverSettings};
use surftrap::pseudo::{
    micromotion_ratio, secular_frequency, simulate_trajectory, spectrum_peaks, SpectralError, FOUR_ROD_BASELINE,
    TWO_LAYER_BASELINE,
};
use surftrap::scaling::{evaluate, heating_exponent, min_radius_for_ratio, presets, scan, scan_csv};
use surftrap::units::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn from_analysis(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::Laplace(LaplaceError::NotConverged { .. }) | AnalysisError::Pseudo(_) => {
            Failure::Physics(e.to_string())
        }
        _ => usage(e),
    }
}

fn from_analytic(e: AnalyticError) -> Failure {
    match e {
        AnalyticError::ContourFailed(..) | AnalyticError::NoRatio { .. } | AnalyticError::NoMinimum => {
            Failure::Physics(e.to_string())
        }
        _ => usage(e),
    }
}

fn from_spectral(e: SpectralError) -> Failure {
    match e {
        SpectralError::StepTooLarge(_) | SpectralError::TooShort(_) => usage(e),
        _ => Failure::Physics(e.to_string()),
    }
}

fn value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("serializable result")
}

pub fn run(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Analyze(a) => analyze_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Scaling(a) => scaling(a),
        Command::Dissipation(a) => dissipation(a),
        Command::Rolloff(a) => rolloff(a),
        Command::Materials(a) => materials(a),
        Command::ScanAspect(a) => scan_aspect(a),
        Command::Dielectric(a) => dielectric(a),
        Command::Traj(a) => traj(a),
    }
}

fn geometry(t: &TrapArgs) -> Result<CrossSectionGeometry, Failure> {
    if let Some(path) = &t.geometry {
        let text = fs::read_to_string(path).map_err(|e| usage(format!("reading {}: {e}", path.display())))?;
        return parse_spec_file(&text).map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    let kind = t.kind.expect("clap requires --kind or --geometry");
    let mut p = CanonicalParams::new(t.d);
    p.thickness = t.thickness;
    p.width = t.width;
    p.gap = t.gap;
    p.outer_width = t.outer_width;
    p.gamma = t.gamma;
    p.rf_skew = t.rf_skew;
    build_canonical(kind, &p).map_err(usage)
}

fn request(t: &TrapArgs) -> Result<AnalysisRequest, Failure> {
    let g = geometry(t)?;
    let drive = DriveConfig::new(t.v0, 2.0 * PI * t.freq).map_err(usage)?;
    let species = Species::new(t.mass, t.charge * ELEMENTARY_CHARGE).map_err(usage)?;
    let mut req = AnalysisRequest::new(g, drive, species);
    req.statics = t.statics.iter().fold(StaticConfig::zero(), |s, &(i, v)| s.set(i, v));
    req.settings = SolverSettings { h_over_d: t.h_over_d, tol: t.tol, margin_d: t.margin_d, ..SolverSettings::default() };
    req.baseline = t.baseline.map(|b| match b {
        BaselineChoice::TwoLayer => TWO_LAYER_BASELINE,
        BaselineChoice::FourRod => FOUR_ROD_BASELINE,
    });
    Ok(req)
}

fn solve(t: &TrapArgs) -> Result<(AnalysisRequest, Analysis), Failure> {
    let req = request(t)?;
    let a = analyze(&req).map_err(from_analysis)?;
    Ok((req, a))
}

fn analysis_json(a: &Analysis) -> Value {
    let c = &a.characterization;
    json!({
        "characterization": c,
        "secular_frequencies_hz": c.secular_frequencies.map(|w| w / (2.0 * PI)),
        "provenance": a.provenance,
    })
}

fn analyze_cmd(a: &AnalyzeArgs) -> Result<Output, Failure> {
    let (req, an) = solve(&a.trap)?;
    let mut out = Output::json(analysis_json(&an));
    out.geometry_hash = Some(an.provenance.geometry_hash.clone());
    out.solver = Some(req.settings);
    if a.contours > 0 {
        let c = &an.characterization;
        let ev: Vec<f64> = an.pseudo.u.iter().map(|u| u / ELEMENTARY_CHARGE).collect();
        let cap = if c.depth > 0.0 { a.contour_cap * c.depth } else { ev.iter().copied().fold(0.0, f64::max) };
        let policy = LevelPolicy { count: a.contours, cap, floor: 1e-3 };
        let disc = &an.pseudo.disc;
        let lines = export_contours(&an.pseudo.grid, &ev, |p| !disc.is_fixed(p), policy).map_err(usage)?;
        out = out.file("contours.csv", contour_csv(&lines));
    }
    Ok(out)
}

fn oracle(a: &OracleArgs) -> Result<Output, Failure> {
    let quad = LineChargeSystem::quadrupole();
    let surf = LineChargeSystem::four_wire_surface(1.0);
    let mut result = json!({
        "quadrupole": { "closed_form": reference_quadrupole(), "numerical": analyze_system(&quad).map_err(from_analytic)? },
        "four_wire_surface": {
            "closed_form": reference_four_wire_surface(),
            "numerical": analyze_system(&surf).map_err(from_analytic)?,
        },
    });
    if !a.no_fit {
        result["finite_conductor"] = value(&finite_conductor_fit(a.diameter).map_err(from_analytic)?);
    }
    let mut out = Output::json(result);
    if a.map_points > 0 {
        if a.map_points < 2 {
            return Err(usage("--map-points must be at least 2"));
        }
        out = out
            .file("upsilon_quadrupole.csv", upsilon_csv(&quad, 3.0, a.map_points))
            .file("upsilon_four_wire_surface.csv", upsilon_csv(&surf, 3.0, a.map_points));
    }
    Ok(out)
}

fn scaling(a: &ScalingArgs) -> Result<Output, Failure> {
    let file = presets();
    let mut p = file
        .presets
        .iter()
        .find(|p| p.name == a.preset)
        .ok_or_else(|| {
            let names: Vec<_> = file.presets.iter().map(|p| p.name.as_str()).collect();
            usage(format!("unknown preset `{}`; available: {}", a.preset, names.join(", ")))
        })?
        .clone();
    if let Some(q) = a.q {
        p.q = q;
    }
    if let Some(b) = a.beta {
        p.beta = b;
    }
    if let Some(m) = a.mass {
        p.mass_u = m / ATOMIC_MASS_UNIT;
    }
    if let Some(e) = a.e0 {
        p.e0 = e;
    }
    let s = p.scenario().map_err(usage)?;
    let points = a.radius.iter().map(|&r| evaluate(&s, r)).collect::<Result<Vec<_>, _>>().map_err(usage)?;
    let mut targets = Vec::new();
    for &t in &a.target_ratio {
        let r = min_radius_for_ratio(&s, t).map_err(usage)?;
        targets.push(json!({ "target_ratio": t, "radius": r, "point": evaluate(&s, r).map_err(usage)? }));
    }
    let heating = match (a.distance, a.skin_depth) {
        (Some(d), Some(skin)) => Some(heating_exponent(d, skin, a.patch_size).map_err(usage)?),
        _ => None,
    };
    let mut out = Output::json(json!({
        "preset": p,
        "drive_to_secular_ratio": 2.0 * 2f64.sqrt() / s.q,
        "points": points,
        "targets": targets,
        "heating": heating,
    }));
    if a.scan {
        let fields = if a.scan_field.is_empty() { vec![s.e0] } else { a.scan_field.clone() };
        let rows = scan(&s, a.r_from, a.r_to, a.points, &fields).map_err(usage)?;
        out = out.file("scaling_scan.csv", scan_csv(&rows));
    }
    Ok(out)
}

fn dissipation(a: &DissipationArgs) -> Result<Output, Failure> {
    let input = DissipationInput {
        capacitance: a.capacitance,
        omega: 2.0 * PI * a.freq,
        v0: a.v0,
        r_lead: a.r_lead,
        tan_delta: a.tan_delta,
    };
    let r = dissipated_power(&input).map_err(usage)?;
    Ok(Output::json(json!({ "input": input, "result": r })))
}

fn rolloff(a: &RolloffArgs) -> Result<Output, Failure> {
    let f = rc_rolloff(a.resistance, a.capacitance).map_err(usage)?;
    Ok(Output::json(json!({ "resistance": a.resistance, "capacitance": a.capacitance, "corner_frequency_hz": f })))
}

fn materials(a: &MaterialsArgs) -> Result<Output, Failure> {
    let rows = match &a.name {
        Some(n) => vec![material(n).ok_or_else(|| usage(format!("no material named `{n}`")))?],
        None => materials_db(),
    };
    let csv = materials_csv(&rows);
    let mut out = Output::json(value(&rows)).file("materials.csv", csv.clone());
    if let Format::Csv = a.format {
        out.stdout = Some(csv);
    }
    Ok(out)
}

fn scan_aspect(a: &ScanAspectArgs) -> Result<Output, Failure> {
    if a.gammas.len() < 2 || a.gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(usage("need at least two positive aspect ratios"));
    }
    let s = AspectSettings {
        gammas: a.gammas.clone(),
        thickness_over_width: a.thickness_over_width,
        solver: SolverSettings { h_over_d: a.h_over_d, ..SolverSettings::default() },
        ..AspectSettings::default()
    };
    let r = aspect_ratio_exponents(&s);
    if r.points.iter().filter(|p| p.excluded.is_none()).count() < 2 {
        return Err(Failure::Physics("fewer than two aspect ratios produced a bounded trap".into()));
    }
    let mut out = Output::json(json!({ "settings": s, "scan": r })).file("aspect.csv", r.to_csv());
    out.solver = Some(s.solver);
    Ok(out)
}

fn dielectric(a: &DielectricArgs) -> Result<Output, Failure> {
    let settings = SolverSettings { h_over_d: a.h_over_d, ..SolverSettings::default() };
    let mut rows = Vec::new();
    for &gw in &a.gap_over_width {
        let g = dielectric_study_geometry(a.d, gw).map_err(usage)?;
        let r = dielectric_sensitivity(&g, a.eps, &settings).map_err(from_analysis)?;
        rows.push(json!({ "gap_over_width": gw, "geometry_hash": g.hash(), "sensitivity": r }));
    }
    let mut out = Output::json(json!({
        "electrode_thickness_d": STUDY_THICKNESS_D,
        "outer_ground_width_d": STUDY_OUTER_WIDTH_D,
        "runs": rows,
    }));
    out.solver = Some(settings);
    Ok(out)
}

fn traj(a: &TrajArgs) -> Result<Output, Failure> {
    let (req, an) = solve(&a.trap)?;
    let c = &an.characterization;
    let d = req.geometry.d;
    let r0 = Point::new(c.r_min.x + a.dx * d, c.r_min.y + a.dy * d);
    let slow = c.secular_frequencies[1];
    if !(a.periods > 0.0) {
        return Err(usage("--periods must be positive"));
    }
    let duration = a.periods * 2.0 * PI / slow;
    let t = simulate_trajectory(&an.rf, an.static_pot.as_ref(), req.species, req.drive, r0, [0.0, 0.0], duration, a.steps_per_period)
        .map_err(from_spectral)?;
    let measured = secular_frequency(&t).map_err(from_spectral)?;
    let micro = micromotion_ratio(&t).map_err(from_spectral)?;
    let peaks: Vec<Value> = spectrum_peaks(&t, a.peaks)
        .into_iter()
        .map(|(w, amp)| json!({ "omega": w, "frequency_hz": w / (2.0 * PI), "amplitude": amp }))
        .collect();
    let spectrum = json!({
        "secular_frequency_measured": measured,
        "secular_frequencies_hessian": c.secular_frequencies,
        "micromotion_ratio": micro,
        "q_params": c.q_params,
        "peaks": peaks,
    });
    let mut out = Output::json(json!({
        "characterization": c,
        "start": r0,
        "duration": duration,
        "steps": t.samples.len(),
        "spectrum": spectrum,
    }))
    .file("trajectory.csv", t.to_csv())
    .file("spectrum.json", crate::manifest::pretty(&spectrum));
    out.geometry_hash = Some(an.provenance.geometry_hash.clone());
    out.solver = Some(req.settings);
    Ok(out)
}
