use crate::analysis::{analyze, AnalysisRequest};
use crate::geometry::{build_canonical, CanonicalKind, CanonicalParams, DriveConfig, Species};
use crate::laplace::SolverSettings;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Three-layer scan at constant slot width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectSettings {
    pub d: f64,
    pub gammas: Vec<f64>,
    /// Electrode thickness over slot width.
    pub thickness_over_width: f64,
    pub solver: SolverSettings,
    /// Plate length in units of `d`.
    pub extent_d: f64,
}

impl Default for AspectSettings {
    fn default() -> Self {
        AspectSettings {
            d: 1.0,
            gammas: vec![1.0, 1.5, 2.2, 3.3, 5.0, 7.5, 11.0, 15.0],
            thickness_over_width: 0.02,
            solver: SolverSettings { h_over_d: 1.0 / 50.0, ..SolverSettings::default() },
            extent_d: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectPoint {
    pub gamma: f64,
    /// Depth and mean secular frequency relative to the first point.
    pub depth: f64,
    pub frequency: f64,
    pub depth_raw: f64,
    pub frequency_raw: f64,
    /// Depth taken where the basin meets an electrode, not at a saddle.
    pub depth_flagged: bool,
    /// Why the point was excluded, if it was.
    pub excluded: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS of the log residuals.
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectScan {
    pub points: Vec<AspectPoint>,
    pub depth_fit: PowerLawFit,
    pub frequency_fit: PowerLawFit,
}

/// Unweighted least squares of `ln y = ln a + k·ln x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> PowerLawFit {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let k = sxy / sxx;
    let c = my - k * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - c - k * a).powi(2)).sum::<f64>() / n).sqrt();
    PowerLawFit { exponent: k, prefactor: c.exp(), rms }
}

/// Depth and secular frequency of the three-layer trap against its aspect
/// ratio, at fixed drive and species, with power-law fits over the points
/// that produced a bounded trap.
pub fn aspect_ratio_exponents(s: &AspectSettings) -> AspectScan {
    let drive = DriveConfig { v0: 1.0, omega: 1.0 };
    let species = Species { mass: 1.0, charge: 1.0 };
    let mut pts: Vec<AspectPoint> = s
        .gammas
        .iter()
        .map(|&gamma| {
            let mut p = CanonicalParams::new(s.d);
            p.gamma = Some(gamma);
            p.thickness = Some(s.thickness_over_width * 2.0 * s.d);
            p.extent = Some(s.extent_d * s.d);
            let run = build_canonical(CanonicalKind::ThreeLayer, &p)
                .map_err(|e| e.to_string())
                .and_then(|g| {
                    let mut req = AnalysisRequest::new(g, drive, species);
                    req.settings = s.solver.clone();
                    analyze(&req).map_err(|e| e.to_string())
                });
            match run {
                Ok(a) => {
                    let c = &a.characterization;
                    let f = 0.5 * (c.secular_frequencies[0] + c.secular_frequencies[1]);
                    let excluded = (c.depth <= 0.0).then(|| "no bounded trap".to_string());
                    AspectPoint {
                        gamma,
                        depth: 0.0,
                        frequency: 0.0,
                        depth_raw: c.depth,
                        frequency_raw: f,
                        depth_flagged: c.depth_flagged,
                        excluded,
                    }
                }
                Err(e) => AspectPoint {
                    gamma,
                    depth: f64::NAN,
                    frequency: f64::NAN,
                    depth_raw: f64::NAN,
                    frequency_raw: f64::NAN,
                    depth_flagged: false,
                    excluded: Some(e),
                },
            }
        })
        .collect();
    let good: Vec<&AspectPoint> = pts.iter().filter(|p| p.excluded.is_none()).collect();
    let (d0, f0) = good.first().map_or((f64::NAN, f64::NAN), |p| (p.depth_raw, p.frequency_raw));
    for p in pts.iter_mut() {
        p.depth = p.depth_raw / d0;
        p.frequency = p.frequency_raw / f0;
    }
    let good: Vec<&AspectPoint> = pts.iter().filter(|p| p.excluded.is_none()).collect();
    let g: Vec<f64> = good.iter().map(|p| p.gamma).collect();
    let depth_fit = fit_power_law(&g, &good.iter().map(|p| p.depth).collect::<Vec<_>>());
    let frequency_fit = fit_power_law(&g, &good.iter().map(|p| p.frequency).collect::<Vec<_>>());
    AspectScan { points: pts, depth_fit, frequency_fit }
}

impl AspectScan {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# depth exponent {} (rms {}), frequency exponent {} (rms {})\ngamma,depth_rel,frequency_rel,depth_raw,frequency_raw,excluded\n",
            self.depth_fit.exponent, self.depth_fit.rms, self.frequency_fit.exponent, self.frequency_fit.rms
        );
        for p in &self.points {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                p.gamma,
                p.depth,
                p.frequency,
                p.depth_raw,
                p.frequency_raw,
                p.excluded.as_deref().unwrap_or("")
            )
            .unwrap();
        }
        s
    }
}
