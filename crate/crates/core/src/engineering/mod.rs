//! RF drive engineering: power dissipation, filter roll-off, substrate
//! materials, and parameter studies built on the field solver.

mod aspect;
mod dielectric;

pub use aspect::{aspect_ratio_exponents, fit_power_law, AspectPoint, AspectScan, AspectSettings, PowerLawFit};
pub use dielectric::{
    dielectric_sensitivity, dielectric_study_geometry, DielectricSensitivity, STUDY_OUTER_WIDTH_D, STUDY_THICKNESS_D,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineeringError {
    #[error("{name} must be {rule}, got {value}")]
    BadInput { name: &'static str, rule: &'static str, value: f64 },
}

fn require(name: &'static str, value: f64, positive: bool) -> Result<(), EngineeringError> {
    let ok = value.is_finite() && if positive { value > 0.0 } else { value >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(EngineeringError::BadInput { name, rule: if positive { "positive" } else { "non-negative" }, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationInput {
    /// RF electrode to ground capacitance (F).
    pub capacitance: f64,
    /// Drive angular frequency (rad/s).
    pub omega: f64,
    /// Peak RF amplitude (V).
    pub v0: f64,
    /// Lead resistance (Ω).
    pub r_lead: f64,
    pub tan_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationResult {
    pub i_rms: f64,
    pub r_esr: f64,
    pub p_lead: f64,
    pub p_dielectric: f64,
    pub p_total: f64,
}

/// `P = I_rms²·(R_lead + R_ESR)` with `I_rms = CΩV0/√2` and `R_ESR = tanδ/(CΩ)`.
pub fn dissipated_power(inp: &DissipationInput) -> Result<DissipationResult, EngineeringError> {
    require("capacitance", inp.capacitance, true)?;
    require("omega", inp.omega, true)?;
    require("v0", inp.v0, false)?;
    require("r_lead", inp.r_lead, false)?;
    require("tan_delta", inp.tan_delta, false)?;
    let i_rms = inp.capacitance * inp.omega * inp.v0 / SQRT_2;
    let r_esr = inp.tan_delta / (inp.capacitance * inp.omega);
    let p_lead = i_rms * i_rms * inp.r_lead;
    let p_dielectric = i_rms * i_rms * r_esr;
    Ok(DissipationResult { i_rms, r_esr, p_lead, p_dielectric, p_total: p_lead + p_dielectric })
}

/// Corner frequency `1/(2πRC)` of an RC low-pass (Hz).
pub fn rc_rolloff(r: f64, c: f64) -> Result<f64, EngineeringError> {
    require("resistance", r, true)?;
    require("capacitance", c, true)?;
    Ok(1.0 / (2.0 * PI * r * c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialRecord {
    pub name: String,
    /// W/(m·K)
    pub thermal_conductivity: f64,
    /// Ω·cm
    pub resistivity: f64,
    pub dielectric_constant: f64,
    pub tan_delta: f64,
    /// nm
    pub roughness: f64,
    /// kV/mm
    pub dielectric_strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MaterialsFile {
    version: u32,
    materials: Vec<MaterialRecord>,
}

pub const MATERIALS_JSON: &str = include_str!("../../data/materials.json");

/// SHA-256 of [`MATERIALS_JSON`].
pub const MATERIALS_SHA256: &str = "8a29b4888e1ae370fb0eb2242a37cdc69ef0396230e006ec2bce589c617276a0";

pub fn materials_checksum() -> String {
    Sha256::digest(MATERIALS_JSON.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// The substrate table, in its reference order.
pub fn materials_db() -> Vec<MaterialRecord> {
    assert_eq!(materials_checksum(), MATERIALS_SHA256, "embedded materials table was modified");
    let f: MaterialsFile = serde_json::from_str(MATERIALS_JSON).expect("embedded materials table parses");
    f.materials
}

pub fn material(name: &str) -> Option<MaterialRecord> {
    materials_db().into_iter().find(|m| m.name.eq_ignore_ascii_case(name))
}

pub fn materials_csv(rows: &[MaterialRecord]) -> String {
    let mut s = String::from(
        "name,thermal_conductivity_w_per_m_k,resistivity_ohm_cm,dielectric_constant,tan_delta,roughness_nm,dielectric_strength_kv_per_mm\n",
    );
    for m in rows {
        let name = if m.name.contains(',') { format!("\"{}\"", m.name) } else { m.name.clone() };
        s.push_str(&format!(
            "{name},{},{:e},{},{:e},{},{}\n",
            m.thermal_conductivity, m.resistivity, m.dielectric_constant, m.tan_delta, m.roughness, m.dielectric_strength
        ));
    }
    s
}
