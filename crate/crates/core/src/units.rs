//! Physical constants and unit-suffixed quantity parsing.
//!
//! Everything inside the crate is SI. Text inputs (geometry files, CLI flags)
//! carry an explicit unit suffix so that a bare `50` can never silently mean
//! metres when micrometres were intended.

use thiserror::Error;

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Physical dimension expected by [`parse_quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    /// Ordinary frequency; parsed value is in hertz.
    Frequency,
    Voltage,
    Mass,
    ElectricField,
    Resistance,
    Capacitance,
    Time,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("nm", 1e-9),
                ("um", 1e-6),
                ("µm", 1e-6),
                ("mm", 1e-3),
                ("cm", 1e-2),
                ("m", 1.0),
            ],
            Dimension::Frequency => &[("GHz", 1e9), ("MHz", 1e6), ("kHz", 1e3), ("Hz", 1.0)],
            Dimension::Voltage => &[("mV", 1e-3), ("kV", 1e3), ("V", 1.0)],
            Dimension::Mass => &[("u", ATOMIC_MASS_UNIT), ("kg", 1.0)],
            Dimension::ElectricField => &[
                ("V/m", 1.0),
                ("kV/mm", 1e6),
                ("V/um", 1e6),
                ("MV/m", 1e6),
                ("GV/m", 1e9),
            ],
            Dimension::Resistance => &[
                ("mohm", 1e-3),
                ("kohm", 1e3),
                ("Mohm", 1e6),
                ("ohm", 1.0),
                ("kΩ", 1e3),
                ("MΩ", 1e6),
                ("Ω", 1.0),
            ],
            Dimension::Capacitance => &[("fF", 1e-15), ("pF", 1e-12), ("nF", 1e-9), ("uF", 1e-6), ("F", 1.0)],
            Dimension::Time => &[("ns", 1e-9), ("us", 1e-6), ("ms", 1e-3), ("s", 1.0)],
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("`{0}` has no unit suffix; expected one of {1}")]
    MissingUnit(String, String),
    #[error("`{0}`: unknown unit suffix; expected one of {1}")]
    UnknownUnit(String, String),
    #[error("`{0}`: not a number")]
    BadNumber(String),
}

/// Parses text such as `50um`, `100MHz`, `9u` or `1e6V/m` into SI units.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    let t = text.trim();
    let expected = || {
        dim.units()
            .iter()
            .map(|(s, _)| *s)
            .collect::<Vec<_>>()
            .join(", ")
    };
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-')
                && !((c == 'e' || c == 'E') && exponent_follows(t, i))
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, suffix) = t.split_at(split);
    let suffix = suffix.trim();
    if suffix.is_empty() {
        return Err(UnitError::MissingUnit(t.to_string(), expected()));
    }
    let value: f64 = num.parse().map_err(|_| UnitError::BadNumber(t.to_string()))?;
    let scale = dim
        .units()
        .iter()
        .find(|(s, _)| *s == suffix)
        .map(|(_, k)| *k)
        .ok_or_else(|| UnitError::UnknownUnit(t.to_string(), expected()))?;
    Ok(value * scale)
}

// `e` is part of the number only when a digit or sign follows it.
fn exponent_follows(t: &str, i: usize) -> bool {
    let rest = &t[i + 1..];
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_ascii_digit() => true,
        Some('+') | Some('-') => chars.next().is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}
