//! Electrostatics and pseudopotential analysis of linear RF Paul trap
//! cross-sections.

pub mod analysis;
pub mod analytic;
pub mod contour;
pub mod engineering;
pub mod geometry;
pub mod interp;
pub mod laplace;
pub mod pseudo;
pub mod scaling;
pub mod units;
