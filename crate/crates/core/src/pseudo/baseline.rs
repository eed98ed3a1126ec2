//! Dimensionless reference traps used for normalization.
//!
//! `eta` and `delta` are the curvature and depth of the RF pseudopotential in
//! units of `Q²V0²/(4mΩ²d⁴)` and `Q²V0²/(4mΩ²d²)`, with `d` the distance from
//! the minimum to the nearest electrode. They depend only on the electrode
//! shape, so they are computed once at the default solver settings and
//! stored; the `baseline` integration test recomputes them.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub label: &'static str,
    pub eta: f64,
    pub delta: f64,
}

/// Two-layer trap, γ = 1, thickness 0.1·d, plates truncated at 20·d.
pub const TWO_LAYER_BASELINE: Baseline = Baseline { label: "two-layer γ=1", eta: 1.03595, delta: 0.19796 };

/// Four-rod trap with rod radius 1.148·d.
pub const FOUR_ROD_BASELINE: Baseline = Baseline { label: "four-rod r=1.148d", eta: 2.01040, delta: 0.95857 };
