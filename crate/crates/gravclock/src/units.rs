//! Conversion between SI clock parameters and the dimensionless Planck-unit
//! quantities the simulation works in: ε = ΔE/E_p, ξ = x/l_p, δ_p = δ/t_p.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ClockParams;

/// Fundamental constants in SI units. Defaults are the CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConstants")]
pub struct PhysicalConstants {
    /// Newtonian gravitational constant, m³ kg⁻¹ s⁻².
    #[serde(rename = "G")]
    pub g: f64,
    /// Speed of light, m s⁻¹.
    pub c: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
}

#[derive(Deserialize)]
struct RawConstants {
    #[serde(rename = "G")]
    g: f64,
    c: f64,
    hbar: f64,
}

impl TryFrom<RawConstants> for PhysicalConstants {
    type Error = Error;
    fn try_from(raw: RawConstants) -> Result<Self> {
        PhysicalConstants::new(raw.g, raw.c, raw.hbar)
    }
}

impl PhysicalConstants {
    pub fn new(g: f64, c: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("G", g), ("c", c), ("hbar", hbar)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "constant {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(PhysicalConstants { g, c, hbar })
    }

    /// CODATA 2018: G = 6.67430e-11, c = 299792458, ħ = 1.054571817e-34.
    pub fn codata2018() -> Self {
        PhysicalConstants {
            g: 6.67430e-11,
            c: 299_792_458.0,
            hbar: 1.054571817e-34,
        }
    }

    pub fn planck_scales(&self) -> PlanckScales {
        let length = (self.hbar * self.g / self.c.powi(3)).sqrt();
        let time = length / self.c;
        let energy = self.hbar / time;
        PlanckScales { length, time, energy }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants::codata2018()
    }
}

/// Planck length, time, and energy derived from a constant set:
/// l_p = √(ħG/c³), t_p = l_p/c, E_p = ħ/t_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanckScales {
    /// metres
    pub length: f64,
    /// seconds
    pub time: f64,
    /// joules
    pub energy: f64,
}

/// Laboratory description of the two clocks: energy gaps in joules and their
/// separation in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSiParams")]
pub struct SiClockParams {
    /// Energy gap of clock A, J.
    pub delta_e1: f64,
    /// Energy gap of clock B, J.
    pub delta_e2: f64,
    /// Separation, m.
    pub x: f64,
}

#[derive(Deserialize)]
struct RawSiParams {
    #[serde(rename = "delta_e1_J")]
    delta_e1_j: f64,
    #[serde(rename = "delta_e2_J")]
    delta_e2_j: f64,
    x_m: f64,
}

impl TryFrom<RawSiParams> for SiClockParams {
    type Error = Error;
    fn try_from(raw: RawSiParams) -> Result<Self> {
        SiClockParams::new(raw.delta_e1_j, raw.delta_e2_j, raw.x_m)
    }
}

impl SiClockParams {
    pub fn new(delta_e1: f64, delta_e2: f64, x: f64) -> Result<Self> {
        if !delta_e1.is_finite() || delta_e1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta_e1 must be finite and nonnegative, got {delta_e1}"
            )));
        }
        if !delta_e2.is_finite() || delta_e2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "delta_e2 must be finite and positive, got {delta_e2}"
            )));
        }
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "separation x must be finite and positive, got {x}"
            )));
        }
        Ok(SiClockParams { delta_e1, delta_e2, x })
    }
}

/// εᵢ = ΔEᵢ/E_p, ξ = x/l_p.
pub fn to_dimensionless(si: &SiClockParams, k: &PhysicalConstants) -> Result<ClockParams> {
    let scales = k.planck_scales();
    ClockParams::new(
        si.delta_e1 / scales.energy,
        si.delta_e2 / scales.energy,
        si.x / scales.length,
    )
}

/// Inverse of [`to_dimensionless`].
pub fn from_dimensionless(p: &ClockParams, k: &PhysicalConstants) -> SiClockParams {
    let scales = k.planck_scales();
    SiClockParams {
        delta_e1: p.eps1 * scales.energy,
        delta_e2: p.eps2 * scales.energy,
        x: p.xi * scales.length,
    }
}

/// Planck time in seconds for a δ_p → δ conversion.
pub fn proper_time_seconds(delta_p: f64, k: &PhysicalConstants) -> f64 {
    delta_p * k.planck_scales().time
}

/// Dimensionless time from seconds.
pub fn dimensionless_time(delta_seconds: f64, k: &PhysicalConstants) -> f64 {
    delta_seconds / k.planck_scales().time
}
