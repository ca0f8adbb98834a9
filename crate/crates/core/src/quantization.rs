//! Additive quantization noise model for the BS converters.
//!
//! A b-bit converter is linearised as `x_q = α x + q` with `α = 1 − ρ` and
//! `q` zero-mean with covariance `α(1 − α) diag(F F*)`. ρ is the inverse
//! SQNR of an optimal Gaussian quantizer.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Inverse SQNR of the Lloyd-Max Gaussian quantizer for 1..=5 bits.
pub const RHO_TABLE: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];

/// High-resolution constant π√3/2 of the Gaussian quantizer, used past the
/// table.
pub const HIGH_RESOLUTION_CONSTANT: f64 = std::f64::consts::PI * 1.732_050_807_568_877_2 / 2.0;

/// Converter resolution: a finite bit count or ideal (infinite) resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Bits(u32),
    Infinite,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Resolution::Infinite),
            other => other
                .parse::<u32>()
                .map(Resolution::Bits)
                .map_err(|e| format!("expected a bit count or `inf`: {e}")),
        }
    }
}

impl Serialize for Resolution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Resolution::Bits(b) => s.serialize_u32(*b),
            Resolution::Infinite => s.serialize_str("inf"),
        }
    }
}

/// ρ for a given resolution. Table values for 1..=5 bits, the
/// high-resolution law `(π√3/2)·2^(−2b)` above, zero at infinite resolution.
pub fn rho_for_bits(bits: Resolution) -> Result<f64> {
    match bits {
        Resolution::Infinite => Ok(0.0),
        Resolution::Bits(0) => Err(Error::InvalidParameter {
            field: "adc_bits",
            reason: "resolution must be at least one bit".into(),
        }),
        Resolution::Bits(b @ 1..=5) => Ok(RHO_TABLE[b as usize - 1]),
        Resolution::Bits(b) => Ok(HIGH_RESOLUTION_CONSTANT * 2f64.powi(-2 * b as i32)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizationModel {
    pub bits: Resolution,
    pub rho: f64,
    pub alpha: f64,
}

impl QuantizationModel {
    pub fn new(bits: Resolution) -> Result<Self> {
        let rho = rho_for_bits(bits)?;
        Ok(Self {
            bits,
            rho,
            alpha: 1.0 - rho,
        })
    }

    /// Per-entry variance scale α(1 − α) of the quantization noise.
    pub fn noise_scale(&self) -> f64 {
        self.alpha * (1.0 - self.alpha)
    }
}
