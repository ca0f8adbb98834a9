//! System parameters, unit conversions and the flat key-value config format.
//!
//! All quantities are stored in linear units (watts, metres, plain ratios)
//! except the handful of fields that are conventionally quoted in dB; those
//! are converted at the point of use through [`db_to_linear`] and
//! [`dbm_to_watts`].

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantization::Resolution;

/// How per-user SQINRs of the scored cell are combined into one drop value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SqinrAverage {
    /// Arithmetic mean of linear SQINRs, converted to dB afterwards.
    #[default]
    Linear,
    /// Arithmetic mean of per-user SQINRs expressed in dB.
    Db,
}

/// Logarithm base used for spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SeUnits {
    /// log2, bits/s/Hz.
    #[default]
    Bits,
    /// Natural log, nats/s/Hz.
    Nats,
}

impl SeUnits {
    pub fn log1p_rate(self, sqinr: f64) -> f64 {
        match self {
            SeUnits::Bits => (1.0 + sqinr).log2(),
            SeUnits::Nats => sqinr.ln_1p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub bandwidth_hz: f64,
    pub pathloss_exponent_eta: f64,
    pub shadowing_sigma_db: f64,
    pub p_downlink_w: f64,
    pub p_uplink_w: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub bs_antenna_gain_db: f64,
    pub n_antennas: usize,
    pub k_downlink_per_cell: usize,
    pub k_uplink_per_cell: usize,
    pub n_pilots_per_cell: usize,
    pub pilot_overhead_fraction_beta: f64,
    pub coherence_tile_nc: usize,
    pub adc_bits: Resolution,
    pub tiers: usize,
    pub inter_site_distance_m: f64,
    pub min_link_distance_m: f64,
    /// Intercept at 1 m before the BS antenna gain is applied.
    pub pathloss_intercept_lref: f64,
    pub n_drops: usize,
    pub base_seed: u64,
    pub sqinr_average: SqinrAverage,
    pub se_units: SeUnits,
}

impl Default for Scenario {
    fn default() -> Self {
        default_scenario()
    }
}

/// The reference system parameters: 20 MHz, η = 2.5, 8 dB shadowing,
/// 40 W / 200 mW budgets, 100 antennas, 10 + 10 users per cell, N_p = 3K,
/// β = 0.5, N_c = 20 000 and 5-bit converters on a two-tier lattice.
pub fn default_scenario() -> Scenario {
    let k = 10;
    Scenario {
        bandwidth_hz: 20e6,
        pathloss_exponent_eta: 2.5,
        shadowing_sigma_db: 8.0,
        p_downlink_w: 40.0,
        p_uplink_w: 0.2,
        noise_psd_dbm_hz: -174.0,
        noise_figure_db: 3.0,
        bs_antenna_gain_db: 12.0,
        n_antennas: 100,
        k_downlink_per_cell: k,
        k_uplink_per_cell: k,
        n_pilots_per_cell: 3 * k,
        pilot_overhead_fraction_beta: 0.5,
        coherence_tile_nc: 20_000,
        adc_bits: Resolution::Bits(5),
        tiers: 2,
        inter_site_distance_m: 500.0,
        min_link_distance_m: 10.0,
        pathloss_intercept_lref: 1.0,
        n_drops: 10_000,
        base_seed: 42,
        sqinr_average: SqinrAverage::Linear,
        se_units: SeUnits::Bits,
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    linear_to_db(watts) + 30.0
}

/// Thermal noise power N_0 over the whole band, noise figure included.
pub fn noise_power_w(scenario: &Scenario) -> Result<f64> {
    if scenario.bandwidth_hz.is_nan() || scenario.bandwidth_hz <= 0.0 {
        return Err(Error::InvalidParameter {
            field: "bandwidth_hz",
            reason: format!("must be positive, got {}", scenario.bandwidth_hz),
        });
    }
    let dbm = scenario.noise_psd_dbm_hz
        + 10.0 * scenario.bandwidth_hz.log10()
        + scenario.noise_figure_db;
    Ok(dbm_to_watts(dbm))
}

/// ϱ = SNR^d / SNR^u on a common link, i.e. P_d / P_u.
pub fn forward_reverse_ratio(scenario: &Scenario) -> f64 {
    scenario.p_downlink_w / scenario.p_uplink_w
}

/// Every key accepted by [`Scenario::set`], in canonical order.
pub const FIELD_NAMES: &[&str] = &[
    "bandwidth_hz",
    "pathloss_exponent_eta",
    "shadowing_sigma_db",
    "p_downlink_w",
    "p_uplink_w",
    "noise_psd_dbm_hz",
    "noise_figure_db",
    "bs_antenna_gain_db",
    "n_antennas",
    "k_downlink_per_cell",
    "k_uplink_per_cell",
    "n_pilots_per_cell",
    "pilot_overhead_fraction_beta",
    "coherence_tile_nc",
    "adc_bits",
    "tiers",
    "inter_site_distance_m",
    "min_link_distance_m",
    "pathloss_intercept_lref",
    "n_drops",
    "base_seed",
    "sqinr_average",
    "se_units",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Parse {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

impl Scenario {
    /// Large-scale intercept of BS–UE links (antenna gain folded in).
    pub fn lref_bs(&self) -> f64 {
        self.pathloss_intercept_lref * db_to_linear(self.bs_antenna_gain_db)
    }

    /// Large-scale intercept of UE–UE links.
    pub fn lref_ue(&self) -> f64 {
        self.pathloss_intercept_lref
    }

    pub fn pilot_overhead_factor(&self) -> f64 {
        1.0 - self.pilot_overhead_fraction_beta * self.n_pilots_per_cell as f64
            / self.coherence_tile_nc as f64
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParameter {
                field,
                reason: reason.into(),
            })
        }
        let positive = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("p_downlink_w", self.p_downlink_w),
            ("p_uplink_w", self.p_uplink_w),
            ("inter_site_distance_m", self.inter_site_distance_m),
            ("min_link_distance_m", self.min_link_distance_m),
            ("pathloss_intercept_lref", self.pathloss_intercept_lref),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, format!("must be positive and finite, got {v}"));
            }
        }
        if !(self.pathloss_exponent_eta > 2.0 && self.pathloss_exponent_eta.is_finite()) {
            return bad(
                "pathloss_exponent_eta",
                format!("must exceed 2, got {}", self.pathloss_exponent_eta),
            );
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return bad("shadowing_sigma_db", "must be finite and nonnegative");
        }
        for (field, v) in [
            ("noise_psd_dbm_hz", self.noise_psd_dbm_hz),
            ("noise_figure_db", self.noise_figure_db),
            ("bs_antenna_gain_db", self.bs_antenna_gain_db),
        ] {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        let beta = self.pilot_overhead_fraction_beta;
        if !(0.0..=1.0).contains(&beta) {
            return bad(
                "pilot_overhead_fraction_beta",
                format!("must lie in [0, 1], got {beta}"),
            );
        }
        for (field, v) in [
            ("n_antennas", self.n_antennas),
            ("k_downlink_per_cell", self.k_downlink_per_cell),
            ("n_pilots_per_cell", self.n_pilots_per_cell),
            ("coherence_tile_nc", self.coherence_tile_nc),
            ("n_drops", self.n_drops),
        ] {
            if v == 0 {
                return bad(field, "must be at least 1");
            }
        }
        if self.n_pilots_per_cell > self.coherence_tile_nc {
            return bad(
                "n_pilots_per_cell",
                format!(
                    "N_p = {} exceeds the coherence tile N_c = {}",
                    self.n_pilots_per_cell, self.coherence_tile_nc
                ),
            );
        }
        if let Resolution::Bits(0) = self.adc_bits {
            return bad("adc_bits", "must be at least 1 or inf");
        }
        if self.min_link_distance_m >= self.inter_site_distance_m / 3f64.sqrt() {
            return bad(
                "min_link_distance_m",
                "exclusion radius covers the whole cell",
            );
        }
        Ok(())
    }

    /// Sets one field from its textual form. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "bandwidth_hz" => self.bandwidth_hz = parse(key, v)?,
            "pathloss_exponent_eta" => self.pathloss_exponent_eta = parse(key, v)?,
            "shadowing_sigma_db" => self.shadowing_sigma_db = parse(key, v)?,
            "p_downlink_w" => self.p_downlink_w = parse(key, v)?,
            "p_uplink_w" => self.p_uplink_w = parse(key, v)?,
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz = parse(key, v)?,
            "noise_figure_db" => self.noise_figure_db = parse(key, v)?,
            "bs_antenna_gain_db" => self.bs_antenna_gain_db = parse(key, v)?,
            "n_antennas" => self.n_antennas = parse(key, v)?,
            "k_downlink_per_cell" => self.k_downlink_per_cell = parse(key, v)?,
            "k_uplink_per_cell" => self.k_uplink_per_cell = parse(key, v)?,
            "n_pilots_per_cell" => self.n_pilots_per_cell = parse(key, v)?,
            "pilot_overhead_fraction_beta" => self.pilot_overhead_fraction_beta = parse(key, v)?,
            "coherence_tile_nc" => self.coherence_tile_nc = parse(key, v)?,
            "adc_bits" => self.adc_bits = parse(key, v)?,
            "tiers" => self.tiers = parse(key, v)?,
            "inter_site_distance_m" => self.inter_site_distance_m = parse(key, v)?,
            "min_link_distance_m" => self.min_link_distance_m = parse(key, v)?,
            "pathloss_intercept_lref" => self.pathloss_intercept_lref = parse(key, v)?,
            "n_drops" => self.n_drops = parse(key, v)?,
            "base_seed" => self.base_seed = parse(key, v)?,
            "sqinr_average" => {
                self.sqinr_average = match v {
                    "linear" => SqinrAverage::Linear,
                    "db" => SqinrAverage::Db,
                    _ => {
                        return Err(Error::Parse {
                            key: key.into(),
                            value: v.into(),
                            reason: "expected `linear` or `db`".into(),
                        })
                    }
                }
            }
            "se_units" => {
                self.se_units = match v {
                    "bits" => SeUnits::Bits,
                    "nats" => SeUnits::Nats,
                    _ => {
                        return Err(Error::Parse {
                            key: key.into(),
                            value: v.into(),
                            reason: "expected `bits` or `nats`".into(),
                        })
                    }
                }
            }
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Textual form of one field, as accepted back by [`Scenario::set`].
    pub fn get(&self, key: &str) -> Result<String> {
        Ok(match key {
            "bandwidth_hz" => self.bandwidth_hz.to_string(),
            "pathloss_exponent_eta" => self.pathloss_exponent_eta.to_string(),
            "shadowing_sigma_db" => self.shadowing_sigma_db.to_string(),
            "p_downlink_w" => self.p_downlink_w.to_string(),
            "p_uplink_w" => self.p_uplink_w.to_string(),
            "noise_psd_dbm_hz" => self.noise_psd_dbm_hz.to_string(),
            "noise_figure_db" => self.noise_figure_db.to_string(),
            "bs_antenna_gain_db" => self.bs_antenna_gain_db.to_string(),
            "n_antennas" => self.n_antennas.to_string(),
            "k_downlink_per_cell" => self.k_downlink_per_cell.to_string(),
            "k_uplink_per_cell" => self.k_uplink_per_cell.to_string(),
            "n_pilots_per_cell" => self.n_pilots_per_cell.to_string(),
            "pilot_overhead_fraction_beta" => self.pilot_overhead_fraction_beta.to_string(),
            "coherence_tile_nc" => self.coherence_tile_nc.to_string(),
            "adc_bits" => self.adc_bits.to_string(),
            "tiers" => self.tiers.to_string(),
            "inter_site_distance_m" => self.inter_site_distance_m.to_string(),
            "min_link_distance_m" => self.min_link_distance_m.to_string(),
            "pathloss_intercept_lref" => self.pathloss_intercept_lref.to_string(),
            "n_drops" => self.n_drops.to_string(),
            "base_seed" => self.base_seed.to_string(),
            "sqinr_average" => match self.sqinr_average {
                SqinrAverage::Linear => "linear".into(),
                SqinrAverage::Db => "db".into(),
            },
            "se_units" => match self.se_units {
                SeUnits::Bits => "bits".into(),
                SeUnits::Nats => "nats".into(),
            },
            other => return Err(Error::UnknownKey(other.to_string())),
        })
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#`
    /// comments are ignored.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults and validates it.
    pub fn from_config_str(text: &str) -> Result<Scenario> {
        let mut s = default_scenario();
        s.apply_config(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in FIELD_NAMES {
            // get() cannot fail on a listed key
            let _ = writeln!(out, "{key} = {}", self.get(key).unwrap());
        }
        out
    }
}
