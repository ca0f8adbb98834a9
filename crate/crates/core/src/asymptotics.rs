//! Limiting spectral efficiencies and probes that drive the general SQINR
//! toward each limit.
//!
//! Every limit is returned in bits/s/Hz. A probe rebuilds the budget at each
//! point of an increasing schedule, evaluates the full SQINR there and
//! reports the distance to the corresponding limit.

use serde::Serialize;

use crate::channel::LinkBudget;
use crate::error::{Error, Result};
use crate::quantization::{QuantizationModel, Resolution};
use crate::sqinr::{gross_se, sqinr_theorem6};

/// Which parameter is driven to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitRegime {
    /// b → ∞ at fixed powers and antennas.
    FullResolution,
    /// The scored user's own-link gain → ∞, cross gains fixed.
    HighSnr,
    /// N_a → ∞ with every transmit power scaled as `E / N_a^power_exponent`.
    /// The budget's SNRs are read as their values at energy E.
    PowerScaling { power_exponent: f64 },
    /// N_a → ∞ with powers and user counts fixed.
    AntennaRatio,
}

impl LimitRegime {
    pub const POWER_SCALING: LimitRegime = LimitRegime::PowerScaling { power_exponent: 1.0 };

    pub fn name(&self) -> &'static str {
        match self {
            LimitRegime::FullResolution => "lemma2",
            LimitRegime::HighSnr => "lemma3",
            LimitRegime::PowerScaling { .. } => "lemma4",
            LimitRegime::AntennaRatio => "lemma5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "lemma2" | "full_resolution" => Some(LimitRegime::FullResolution),
            "lemma3" | "high_snr" => Some(LimitRegime::HighSnr),
            "lemma4" | "power_scaling" => Some(LimitRegime::POWER_SCALING),
            "lemma5" | "antenna_ratio" => Some(LimitRegime::AntennaRatio),
            _ => None,
        }
    }

    /// A schedule that reaches the regime's acceptance point.
    pub fn default_schedule(&self) -> Vec<f64> {
        match self {
            LimitRegime::FullResolution => (1..=20).map(f64::from).collect(),
            LimitRegime::HighSnr => (0..=8).map(|e| 10f64.powi(e)).collect(),
            LimitRegime::PowerScaling { .. } => (2..=6).map(|e| 10f64.powi(e)).collect(),
            LimitRegime::AntennaRatio => (2..=6).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

/// Full-resolution SE at fixed power and antennas: the general expression
/// with α = 1, which removes the quantization distortion term.
pub fn limit_lemma2(budget: &LinkBudget) -> f64 {
    let own = budget.serving();
    let pilot_sum: f64 = budget
        .contamination
        .iter()
        .map(|c| budget.cells[c.cell_index].p_frac_ul * c.snr_d_from_serving)
        .sum();
    let signal = budget.n_antennas / (budget.varrho + own.p_frac_ul * own.snr_d + pilot_sum)
        * own.p_frac_ul
        * own.p_frac_dl
        * own.snr_d
        * own.snr_d;

    let mut den = 1.0;
    for c in &budget.cells {
        den += c.snr_d;
    }
    for c in &budget.contamination {
        let cell = &budget.cells[c.cell_index];
        let mut co = budget.varrho + own.p_frac_ul * cell.snr_d;
        for (l, snr) in budget.contamination.iter().zip(&c.cross_snr_d) {
            co += budget.cells[l.cell_index].p_frac_ul * snr;
        }
        den += budget.n_antennas / co * own.p_frac_ul * cell.p_frac_dl * cell.snr_d * cell.snr_d;
    }
    for u in &budget.iui {
        den += u.p_frac_ul * u.snr_iui;
    }
    gross_se(signal / den)
}

/// High-SNR limit under uniform forward power: `log2(1 + α N_a / (K^d − α + 1))`.
pub fn limit_lemma3(alpha: f64, n_antennas: f64, k_downlink: usize) -> f64 {
    gross_se(alpha * n_antennas / (k_downlink as f64 - alpha + 1.0))
}

/// Power-scaling limit `log2(1 + (α²/ϱ)(E^u_k/E_u)(E^d_k/E_d)(SNR^d_k)²)`,
/// with SNR^d_k evaluated at energy E.
pub fn limit_lemma4(alpha: f64, varrho: f64, energy_fractions: (f64, f64), snr_at_e: f64) -> f64 {
    let (eu, ed) = energy_fractions;
    gross_se(alpha * alpha / varrho * eu * ed * snr_at_e * snr_at_e)
}

/// Antenna-ratio limit: desired contaminated-channel power over the
/// coherent contamination from C, with N_a cancelled. Diverges when C is
/// empty.
pub fn limit_lemma5(budget: &LinkBudget) -> Result<f64> {
    if budget.contamination.is_empty() {
        return Err(Error::DivergentLimit);
    }
    let own = budget.serving();
    let mut pilots = budget.varrho + own.p_frac_ul * own.snr_d;
    for c in &budget.contamination {
        pilots += budget.cells[c.cell_index].p_frac_ul * c.snr_d_from_serving;
    }
    let signal = own.p_frac_ul * own.p_frac_dl * own.snr_d * own.snr_d / pilots;

    let mut interference = 0.0;
    for c in &budget.contamination {
        let cell = &budget.cells[c.cell_index];
        let mut co = budget.varrho + own.p_frac_ul * cell.snr_d;
        for (l, snr) in budget.contamination.iter().zip(&c.cross_snr_d) {
            co += budget.cells[l.cell_index].p_frac_ul * snr;
        }
        interference += own.p_frac_ul * cell.p_frac_dl * cell.snr_d * cell.snr_d / co;
    }
    Ok(gross_se(signal / interference))
}

/// Limit of `regime` for `budget`.
pub fn regime_limit(regime: LimitRegime, budget: &LinkBudget) -> Result<f64> {
    let own = budget.serving();
    Ok(match regime {
        LimitRegime::FullResolution => limit_lemma2(budget),
        LimitRegime::HighSnr => limit_lemma3(budget.alpha, budget.n_antennas, own.k_downlink),
        LimitRegime::PowerScaling { .. } => limit_lemma4(
            budget.alpha,
            budget.varrho,
            (own.p_frac_ul, own.p_frac_dl),
            own.snr_d,
        ),
        LimitRegime::AntennaRatio => limit_lemma5(budget)?,
    })
}

/// `budget` rebuilt at schedule point `scale`.
pub fn rescale(regime: LimitRegime, budget: &LinkBudget, scale: f64) -> Result<LinkBudget> {
    let mut b = budget.clone();
    match regime {
        LimitRegime::FullResolution => {
            if scale.is_nan() || scale < 1.0 {
                return Err(Error::InvalidParameter {
                    field: "schedule",
                    reason: format!("bit count {scale} below 1"),
                });
            }
            b.alpha = QuantizationModel::new(Resolution::Bits(scale.round() as u32))?.alpha;
        }
        LimitRegime::HighSnr => b.cells[0].snr_d *= scale,
        LimitRegime::PowerScaling { power_exponent } => {
            b.n_antennas = scale;
            b.scale_snr(scale.powf(-power_exponent));
        }
        LimitRegime::AntennaRatio => b.n_antennas = scale,
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub scale: f64,
    pub se_bits: f64,
    pub limit_bits: f64,
    pub gap: f64,
}

impl ProbePoint {
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.limit_bits.abs()
    }
}

/// Evaluates the general SE along `schedule` and its distance to the
/// regime's limit.
pub fn convergence_probe(
    regime: LimitRegime,
    budget: &LinkBudget,
    schedule: &[f64],
) -> Result<Vec<ProbePoint>> {
    budget.validate()?;
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::InvalidParameter {
            field: "schedule",
            reason: "needs at least 3 strictly increasing points".into(),
        });
    }
    let limit = regime_limit(regime, budget)?;
    schedule
        .iter()
        .map(|&scale| {
            let b = rescale(regime, budget, scale)?;
            let se = gross_se(sqinr_theorem6(&b)?.sqinr);
            Ok(ProbePoint {
                scale,
                se_bits: se,
                limit_bits: limit,
                gap: (se - limit).abs(),
            })
        })
        .collect()
}
