//! Closed-form forward-link SQINR under channel hardening with
//! matched-filter precoding, its special cases, and spectral efficiency.
//!
//! All evaluators take a [`LinkBudget`] for one scored downlink user of
//! cell 0. Sums over ℓ run over every cell in the budget including cell 0;
//! sums over the contamination set exclude cell 0.

use serde::Serialize;

use crate::channel::LinkBudget;
use crate::error::{Error, Result};

/// Itemised numerator and denominator terms of the SQINR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqinrBreakdown {
    pub numerator: f64,
    pub den_noise: f64,
    pub den_intracell_intercell: f64,
    pub den_pilot_contamination: f64,
    pub den_iui: f64,
    pub den_aqnm: f64,
    pub sqinr: f64,
}

impl SqinrBreakdown {
    pub fn denominator(&self) -> f64 {
        self.den_noise
            + self.den_intracell_intercell
            + self.den_pilot_contamination
            + self.den_iui
            + self.den_aqnm
    }
}

/// `N_a / (ϱ + (P_k/P_u) SNR^d_k + Σ_{ℓ∈C} (P_{ℓ,k}/P_u) SNR^d_{0,(ℓ,k)})`:
/// the hardened gain of the serving BS's contaminated estimate.
fn serving_estimate_gain(b: &LinkBudget) -> f64 {
    let own = b.serving();
    let contaminating: f64 = b
        .contamination
        .iter()
        .map(|c| b.cells[c.cell_index].p_frac_ul * c.snr_d_from_serving)
        .sum();
    b.n_antennas / (b.varrho + own.p_frac_ul * own.snr_d + contaminating)
}

/// Coherent pilot-contamination power from every BS in C, before α².
fn contamination_power(b: &LinkBudget) -> f64 {
    let own = b.serving();
    b.contamination
        .iter()
        .map(|c| {
            let cell = &b.cells[c.cell_index];
            let co_pilots: f64 = b
                .contamination
                .iter()
                .zip(&c.cross_snr_d)
                .map(|(l, &snr)| b.cells[l.cell_index].p_frac_ul * snr)
                .sum();
            let hardened = b.n_antennas / (b.varrho + own.p_frac_ul * cell.snr_d + co_pilots);
            hardened * own.p_frac_ul * cell.p_frac_dl * cell.snr_d * cell.snr_d
        })
        .sum()
}

/// Full SQINR with quantization, pilot contamination and inter-user
/// interference.
pub fn sqinr_theorem6(budget: &LinkBudget) -> Result<SqinrBreakdown> {
    if budget.cells.is_empty() {
        return Err(Error::EmptyBudget);
    }
    let a = budget.alpha;
    let a2 = a * a;
    let own = budget.serving();

    let numerator =
        a2 * serving_estimate_gain(budget) * own.p_frac_ul * own.p_frac_dl * own.snr_d * own.snr_d;
    let den_intracell_intercell = a2 * budget.cells.iter().map(|c| c.snr_d).sum::<f64>();
    let den_pilot_contamination = a2 * contamination_power(budget);
    let den_iui = budget.iui.iter().map(|u| u.p_frac_ul * u.snr_iui).sum();
    let den_aqnm = a
        * (1.0 - a)
        * budget
            .cells
            .iter()
            .map(|c| c.p_frac_dl * c.snr_d * (c.k_downlink as f64 + 1.0))
            .sum::<f64>();

    let mut out = SqinrBreakdown {
        numerator,
        den_noise: 1.0,
        den_intracell_intercell,
        den_pilot_contamination,
        den_iui,
        den_aqnm,
        sqinr: 0.0,
    };
    out.sqinr = numerator / out.denominator();
    Ok(out)
}

/// Half-duplex, full-resolution SINR: no inter-user interference and no
/// quantization distortion, pilot contamination kept.
pub fn sinr_proposition6(budget: &LinkBudget) -> f64 {
    let own = budget.serving();
    let numerator = serving_estimate_gain(budget) * own.p_frac_ul * own.p_frac_dl * own.snr_d.powi(2);
    let interference: f64 = budget.cells.iter().map(|c| c.snr_d).sum();
    numerator / (1.0 + interference + contamination_power(budget))
}

/// SINR with pilot contamination neglected altogether.
pub fn sinr_no_contamination(budget: &LinkBudget) -> f64 {
    let own = budget.serving();
    let interference: f64 = budget.cells.iter().map(|c| c.snr_d).sum();
    own.p_frac_ul * own.p_frac_dl * own.snr_d.powi(2) * budget.n_antennas
        / ((budget.varrho + own.p_frac_ul * own.snr_d) * (1.0 + interference))
}

/// `log2(1 + sqinr)` in bits/s/Hz.
pub fn gross_se(sqinr: f64) -> f64 {
    (1.0 + sqinr).log2()
}

/// Gross SE discounted by the forward link's share of pilot overhead,
/// `(1 − β N_p / N_c) log2(1 + sqinr)`.
pub fn effective_se(sqinr: f64, beta: f64, n_pilots: usize, coherence_tile: usize) -> f64 {
    (1.0 - beta * n_pilots as f64 / coherence_tile as f64) * gross_se(sqinr)
}
