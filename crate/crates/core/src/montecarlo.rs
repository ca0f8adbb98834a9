//! Drop-level Monte Carlo campaigns and their statistics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::channel::{assemble_link_budget, NetworkRealization};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{child_seed, Domain};
use crate::scenario::{db_to_linear, linear_to_db, Scenario, SqinrAverage};
use crate::sqinr::{sqinr_theorem6, SqinrBreakdown};

/// Quantile levels reported in campaign summaries, in percent.
pub const SUMMARY_PERCENTILES: [u32; 5] = [5, 25, 50, 75, 95];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropOutcome {
    pub drop_index: u64,
    pub avg_sqinr: f64,
    pub avg_sqinr_db: f64,
    pub gross_se: f64,
    pub effective_se: f64,
}

/// The network realization of drop `drop_index`.
pub fn drop_realization(scenario: &Scenario, drop_index: u64) -> Result<NetworkRealization> {
    NetworkRealization::generate(scenario, child_seed(scenario.base_seed, Domain::Drop, drop_index))
}

/// Theorem-level SQINR breakdown of every downlink user of cell 0.
pub fn drop_breakdowns(scenario: &Scenario, drop_index: u64) -> Result<Vec<SqinrBreakdown>> {
    let realization = drop_realization(scenario, drop_index)?;
    breakdowns_of(&realization, scenario)
}

pub fn breakdowns_of(realization: &NetworkRealization, scenario: &Scenario) -> Result<Vec<SqinrBreakdown>> {
    (0..realization.k_downlink)
        .map(|k| sqinr_theorem6(&assemble_link_budget(realization, scenario, k)?))
        .collect()
}

/// Combines per-user SQINRs into the drop's average (linear) per the
/// scenario's averaging rule.
pub fn average_sqinr(values: &[f64], rule: SqinrAverage) -> f64 {
    let n = values.len() as f64;
    match rule {
        SqinrAverage::Linear => values.iter().sum::<f64>() / n,
        SqinrAverage::Db => db_to_linear(values.iter().map(|&s| linear_to_db(s)).sum::<f64>() / n),
    }
}

pub fn run_drop(scenario: &Scenario, drop_index: u64) -> Result<DropOutcome> {
    let sqinrs: Vec<f64> = drop_breakdowns(scenario, drop_index)?
        .iter()
        .map(|b| b.sqinr)
        .collect();
    let avg = average_sqinr(&sqinrs, scenario.sqinr_average);
    let gross = scenario.se_units.log1p_rate(avg);
    Ok(DropOutcome {
        drop_index,
        avg_sqinr: avg,
        avg_sqinr_db: linear_to_db(avg),
        gross_se: gross,
        effective_se: scenario.pilot_overhead_factor() * gross,
    })
}

/// Per-drop samples of a campaign, in drop-index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropStatistics {
    pub n_drops: usize,
    /// Average SQINR per drop, dB.
    pub samples: Vec<f64>,
    pub gross_se_samples: Vec<f64>,
    pub effective_se_samples: Vec<f64>,
}

pub fn run_campaign(scenario: &Scenario, exec: Execution) -> Result<DropStatistics> {
    scenario.validate()?;
    let outcomes = exec
        .map_indexed(scenario.n_drops as u64, |i| run_drop(scenario, i))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(DropStatistics::from_outcomes(&outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub n_drops: usize,
    /// `(percent, avg SQINR dB)` pairs.
    pub sqinr_db_quantiles: Vec<(u32, f64)>,
    pub mean_sqinr_db: f64,
    pub mean_gross_se: f64,
    pub mean_effective_se: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

impl DropStatistics {
    pub fn from_outcomes(outcomes: &[DropOutcome]) -> Self {
        Self {
            n_drops: outcomes.len(),
            samples: outcomes.iter().map(|o| o.avg_sqinr_db).collect(),
            gross_se_samples: outcomes.iter().map(|o| o.gross_se).collect(),
            effective_se_samples: outcomes.iter().map(|o| o.effective_se).collect(),
        }
    }

    pub fn cdf(&self) -> Result<EmpiricalCdf> {
        empirical_cdf(&self.samples)
    }

    pub fn mean_gross_se(&self) -> f64 {
        mean(&self.gross_se_samples)
    }

    pub fn mean_effective_se(&self) -> f64 {
        mean(&self.effective_se_samples)
    }

    pub fn summary(&self) -> Result<CampaignSummary> {
        let cdf = self.cdf()?;
        Ok(CampaignSummary {
            n_drops: self.n_drops,
            sqinr_db_quantiles: SUMMARY_PERCENTILES
                .iter()
                .map(|&p| (p, cdf.quantile(p as f64 / 100.0)))
                .collect(),
            mean_sqinr_db: mean(&self.samples),
            mean_gross_se: self.mean_gross_se(),
            mean_effective_se: self.mean_effective_se(),
        })
    }

    /// `drop_index,avg_sqinr_db,gross_se,effective_se` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("drop_index,avg_sqinr_db,gross_se,effective_se\n");
        for i in 0..self.n_drops {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i, self.samples[i], self.gross_se_samples[i], self.effective_se_samples[i]
            );
        }
        out
    }
}

/// Empirical distribution of a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted })
}

impl EmpiricalCdf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Step points `(value, probability)` at each sorted sample.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, (i + 1) as f64 / n))
            .collect()
    }

    /// Quantile at probability `p ∈ [0, 1]`, linearly interpolated between
    /// order statistics at positions `p (n − 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        let h = p * (self.sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        self.sorted[lo] + (h - lo as f64) * (self.sorted[hi] - self.sorted[lo])
    }

    /// Quantiles at the nine deciles 10%..90%.
    pub fn deciles(&self) -> Vec<f64> {
        (1..10).map(|d| self.quantile(d as f64 / 10.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantization::Resolution;
    use crate::scenario::default_scenario;
    use crate::sqinr::sinr_proposition6;

    #[test]
    fn cdf_examples() {
        let cdf = empirical_cdf(&[3.0, 1.0, 2.0]).unwrap();
        assert!((cdf.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(cdf.eval(3.0), 1.0);
        assert_eq!(cdf.eval(0.5), 0.0);
        assert_eq!(cdf.quantile(0.5), 2.0);
        assert_eq!(cdf.quantile(0.25), 1.5);
        assert_eq!(cdf.points().last(), Some(&(3.0, 1.0)));
        assert_eq!(empirical_cdf(&[]), Err(Error::EmptySamples));
    }

    #[test]
    fn cdf_at_median_within_one_step() {
        let samples: Vec<f64> = (0..101).map(|i| ((i * 37) % 101) as f64).collect();
        let cdf = empirical_cdf(&samples).unwrap();
        let m = cdf.quantile(0.5);
        assert!((cdf.eval(m) - 0.5).abs() <= 1.0 / 101.0);
    }

    fn small() -> Scenario {
        let mut s = default_scenario();
        s.n_drops = 4;
        s
    }

    #[test]
    fn drops_are_reproducible() {
        let s = small();
        assert_eq!(run_drop(&s, 3).unwrap(), run_drop(&s, 3).unwrap());
        assert_ne!(run_drop(&s, 3).unwrap(), run_drop(&s, 2).unwrap());
    }

    #[test]
    fn single_drop_campaign() {
        let mut s = small();
        s.n_drops = 1;
        let stats = run_campaign(&s, Execution::Sequential).unwrap();
        let one = run_drop(&s, 0).unwrap();
        assert_eq!(stats.samples, vec![one.avg_sqinr_db]);
        assert_eq!(stats.effective_se_samples, vec![one.effective_se]);
        assert_eq!(stats.to_csv().lines().count(), 2);
    }

    #[test]
    fn half_duplex_full_resolution_is_proposition6() {
        let mut s = small();
        s.k_uplink_per_cell = 0;
        s.adc_bits = Resolution::Infinite;
        let realization = drop_realization(&s, 1).unwrap();
        let expected: Vec<f64> = (0..s.k_downlink_per_cell)
            .map(|k| sinr_proposition6(&assemble_link_budget(&realization, &s, k).unwrap()))
            .collect();
        let got = run_drop(&s, 1).unwrap();
        let avg = expected.iter().sum::<f64>() / expected.len() as f64;
        assert!((got.avg_sqinr - avg).abs() <= 1e-12 * avg);
    }

    #[test]
    fn db_averaging_is_never_above_linear() {
        let v = [1.0, 10.0, 100.0];
        assert!((average_sqinr(&v, SqinrAverage::Linear) - 37.0).abs() < 1e-12);
        assert!((average_sqinr(&v, SqinrAverage::Db) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn summary_quantiles_are_ordered() {
        let stats = run_campaign(&small(), Execution::Parallel).unwrap();
        let summary = stats.summary().unwrap();
        let q: Vec<f64> = summary.sqinr_db_quantiles.iter().map(|x| x.1).collect();
        assert!(q.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(summary.n_drops, 4);
    }
}
