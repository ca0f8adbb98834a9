//! Large-scale gains, network realizations and per-user link budgets.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Direction, Lattice, UserPosition};
use crate::quantization::QuantizationModel;
use crate::rng::{standard_normal, stream, Domain};
use crate::scenario::{forward_reverse_ratio, noise_power_w, Scenario};

/// Shadowing redraws allowed before a user position is redrawn instead.
const MAX_ASSOCIATION_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LargeScaleGain {
    pub gain: f64,
    pub distance_m: f64,
    pub shadow: f64,
}

/// `G = L_ref · χ / r^η` with lognormal shadowing `χ = 10^(σ z / 10)`.
pub fn large_scale_gain<R: Rng + ?Sized>(
    distance: f64,
    eta: f64,
    sigma_db: f64,
    lref: f64,
    min_distance: f64,
    rng: &mut R,
) -> Result<LargeScaleGain> {
    if distance.is_nan() || distance < min_distance {
        return Err(Error::DistanceBelowMinimum {
            distance,
            minimum: min_distance,
        });
    }
    let shadow = if sigma_db > 0.0 {
        10f64.powf(sigma_db * standard_normal(rng) / 10.0)
    } else {
        1.0
    };
    Ok(LargeScaleGain {
        gain: lref * shadow / distance.powf(eta),
        distance_m: distance,
        shadow,
    })
}

/// `G · P / N_0`.
pub fn snr_terms(gain: f64, p_tx: f64, n0: f64) -> f64 {
    gain * p_tx / n0
}

/// A user together with its gains to every BS (`gains[ℓ]` is BS ℓ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserDrop {
    pub position: UserPosition,
    pub gains: Vec<LargeScaleGain>,
}

/// One network drop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkRealization {
    pub lattice: Lattice,
    pub k_downlink: usize,
    pub k_uplink: usize,
    /// Downlink users, cell-major: index `cell * k_downlink + k`.
    pub downlink: Vec<UserDrop>,
    /// Uplink users, cell-major: index `cell * k_uplink + k`.
    pub uplink: Vec<UserDrop>,
    /// `ue_gains[k][j]`: UE–UE gain from uplink user `j` to downlink user
    /// `k` of cell 0.
    pub ue_gains: Vec<Vec<LargeScaleGain>>,
}

/// Stream labels inside a drop: one stream per (role, cell) so that adding
/// users to a cell appends draws without changing the existing ones.
const ROLE_DOWNLINK: u64 = 0;
const ROLE_UPLINK: u64 = 1;
const ROLE_UE_GAINS: u64 = 2;

fn drop_stream(seed: u64, role: u64, index: u64) -> crate::rng::SimRng {
    stream(seed, Domain::Drop, (role << 32) | index)
}

impl NetworkRealization {
    /// Drops every user, associates it to its home cell by max-gain
    /// (redrawing shadowing until the home BS wins) and draws the UE–UE
    /// gains seen by cell 0's downlink users. Downlink users, uplink users
    /// and UE–UE gains of each cell come from separate streams of `seed`.
    pub fn generate(scenario: &Scenario, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let lattice = Lattice::new(scenario.tiers, scenario.inter_site_distance_m);
        let n_cells = lattice.len() as u64;
        let mut downlink = Vec::with_capacity(lattice.len() * scenario.k_downlink_per_cell);
        let mut uplink = Vec::with_capacity(lattice.len() * scenario.k_uplink_per_cell);
        for (direction, role, count, out) in [
            (Direction::Downlink, ROLE_DOWNLINK, scenario.k_downlink_per_cell, &mut downlink),
            (Direction::Uplink, ROLE_UPLINK, scenario.k_uplink_per_cell, &mut uplink),
        ] {
            for cell in 0..lattice.len() {
                let mut rng = drop_stream(seed, role, cell as u64);
                for user_index in 0..count {
                    out.push(associated_user(&lattice, scenario, cell, direction, user_index, &mut rng)?);
                }
            }
        }

        let min = scenario.min_link_distance_m;
        let k_u = scenario.k_uplink_per_cell;
        let mut ue_gains = Vec::with_capacity(scenario.k_downlink_per_cell);
        for (k, receiver) in downlink[..scenario.k_downlink_per_cell].iter().enumerate() {
            let mut row = Vec::with_capacity(uplink.len());
            for cell in 0..lattice.len() {
                let mut rng = drop_stream(seed, ROLE_UE_GAINS, k as u64 * n_cells + cell as u64);
                for tx in &uplink[cell * k_u..(cell + 1) * k_u] {
                    let d = receiver.position.position.distance(tx.position.position).max(min);
                    row.push(large_scale_gain(
                        d,
                        scenario.pathloss_exponent_eta,
                        scenario.shadowing_sigma_db,
                        scenario.lref_ue(),
                        min,
                        &mut rng,
                    )?);
                }
            }
            ue_gains.push(row);
        }

        Ok(Self {
            lattice,
            k_downlink: scenario.k_downlink_per_cell,
            k_uplink: scenario.k_uplink_per_cell,
            downlink,
            uplink,
            ue_gains,
        })
    }

    pub fn downlink_user(&self, cell: usize, k: usize) -> &UserDrop {
        &self.downlink[cell * self.k_downlink + k]
    }

    pub fn uplink_user(&self, cell: usize, k: usize) -> &UserDrop {
        &self.uplink[cell * self.k_uplink + k]
    }

    pub fn positions(&self) -> impl Iterator<Item = &UserPosition> {
        self.downlink.iter().chain(self.uplink.iter()).map(|u| &u.position)
    }
}

fn associated_user<R: Rng + ?Sized>(
    lattice: &Lattice,
    scenario: &Scenario,
    cell: usize,
    direction: Direction,
    user_index: usize,
    rng: &mut R,
) -> Result<UserDrop> {
    let min = scenario.min_link_distance_m;
    loop {
        let position = lattice.sample_user_position(cell, min, rng);
        let distances: Vec<f64> = lattice
            .cells
            .iter()
            .map(|c| c.position.distance(position))
            .collect();
        for _ in 0..MAX_ASSOCIATION_REDRAWS {
            let gains = distances
                .iter()
                .map(|&d| {
                    large_scale_gain(
                        d,
                        scenario.pathloss_exponent_eta,
                        scenario.shadowing_sigma_db,
                        scenario.lref_bs(),
                        min,
                        rng,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            if strongest(&gains) == cell {
                return Ok(UserDrop {
                    position: UserPosition {
                        cell_of_drop: cell,
                        serving_cell: cell,
                        position,
                        direction,
                        user_index,
                    },
                    gains,
                });
            }
        }
    }
}

/// Index of the largest gain (first on ties).
pub fn strongest(gains: &[LargeScaleGain]) -> usize {
    let mut best = 0;
    for (i, g) in gains.iter().enumerate() {
        if g.gain > gains[best].gain {
            best = i;
        }
    }
    best
}

/// Per-cell terms seen by the scored downlink user k of cell 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellLink {
    pub cell_id: usize,
    /// SNR^d_{ℓ,k}: BS ℓ to the scored user.
    pub snr_d: f64,
    /// P_{ℓ,k}/P_d: downlink share of user k in cell ℓ.
    pub p_frac_dl: f64,
    /// P_{ℓ,k}/P_u: pilot power control of user k in cell ℓ.
    pub p_frac_ul: f64,
    pub k_downlink: usize,
}

/// A cell of the contamination set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contaminator {
    /// Position of this cell in [`LinkBudget::cells`].
    pub cell_index: usize,
    /// SNR^d_{0,(ℓ,k)}: serving BS to the co-pilot user of this cell.
    pub snr_d_from_serving: f64,
    /// SNR^d_{ℓ,(l,k)} for every contaminator l, in contamination order.
    pub cross_snr_d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IuiLink {
    pub cell_id: usize,
    pub user_index: usize,
    /// SNR^iui = T · P_u / N_0.
    pub snr_iui: f64,
    /// P_{ℓ,k̄}/P_u.
    pub p_frac_ul: f64,
}

/// Everything the closed-form SQINR needs for one scored downlink user.
/// `cells[0]` is the serving cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBudget {
    pub n_antennas: f64,
    pub alpha: f64,
    pub varrho: f64,
    pub cells: Vec<CellLink>,
    pub contamination: Vec<Contaminator>,
    pub iui: Vec<IuiLink>,
}

impl LinkBudget {
    /// A single isolated cell with uniform downlink power and full-power
    /// pilots.
    pub fn single_cell(n_antennas: f64, alpha: f64, varrho: f64, snr_d: f64, k_downlink: usize) -> Self {
        Self {
            n_antennas,
            alpha,
            varrho,
            cells: vec![CellLink {
                cell_id: 0,
                snr_d,
                p_frac_dl: 1.0 / k_downlink as f64,
                p_frac_ul: 1.0,
                k_downlink,
            }],
            contamination: Vec::new(),
            iui: Vec::new(),
        }
    }

    pub fn serving(&self) -> &CellLink {
        &self.cells[0]
    }

    /// SNR^d_k of the scored user's own link.
    pub fn snr_d_k(&self) -> f64 {
        self.cells[0].snr_d
    }

    /// Reverse-link SNR of the same link, SNR^d / ϱ.
    pub fn snr_u(&self, snr_d: f64) -> f64 {
        snr_d / self.varrho
    }

    /// SNR^d_{ℓ,k} of a contaminator.
    pub fn contaminator_snr_d(&self, c: &Contaminator) -> f64 {
        self.cells[c.cell_index].snr_d
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParameter {
                field,
                reason: reason.into(),
            })
        }
        if self.cells.is_empty() {
            return Err(Error::EmptyBudget);
        }
        if !(self.n_antennas >= 0.0 && self.n_antennas.is_finite()) {
            return bad("n_antennas", "must be finite and nonnegative");
        }
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return bad("alpha", format!("must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.varrho > 0.0 && self.varrho.is_finite()) {
            return bad("varrho", "must be positive");
        }
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        for c in &self.cells {
            if !nonneg(c.snr_d) || !nonneg(c.p_frac_dl) || !nonneg(c.p_frac_ul) {
                return bad("cells", format!("cell {} has a negative or non-finite term", c.cell_id));
            }
        }
        for c in &self.contamination {
            if c.cell_index == 0 || c.cell_index >= self.cells.len() {
                return Err(Error::DimensionMismatch(format!(
                    "contaminator refers to cell index {}",
                    c.cell_index
                )));
            }
            if c.cross_snr_d.len() != self.contamination.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} cross terms for {} contaminators",
                    c.cross_snr_d.len(),
                    self.contamination.len()
                )));
            }
            if !nonneg(c.snr_d_from_serving) || !c.cross_snr_d.iter().all(|&v| nonneg(v)) {
                return bad("contamination", "negative or non-finite SNR");
            }
        }
        for u in &self.iui {
            if !nonneg(u.snr_iui) || !nonneg(u.p_frac_ul) {
                return bad("iui", "negative or non-finite SNR");
            }
        }
        Ok(())
    }

    /// Scales every SNR term (cells, contamination, IUI) by `t`.
    pub fn scale_snr(&mut self, t: f64) {
        for c in &mut self.cells {
            c.snr_d *= t;
        }
        for c in &mut self.contamination {
            c.snr_d_from_serving *= t;
            for v in &mut c.cross_snr_d {
                *v *= t;
            }
        }
        for u in &mut self.iui {
            u.snr_iui *= t;
        }
    }

    /// Drops all inter-user interference terms (half-duplex view).
    pub fn without_iui(&self) -> Self {
        Self {
            iui: Vec::new(),
            ..self.clone()
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }
}

/// Collects every term for downlink user `user_k` of cell 0: uniform
/// downlink shares `1/K^d`, full-power pilots and uplink data.
pub fn assemble_link_budget(
    realization: &NetworkRealization,
    scenario: &Scenario,
    user_k: usize,
) -> Result<LinkBudget> {
    if user_k >= realization.k_downlink {
        return Err(Error::UserNotServed {
            user: user_k,
            served: realization.k_downlink,
        });
    }
    let n0 = noise_power_w(scenario)?;
    let pd = scenario.p_downlink_w;
    let pu = scenario.p_uplink_w;
    let quant = QuantizationModel::new(scenario.adc_bits)?;
    let k_d = realization.k_downlink;
    let scored = realization.downlink_user(0, user_k);

    let cells = realization
        .lattice
        .cells
        .iter()
        .map(|site| CellLink {
            cell_id: site.cell_id,
            snr_d: snr_terms(scored.gains[site.cell_id].gain, pd, n0),
            p_frac_dl: 1.0 / k_d as f64,
            p_frac_ul: 1.0,
            k_downlink: k_d,
        })
        .collect();

    let cset = &realization.lattice.contamination_set;
    let contamination = cset
        .iter()
        .map(|&cell| {
            let co_pilot = realization.downlink_user(cell, user_k);
            Contaminator {
                cell_index: cell,
                snr_d_from_serving: snr_terms(co_pilot.gains[0].gain, pd, n0),
                cross_snr_d: cset
                    .iter()
                    .map(|&other| {
                        let user = realization.downlink_user(other, user_k);
                        snr_terms(user.gains[cell].gain, pd, n0)
                    })
                    .collect(),
            }
        })
        .collect();

    let iui = realization
        .uplink
        .iter()
        .zip(&realization.ue_gains[user_k])
        .map(|(tx, t)| IuiLink {
            cell_id: tx.position.serving_cell,
            user_index: tx.position.user_index,
            snr_iui: snr_terms(t.gain, pu, n0),
            p_frac_ul: 1.0,
        })
        .collect();

    let budget = LinkBudget {
        n_antennas: scenario.n_antennas as f64,
        alpha: quant.alpha,
        varrho: forward_reverse_ratio(scenario),
        cells,
        contamination,
        iui,
    };
    budget.validate()?;
    Ok(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;
    use approx::assert_relative_eq;

    #[test]
    fn gain_examples() {
        let mut rng = stream(0, Domain::Misc, 0);
        let g = large_scale_gain(1.0, 2.5, 0.0, 1.0, 1.0, &mut rng).unwrap();
        assert_eq!(g.gain, 1.0);
        let g = large_scale_gain(100.0, 2.5, 0.0, 1.0, 10.0, &mut rng).unwrap();
        assert_relative_eq!(g.gain, 1e-5, max_relative = 1e-12);
        assert!(matches!(
            large_scale_gain(5.0, 2.5, 8.0, 1.0, 10.0, &mut rng),
            Err(Error::DistanceBelowMinimum { .. })
        ));
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr_terms(1.0, 2.0, 2.0), 1.0);
        assert_relative_eq!(snr_terms(1e-10, 40.0, 1.59e-13), 2.5157e4, max_relative = 1e-3);
        assert_eq!(snr_terms(0.0, 40.0, 1.59e-13), 0.0);
    }

    #[test]
    fn realization_counts_and_association() {
        let s = default_scenario();
        let r = NetworkRealization::generate(&s, 42).unwrap();
        assert_eq!(r.downlink.len(), 190);
        assert_eq!(r.uplink.len(), 190);
        assert_eq!(r.ue_gains.len(), 10);
        for u in r.downlink.iter().chain(&r.uplink) {
            assert_eq!(strongest(&u.gains), u.position.serving_cell);
            assert_eq!(u.position.serving_cell, u.position.cell_of_drop);
            assert!(u.gains.iter().all(|g| g.distance_m >= s.min_link_distance_m));
        }
        for row in &r.ue_gains {
            assert_eq!(row.len(), 190);
            assert!(row.iter().all(|g| g.gain > 0.0 && g.gain.is_finite()));
        }
    }

    #[test]
    fn budget_counts_on_default_lattice() {
        let s = default_scenario();
        let r = NetworkRealization::generate(&s, 42).unwrap();
        let b = assemble_link_budget(&r, &s, 3).unwrap();
        assert_eq!(b.cells.len(), 19);
        assert_eq!(b.contamination.len(), 6);
        assert_eq!(b.iui.len(), 190);
        assert_relative_eq!(b.varrho, 200.0, max_relative = 1e-12);
        assert_relative_eq!(b.alpha, 1.0 - 0.002499, max_relative = 1e-15);
        let share: f64 = (0..s.k_downlink_per_cell).map(|_| b.cells[0].p_frac_dl).sum();
        assert_relative_eq!(share, 1.0, max_relative = 1e-12);
        assert!(matches!(
            assemble_link_budget(&r, &s, 10),
            Err(Error::UserNotServed { .. })
        ));
    }

    #[test]
    fn degenerate_single_cell_budget() {
        let mut s = default_scenario();
        s.tiers = 0;
        s.k_downlink_per_cell = 1;
        s.k_uplink_per_cell = 0;
        s.p_uplink_w = s.p_downlink_w;
        let r = NetworkRealization::generate(&s, 1).unwrap();
        let b = assemble_link_budget(&r, &s, 0).unwrap();
        assert!(b.contamination.is_empty());
        assert!(b.iui.is_empty());
        assert_eq!(b.cells.len(), 1);
        assert_eq!(b.varrho, 1.0);
        assert_eq!(b.cells[0].p_frac_dl, 1.0);
    }

    #[test]
    fn validation_catches_bad_budgets() {
        let mut b = LinkBudget::single_cell(100.0, 1.0, 200.0, 100.0, 1);
        b.validate().unwrap();
        b.cells[0].snr_d = -1.0;
        assert!(b.validate().is_err());
        let mut b = LinkBudget::single_cell(100.0, 1.0, 200.0, 100.0, 1);
        b.cells.clear();
        assert_eq!(b.validate(), Err(Error::EmptyBudget));
    }
}
