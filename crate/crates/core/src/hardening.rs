//! Signal-level small-scale-fading Monte Carlo.
//!
//! Builds matched-filter precoders from contaminated reverse-link channel
//! estimates, checks their hardening moments and measures an empirical
//! SQINR by averaging the power of every received-signal component over
//! fading draws. The desired signal is the mean precoded gain `E[h* f]`;
//! its fluctuation is counted as self-interference.
//!
//! The pilot group is the scored user (index 0, served by cell 0) plus the
//! co-pilot users of every contaminating cell (index `j + 1` for
//! contaminator `j`). BS `p` of the group estimates the channel of its own
//! co-pilot user `p`, corrupted by the other members of the group.
//!
//! Work is split into fixed-size batches with counter-based seeds, so the
//! result does not depend on the execution strategy.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::LinkBudget;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::{complex_normal, complex_normal_vec, stream, Domain};

const BATCH: u64 = 1024;

type CVec = Vec<Complex64>;

fn inner(h: &[Complex64], f: &[Complex64]) -> Complex64 {
    h.iter().zip(f).map(|(a, b)| a.conj() * b).sum()
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn antenna_count(budget: &LinkBudget) -> Result<usize> {
    let n = budget.n_antennas;
    if !(n >= 1.0 && n.fract() == 0.0 && n <= 65_536.0) {
        return Err(Error::InvalidParameter {
            field: "n_antennas",
            reason: format!("signal-level simulation needs a whole antenna count, got {n}"),
        });
    }
    Ok(n as usize)
}

/// Reverse-link SNRs inside the pilot group.
#[derive(Debug, Clone, PartialEq)]
struct PilotGroup {
    /// `snr_u[b][u]`: reverse-link SNR of co-pilot user `u` at group BS `b`.
    snr_u: Vec<Vec<f64>>,
    /// P/P_u of each co-pilot user.
    p_frac_ul: Vec<f64>,
    /// Budget cell index of each group BS.
    cell_index: Vec<usize>,
}

impl PilotGroup {
    fn from_budget(b: &LinkBudget) -> Self {
        let size = 1 + b.contamination.len();
        let mut cell_index = vec![0];
        cell_index.extend(b.contamination.iter().map(|c| c.cell_index));
        let p_frac_ul = cell_index.iter().map(|&i| b.cells[i].p_frac_ul).collect();
        let mut snr_d = vec![vec![0.0; size]; size];
        snr_d[0][0] = b.cells[0].snr_d;
        for (j, c) in b.contamination.iter().enumerate() {
            snr_d[0][j + 1] = c.snr_d_from_serving;
            snr_d[j + 1][0] = b.cells[c.cell_index].snr_d;
            for (i, &v) in c.cross_snr_d.iter().enumerate() {
                snr_d[j + 1][i + 1] = v;
            }
        }
        let snr_u = snr_d
            .into_iter()
            .map(|row| row.into_iter().map(|s| s / b.varrho).collect())
            .collect();
        Self {
            snr_u,
            p_frac_ul,
            cell_index,
        }
    }

    fn len(&self) -> usize {
        self.p_frac_ul.len()
    }

    /// `1 + Σ_u (P_u/P_u) SNR^u_{b,u}`: total received pilot power at BS `b`.
    fn pilot_power(&self, b: usize) -> f64 {
        1.0 + self.snr_u[b]
            .iter()
            .zip(&self.p_frac_ul)
            .map(|(s, p)| s * p)
            .sum::<f64>()
    }

    /// Leading matched-filter coefficient of BS `b` for its own user.
    fn coefficient(&self, b: usize) -> f64 {
        (self.p_frac_ul[b] * self.snr_u[b][b] / self.pilot_power(b)).sqrt()
    }
}

/// Small-scale fading of one draw for the pilot group.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraw {
    /// `channels[b][u]`: CN(0, I) channel between group BS `b` and co-pilot
    /// user `u`.
    pub channels: Vec<Vec<CVec>>,
    /// Unit-variance estimation noise per group BS. The estimation noise
    /// `v'` of that BS is this vector divided by `sqrt((P/P_u) SNR^u)` of
    /// its own user.
    pub estimation_noise: Vec<CVec>,
}

impl FadingDraw {
    pub fn sample<R: Rng + ?Sized>(group_size: usize, n_antennas: usize, rng: &mut R) -> Self {
        let channels = (0..group_size)
            .map(|_| {
                (0..group_size)
                    .map(|_| complex_normal_vec(rng, n_antennas, 1.0))
                    .collect()
            })
            .collect();
        let estimation_noise = (0..group_size)
            .map(|_| complex_normal_vec(rng, n_antennas, 1.0))
            .collect();
        Self {
            channels,
            estimation_noise,
        }
    }

    /// Channel from BS 0 to the scored user.
    pub fn scored_channel(&self) -> &[Complex64] {
        &self.channels[0][0]
    }
}

/// Matched-filter precoders of every BS in the pilot group toward its
/// co-pilot user.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderRealization {
    pub f_vectors: Vec<CVec>,
    /// Leading coefficient of each precoder.
    pub coefficients: Vec<f64>,
}

/// `f_b = c_b (h_{b,b} + Σ_{u≠b} a_{b,u} h_{b,u} + v'_b)` with
/// `c_b = sqrt((P/P_u)SNR^u_{b,b} / (1 + Σ_u (P/P_u)SNR^u_{b,u}))` and
/// `a_{b,u} = sqrt(SNR^u_{b,u} / SNR^u_{b,b})` (power fractions included),
/// which gives `E||f_b||² = N_a`. Evaluated in expanded form so a dead
/// uplink (zero SNR) leaves the pure-noise estimate.
pub fn build_precoder(draw: &FadingDraw, budget: &LinkBudget) -> Result<PrecoderRealization> {
    let group = PilotGroup::from_budget(budget);
    let n = antenna_count(budget)?;
    check_draw(draw, group.len(), n)?;
    Ok(precoders(&group, draw))
}

fn check_draw(draw: &FadingDraw, size: usize, n: usize) -> Result<()> {
    let ok = draw.channels.len() == size
        && draw.estimation_noise.len() == size
        && draw
            .channels
            .iter()
            .all(|row| row.len() == size && row.iter().all(|h| h.len() == n))
        && draw.estimation_noise.iter().all(|w| w.len() == n);
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "draw does not match a pilot group of {size} with {n} antennas"
        )))
    }
}

fn precoders(group: &PilotGroup, draw: &FadingDraw) -> PrecoderRealization {
    let n = draw.estimation_noise[0].len();
    let mut f_vectors = Vec::with_capacity(group.len());
    let mut coefficients = Vec::with_capacity(group.len());
    for b in 0..group.len() {
        let total = group.pilot_power(b);
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for (u, h) in draw.channels[b].iter().enumerate() {
            let w = (group.p_frac_ul[u] * group.snr_u[b][u] / total).sqrt();
            if w > 0.0 {
                for (fi, hi) in f.iter_mut().zip(h) {
                    *fi += hi * w;
                }
            }
        }
        let noise = total.recip().sqrt();
        for (fi, wi) in f.iter_mut().zip(&draw.estimation_noise[b]) {
            *fi += wi * noise;
        }
        f_vectors.push(f);
        coefficients.push(group.coefficient(b));
    }
    PrecoderRealization {
        f_vectors,
        coefficients,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub name: &'static str,
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corollary1Report {
    pub n_antennas: usize,
    pub n_samples: u64,
    /// Leading precoder coefficient; the mean precoded gain is this times N_a.
    pub coefficient: f64,
    pub moments: Vec<MomentCheck>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct MomentSums {
    n: f64,
    norm2: [f64; 2],
    norm4: [f64; 2],
    gain: Complex64,
    gain_sq: f64,
    cross: [f64; 2],
}

impl MomentSums {
    fn merge(mut self, o: &MomentSums) -> Self {
        self.n += o.n;
        for i in 0..2 {
            self.norm2[i] += o.norm2[i];
            self.norm4[i] += o.norm4[i];
            self.cross[i] += o.cross[i];
        }
        self.gain += o.gain;
        self.gain_sq += o.gain_sq;
        self
    }
}

fn mean_and_se(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimates `E||f||²`, `E||f||⁴`, `|E[h* f]|` and `E|h_i* f|²` (h_i an
/// independent interfering channel) for the scored user's precoder, each
/// checked against its target within three standard errors. Targets are
/// `N_a`, `N_a² + N_a`, `c·N_a` (equal to N_a with perfect estimates) and
/// `N_a`.
pub fn verify_corollary1(
    budget: &LinkBudget,
    n_samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<Corollary1Report> {
    budget.validate()?;
    let n = antenna_count(budget)?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: "need at least two samples".into(),
        });
    }
    let group = PilotGroup::from_budget(budget);
    let batches = n_samples.div_ceil(BATCH);
    let partial = exec.map_indexed(batches, |batch| {
        let mut rng = stream(seed, Domain::Corollary, batch);
        let count = BATCH.min(n_samples - batch * BATCH);
        let mut acc = MomentSums::default();
        for _ in 0..count {
            let draw = FadingDraw::sample(group.len(), n, &mut rng);
            let f = &precoders(&group, &draw).f_vectors[0];
            let interferer = complex_normal_vec(&mut rng, n, 1.0);
            let e = norm_sqr(f);
            let g = inner(draw.scored_channel(), f);
            let x = inner(&interferer, f).norm_sqr();
            acc.n += 1.0;
            acc.norm2[0] += e;
            acc.norm2[1] += e * e;
            acc.norm4[0] += e * e;
            acc.norm4[1] += e * e * e * e;
            acc.gain += g;
            acc.gain_sq += g.norm_sqr();
            acc.cross[0] += x;
            acc.cross[1] += x * x;
        }
        acc
    });
    let s = partial
        .iter()
        .fold(MomentSums::default(), |a, b| a.merge(b));

    let na = n as f64;
    let coefficient = group.coefficient(0);
    let check = |name, (estimate, std_error): (f64, f64), target: f64| MomentCheck {
        name,
        estimate,
        target,
        std_error,
        pass: (estimate - target).abs() <= 3.0 * std_error,
    };
    let gain_mean = s.gain / s.n;
    let gain_var = (s.gain_sq / s.n - gain_mean.norm_sqr()).max(0.0) * s.n / (s.n - 1.0);
    let moments = vec![
        check("norm_squared", mean_and_se(s.norm2[0], s.norm2[1], s.n), na),
        check("norm_fourth", mean_and_se(s.norm4[0], s.norm4[1], s.n), na * na + na),
        check(
            "mean_desired_gain",
            (gain_mean.norm(), (gain_var / s.n).sqrt()),
            coefficient * na,
        ),
        check("interferer_gain_power", mean_and_se(s.cross[0], s.cross[1], s.n), na),
    ];
    Ok(Corollary1Report {
        n_antennas: n,
        n_samples,
        coefficient,
        all_pass: moments.iter().all(|m| m.pass),
        moments,
    })
}

/// Average power of each received-signal component, relative to the noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct TermPowers {
    pub desired: f64,
    pub estimation_error: f64,
    pub intra_cell: f64,
    pub aqnm: f64,
    pub inter_cell: f64,
    pub iui_same_cell: f64,
    pub iui_other_cells: f64,
    pub noise: f64,
}

impl TermPowers {
    pub fn impairments(&self) -> f64 {
        self.estimation_error
            + self.intra_cell
            + self.aqnm
            + self.inter_cell
            + self.iui_same_cell
            + self.iui_other_cells
            + self.noise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_antennas: usize,
    pub n_samples: u64,
    pub terms: TermPowers,
    pub sqinr: f64,
    /// Mean power of the simulated received sample.
    pub received_power: f64,
    /// Sum of the mean powers of the symbol-level components.
    pub component_power: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct OracleSums {
    n: f64,
    gain: Complex64,
    gain_sq: f64,
    intra: f64,
    inter: f64,
    aqnm: f64,
    iui_same: f64,
    iui_other: f64,
    noise: f64,
    received: f64,
    components: f64,
}

impl OracleSums {
    fn merge(mut self, o: &OracleSums) -> Self {
        self.n += o.n;
        self.gain += o.gain;
        self.gain_sq += o.gain_sq;
        self.intra += o.intra;
        self.inter += o.inter;
        self.aqnm += o.aqnm;
        self.iui_same += o.iui_same;
        self.iui_other += o.iui_other;
        self.noise += o.noise;
        self.received += o.received;
        self.components += o.components;
        self
    }
}

/// Downlink share of every user of a cell: the budget's co-pilot share for
/// the scored index and an even split of the rest among the others.
fn cell_shares(budget: &LinkBudget, cell: usize) -> Vec<f64> {
    let c = &budget.cells[cell];
    let k = c.k_downlink.max(1);
    let mut shares = vec![0.0; k];
    shares[0] = c.p_frac_dl;
    if k > 1 {
        let rest = ((1.0 - c.p_frac_dl) / (k - 1) as f64).max(0.0);
        shares[1..].iter_mut().for_each(|s| *s = rest);
    }
    shares
}

/// Measures the SQINR of the scored user from simulated received-signal
/// components: desired power `α² SNR P/N_a |E[h* f]|²` over the summed
/// average power of every impairment. Quantization noise is drawn Gaussian
/// with covariance `α(1−α) diag(F P F*/N_a)` per cell.
pub fn empirical_sqinr(
    budget: &LinkBudget,
    n_samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<OracleReport> {
    budget.validate()?;
    let n = antenna_count(budget)?;
    if n_samples < 2 {
        return Err(Error::InvalidParameter {
            field: "n_samples",
            reason: "need at least two samples".into(),
        });
    }
    let group = PilotGroup::from_budget(budget);
    // group slot of every budget cell, if it belongs to the pilot group
    let mut slot = vec![None; budget.cells.len()];
    for (p, &cell) in group.cell_index.iter().enumerate() {
        slot[cell] = Some(p);
    }
    let shares: Vec<Vec<f64>> = (0..budget.cells.len())
        .map(|c| cell_shares(budget, c))
        .collect();

    let batches = n_samples.div_ceil(BATCH);
    let partial = exec.map_indexed(batches, |batch| {
        let mut rng = stream(seed, Domain::Oracle, batch);
        let count = BATCH.min(n_samples - batch * BATCH);
        let mut acc = OracleSums::default();
        for _ in 0..count {
            oracle_draw(budget, &group, &slot, &shares, n, &mut rng, &mut acc);
        }
        acc
    });
    let s = partial
        .iter()
        .fold(OracleSums::default(), |a, b| a.merge(b));

    let a = budget.alpha;
    let own = &budget.cells[0];
    let scale = a * a * own.snr_d * shares[0][0] / n as f64;
    let mean_gain = s.gain / s.n;
    let second = s.gain_sq / s.n;
    let terms = TermPowers {
        desired: scale * mean_gain.norm_sqr(),
        estimation_error: scale * (second - mean_gain.norm_sqr()).max(0.0),
        intra_cell: s.intra / s.n,
        aqnm: s.aqnm / s.n,
        inter_cell: s.inter / s.n,
        iui_same_cell: s.iui_same / s.n,
        iui_other_cells: s.iui_other / s.n,
        noise: s.noise / s.n,
    };
    Ok(OracleReport {
        n_antennas: n,
        n_samples,
        sqinr: terms.desired / terms.impairments(),
        terms,
        received_power: s.received / s.n,
        component_power: s.components / s.n,
    })
}

fn oracle_draw<R: Rng + ?Sized>(
    budget: &LinkBudget,
    group: &PilotGroup,
    slot: &[Option<usize>],
    shares: &[Vec<f64>],
    n: usize,
    rng: &mut R,
    acc: &mut OracleSums,
) {
    let a = budget.alpha;
    let na = n as f64;
    let draw = FadingDraw::sample(group.len(), n, rng);
    let pre = precoders(group, &draw);

    let mut received = Complex64::new(0.0, 0.0);
    let mut components = 0.0;
    let mut add = |amp: Complex64, received: &mut Complex64| {
        *received += amp;
        components += amp.norm_sqr();
    };

    for (cell, link) in budget.cells.iter().enumerate() {
        // channel from this BS to the scored user
        let fresh;
        let h: &[Complex64] = match slot[cell] {
            Some(p) => &draw.channels[p][0],
            None => {
                fresh = complex_normal_vec(rng, n, 1.0);
                &fresh
            }
        };
        let mut q_var = vec![0.0; n];
        for (user, &share) in shares[cell].iter().enumerate() {
            let generated;
            let f: &[Complex64] = match (user, slot[cell]) {
                (0, Some(p)) => &pre.f_vectors[p],
                _ => {
                    generated = complex_normal_vec(rng, n, 1.0);
                    &generated
                }
            };
            for (v, fi) in q_var.iter_mut().zip(f) {
                *v += share / na * fi.norm_sqr();
            }
            let gain = inner(h, f);
            let amp = a * (link.snr_d * share / na).sqrt() * gain;
            let symbol = complex_normal(rng);
            add(amp * symbol, &mut received);
            if cell == 0 && user == 0 {
                acc.gain += gain;
                acc.gain_sq += gain.norm_sqr();
            } else if cell == 0 {
                acc.intra += amp.norm_sqr();
            } else {
                acc.inter += amp.norm_sqr();
            }
        }
        if a < 1.0 {
            let noise_scale = a * (1.0 - a);
            let hq: Complex64 = h
                .iter()
                .zip(&q_var)
                .map(|(hi, v)| hi.conj() * complex_normal(rng) * (noise_scale * v).sqrt())
                .sum();
            let amp = link.snr_d.sqrt() * hq;
            acc.aqnm += amp.norm_sqr();
            add(amp, &mut received);
        }
    }

    for u in &budget.iui {
        let amp = (u.p_frac_ul * u.snr_iui).sqrt() * complex_normal(rng);
        let power = amp.norm_sqr();
        if u.cell_id == budget.cells[0].cell_id {
            acc.iui_same += power;
        } else {
            acc.iui_other += power;
        }
        add(amp * complex_normal(rng), &mut received);
    }

    let v = complex_normal(rng);
    acc.noise += v.norm_sqr();
    add(v, &mut received);

    acc.n += 1.0;
    acc.received += received.norm_sqr();
    acc.components += components;
}
