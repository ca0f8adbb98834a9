//! Independent evaluation of the closed-form SQINR from a serialized drop:
//! gains are read back from the JSON dump and every term is rebuilt from
//! scenario parameters without going through the crate's link budget.

use fdsim::montecarlo::{drop_breakdowns, drop_realization};
use fdsim::{default_scenario, run_drop, Resolution, Scenario};
use serde_json::Value;

const RHO: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];

struct Dump {
    /// `dl[cell][k][bs]`
    dl: Vec<Vec<Vec<f64>>>,
    /// `ue[k][j]`, uplink users cell-major.
    ue: Vec<Vec<f64>>,
    contamination: Vec<usize>,
}

fn gains_of(user: &Value) -> Vec<f64> {
    user["gains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["gain"].as_f64().unwrap())
        .collect()
}

fn load(s: &Scenario, drop: u64) -> Dump {
    let json = serde_json::to_string(&drop_realization(s, drop).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&json).unwrap();
    let k = s.k_downlink_per_cell;
    let users: Vec<Vec<f64>> = v["downlink"].as_array().unwrap().iter().map(gains_of).collect();
    let dl = users.chunks(k).map(|c| c.to_vec()).collect();
    let ue = v["ue_gains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|g| g["gain"].as_f64().unwrap()).collect())
        .collect();
    let contamination = v["lattice"]["contamination_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_u64().unwrap() as usize)
        .collect();
    Dump { dl, ue, contamination }
}

fn oracle_sqinr(s: &Scenario, d: &Dump, k: usize) -> f64 {
    let n0 = 10f64.powf((s.noise_psd_dbm_hz + s.noise_figure_db) / 10.0) * 1e-3 * s.bandwidth_hz;
    let alpha = match s.adc_bits {
        Resolution::Bits(b) => 1.0 - RHO[b as usize - 1],
        Resolution::Infinite => 1.0,
    };
    let kd = s.k_downlink_per_cell as f64;
    let pd = 1.0 / kd;
    let rho = s.p_downlink_w / s.p_uplink_w;
    let na = s.n_antennas as f64;
    let snr = |g: f64| g * s.p_downlink_w / n0;
    let me = &d.dl[0][k];

    let mut pilot = rho + snr(me[0]);
    for &l in &d.contamination {
        pilot += snr(d.dl[l][k][0]);
    }
    let num = alpha * alpha * na / pilot * pd * snr(me[0]).powi(2);

    let mut den = 1.0;
    for &g in me {
        den += alpha * alpha * snr(g);
        den += alpha * (1.0 - alpha) * pd * snr(g) * (kd + 1.0);
    }
    for &l in &d.contamination {
        let mut co = rho + snr(me[l]);
        for &m in &d.contamination {
            co += snr(d.dl[m][k][l]);
        }
        den += alpha * alpha * na / co * pd * snr(me[l]).powi(2);
    }
    for &t in &d.ue[k] {
        den += t * s.p_uplink_w / n0;
    }
    num / den
}

fn check(s: &Scenario, drop: u64) {
    let d = load(s, drop);
    let per_user = drop_breakdowns(s, drop).unwrap();
    let mut avg = 0.0;
    for (k, b) in per_user.iter().enumerate() {
        let o = oracle_sqinr(s, &d, k);
        assert!((b.sqinr - o).abs() <= 1e-12 * o, "user {k}: {} vs {o}", b.sqinr);
        avg += o;
    }
    avg /= per_user.len() as f64;
    let got = run_drop(s, drop).unwrap();
    assert!((got.avg_sqinr - avg).abs() <= 1e-12 * avg);
    assert!((got.avg_sqinr_db - 10.0 * avg.log10()).abs() <= 1e-10);
}

#[test]
fn default_drop_zero_matches_oracle() {
    check(&default_scenario(), 0);
}

#[test]
fn other_drops_and_resolutions_match_oracle() {
    let mut s = default_scenario();
    for (drop, bits) in [(1, Resolution::Bits(1)), (7, Resolution::Bits(3)), (11, Resolution::Infinite)] {
        s.adc_bits = bits;
        check(&s, drop);
    }
    s.k_uplink_per_cell = 0;
    s.n_antennas = 37;
    check(&s, 2);
}
