//! Signal-level oracle: precoder moments and received-signal decomposition.

use fdsim::channel::{CellLink, Contaminator, IuiLink, LinkBudget};
use fdsim::hardening::{build_precoder, empirical_sqinr, verify_corollary1, FadingDraw};
use fdsim::rng::{stream, Domain};
use fdsim::{sqinr_theorem6, with_workers, Execution};

#[test]
fn corollary_moments_pass_at_all_sizes() {
    for n in [16.0, 64.0, 256.0] {
        let b = LinkBudget::single_cell(n, 1.0, 200.0, 1e6, 1);
        let r = verify_corollary1(&b, 50_000, 3, Execution::Parallel).unwrap();
        assert!(r.all_pass, "{r:?}");
    }
}

#[test]
fn corollary_moments_with_noisy_contaminated_estimate() {
    let b = two_cell(64.0, 1.0);
    let r = verify_corollary1(&b, 50_000, 4, Execution::Parallel).unwrap();
    assert!(r.coefficient < 0.9);
    assert!(r.all_pass, "{r:?}");
}

#[test]
fn precoder_power_is_antenna_count() {
    let b = two_cell(32.0, 1.0);
    let mut rng = stream(8, Domain::Misc, 0);
    let n = 20_000;
    let mut mean = [0.0; 2];
    for _ in 0..n {
        let draw = FadingDraw::sample(2, 32, &mut rng);
        let p = build_precoder(&draw, &b).unwrap();
        for (m, f) in mean.iter_mut().zip(&p.f_vectors) {
            *m += f.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        }
    }
    // sd of ||f||^2 is sqrt(32), so 3σ of the mean is about 0.12
    for m in mean {
        assert!((m - 32.0).abs() < 0.15, "{mean:?}");
    }
}

#[test]
fn estimation_error_share_is_one_over_antennas() {
    for n in [32.0, 128.0] {
        let b = LinkBudget::single_cell(n, 1.0, 1.0, 1e12, 1);
        let r = empirical_sqinr(&b, 40_000, 5, Execution::Parallel).unwrap();
        let ratio = r.terms.estimation_error / r.terms.desired;
        assert!((ratio * n - 1.0).abs() < 0.05, "N_a={n}: {ratio}");
    }
}

#[test]
fn reference_cell_matches_closed_form() {
    let b = LinkBudget::single_cell(128.0, 1.0, 200.0, 100.0, 1);
    let closed = sqinr_theorem6(&b).unwrap().sqinr;
    let r = empirical_sqinr(&b, 40_000, 6, Execution::Parallel).unwrap();
    assert!((10.0 * (r.sqinr / closed).log10()).abs() < 0.5);
}

fn two_cell(n: f64, alpha: f64) -> LinkBudget {
    LinkBudget {
        n_antennas: n,
        alpha,
        varrho: 10.0,
        cells: vec![
            CellLink { cell_id: 0, snr_d: 20.0, p_frac_dl: 0.5, p_frac_ul: 1.0, k_downlink: 2 },
            CellLink { cell_id: 1, snr_d: 4.0, p_frac_dl: 0.5, p_frac_ul: 1.0, k_downlink: 2 },
        ],
        contamination: vec![Contaminator { cell_index: 1, snr_d_from_serving: 6.0, cross_snr_d: vec![15.0] }],
        iui: vec![
            IuiLink { cell_id: 0, user_index: 0, snr_iui: 0.5, p_frac_ul: 1.0 },
            IuiLink { cell_id: 1, user_index: 0, snr_iui: 0.2, p_frac_ul: 1.0 },
        ],
    }
}

#[test]
fn contaminated_asymmetric_budget_matches_closed_form() {
    // Distinguishes which SNR enters the estimate's pilot sum: the
    // contaminating user's link to the serving BS.
    let b = two_cell(64.0, 1.0);
    let closed = sqinr_theorem6(&b).unwrap();
    let r = empirical_sqinr(&b, 100_000, 9, Execution::Parallel).unwrap();
    let rel = (r.terms.desired - closed.numerator).abs() / closed.numerator;
    assert!(rel < 0.02, "desired {} vs {}", r.terms.desired, closed.numerator);
    assert!((10.0 * (r.sqinr / closed.sqinr).log10()).abs() < 0.1);
    assert!((r.terms.iui_same_cell - 0.5).abs() < 0.02);
    assert!((r.terms.iui_other_cells - 0.2).abs() < 0.01);
}

#[test]
fn decomposition_is_complete() {
    for alpha in [1.0, 1.0 - 0.3634] {
        let r = empirical_sqinr(&two_cell(32.0, alpha), 100_000, 10, Execution::Parallel).unwrap();
        let t = r.terms;
        for v in [t.desired, t.estimation_error, t.intra_cell, t.aqnm, t.inter_cell, t.iui_same_cell, t.iui_other_cells, t.noise] {
            assert!(v >= 0.0);
        }
        assert!(((r.received_power - r.component_power) / r.component_power).abs() < 0.01);
        let sum = t.desired + t.impairments();
        assert!(((r.received_power - sum) / sum).abs() < 0.01, "{} vs {sum}", r.received_power);
    }
}

#[test]
fn results_do_not_depend_on_workers() {
    let b = two_cell(16.0, 0.9);
    let seq = empirical_sqinr(&b, 5000, 1, Execution::Sequential).unwrap();
    let par = with_workers(3, || empirical_sqinr(&b, 5000, 1, Execution::Parallel).unwrap()).unwrap();
    assert_eq!(seq, par);
    let seq = verify_corollary1(&b, 5000, 1, Execution::Sequential).unwrap();
    let par = verify_corollary1(&b, 5000, 1, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
}
