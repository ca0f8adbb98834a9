//! Property tests of the closed-form SQINR over random link budgets.

use fdsim::channel::{CellLink, Contaminator, IuiLink, LinkBudget};
use fdsim::sqinr::{sinr_no_contamination, sinr_proposition6};
use fdsim::sqinr_theorem6;
use proptest::prelude::*;

fn log_snr() -> impl Strategy<Value = f64> {
    (-2.0f64..10.0).prop_map(|e| 10f64.powf(e))
}

prop_compose! {
    fn budget()(
        k in 1usize..20,
        n_antennas in 1u32..4096,
        varrho in 0.1f64..1000.0,
        alpha in 0.5f64..=1.0,
        snrs in prop::collection::vec((log_snr(), 0.1f64..=1.0), 1..10),
        n_cont in 0usize..4,
        cross in prop::collection::vec(log_snr(), 20),
        iui in prop::collection::vec(log_snr(), 0..12),
    ) -> LinkBudget {
        let cells: Vec<CellLink> = snrs
            .iter()
            .enumerate()
            .map(|(i, &(snr_d, pu))| CellLink {
                cell_id: i,
                snr_d,
                p_frac_dl: 1.0 / k as f64,
                p_frac_ul: pu,
                k_downlink: k,
            })
            .collect();
        let n_cont = n_cont.min(cells.len() - 1);
        let contamination = (0..n_cont)
            .map(|j| Contaminator {
                cell_index: j + 1,
                snr_d_from_serving: cross[j],
                cross_snr_d: (0..n_cont).map(|i| cross[4 + 4 * j + i]).collect(),
            })
            .collect();
        let iui = iui
            .iter()
            .enumerate()
            .map(|(j, &snr_iui)| IuiLink { cell_id: j % cells.len(), user_index: j, snr_iui, p_frac_ul: 1.0 })
            .collect();
        LinkBudget { n_antennas: n_antennas as f64, alpha, varrho, cells, contamination, iui }
    }
}

fn s(b: &LinkBudget) -> f64 {
    sqinr_theorem6(b).unwrap().sqinr
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn full_resolution_half_duplex_is_proposition6(b in budget()) {
        let b = b.with_alpha(1.0).without_iui();
        let p = sinr_proposition6(&b);
        prop_assert!((s(&b) - p).abs() <= 1e-10 * p);
    }

    #[test]
    fn no_contamination_special_case(b in budget()) {
        let b = LinkBudget { contamination: Vec::new(), ..b.with_alpha(1.0).without_iui() };
        let p = sinr_proposition6(&b);
        prop_assert!((sinr_no_contamination(&b) - p).abs() <= 1e-10 * p);
    }

    #[test]
    fn breakdown_is_consistent(b in budget()) {
        let out = sqinr_theorem6(&b).unwrap();
        prop_assert!(out.sqinr >= 0.0 && out.sqinr.is_finite());
        prop_assert!(out.den_noise == 1.0);
        prop_assert!(out.den_aqnm >= 0.0 && out.den_iui >= 0.0 && out.den_pilot_contamination >= 0.0);
        prop_assert!((out.sqinr * out.denominator() - out.numerator).abs() <= 1e-12 * out.numerator);
    }

    #[test]
    fn more_antennas_never_hurt(b in budget(), extra in 1u32..1000) {
        let mut more = b.clone();
        more.n_antennas += extra as f64;
        prop_assert!(s(&more) >= s(&b) * (1.0 - 1e-12));
    }

    #[test]
    fn more_resolution_never_hurts(b in budget(), t in 0.0f64..1.0) {
        let finer = b.with_alpha(b.alpha + t * (1.0 - b.alpha));
        prop_assert!(s(&finer) >= s(&b) * (1.0 - 1e-12));
    }

    #[test]
    fn removing_contamination_never_hurts(b in budget()) {
        let clean = LinkBudget { contamination: Vec::new(), ..b.clone() };
        prop_assert!(s(&clean) >= s(&b) * (1.0 - 1e-12));
    }

    #[test]
    fn removing_iui_never_hurts(b in budget()) {
        prop_assert!(s(&b.without_iui()) >= s(&b) * (1.0 - 1e-12));
    }

    #[test]
    fn interference_limited_at_high_power(b in budget()) {
        let mut hi = b.without_iui();
        hi.scale_snr(1e14);
        let mut higher = hi.clone();
        higher.scale_snr(100.0);
        prop_assert!((s(&higher) - s(&hi)).abs() <= 1e-6 * s(&hi));
    }
}
