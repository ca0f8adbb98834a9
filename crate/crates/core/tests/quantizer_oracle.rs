//! Lloyd-Max quantizers for a unit Gaussian, designed numerically, checked
//! against the distortion factors used by the AQNM model.

use fdsim::{rho_for_bits, Resolution};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Normalized mean-square error of the `2^bits`-level Lloyd-Max quantizer.
fn lloyd_max_distortion(bits: u32) -> f64 {
    let n = Normal::standard();
    let levels = 1usize << bits;
    let mut c: Vec<f64> = (0..levels)
        .map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / levels as f64)
        .collect();
    let mut distortion = f64::NAN;
    for _ in 0..20_000 {
        let mut t = vec![f64::NEG_INFINITY];
        t.extend(c.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        t.push(f64::INFINITY);
        let mut captured = 0.0;
        let mut next = Vec::with_capacity(levels);
        for i in 0..levels {
            let p = n.cdf(t[i + 1]) - n.cdf(t[i]);
            let centroid = (n.pdf(t[i]) - n.pdf(t[i + 1])) / p;
            captured += p * centroid * centroid;
            next.push(centroid);
        }
        let d = 1.0 - captured;
        let done = (d - distortion).abs() < 1e-15;
        distortion = d;
        c = next;
        if done {
            break;
        }
    }
    distortion
}

#[test]
fn table_values_are_lloyd_max_distortions() {
    for b in 1..=5 {
        let table = rho_for_bits(Resolution::Bits(b)).unwrap();
        let designed = lloyd_max_distortion(b);
        assert!(((designed - table) / table).abs() < 5e-3, "b={b}: {designed} vs {table}");
    }
}

#[test]
fn high_resolution_law_within_five_percent_at_six_bits() {
    let law = rho_for_bits(Resolution::Bits(6)).unwrap();
    let designed = lloyd_max_distortion(6);
    assert!(((law - designed) / designed).abs() < 0.05, "{law} vs {designed}");
}
