//! Scaled modified Bessel functions against 30-digit mpmath values
//! (`scripts/gen_bessel_fixture.py`).

use pme_lab::bessel_core::{bessel_i_scaled, bessel_k_scaled};

const FIXTURE: &str = include_str!("fixtures/bessel_reference.txt");

fn rows() -> Vec<[f64; 4]> {
    FIXTURE
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn fixture_covers_orders_and_arguments() {
    let r = rows();
    assert_eq!(r.len(), 140);
    assert!(r.iter().any(|v| v[0] < 0.0));
    assert!(r.iter().any(|v| v[1] > 100.0));
}

#[test]
fn scaled_i_and_k_match_reference_to_1e_10() {
    let mut worst = (0.0f64, 0.0, 0.0);
    for [nu, x, i_ref, k_ref] in rows() {
        let ei = ((bessel_i_scaled(nu, x) - i_ref) / i_ref).abs();
        let ek = ((bessel_k_scaled(nu, x) - k_ref) / k_ref).abs();
        assert!(ei < 1e-10, "I_{nu}({x}): rel err {ei:.2e}");
        assert!(ek < 1e-10, "K_{nu}({x}): rel err {ek:.2e}");
        if ei.max(ek) > worst.0 {
            worst = (ei.max(ek), nu, x);
        }
    }
    println!("worst relative error {:.2e} at nu={}, x={}", worst.0, worst.1, worst.2);
}
