use proptest::prelude::*;

use pme_lab::bessel_core::BesselSystem;
use pme_lab::geometry::{
    build_cutoff, psi_eval, quasi_dist, ref_dist, CutoffSpec, IntrinsicBall, PsiWeight, CUTOFF_RATIO, C_D, C_L,
};
use pme_lab::green_semigroup::green_vertical;
use pme_lab::{HalfSpacePoint, SigmaParam};

/// Points with log-uniform heights so both the boundary and interior
/// regimes are hit.
fn point(dim: usize) -> impl Strategy<Value = HalfSpacePoint> {
    (prop::collection::vec(-4.0..4.0f64, dim - 1), -6.0..1.5f64, any::<bool>()).prop_map(|(t, e, on_boundary)| {
        let v = if on_boundary { 0.0 } else { 10f64.powf(e) };
        HalfSpacePoint::new(&t, v).unwrap()
    })
}

fn pair() -> impl Strategy<Value = (HalfSpacePoint, HalfSpacePoint)> {
    (1usize..=3).prop_flat_map(|d| (point(d), point(d)))
}

fn triple() -> impl Strategy<Value = (HalfSpacePoint, HalfSpacePoint, HalfSpacePoint)> {
    (1usize..=3).prop_flat_map(|d| (point(d), point(d), point(d)))
}

fn scaled(p: &HalfSpacePoint, lambda: f64) -> HalfSpacePoint {
    let t: Vec<f64> = p.tangential().iter().map(|x| lambda * lambda * x).collect();
    HalfSpacePoint::new(&t, lambda * lambda * p.vertical()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn distances_are_symmetric_and_vanish_only_on_the_diagonal((y, z) in pair()) {
        prop_assert_eq!(quasi_dist(&y, &z), quasi_dist(&z, &y));
        prop_assert_eq!(ref_dist(&y, &z), ref_dist(&z, &y));
        prop_assert_eq!(ref_dist(&y, &y), 0.0);
        if y != z {
            prop_assert!(ref_dist(&y, &z) > 0.0 && quasi_dist(&y, &z) > 0.0);
        }
    }

    #[test]
    fn metrics_are_comparable_within_48((y, z) in pair()) {
        prop_assume!(y != z);
        let r = ref_dist(&y, &z) / quasi_dist(&y, &z);
        prop_assert!((1.0 / 48.0..=48.0).contains(&r), "ratio {r}");
    }

    #[test]
    fn quasi_triangle_holds_with_48((x, y, z) in triple()) {
        let lhs = quasi_dist(&x, &z);
        prop_assert!(lhs <= 48.0 * (quasi_dist(&x, &y) + quasi_dist(&y, &z)) + 1e-15);
    }

    #[test]
    fn working_metric_scales_with_lambda((y, z) in pair(), lambda in 0.1..10.0f64) {
        let d = ref_dist(&y, &z);
        let ds = ref_dist(&scaled(&y, lambda), &scaled(&z, lambda));
        prop_assert!((ds - lambda * d).abs() <= 1e-12 * (1.0 + lambda * d));
    }

    #[test]
    fn ball_sits_between_euclidean_balls(c in (1usize..=3).prop_flat_map(point), r in 1e-3..4.0f64,
                                         dir in prop::collection::vec(-1.0..1.0f64, 3), frac in 0.0..1.0f64) {
        let ball = IntrinsicBall::new(c, r).unwrap();
        let n = c.dim();
        let mut u: Vec<f64> = dir[..n].to_vec();
        u[n - 1] = u[n - 1].abs();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let at = |rad: f64| {
            let coords: Vec<f64> = c.coords().iter().zip(&u).map(|(a, b)| a + rad * frac * b / norm).collect();
            HalfSpacePoint::new(&coords[..n - 1], coords[n - 1]).unwrap()
        };
        prop_assert!(ball.contains(&at(ball.inner_euclid_radius())));
        let probe = at(2.0 * ball.outer_euclid_radius());
        if ball.contains(&probe) {
            prop_assert!(probe.euclid_dist(&c) <= ball.outer_euclid_radius());
        }
    }

    #[test]
    fn cutoff_is_one_inside_and_zero_outside((c, y) in pair(), scale in 1e-2..2.0f64, d1 in 0.1..1.0f64, ratio in 0.05..1.0f64) {
        let spec = CutoffSpec { center: c, scale, outer_fraction: d1, inner_fraction: ratio * CUTOFF_RATIO * d1 };
        let eta = build_cutoff(spec).unwrap();
        let d = ref_dist(&y, &c);
        let v = eta.eval(&y);
        prop_assert!((0.0..=1.0).contains(&v));
        if d <= spec.inner_fraction * scale {
            prop_assert_eq!(v, 1.0);
        }
        if d >= d1 * scale {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn psi_weight_is_lipschitz_in_the_working_metric((y, x) in pair(), zeta in -1.0..1.0f64, eps in 1e-3..1.0f64) {
        let w = PsiWeight::new(zeta, eps, x.with_vertical(0.5)).unwrap();
        let lhs = (psi_eval(&w, &y) - psi_eval(&w, &x)).abs();
        prop_assert!(lhs <= C_L * zeta.abs() * C_D * ref_dist(&y, &x) + 1e-14);
    }

    #[test]
    fn sigma_and_exponent_round_trip(sigma in -0.99..20.0f64) {
        let s = SigmaParam::new(sigma).unwrap();
        let back = SigmaParam::from_exponent_m(s.exponent_m()).unwrap();
        prop_assert!((back.sigma() - sigma).abs() <= 1e-9 * (1.0 + sigma.abs()));
        prop_assert!((s.pressure_constant() - (2.0 + sigma)).abs() <= 1e-9 * (2.0 + sigma));
    }

    #[test]
    fn wronskian_matches_closed_form(sigma in -0.9..3.0f64, z in 0.1..10.0f64) {
        let b = BesselSystem::new(SigmaParam::new(sigma).unwrap());
        let exact = -z.powf(-1.0 - sigma);
        prop_assert!(((b.wronskian(z) - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn vertical_kernel_is_weighted_symmetric(sigma in -0.9..2.0f64, t in 0.05..5.0f64, y in 1e-3..10.0f64, z in 1e-3..10.0f64) {
        let s = SigmaParam::new(sigma).unwrap();
        let a = y.powf(sigma) * green_vertical(t, y, 0.0, z, s).unwrap();
        let b = z.powf(sigma) * green_vertical(t, z, 0.0, y, s).unwrap();
        prop_assume!(a > 1e-280);
        prop_assert!(((a - b) / a).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn sigma_at_or_below_minus_one_is_rejected() {
    assert!(SigmaParam::new(-1.0).is_err());
    assert!(SigmaParam::new(f64::NAN).is_err());
    assert!(SigmaParam::from_exponent_m(1.0).is_err());
}
