//! Green function of `∂ₛ − L_σ` on the half-space, Duhamel solving and the
//! numerical checks of its kernel bounds.

pub mod bounds;
pub mod decay;
pub mod duhamel;
pub mod fv;
pub mod gaussian;
pub mod invariants;
pub mod kernel;
pub mod propagator;

pub use bounds::{offdiag_and_lq_checks, BoundsReport, LqSweep};
pub use decay::{exp_weight_decay_check, DecayReport};
pub use duhamel::{duhamel_solve, homogeneous_solve, semigroup_apply};
pub use gaussian::{gaussian_verify, DerivOrder, GaussianFit, Regime, GAUSSIAN_C};
pub use invariants::{duality_check, kernel_invariants, KernelInvariants};

use crate::error::{LabError, Result};
use crate::geometry::TimeSpacePoint;
use crate::weighted_measure::SigmaParam;

/// Vertical kernel `G(s, y_n, τ, z_n)` with respect to `dz_n`.
pub fn green_vertical(s: f64, y_n: f64, tau: f64, z_n: f64, sigma: SigmaParam) -> Result<f64> {
    if !(s > tau) {
        return Err(LabError::InvalidParameter(format!("kernel needs s > τ (s={s}, τ={tau})")));
    }
    if y_n < 0.0 || z_n < 0.0 {
        return Err(LabError::OutsideGrid(format!("heights must be nonnegative (y={y_n}, z={z_n})")));
    }
    Ok(kernel::vertical_kernel(sigma.sigma(), s - tau, y_n, z_n, 0.0))
}

/// Green kernel on `H` with the tangential directions periodised on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenKernel {
    pub sigma: SigmaParam,
    pub dim: usize,
    pub box_len: f64,
    pub max_modes: usize,
    pub tail_tol: f64,
}

impl GreenKernel {
    pub fn new(sigma: SigmaParam, dim: usize) -> Self {
        Self { sigma, dim, box_len: 16.0, max_modes: 4096, tail_tol: 1e-8 }
    }

    /// `G(a, b)` with respect to Lebesgue measure in `b`.
    pub fn eval(&self, a: &TimeSpacePoint, b: &TimeSpacePoint) -> Result<f64> {
        if a.point.dim() != self.dim || b.point.dim() != self.dim {
            return Err(LabError::InvalidParameter("point dimension does not match the kernel".into()));
        }
        let (yn, zn) = (a.point.vertical(), b.point.vertical());
        let g0 = green_vertical(a.time, yn, b.time, zn, self.sigma)?;
        if self.dim == 1 {
            return Ok(g0);
        }
        let t = a.time - b.time;
        let s = self.sigma.sigma();
        let w = 2.0 * std::f64::consts::PI / self.box_len;
        let off: Vec<f64> = a.point.tangential().iter().zip(b.point.tangential()).map(|(p, q)| p - q).collect();
        let cell = self.box_len.powi(self.dim as i32 - 1);
        let mut total = g0;
        // Shells of constant max-norm |m|_∞ = r.
        for r in 1..=self.max_modes as i64 {
            let mut shell = 0.0;
            let mut shell_abs = 0.0;
            let mut visit = |m: &[i64]| {
                let xi2: f64 = m.iter().map(|&c| (w * c as f64).powi(2)).sum();
                let phase: f64 = m.iter().zip(&off).map(|(&c, d)| w * c as f64 * d).sum();
                let k = kernel::vertical_kernel(s, t, yn, zn, xi2.sqrt());
                shell += phase.cos() * k;
                shell_abs += k;
            };
            if self.dim == 2 {
                visit(&[r]);
                visit(&[-r]);
            } else {
                for i in -r..=r {
                    for j in -r..=r {
                        if i.abs().max(j.abs()) == r {
                            visit(&[i, j]);
                        }
                    }
                }
            }
            total += shell;
            if shell_abs <= self.tail_tol * total.abs().max(g0) {
                return Ok(total / cell);
            }
        }
        Err(LabError::Quadrature(format!(
            "tangential mode sum not converged after {} shells (tail above {:e})",
            self.max_modes, self.tail_tol
        )))
    }
}

/// Free-function form of [`GreenKernel::eval`] with the default box.
pub fn green_eval(a: &TimeSpacePoint, b: &TimeSpacePoint, sigma: SigmaParam) -> Result<f64> {
    GreenKernel::new(sigma, a.point.dim()).eval(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{HalfSpaceGrid, SampledField};
    use crate::geometry::HalfSpacePoint;

    fn sig(s: f64) -> SigmaParam {
        SigmaParam::new(s).unwrap()
    }

    #[test]
    fn kernel_identities_hold() {
        for s in [-0.5, 0.0, 1.0] {
            let r = kernel_invariants(sig(s), 1.0, &[0.1, 1.0, 3.0]).unwrap();
            assert!(r.constants < 1e-8, "{r:?}");
            assert!(r.mu_mass < 1e-8, "{r:?}");
            assert!(r.symmetry < 1e-10, "{r:?}");
            assert!(r.chapman_kolmogorov < 1e-8, "{r:?}");
            assert!(r.fv_oracle < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn drift_moment() {
        for (y, s) in [(0.3, 0.5), (2.0, 1.5)] {
            let m = crate::quad::integrate_split(
                |z| z * green_vertical(s, y, 0.0, z, sig(0.0)).unwrap(),
                0.0,
                80.0,
                &[y, 2.0 * y + 4.0 * s],
                1e-14,
                1e-12,
            )
            .unwrap();
            assert!((m - (y + s)).abs() < 1e-9);
        }
    }

    #[test]
    fn duhamel_reproduces_polynomial_solutions() {
        for s in [-0.5, 0.0, 1.0] {
            let grid = HalfSpaceGrid::one_d(32, 20.0, 8, 1.0).unwrap();
            let u0 = SampledField::initial(&grid, &[], |p| p.vertical());
            let u = homogeneous_solve(&u0, sig(s)).unwrap();
            let exact = SampledField::from_fn(&grid, |t, p| p.vertical() + (1.0 + s) * t);
            assert!(u.sub(&exact).max_abs() < 1e-8, "drift σ={s}: {}", u.sub(&exact).max_abs());
            let u0 = SampledField::initial(&grid, &[], |p| p.vertical().powi(2));
            let u = homogeneous_solve(&u0, sig(s)).unwrap();
            let exact = SampledField::from_fn(&grid, |t, p| {
                let y = p.vertical();
                y * y + 2.0 * (2.0 + s) * t * y + (2.0 + s) * (1.0 + s) * t * t
            });
            assert!(u.sub(&exact).max_abs() < 1e-7, "quadratic σ={s}: {}", u.sub(&exact).max_abs());
            let f = SampledField::from_fn(&grid, |_, _| 1.0);
            let u = duhamel_solve(&SampledField::zeros(&grid), &f, sig(s)).unwrap();
            let exact = SampledField::from_fn(&grid, |t, _| t);
            assert!(u.sub(&exact).max_abs() < 1e-9);
        }
    }

    #[test]
    fn periodic_kernel_integrates_to_one_and_is_translation_invariant() {
        let k = GreenKernel::new(sig(0.0), 2);
        let a = TimeSpacePoint { time: 1.0, point: HalfSpacePoint::new(&[0.3], 0.5).unwrap() };
        let b = TimeSpacePoint { time: 0.0, point: HalfSpacePoint::new(&[-0.4], 0.8).unwrap() };
        let g = k.eval(&a, &b).unwrap();
        let sh = |p: &TimeSpacePoint, h: f64| TimeSpacePoint {
            time: p.time,
            point: p.point.with_tangential(&[p.point.tangential()[0] + h]),
        };
        assert!((k.eval(&sh(&a, 1.7), &sh(&b, 1.7)).unwrap() / g - 1.0).abs() < 1e-10);
        // ∫ over the box of the periodic kernel is the ξ = 0 vertical mass.
        let n = 64;
        let mut tot = 0.0;
        for i in 0..n {
            let x = -8.0 + 16.0 * i as f64 / n as f64;
            let m = crate::quad::integrate(
                |z| k.eval(&a, &TimeSpacePoint { time: 0.0, point: HalfSpacePoint::new(&[x], z).unwrap() }).unwrap(),
                0.0,
                30.0,
                1e-13,
                1e-10,
            )
            .unwrap();
            tot += m * 16.0 / n as f64;
        }
        assert!((tot - 1.0).abs() < 1e-5, "{tot}");
    }

    #[test]
    fn zero_order_gaussian_bound_on_a_few_samples() {
        let fits = gaussian_verify(sig(0.0), &[DerivOrder::ZERO], 40, 7).unwrap();
        for f in &fits {
            assert_eq!(f.violations, 0, "{f:?}");
        }
        let b = fits.iter().find(|f| f.regime == Regime::Boundary).unwrap();
        assert!(b.r_squared > 0.95 && b.big_c_fit.is_finite(), "{b:?}");
    }
}
