//! Structural identities of the vertical kernel and of solved fields.

use super::fv::fv_evolve;
use super::kernel::{ln_h, vertical_kernel};
use crate::error::{LabError, Result};
use crate::field::SampledField;
use crate::quad::{integrate, integrate_split};
use crate::weighted_measure::SigmaParam;

const ABS: f64 = 1e-14;
const REL: f64 = 1e-11;

/// Largest relative defects of the kernel identities at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInvariants {
    pub sigma: f64,
    /// `|∫ G(t,y,z) dz − 1|`.
    pub constants: f64,
    /// `|∫ y^σ G(t,y,z) dy / z^σ − 1|`.
    pub mu_mass: f64,
    /// `|G(t,y,z) y^σ / (G(t,z,y) z^σ) − 1|`.
    pub symmetry: f64,
    /// `|∫ G(t₁,y,w) G(t₂,w,z) dw / G(t₁+t₂,y,z) − 1|`.
    pub chapman_kolmogorov: f64,
    /// Pointwise relative gap between the closed form and the finite-volume oracle.
    pub fv_oracle: f64,
}

/// Breakpoints `(√c ± k√t)²` around the diagonal.
fn breaks(c: f64, t: f64) -> Vec<f64> {
    let mut b: Vec<f64> =
        (-8..=8).map(|k| c.sqrt() + k as f64 * 0.5 * t.sqrt()).filter(|v| *v > 0.0).map(|v| v * v).collect();
    b.dedup();
    b
}

fn upper(c: f64, t: f64) -> f64 {
    (c.sqrt() + 12.0 * t.sqrt()).powi(2)
}

/// `∫_0^∞ z^σ g(z) dz` through `v = z^{1+σ}/(1+σ)` on the first segment.
fn integrate_weighted<F: Fn(f64) -> f64>(g: F, sigma: f64, center: f64, t: f64) -> Result<f64> {
    let b = breaks(center, t);
    let first = b.first().copied().unwrap_or(upper(center, t)).min(upper(center, t));
    let p = 1.0 + sigma;
    let head = integrate(|v| g((p * v).powf(1.0 / p)), 0.0, first.powf(p) / p, ABS, REL)?;
    let rest = integrate_split(|z| z.powf(sigma) * g(z), first, upper(center, t), &b, ABS, REL)?;
    Ok(head + rest)
}

/// Evaluates all kernel identities at `t` for the given heights.
pub fn kernel_invariants(sigma: SigmaParam, t: f64, heights: &[f64]) -> Result<KernelInvariants> {
    let s = sigma.sigma();
    let mut out = KernelInvariants {
        sigma: s,
        constants: 0.0,
        mu_mass: 0.0,
        symmetry: 0.0,
        chapman_kolmogorov: 0.0,
        fv_oracle: 0.0,
    };
    for &y in heights {
        let c = integrate_weighted(|z| ln_h(s, t, y, z, 0.0).exp(), s, y, t)?;
        out.constants = out.constants.max((c - 1.0).abs());
        // Independent route: y = u², plain adaptive rule.
        let z = y;
        let m = integrate_split(
            |u| {
                let yy = u * u;
                2.0 * u * yy.powf(s) * vertical_kernel(s, t, yy, z, 0.0)
            },
            0.0,
            upper(z, t).sqrt(),
            &breaks(z, t).iter().map(|v| v.sqrt()).collect::<Vec<_>>(),
            ABS,
            REL,
        )?;
        out.mu_mass = out.mu_mass.max((m / z.powf(s) - 1.0).abs());
        for &w in heights {
            let a = vertical_kernel(s, t, y, w, 0.0) * y.powf(s);
            let b = vertical_kernel(s, t, w, y, 0.0) * w.powf(s);
            out.symmetry = out.symmetry.max((a / b - 1.0).abs());
            let (t1, t2) = (0.4 * t, 0.6 * t);
            let direct = vertical_kernel(s, t, y, w, 0.0);
            let mid = 0.5 * (y + w);
            let comp =
                integrate_weighted(|v| ln_h(s, t1, y, v, 0.0).exp() * vertical_kernel(s, t2, v, w, 0.0), s, mid, t)?;
            out.chapman_kolmogorov = out.chapman_kolmogorov.max((comp / direct - 1.0).abs());
        }
    }
    out.fv_oracle = fv_oracle_gap(sigma, 0.5, 0.5, 2.0)?;
    Ok(out)
}

/// Evolves `G(t₀, ·, z₀)` for `t₁` with the finite-volume scheme and compares
/// with `G(t₀+t₁, ·, z₀)` on `y ∈ [0.5, 10]`.
pub fn fv_oracle_gap(sigma: SigmaParam, t0: f64, t1: f64, z0: f64) -> Result<f64> {
    let s = sigma.sigma();
    let sol = fv_evolve(s, 0.0, 30.0, 6000, |y| vertical_kernel(s, t0, y, z0, 0.0), t1, 5e-4)?;
    let mut gap = 0.0f64;
    for i in 0..=40 {
        let y = 0.5 + 9.5 * i as f64 / 40.0;
        let exact = vertical_kernel(s, t0 + t1, y, z0, 0.0);
        gap = gap.max((sol.eval(y) / exact - 1.0).abs());
    }
    Ok(gap)
}

/// `⟨u₁(s_a), u₂(s_b)⟩_σ` vs `⟨u₁(s_b), u₂(s_a)⟩_σ` for two homogeneous solutions
/// on the same grid; returns the relative mismatch.
pub fn duality_check(u1: &SampledField, u2: &SampledField, sigma: SigmaParam, ka: usize, kb: usize) -> Result<f64> {
    if u1.grid() != u2.grid() {
        return Err(LabError::InvalidParameter("duality pairing needs a common grid".into()));
    }
    let grid = u1.grid();
    let w = grid.vertical_weights(sigma.sigma());
    let cell = grid.tangential_cell();
    let nv1 = w.len();
    let pair = |a: usize, b: usize| -> f64 {
        let (x, y) = (u1.slice(a), u2.slice(b));
        let mut s = 0.0;
        for t in 0..grid.n_tang() {
            for j in 0..nv1 {
                s += w[j] * x[t * nv1 + j] * y[t * nv1 + j];
            }
        }
        s * cell
    };
    let (l, r) = (pair(ka, kb), pair(kb, ka));
    Ok((l - r).abs() / l.abs().max(r.abs()).max(1e-300))
}
