//! One-dimensional elliptic machinery behind the weighted energy estimate.
//!
//! After a tangential Fourier transform and the rescaling `z = |ξ'| y_n`, the
//! elliptic problem becomes `z u'' + (1+σ) u' − z u = −f̃` on `(0, ∞)`. Its
//! fundamental system is `Ψ₁ = z^{−σ/2} I_{σ/2}`, `Ψ₂ = z^{−σ/2} K_{σ/2}`.

pub mod special;

use crate::error::{LabError, Result};
use crate::quad;
use crate::weighted_measure::SigmaParam;

pub use special::{bessel_i, bessel_i_scaled, bessel_ik_scaled, bessel_k, bessel_k_scaled, gamma, ln_gamma};

/// Default truncation of the half line.
pub const Z_MAX: f64 = 40.0;

const QUAD_ABS: f64 = 1e-14;
const QUAD_REL: f64 = 1e-12;

/// Fundamental system `Ψ₁, Ψ₂` of the homogeneous Bessel-type ODE.
#[derive(Debug, Clone, Copy)]
pub struct BesselSystem {
    sigma: SigmaParam,
    nu: f64,
}

/// `ln` of the magnitude of a factor `z^{−ν} e^{±z} · scaled`, kept separate
/// so products like `Ψ₁(a) Ψ₂(b)` never overflow.
#[derive(Debug, Clone, Copy)]
struct LogVal {
    ln: f64,
}

impl BesselSystem {
    pub fn new(sigma: SigmaParam) -> Self {
        Self { sigma, nu: 0.5 * sigma.sigma() }
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    pub fn sigma(&self) -> SigmaParam {
        self.sigma
    }

    fn ln_psi1(&self, z: f64) -> LogVal {
        LogVal { ln: -self.nu * z.ln() + z + bessel_i_scaled(self.nu, z).ln() }
    }

    fn ln_psi2(&self, z: f64) -> LogVal {
        LogVal { ln: -self.nu * z.ln() - z + bessel_k_scaled(self.nu, z).ln() }
    }

    /// `Ψ₁(z) = z^{−σ/2} I_{σ/2}(z)`; the limit `1/(2^ν Γ(ν+1))` at `z = 0`.
    pub fn psi1(&self, z: f64) -> f64 {
        if z == 0.0 {
            return 1.0 / (2f64.powf(self.nu) * gamma(self.nu + 1.0));
        }
        self.ln_psi1(z).ln.exp()
    }

    pub fn psi2(&self, z: f64) -> f64 {
        self.ln_psi2(z).ln.exp()
    }

    /// `Ψ₁'(z) = z^{−ν} I_{ν+1}(z)`.
    pub fn dpsi1(&self, z: f64) -> f64 {
        (-self.nu * z.ln() + z + bessel_i_scaled(self.nu + 1.0, z).ln()).exp()
    }

    /// `Ψ₂'(z) = −z^{−ν} K_{ν+1}(z)`.
    pub fn dpsi2(&self, z: f64) -> f64 {
        -(-self.nu * z.ln() - z + bessel_k_scaled(self.nu + 1.0, z).ln()).exp()
    }

    /// `W = Ψ₁Ψ₂' − Ψ₁'Ψ₂`, assembled from scaled values so the exponentials
    /// cancel exactly. Equals `−z^{−1−σ}`.
    pub fn wronskian(&self, z: f64) -> f64 {
        let a = bessel_ik_scaled(self.nu.abs(), z);
        let i_nu = bessel_i_scaled(self.nu, z);
        let i_nu1 = bessel_i_scaled(self.nu + 1.0, z);
        let k_nu = a.k;
        let k_nu1 = bessel_k_scaled(self.nu + 1.0, z);
        -z.powf(-2.0 * self.nu) * (i_nu * k_nu1 + i_nu1 * k_nu)
    }

    /// Fundamental solution `k(z,x) = x^σ Ψ₁(min) Ψ₂(max)`.
    pub fn kernel(&self, z: f64, x: f64) -> f64 {
        let (lo, hi) = if z < x { (z, x) } else { (x, z) };
        if lo == 0.0 {
            return x.powf(self.sigma.sigma()) * self.psi1(0.0) * self.psi2(hi);
        }
        (self.sigma.sigma() * x.ln() + self.ln_psi1(lo).ln + self.ln_psi2(hi).ln).exp()
    }

    /// First-order kernel `k̄(z,x) = x^σ z^{−1−σ}` for `z > x`, else 0.
    pub fn kernel_first_order(&self, z: f64, x: f64) -> f64 {
        if z > x {
            let s = self.sigma.sigma();
            x.powf(s) * z.powf(-1.0 - s)
        } else {
            0.0
        }
    }
}

/// Solution values together with the truncation diagnostic.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Estimated contribution of `(Z_max, ∞)`, largest over the nodes.
    pub tail_estimate: f64,
}

fn integral_from_zero<F: Fn(f64) -> f64>(f: F, b: f64) -> Result<f64> {
    if b <= 0.0 {
        return Ok(0.0);
    }
    // x = b e^{-t} resolves algebraic endpoint behaviour at 0.
    quad::integrate_to_infinity(
        |t| {
            let x = b * (-t).exp();
            x * f(x)
        },
        0.0,
        QUAD_ABS,
        QUAD_REL,
    )
}

/// Solves `z u'' + (1+σ) u' − z u = −f̃` on `(0, ∞)` by the representation
/// `u(z) = ∫ k(z,x) f̃(x) dx`, truncated at `z_max`.
///
/// With `W = −z^{−1−σ}` the jump of `z^{1+σ} ∂_z k` across the diagonal is
/// `−1`, which fixes the positive sign in front of the integral.
pub fn solve_bessel_ode<F>(f_tilde: F, sigma: SigmaParam, nodes: &[f64], z_max: f64) -> Result<OdeSolution>
where
    F: Fn(f64) -> f64 + Sync,
{
    let sys = BesselSystem::new(sigma);
    let s = sigma.sigma();
    let rows = crate::par::map(nodes, |&z| -> Result<(f64, f64, f64)> {
        if !(z > 0.0) {
            return Err(LabError::InvalidParameter(format!("ODE node must be positive, got {z}")));
        }
        let zc = z.min(z_max);
        // A(z) = ∫_0^z x^σ Ψ₁ f̃, B(z) = ∫_z^{Z} x^σ Ψ₂ f̃, both rescaled by the
        // exponential weights of Ψ₂(z), Ψ₁(z) to stay finite.
        let ln2 = sys.ln_psi2(z).ln;
        let ln1 = sys.ln_psi1(z).ln;
        let a = integral_from_zero(|x| (s * x.ln() + sys.ln_psi1(x).ln + ln2).exp() * f_tilde(x), zc)?;
        let b = if zc < z_max {
            quad::integrate(
                |x| (s * x.ln() + sys.ln_psi2(x).ln + ln1).exp() * f_tilde(x),
                zc,
                z_max,
                QUAD_ABS,
                QUAD_REL,
            )?
        } else {
            0.0
        };
        let tail = quad::integrate(
            |x| (s * x.ln() + sys.ln_psi2(x).ln + ln1).exp() * f_tilde(x),
            z_max.max(zc),
            2.0 * z_max.max(zc),
            QUAD_ABS,
            1e-6,
        )?;
        let u = a + b;
        let du = a * sys.dpsi2(z) / sys.psi2(z) + b * sys.dpsi1(z) / sys.psi1(z);
        Ok((u, du, tail.abs()))
    });
    let mut out = OdeSolution { z: nodes.to_vec(), u: Vec::new(), du: Vec::new(), tail_estimate: 0.0 };
    for r in rows {
        let (u, du, t) = r?;
        out.u.push(u);
        out.du.push(du);
        out.tail_estimate = out.tail_estimate.max(t);
    }
    let scale = out.u.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    if out.tail_estimate > 1e-6 * scale.max(1e-12) {
        return Err(LabError::Quadrature(format!(
            "source does not decay: tail beyond Z_max={z_max} contributes {:.3e} against solution scale {scale:.3e}",
            out.tail_estimate
        )));
    }
    Ok(out)
}

/// Residual `z u'' + (1+σ) u' − z u + f̃` of a solution evaluator, using
/// fourth-order central differences.
pub fn bessel_ode_residual<U, F>(u: U, f_tilde: F, sigma: SigmaParam, z: f64) -> f64
where
    U: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    let h = (0.01f64).min(z / 4.0);
    let (um2, um1, u0, up1, up2) = (u(z - 2.0 * h), u(z - h), u(z), u(z + h), u(z + 2.0 * h));
    let d1 = (um2 - 8.0 * um1 + 8.0 * up1 - up2) / (12.0 * h);
    let d2 = (-um2 + 16.0 * um1 - 30.0 * u0 + 16.0 * up1 - up2) / (12.0 * h * h);
    z * d2 + (1.0 + sigma.sigma()) * d1 - z * u0 + f_tilde(z)
}

/// Evaluation mode for the first-order kernel norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelNormMode {
    /// `sup_z ∫ (z/x)^δ k̄(z,x) dx`, finite for `δ < 1+σ`.
    SupRow,
    /// `sup_x ∫ (z/x)^δ k̄(z,x) dz`, finite for `δ < σ`.
    SupCol,
}

/// Numerical value of the first-order kernel norm for the given weight shift.
/// The closed forms are `1/(1+σ−δ)` for rows and `−1/(δ−σ)` for columns.
pub fn first_order_kernel_norms(sigma: SigmaParam, delta: f64, mode: KernelNormMode) -> Result<f64> {
    let s = sigma.sigma();
    let sweep = [1e-3, 0.1, 1.0, 10.0, 1e3];
    let mut best = 0.0f64;
    match mode {
        KernelNormMode::SupRow => {
            if delta >= 1.0 + s {
                return Err(LabError::InvalidParameter(format!(
                    "row norm needs delta < 1 + sigma = {}, got {delta}",
                    1.0 + s
                )));
            }
            for &z in &sweep {
                let v = integral_from_zero(|x| (z / x).powf(delta) * x.powf(s) * z.powf(-1.0 - s), z)?;
                best = best.max(v);
            }
        }
        KernelNormMode::SupCol => {
            if delta >= s {
                return Err(LabError::InvalidParameter(format!("column norm needs delta < sigma = {s}, got {delta}")));
            }
            for &x in &sweep {
                // z = x e^{t} on (x, ∞).
                let v = quad::integrate_to_infinity(
                    |t| {
                        let z = x * t.exp();
                        z * (z / x).powf(delta) * x.powf(s) * z.powf(-1.0 - s)
                    },
                    0.0,
                    QUAD_ABS,
                    QUAD_REL,
                )?;
                best = best.max(v);
            }
        }
    }
    Ok(best)
}

/// Solves `z w' + (1+σ) w = f̄` with `z^{1+σ} w → 0` at the origin:
/// `w(z) = ∫ k̄(z,x) f̄(x) dx`.
pub fn solve_first_order<F>(f_bar: F, sigma: SigmaParam, nodes: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    let s = sigma.sigma();
    crate::par::map(nodes, |&z| {
        if !(z > 0.0) {
            return Err(LabError::InvalidParameter(format!("node must be positive, got {z}")));
        }
        // w(z) = ∫_0^∞ e^{−(1+σ)t} f̄(z e^{−t}) dt
        quad::integrate_to_infinity(|t| (-(1.0 + s) * t).exp() * f_bar(z * (-t).exp()), 0.0, QUAD_ABS, QUAD_REL)
    })
    .into_iter()
    .collect()
}

/// Sampled Schur integrals of `z^l k(z,x) x^{−σ}` against `μ_σ`.
#[derive(Debug, Clone)]
pub struct SchurReport {
    pub l: u32,
    pub sup_over_z: f64,
    pub sup_over_x: f64,
    /// `(point, row integral, column integral)` along the log-spaced sweep.
    pub profile: Vec<(f64, f64, f64)>,
    /// Whether both profiles stop growing at each end of the sweep (the
    /// outermost decade rises by less than 10%).
    pub bounded: bool,
}

/// Row integral `∫ z^l |k(z,x)| dx` (the `x^{−σ}` cancels `μ_σ`) and column
/// integral `∫ z^{l+σ} |k(z,x)| x^{−σ} dz`, swept over `10^{-4} … 40`.
pub fn schur_integrals(sigma: SigmaParam, l: u32) -> Result<SchurReport> {
    if l > 1 {
        return Err(LabError::InvalidParameter(format!("Schur check is defined for l in {{0,1}}, got {l}")));
    }
    let sys = BesselSystem::new(sigma);
    let s = sigma.sigma();
    let lf = l as f64;
    let pts: Vec<f64> = (0..=28).map(|k| 1e-4 * 4e5f64.powf(k as f64 / 28.0)).collect();
    let rows = crate::par::map(&pts, |&p| -> Result<(f64, f64, f64)> {
        let row = integral_from_zero(|x| p.powf(lf) * sys.kernel(p, x), p)?
            + quad::integrate_to_infinity(|x| p.powf(lf) * sys.kernel(p, x), p, QUAD_ABS, 1e-10)?;
        let col_f = |z: f64| z.powf(lf + s) * sys.kernel(z, p) * p.powf(-s);
        let col = integral_from_zero(col_f, p)? + quad::integrate_to_infinity(col_f, p, QUAD_ABS, 1e-10)?;
        Ok((p, row, col))
    });
    let profile: Vec<(f64, f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let sup_over_z = profile.iter().map(|r| r.1).fold(0.0, f64::max);
    let sup_over_x = profile.iter().map(|r| r.2).fold(0.0, f64::max);
    // Five points span one decade; neither end may keep growing.
    let settles = |edge: f64, inner: f64| edge <= 1.1 * inner;
    let last = profile.len() - 1;
    let bounded = [(0, 5), (last, last - 5)]
        .iter()
        .all(|&(e, i)| settles(profile[e].1, profile[i].1) && settles(profile[e].2, profile[i].2));
    Ok(SchurReport { l, sup_over_z, sup_over_x, profile, bounded })
}

/// Measured constants of the weighted bounds for one source:
/// `(‖u‖ + ‖z u‖)/‖f̃‖`, `‖u'‖/‖f̃‖` and `‖z u''‖/‖f̃‖`, all in `L²_σ(0, Z)`.
#[derive(Debug, Clone, Copy)]
pub struct OdeBoundConstants {
    pub zeroth: f64,
    pub first: f64,
    pub second: f64,
}

/// Geometric sub-panels between zero and the first graded node.
const GEOMETRIC_LEVELS: usize = 40;

/// Evaluates the weighted `L²_σ` bound constants on `(0, z_max)` using a
/// graded Gauss–Legendre grid.
pub fn ode_bound_constants<F>(f_tilde: F, sigma: SigmaParam, z_max: f64, panels: usize) -> Result<OdeBoundConstants>
where
    F: Fn(f64) -> f64 + Sync,
{
    let s = sigma.sigma();
    let (gx, gw) = quad::gauss_legendre(8);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    // Quadratic grading, with the first panel split geometrically towards
    // zero so the algebraic weight `z^σ` is integrated to full accuracy.
    let first = z_max / (panels as f64).powi(2);
    let mut edges: Vec<f64> = (0..GEOMETRIC_LEVELS).rev().map(|j| first * 0.5f64.powi(j as i32 + 1)).collect();
    edges.insert(0, 0.0);
    edges.extend((1..=panels).map(|p| z_max * (p as f64 / panels as f64).powi(2)));
    for ab in edges.windows(2) {
        let (a, b) = (ab[0], ab[1]);
        if a == 0.0 {
            // The solution is smooth at zero; one node carries the exact mass of z^σ.
            nodes.push(0.5 * b);
            weights.push(b.powf(1.0 + s) / (1.0 + s));
            continue;
        }
        for (x, w) in gx.iter().zip(&gw) {
            let z = 0.5 * (a + b) + 0.5 * (b - a) * x;
            nodes.push(z);
            weights.push(0.5 * (b - a) * w * z.powf(s));
        }
    }
    let sol = solve_bessel_ode(&f_tilde, sigma, &nodes, z_max)?;
    let (mut nf, mut nu, mut nzu, mut ndu, mut nzdd) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..nodes.len() {
        let z = nodes[i];
        let f = f_tilde(z);
        let (u, du) = (sol.u[i], sol.du[i]);
        let zdd = -f - (1.0 + s) * du + z * u;
        let w = weights[i];
        nf += w * f * f;
        nu += w * u * u;
        nzu += w * z * z * u * u;
        ndu += w * du * du;
        nzdd += w * zdd * zdd;
    }
    let nf = nf.sqrt();
    if nf == 0.0 {
        return Err(LabError::InvalidParameter("bound constants need a nonzero source".into()));
    }
    Ok(OdeBoundConstants { zeroth: (nu.sqrt() + nzu.sqrt()) / nf, first: ndu.sqrt() / nf, second: nzdd.sqrt() / nf })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(s: f64) -> SigmaParam {
        SigmaParam::new(s).unwrap()
    }

    #[test]
    fn wronskian_magnitude() {
        for &s in &[-0.5, 0.0, 0.5, 1.0, 2.0] {
            let sys = BesselSystem::new(sp(s));
            for k in 0..=20 {
                let z = 0.1 * 100f64.powf(k as f64 / 20.0);
                let w = sys.wronskian(z);
                let exact = z.powf(-1.0 - s);
                assert!(((w.abs() - exact) / exact).abs() < 1e-10, "s={s} z={z}");
                assert!(w < 0.0);
            }
        }
    }

    #[test]
    fn wronskian_from_derivatives_matches() {
        let sys = BesselSystem::new(sp(0.5));
        for &z in &[0.3, 2.5, 9.0] {
            let w = sys.psi1(z) * sys.dpsi2(z) - sys.dpsi1(z) * sys.psi2(z);
            assert!((w / sys.wronskian(z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_symmetry_structure() {
        for &s in &[-0.5, 0.0, 1.5] {
            let sys = BesselSystem::new(sp(s));
            for &(z, x) in &[(0.2, 3.0), (5.0, 1.0), (12.0, 30.0)] {
                let a = sys.kernel(z, x) * x.powf(-s);
                let b = sys.kernel(x, z) * z.powf(-s);
                assert!((a / b - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn first_order_closed_form_source() {
        let s = sp(0.7);
        let c = 2.5;
        let w = solve_first_order(|x| if x < 1.0 { 1.7 * c } else { 0.0 }, s, &[0.2, 0.5, 0.9]).unwrap();
        for v in w {
            assert!((v - c).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_norm_rejects_divergent_shift() {
        assert!(first_order_kernel_norms(sp(0.0), 1.0, KernelNormMode::SupRow).is_err());
        assert!(first_order_kernel_norms(sp(0.0), 0.0, KernelNormMode::SupCol).is_err());
    }
}
