//! Closed-form vertical kernels.
//!
//! For tangential frequency `ξ` the vertical problem
//! `∂_t u = y u'' + (1+σ) u' − |ξ|² y u` has the kernel (with respect to `dz`)
//!
//! `K_ξ(t,y,z) = A (z/y)^{σ/2} e^{−B(y+z)} I_σ(2A√(yz))`,
//! `A = |ξ|/sinh(|ξ|t)`, `B = |ξ| coth(|ξ|t)`,
//!
//! which reduces to `t^{−1}(z/y)^{σ/2} e^{−(y+z)/t} I_σ(2√(yz)/t)` at `ξ = 0`.
//! Everything is evaluated through the symmetric part
//! `H_ν = A^{1+ν} e^{−B(y+z)} Σ_k (A²yz)^k / (k! Γ(k+ν+1))`, so `K = z^σ H_σ`
//! and the boundary `y = 0` needs no special treatment.

use crate::bessel_core::{gamma, ln_gamma};

/// Above this argument the Hankel expansion replaces the power series.
const SERIES_X: f64 = 30.0;

/// Kernel coefficients `(ln A, B)`.
pub fn coefficients(t: f64, xi: f64) -> (f64, f64) {
    let x = xi.abs() * t;
    if x < 1e-8 {
        return (-t.ln(), 1.0 / t);
    }
    let xa = xi.abs();
    if x > 300.0 {
        return (xa.ln() + std::f64::consts::LN_2 - x, xa);
    }
    (xa.ln() - x.sinh().ln(), xa / x.tanh())
}

/// `e^{−x} I_ν(x)` for `ν > −1`, `x ≥ 0`: positive power series below
/// `SERIES_X`, Hankel expansion above.
pub fn bessel_i_scaled_pos(nu: f64, x: f64) -> f64 {
    (ln_series_sum(nu, 0.25 * x * x) + nu * (0.5 * x).ln() - x).exp()
}

/// `ln Σ_k w^k / (k! Γ(k+ν+1))` for `w ≥ 0` (all terms positive).
fn ln_series_sum(nu: f64, w: f64) -> f64 {
    if w > 0.25 * SERIES_X * SERIES_X {
        // I_ν(x) (x/2)^{−ν} with x = 2√w.
        let x = 2.0 * w.sqrt();
        return ln_hankel_scaled(nu, x) + x - nu * (0.5 * x).ln();
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= w / (k * (k + nu));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum.ln() - ln_gamma(nu + 1.0)
}

/// `ln(e^{−x} I_ν(x))` from the Hankel expansion.
fn ln_hankel_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * x);
        if term.abs() > last {
            break;
        }
        sum += term;
        last = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum.ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln()
}

/// `ln H_ν(t, y, z)` for frequency `ξ`.
pub fn ln_h(nu: f64, t: f64, y: f64, z: f64, xi: f64) -> f64 {
    let (ln_a, b) = coefficients(t, xi);
    let w = (2.0 * ln_a + y.ln() + z.ln()).exp();
    let w = if y == 0.0 || z == 0.0 { 0.0 } else { w };
    (1.0 + nu) * ln_a - b * (y + z) + ln_series_sum(nu, w)
}

/// `H_ν(t, y, z)` for frequency `ξ`.
pub fn h_kernel(nu: f64, t: f64, y: f64, z: f64, xi: f64) -> f64 {
    ln_h(nu, t, y, z, xi).exp()
}

/// Vertical kernel `K_ξ(t, y, z)` with respect to `dz`.
pub fn vertical_kernel(sigma: f64, t: f64, y: f64, z: f64, xi: f64) -> f64 {
    if z == 0.0 {
        return if sigma == 0.0 {
            h_kernel(sigma, t, y, 0.0, xi)
        } else if sigma > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (sigma * z.ln() + ln_h(sigma, t, y, z, xi)).exp()
}

/// Limit of `z^{−σ} K` at `y = z = 0`, `ξ = 0`: `t^{−1−σ}/Γ(1+σ)`.
pub fn diagonal_boundary_value(sigma: f64, t: f64) -> f64 {
    t.powf(-1.0 - sigma) / gamma(1.0 + sigma)
}

/// One monomial `coef · y^a z^b t^{−c} H_{σ+shift}` of a derivative of
/// `H_σ` at `ξ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coef: f64,
    ypow: i32,
    zpow: i32,
    tpow: i32,
    shift: u32,
}

fn push(out: &mut Vec<Term>, t: Term) {
    if t.coef == 0.0 {
        return;
    }
    if let Some(e) =
        out.iter_mut().find(|e| e.ypow == t.ypow && e.zpow == t.zpow && e.tpow == t.tpow && e.shift == t.shift)
    {
        e.coef += t.coef;
    } else {
        out.push(t);
    }
}

/// `∂_y H_ν = (z H_{ν+1} − H_ν)/t`; `∂_z` symmetric.
fn d_space(terms: &[Term], vertical: bool) -> Vec<Term> {
    let mut out = Vec::new();
    for t in terms {
        let p = if vertical { t.ypow } else { t.zpow };
        if p != 0 {
            let mut d = *t;
            d.coef *= p as f64;
            if vertical {
                d.ypow -= 1;
            } else {
                d.zpow -= 1;
            }
            push(&mut out, d);
        }
        push(&mut out, Term { coef: -t.coef, tpow: t.tpow + 1, ..*t });
        let mut up = Term { tpow: t.tpow + 1, shift: t.shift + 1, ..*t };
        if vertical {
            up.zpow += 1;
        } else {
            up.ypow += 1;
        }
        push(&mut out, up);
    }
    out
}

/// `∂_t` acting as `y ∂_y² + (1+σ) ∂_y` (the kernel solves the equation in `y`).
fn d_time(terms: &[Term], sigma: f64) -> Vec<Term> {
    let d1 = d_space(terms, true);
    let d2 = d_space(&d1, true);
    let mut out = Vec::new();
    for t in d2 {
        push(&mut out, Term { ypow: t.ypow + 1, ..t });
    }
    for t in d1 {
        push(&mut out, Term { coef: t.coef * (1.0 + sigma), ..t });
    }
    out
}

/// `∂_t^k ∂_y^a ∂_z^b H_σ(t, y, z)` at `ξ = 0`, from the exact recurrences.
pub fn h_derivative(sigma: f64, kt: usize, a: usize, b: usize, t: f64, y: f64, z: f64) -> f64 {
    let mut terms = vec![Term { coef: 1.0, ypow: 0, zpow: 0, tpow: 0, shift: 0 }];
    for _ in 0..kt {
        terms = d_time(&terms, sigma);
    }
    for _ in 0..a {
        terms = d_space(&terms, true);
    }
    for _ in 0..b {
        terms = d_space(&terms, false);
    }
    terms
        .iter()
        .map(|tm| {
            let ly = if tm.ypow == 0 { 0.0 } else { tm.ypow as f64 * y.ln() };
            let lz = if tm.zpow == 0 { 0.0 } else { tm.zpow as f64 * z.ln() };
            tm.coef * (ly + lz - tm.tpow as f64 * t.ln() + ln_h(sigma + tm.shift as f64, t, y, z, 0.0)).exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel_core::bessel_i;

    #[test]
    fn scaled_series_matches_reference_evaluator() {
        for &nu in &[-0.5, 0.0, 0.7, 2.0] {
            for &x in &[0.0, 0.3, 4.0, 29.0, 31.0, 80.0] {
                let a = bessel_i_scaled_pos(nu, x);
                if x == 0.0 {
                    continue;
                }
                let b = bessel_i(nu, x) * (-x).exp();
                assert!((a / b - 1.0).abs() < 1e-12, "nu={nu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kernel_matches_bessel_form() {
        let (s, t, y, z): (f64, f64, f64, f64) = (0.5, 0.7, 1.3, 2.1);
        let direct = (z / y).powf(s / 2.0) * (-(y + z) / t).exp() * bessel_i(s, 2.0 * (y * z).sqrt() / t) / t;
        assert!((vertical_kernel(s, t, y, z, 0.0) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_recurrences_match_differences() {
        let (s, t, y, z) = (0.3, 0.8, 1.1, 0.6);
        let h = 1e-4;
        let f = |t: f64, y: f64, z: f64| h_kernel(s, t, y, z, 0.0);
        let dy = (f(t, y + h, z) - f(t, y - h, z)) / (2.0 * h);
        let dz = (f(t, y, z + h) - f(t, y, z - h)) / (2.0 * h);
        let dt = (f(t + h, y, z) - f(t - h, y, z)) / (2.0 * h);
        assert!((h_derivative(s, 0, 1, 0, t, y, z) / dy - 1.0).abs() < 1e-7);
        assert!((h_derivative(s, 0, 0, 1, t, y, z) / dz - 1.0).abs() < 1e-7);
        assert!((h_derivative(s, 1, 0, 0, t, y, z) / dt - 1.0).abs() < 1e-7);
        let dyz = (f(t, y + h, z + h) - f(t, y + h, z - h) - f(t, y - h, z + h) + f(t, y - h, z - h)) / (4.0 * h * h);
        assert!((h_derivative(s, 0, 1, 1, t, y, z) / dyz - 1.0).abs() < 1e-5);
    }
}
