//! Quadrature rules: Gauss–Legendre nodes and adaptive Gauss–Kronrod (7/15).

use crate::error::{LabError, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Kronrod-15 panel for a vector-valued integrand; returns (value, error)
/// where the error is the max-norm of the Gauss/Kronrod difference.
fn gk15_vec<const M: usize, F: FnMut(f64) -> [f64; M]>(f: &mut F, a: f64, b: f64) -> ([f64; M], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; M];
    let mut rg = [0.0; M];
    for m in 0..M {
        rk[m] = WGK[7] * fc[m];
        rg[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for m in 0..M {
            rk[m] += WGK[j] * (f1[m] + f2[m]);
            if j % 2 == 1 {
                rg[m] += WG[j / 2] * (f1[m] + f2[m]);
            }
        }
    }
    let mut err = 0.0f64;
    for m in 0..M {
        rk[m] *= h;
        rg[m] *= h;
        err = err.max((rk[m] - rg[m]).abs());
    }
    (rk, err)
}

/// Adaptive Gauss–Kronrod integration of a vector-valued integrand on `[a, b]`
/// with global error control `err ≤ max(abs_tol, rel_tol·|I₀|)`, where `I₀`
/// is the first component.
pub fn integrate_vec<const M: usize, F: FnMut(f64) -> [f64; M]>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<[f64; M]> {
    if a == b {
        return Ok([0.0; M]);
    }
    let mut panels: Vec<(f64, f64, [f64; M], f64)> = Vec::with_capacity(64);
    let (v, e) = gk15_vec(&mut f, a, b);
    panels.push((a, b, v, e));
    let max_panels = 4000;
    loop {
        let mut total = [0.0; M];
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            for m in 0..M {
                total[m] += p.2[m];
            }
            err += p.3;
            if p.3 > panels[worst].3 {
                worst = i;
            }
        }
        let scale = total.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if !err.is_finite() {
            return Err(LabError::Quadrature(format!("non-finite integrand on [{a:e}, {b:e}]")));
        }
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            if err <= 1e3 * abs_tol.max(rel_tol * scale) {
                return Ok(total);
            }
            return Err(LabError::Quadrature(format!(
                "adaptive rule on [{a:e}, {b:e}] stalled at error {err:.3e} (value {scale:.3e})"
            )));
        }
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return Ok(total);
        }
        let (v1, e1) = gk15_vec(&mut f, pa, mid);
        let (v2, e2) = gk15_vec(&mut f, mid, pb);
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
}

/// Scalar adaptive Gauss–Kronrod integration on `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate_vec::<1, _>(|x| [f(x)], a, b, abs_tol, rel_tol).map(|v| v[0])
}

/// Integral over `[a, b]` split at the given interior breakpoints.
pub fn integrate_split<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|x| *x > a && *x < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut s = 0.0;
    for w in pts.windows(2) {
        s += integrate(&mut f, w[0], w[1], abs_tol, rel_tol)?;
    }
    Ok(s)
}

/// Integral over `[a, ∞)` through the map `x = a + t/(1−t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - t;
            let v = f(a + t / d) / (d * d);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Finite-difference weights (Fornberg) for derivatives `0..=m` at `z` from
/// the nodes `x`. Row `k` holds the weights of the `k`-th derivative.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Lagrange interpolation weights at `z` for the nodes `x`.
pub fn lagrange_weights(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i] *= (z - x[j]) / (x[i] - x[j]);
            }
        }
    }
    w
}

/// First index of a window of `width` consecutive nodes of a sorted array
/// that is as centred on `z` as the array ends allow.
pub fn stencil_start(nodes: &[f64], z: f64, width: usize) -> usize {
    let n = nodes.len();
    let width = width.min(n);
    let i = nodes.partition_point(|v| *v <= z).saturating_sub(1);
    let half = (width - 1) / 2;
    i.saturating_sub(half).min(n - width)
}

/// Cumulative weights on an equispaced grid of `n + 1` nodes and spacing `h`:
/// composite Boole when `n % 4 == 0`, Simpson when even, trapezoid otherwise.
pub fn uniform_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        return w;
    }
    if n.is_multiple_of(4) {
        let b = [7.0, 32.0, 12.0, 32.0, 7.0];
        for p in (0..n).step_by(4) {
            for k in 0..5 {
                w[p + k] += 2.0 * h / 45.0 * b[k];
            }
        }
    } else if n.is_multiple_of(2) {
        for p in (0..n).step_by(2) {
            w[p] += h / 3.0;
            w[p + 1] += 4.0 * h / 3.0;
            w[p + 2] += h / 3.0;
        }
    } else {
        for p in 0..n {
            w[p] += 0.5 * h;
            w[p + 1] += 0.5 * h;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        for k in 0..12 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((s - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-12, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn fornberg_second_derivative_on_uneven_nodes() {
        let x = [0.0, 0.1, 0.3, 0.6, 1.0];
        let c = fornberg(0.3, &x, 2);
        let d2: f64 = x.iter().zip(&c[2]).map(|(x, w)| w * x.powi(3)).sum();
        assert!((d2 - 6.0 * 0.3).abs() < 1e-10);
        let d0: f64 = x.iter().zip(&c[0]).map(|(x, w)| w * x.powi(3)).sum();
        assert!((d0 - 0.027).abs() < 1e-14);
    }

    #[test]
    fn boole_is_exact_for_quintics() {
        let w = uniform_weights(8, 0.25);
        let s: f64 = w.iter().enumerate().map(|(i, w)| w * (0.25 * i as f64).powi(5)).sum();
        assert!((s - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0, 1e-13, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }
}
