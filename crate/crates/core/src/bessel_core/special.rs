//! Modified Bessel functions `I_ν`, `K_ν` of real order and positive argument.
//!
//! Small arguments use Temme's series for `K_μ, K_{μ+1}` with `|μ| ≤ ½`,
//! moderate arguments Steed's continued fraction, and `I_ν` follows from the
//! ratio continued fraction and the Wronskian. For `x ≥ ASYMPTOTIC_X` the
//! Hankel expansions are used. All values come back exponentially scaled
//! (`e^{-x} I_ν`, `e^{x} K_ν`) so that kernels can be assembled in log space.

use std::f64::consts::PI;

/// Switch to the Hankel expansions. At this argument the optimally truncated
/// series is accurate to about `e^{-2x}`.
pub const ASYMPTOTIC_X: f64 = 30.0;
const TEMME_X: f64 = 2.0;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 100_000;

/// Taylor coefficients of `1/Γ(1+z)` at `z = 0`.
const RGAMMA_TAYLOR: [f64; 29] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
];

/// Returns `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ))` for `|μ| ≤ ½`, where
/// `gam1 = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ)` and `gam2 = (1/Γ(1−μ) + 1/Γ(1+μ))/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let mu2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut p = 1.0;
    for k in (0..RGAMMA_TAYLOR.len()).step_by(2) {
        even += RGAMMA_TAYLOR[k] * p;
        if k + 1 < RGAMMA_TAYLOR.len() {
            odd += RGAMMA_TAYLOR[k + 1] * p;
        }
        p *= mu2;
    }
    let gam1 = -odd;
    let gam2 = even;
    (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
}

/// Exponentially scaled values: `i = e^{-x} I_ν(x)`, `k = e^{x} K_ν(x)` and
/// the derivatives `ip = e^{-x} I'_ν(x)`, `kp = e^{x} K'_ν(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledIK {
    pub i: f64,
    pub k: f64,
    pub ip: f64,
    pub kp: f64,
}

fn hankel_series(nu: f64, x: f64, alternate: bool) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf * x);
        let t = if alternate && k % 2 == 1 { -term } else { term };
        if term.abs() > last {
            break;
        }
        sum += t;
        last = term.abs();
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic_scaled(nu: f64, x: f64) -> ScaledIK {
    let i0 = hankel_series(nu, x, true) / (2.0 * PI * x).sqrt();
    let i1 = hankel_series(nu + 1.0, x, true) / (2.0 * PI * x).sqrt();
    let k0 = hankel_series(nu, x, false) * (PI / (2.0 * x)).sqrt();
    let k1 = hankel_series(nu + 1.0, x, false) * (PI / (2.0 * x)).sqrt();
    ScaledIK { i: i0, k: k0, ip: i1 + nu / x * i0, kp: -k1 + nu / x * k0 }
}

/// Scaled `I_ν`, `K_ν` and derivatives for `ν ≥ 0`, `x > 0`.
pub fn bessel_ik_scaled(nu: f64, x: f64) -> ScaledIK {
    assert!(nu >= 0.0 && x > 0.0, "bessel_ik_scaled requires nu >= 0, x > 0 (nu={nu}, x={x})");
    if x >= ASYMPTOTIC_X && x > 2.0 * nu * nu {
        return asymptotic_scaled(nu, x);
    }
    let nl = (nu + 0.5).floor() as usize;
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    // CF1 for I'_ν / I_ν.
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let ril1 = ril;
    let rip1 = ripl;
    let mut fact = nu * xi;
    for _ in (1..=nl).rev() {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    let f = ripl / ril;
    let (mut rkmu, mut rk1);
    if x < TEMME_X {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut cc = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            cc *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = cc * ff;
            sum += del;
            let del1 = cc * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        // Scale by e^{x} so both branches return e^{x} K.
        let ex = x.exp();
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..MAXIT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                break;
            }
        }
        h *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() / s;
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi;
    }
    let rkmup = xmu * xi * rkmu - rk1;
    // Wronskian I K' − I' K = −1/x, in scaled form.
    let rimu = xi / (f * rkmu - rkmup);
    let ri = rimu * ril1 / ril;
    let rip = rimu * rip1 / ril;
    for i in 1..=nl {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    let rk = rkmu;
    let rkp = nu * xi * rkmu - rk1;
    ScaledIK { i: ri, k: rk, ip: rip, kp: rkp }
}

/// `e^{-x} I_ν(x)` for real `ν` and `x ≥ 0`.
pub fn bessel_i_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return i_at_zero(nu);
    }
    if nu >= 0.0 {
        return bessel_ik_scaled(nu, x).i;
    }
    let a = -nu;
    let v = bessel_ik_scaled(a, x);
    let s = (a * PI).sin();
    if s == 0.0 {
        v.i
    } else {
        v.i + 2.0 / PI * s * v.k * (-2.0 * x).exp()
    }
}

/// `e^{x} K_ν(x)` for real `ν` and `x > 0`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    bessel_ik_scaled(nu.abs(), x).k
}

fn i_at_zero(nu: f64) -> f64 {
    if nu == 0.0 {
        1.0
    } else if nu > 0.0 || (nu.fract() == 0.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `I_ν(x)`.
pub fn bessel_i(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return i_at_zero(nu);
    }
    let s = bessel_i_scaled(nu, x);
    if x < 700.0 {
        s * x.exp()
    } else {
        (s.ln() + x).exp()
    }
}

/// `K_ν(x)`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `Γ(x)`.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_closed_forms() {
        // I_{1/2}(x) = sqrt(2/(πx)) sinh x, K_{1/2}(x) = sqrt(π/(2x)) e^{-x}
        for &x in &[0.01, 0.5, 1.9, 2.1, 7.0, 29.0, 31.0, 200.0] {
            let i = bessel_i(0.5, x);
            let k = bessel_k(0.5, x);
            let ie = (2.0 / (PI * x)).sqrt() * x.sinh();
            let ke = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(((i - ie) / ie).abs() < 1e-13, "I x={x}: {i} vs {ie}");
            assert!(((k - ke) / ke).abs() < 1e-13, "K x={x}: {k} vs {ke}");
            // I_{-1/2}(x) = sqrt(2/(πx)) cosh x
            let im = bessel_i(-0.5, x);
            let ime = (2.0 / (PI * x)).sqrt() * x.cosh();
            assert!(((im - ime) / ime).abs() < 1e-13, "I_-1/2 x={x}");
        }
    }

    #[test]
    fn temme_gammas_match_gamma_function() {
        for &mu in &[-0.5, -0.3, 0.1, 0.25, 0.5] {
            let (_, _, gp, gm) = temme_gammas(mu);
            assert!((gp - 1.0 / gamma(1.0 + mu)).abs() < 1e-14);
            assert!((gm - 1.0 / gamma(1.0 - mu)).abs() < 1e-14);
        }
    }
}
