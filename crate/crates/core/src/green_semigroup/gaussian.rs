//! Sampled verification of the Gaussian bound
//! `|∂_τ^j ∂_z^β (z^{−σ} ∂ₛ^k ∂_y^α G)| ≤ c t^{−k−j−(α+β)/2} (√t+√y)^{−α−β} |B_{√t}(z)|_σ^{−1} e^{−d²/(Ct)}`
//! for `n = 1`, `t = s − τ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kernel::{h_derivative, ln_h};
use crate::error::{LabError, Result};
use crate::geometry::{ball_measure, least_squares_slope, ref_dist, HalfSpacePoint, IntrinsicBall, C_D, C_L};
use crate::weighted_measure::SigmaParam;

/// `C = 32 c_d² c_L²`.
pub const GAUSSIAN_C: f64 = 32.0 * C_D * C_D * C_L * C_L;

/// Ceiling for the measured prefactor `c`; the bound is counted as violated
/// at a sample where the normalised kernel exceeds it.
pub const PREFACTOR_CEILING: f64 = 64.0;

/// Log-magnitudes below this are treated as underflow and excluded.
const LN_FLOOR: f64 = -700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Interior,
    Boundary,
    Mixed,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Interior, Regime::Boundary, Regime::Mixed];

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::Boundary => "boundary",
            Regime::Mixed => "mixed",
        }
    }
}

/// Derivative orders `(k, α, j, β)` on `(s, y, τ, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivOrder {
    pub k: usize,
    pub alpha: usize,
    pub j: usize,
    pub beta: usize,
}

impl DerivOrder {
    pub const ZERO: DerivOrder = DerivOrder { k: 0, alpha: 0, j: 0, beta: 0 };

    pub fn total(&self) -> usize {
        self.k + self.alpha + self.j + self.beta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub regime: Regime,
    pub order: DerivOrder,
    /// `max q e^{d²/(Ct)}` with `C = GAUSSIAN_C`.
    pub c_fit: f64,
    /// `−1/slope` of `ln q` against `d²/t`; infinite when there is no decay.
    pub big_c_fit: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub underflows: usize,
    pub violations: usize,
    /// `max/min` over samples of `|B_{√t}(y)|_σ / |B_{√t}(z)|_σ`, the factor
    /// by which the prefactor moves if the ball is centred at `y` instead.
    pub alt_prefactor_spread: f64,
}

impl GaussianFit {
    pub fn csv_header() -> &'static str {
        "regime,k,j,alpha,beta,c_fit,C_fit,r_squared,samples,violations"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6e},{:.6e},{:.6},{},{}",
            self.regime.label(),
            self.order.k,
            self.order.j,
            self.order.alpha,
            self.order.beta,
            self.c_fit,
            self.big_c_fit,
            self.r_squared,
            self.samples,
            self.violations
        )
    }
}

/// One stratified sample `(t, y, z)`.
pub fn sample(regime: Regime, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let t = 10f64.powf(rng.random_range(-3.0..1.0));
    match regime {
        Regime::Interior => {
            let y = t * 10f64.powf(rng.random_range(0.5..3.0));
            let sz = (y.sqrt() + t.sqrt() * rng.random_range(-6.0..6.0)).abs();
            (t, y, sz * sz)
        }
        Regime::Boundary => (t, t * rng.random_range(0.0..1e-3), t * rng.random_range(0.0..40.0)),
        Regime::Mixed => (t, t * 10f64.powf(rng.random_range(-3.0..0.0)), t * 10f64.powf(rng.random_range(0.5..2.0))),
    }
}

fn ball(center: f64, r: f64, sigma: SigmaParam) -> Result<f64> {
    ball_measure(&IntrinsicBall::new(HalfSpacePoint::vertical_only(center)?, r)?, sigma)
}

/// Normalised kernel `ln q` at one sample, `None` on underflow.
pub fn normalised_log(sigma: SigmaParam, order: DerivOrder, t: f64, y: f64, z: f64) -> Result<Option<f64>> {
    let s = sigma.sigma();
    let r = t.sqrt();
    let ln_d = if order.total() == 0 {
        ln_h(s, t, y, z, 0.0)
    } else {
        let v = h_derivative(s, order.k + order.j, order.alpha, order.beta, t, y, z).abs();
        if v == 0.0 || !v.is_finite() {
            return Ok(None);
        }
        v.ln()
    };
    let spatial = (order.alpha + order.beta) as f64;
    let time = (order.k + order.j) as f64;
    let lq = ln_d + ball(z, r, sigma)?.ln() + (2.0 * time + spatial) * r.ln() + spatial * (r + y.sqrt()).ln();
    Ok(if lq < LN_FLOOR { None } else { Some(lq) })
}

/// Samples every regime and fits the bound for each derivative order.
pub fn gaussian_verify(
    sigma: SigmaParam,
    orders: &[DerivOrder],
    per_regime: usize,
    seed: u64,
) -> Result<Vec<GaussianFit>> {
    if orders.iter().any(|o| o.total() > 2) {
        return Err(LabError::InvalidParameter("derivative orders limited to k+j+α+β ≤ 2".into()));
    }
    let mut fits = Vec::new();
    for (ri, regime) in Regime::ALL.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37 * (ri as u64 + 1)));
        let pts: Vec<(f64, f64, f64)> = (0..per_regime).map(|_| sample(*regime, &mut rng)).collect();
        for order in orders {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut c_fit = 0.0f64;
            let mut underflows = 0;
            let mut violations = 0;
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &(t, y, z) in &pts {
                let d = ref_dist(&HalfSpacePoint::vertical_only(y)?, &HalfSpacePoint::vertical_only(z)?);
                let x = d * d / t;
                match normalised_log(sigma, *order, t, y, z)? {
                    None => underflows += 1,
                    Some(lq) => {
                        let c = (lq + x / GAUSSIAN_C).exp();
                        if c > PREFACTOR_CEILING {
                            violations += 1;
                        }
                        c_fit = c_fit.max(c);
                        xs.push(x);
                        ys.push(lq);
                        let ratio = ball(y, t.sqrt(), sigma)? / ball(z, t.sqrt(), sigma)?;
                        lo = lo.min(ratio);
                        hi = hi.max(ratio);
                    }
                }
            }
            let (slope, _, r2) = if xs.len() >= 3 { least_squares_slope(&xs, &ys) } else { (0.0, 0.0, 0.0) };
            fits.push(GaussianFit {
                regime: *regime,
                order: *order,
                c_fit,
                big_c_fit: if slope < 0.0 { -1.0 / slope } else { f64::INFINITY },
                r_squared: r2,
                samples: xs.len(),
                underflows,
                violations,
                alt_prefactor_spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            });
        }
    }
    Ok(fits)
}
