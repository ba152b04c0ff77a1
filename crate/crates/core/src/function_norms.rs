//! Sampled evaluators of the solution space `X(p)` and the source space `Y(p)`.
//!
//! Suprema over intrinsic parabolic cylinders `Q_r(z) = (r²/2, r²) × B_r(z)`
//! are replaced by maxima over a seeded dyadic family of cylinders; cylinder
//! `L^p` averages use Gauss rules in time and the intrinsic ball rule in space.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::geometry::{CylinderKind, HalfSpacePoint, IntrinsicBall, ParabolicCylinder};
use crate::par;
use crate::pme_solvers::nonlinearity_eval;
use crate::quad::gauss_legendre_on;
use crate::weighted_measure::{ball_rule, SigmaParam};

/// Balls must stay below this fraction of `Y_max`.
const TOP_FRACTION: f64 = 0.9;
const TIME_POINTS: usize = 4;
const BALL_ORDER: usize = 6;

/// Seeded dyadic family of cylinders inside a grid's time-space domain.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSampler {
    pub horizon: f64,
    pub scales: Vec<f64>,
    pub cylinders: Vec<ParabolicCylinder>,
    pub seed: u64,
    dim: usize,
    y_max: f64,
    per_regime: usize,
}

impl CylinderSampler {
    /// Scales `2^{−k}√S` for `k = 0..=levels`; per scale `per_regime` centres
    /// with `z_n < r²` (boundary) and as many with `z_n > r²` (interior).
    pub fn new(grid: &HalfSpaceGrid, levels: usize, per_regime: usize, seed: u64) -> Result<Self> {
        Self::build(grid.dim(), grid.horizon(), grid.y_max(), grid.box_len(), levels, per_regime, seed)
    }

    pub fn build(
        dim: usize,
        horizon: f64,
        y_max: f64,
        box_len: f64,
        levels: usize,
        per_regime: usize,
        seed: u64,
    ) -> Result<Self> {
        if per_regime == 0 {
            return Err(LabError::InvalidParameter("cylinder sampler is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scales: Vec<f64> = (0..=levels).map(|k| horizon.sqrt() * 0.5f64.powi(k as i32)).collect();
        let top = TOP_FRACTION * y_max;
        let mut cylinders = Vec::new();
        for &r in &scales {
            let r2 = r * r;
            for regime in 0..2 {
                let mut placed = 0;
                let mut attempts = 0;
                while placed < per_regime {
                    attempts += 1;
                    if attempts > 200 * per_regime {
                        return Err(LabError::OutsideGrid(format!(
                            "no room for cylinders of scale {r:.3e} below height {top:.3}"
                        )));
                    }
                    let zn = if regime == 0 {
                        r2 * rng.random::<f64>()
                    } else {
                        r2 * (top / r2).max(1.0).powf(rng.random::<f64>())
                    };
                    let tang: Vec<f64> = (0..dim - 1).map(|_| box_len * (rng.random::<f64>() - 0.5)).collect();
                    let c = HalfSpacePoint::new(&tang, zn)?;
                    let ball = IntrinsicBall::new(c, r)?;
                    if ball.vertical_extent().1 > top {
                        continue;
                    }
                    cylinders.push(ParabolicCylinder::new(c, r, CylinderKind::Standard)?);
                    placed += 1;
                }
            }
        }
        Ok(Self { horizon, scales, cylinders, seed, dim, y_max, per_regime })
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "dyadic-n{}-S{}-Y{}-K{}-m{}-seed{}",
            self.dim,
            self.horizon,
            self.y_max,
            self.scales.len() - 1,
            self.per_regime,
            self.seed
        )
    }

    /// Image of the family under `(s, y) ↦ (s/λ, y/λ)`; scales become `r/√λ`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let cylinders = self
            .cylinders
            .iter()
            .map(|c| {
                let p = HalfSpacePoint::new(
                    &c.center.tangential().iter().map(|v| v / lambda).collect::<Vec<_>>(),
                    c.center.vertical() / lambda,
                )
                .unwrap();
                ParabolicCylinder { center: p, scale: c.scale / lambda.sqrt(), kind: c.kind }
            })
            .collect();
        Self {
            horizon: self.horizon / lambda,
            scales: self.scales.iter().map(|r| r / lambda.sqrt()).collect(),
            cylinders,
            seed: self.seed,
            dim: self.dim,
            y_max: self.y_max / lambda,
            per_regime: self.per_regime,
        }
    }
}

/// Multi-indices of order `m` in `dim` variables with their multinomial multiplicity.
fn multi_indices(dim: usize, m: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut cur = vec![0; dim];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            let fact = |k: usize| (1..=k).product::<usize>() as f64;
            let total: usize = cur.iter().sum();
            let mult = fact(total) / cur.iter().map(|&k| fact(k)).product::<f64>();
            out.push((cur.clone(), mult));
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    rec(0, m, &mut cur, &mut out);
    out
}

/// All derivatives `∂_s^k ∂_y^α u` with `|α| = m`, paired with their multiplicity.
fn tensor(u: &SampledField, k: usize, m: usize) -> Vec<(SampledField, f64)> {
    multi_indices(u.grid().dim(), m).into_iter().map(|(a, w)| (u.deriv(k, &a), w)).collect()
}

/// `(|Q|^{-1} ∫_Q g^p)^{1/p}` for every cylinder, where `g` is the Frobenius
/// norm of `components` optionally multiplied by `y_n`.
fn cylinder_means(
    components: &[(SampledField, f64)],
    sampler: &CylinderSampler,
    p: f64,
    times_height: bool,
) -> Result<Vec<f64>> {
    let grid = components[0].0.grid().clone();
    check_sampler(&grid, sampler)?;
    par::map(&sampler.cylinders, |cyl| -> Result<f64> {
        let (a, b) = cyl.time_window();
        let (ts, tw) = gauss_legendre_on(TIME_POINTS, a, b);
        let pts = ball_rule(&cyl.ball(), 0.0, BALL_ORDER);
        let mut acc = 0.0;
        let mut mass = 0.0;
        let mut peak = 0.0f64;
        for (s, ws) in ts.iter().zip(&tw) {
            for (y, wy) in &pts {
                let st = grid.point_stencil(*s, y)?;
                let mut g2 = 0.0;
                for (f, m) in components {
                    g2 += m * f.apply(&st).powi(2);
                }
                let mut g = g2.sqrt();
                if times_height {
                    g *= y.vertical();
                }
                let w = ws * wy;
                mass += w;
                if p.is_finite() {
                    acc += w * g.powf(p);
                } else {
                    peak = peak.max(g);
                }
            }
        }
        Ok(if p.is_finite() { (acc / mass).powf(1.0 / p) } else { peak })
    })
    .into_iter()
    .collect()
}

fn check_sampler(grid: &Arc<HalfSpaceGrid>, sampler: &CylinderSampler) -> Result<()> {
    if sampler.is_empty() {
        return Err(LabError::InvalidParameter("cylinder sampler is empty".into()));
    }
    if sampler.dim != grid.dim()
        || sampler.horizon > grid.horizon() * (1.0 + 1e-12)
        || sampler.y_max > grid.y_max() * (1.0 + 1e-12)
    {
        return Err(LabError::OutsideGrid(format!(
            "sampler {} does not fit grid {}",
            sampler.fingerprint(),
            grid.fingerprint()
        )));
    }
    Ok(())
}

/// Maximum over grid nodes of `weight(s, y) · |components|`.
fn node_sup<W: Fn(f64, f64) -> f64 + Sync>(components: &[(SampledField, f64)], weight: W) -> f64 {
    let grid = components[0].0.grid();
    let nv1 = grid.nv() + 1;
    par::max_range(grid.ns() + 1, |k| {
        let s = grid.time(k);
        let mut m = 0.0f64;
        for t in 0..grid.n_tang() {
            for j in 0..nv1 {
                let g2: f64 = components.iter().map(|(f, w)| w * f.at(k, t, j).powi(2)).sum();
                m = m.max(weight(s, grid.vertical_nodes()[j]) * g2.sqrt());
            }
        }
        m
    })
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(LabError::InvalidParameter(format!("norm exponent must be ≥ 1, got {p}")));
    }
    Ok(())
}

/// `‖∇u‖_∞ + sup_Q (r(r+√z_n) ⨍‖D²u‖ + r² ⨍‖y_n D³u‖)` with `L^p` averages.
pub fn x1_norm(u: &SampledField, p: f64, sampler: &CylinderSampler) -> Result<f64> {
    check_p(p)?;
    let grad = tensor(u, 0, 1);
    let d2 = tensor(u, 0, 2);
    let d3 = tensor(u, 0, 3);
    let m2 = cylinder_means(&d2, sampler, p, false)?;
    let m3 = cylinder_means(&d3, sampler, p, true)?;
    let cyl = sampler
        .cylinders
        .iter()
        .zip(m2.iter().zip(&m3))
        .map(|(c, (a, b))| {
            let r = c.scale;
            r * (r + c.center.vertical().sqrt()) * a + r * r * b
        })
        .fold(0.0, f64::max);
    Ok(node_sup(&grad, |_, _| 1.0) + cyl)
}

/// `‖√s √y_n D²u‖_∞ + sup_Q r² ⨍‖∇∂ₛu‖`.
pub fn x2_norm(u: &SampledField, p: f64, sampler: &CylinderSampler) -> Result<f64> {
    check_p(p)?;
    let d2 = tensor(u, 0, 2);
    let dt = tensor(u, 1, 1);
    let m = cylinder_means(&dt, sampler, p, false)?;
    let cyl = sampler.cylinders.iter().zip(&m).map(|(c, a)| c.scale * c.scale * a).fold(0.0, f64::max);
    Ok(node_sup(&d2, |s, y| (s * y).sqrt()) + cyl)
}

/// `(sup_Q r^θ ⨍‖∇f‖, sup_Q r^{2−ε₁}(r+√z_n)^{−ε₂} ⨍|f|)` with `θ = 2`, `ε₁ = ε₂ = 1`.
pub fn y_norm(f: &SampledField, p: f64, sampler: &CylinderSampler) -> Result<(f64, f64)> {
    y_norm_with(f, p, sampler, 2.0, 1.0, 1.0)
}

/// [`y_norm`] with general exponents `θ, ε₁, ε₂`.
pub fn y_norm_with(
    f: &SampledField,
    p: f64,
    sampler: &CylinderSampler,
    theta: f64,
    e1: f64,
    e2: f64,
) -> Result<(f64, f64)> {
    check_p(p)?;
    let grad = tensor(f, 0, 1);
    let mg = cylinder_means(&grad, sampler, p, false)?;
    let mf = cylinder_means(&[(f.clone(), 1.0)], sampler, p, false)?;
    let mut on = 0.0f64;
    let mut off = 0.0f64;
    for (c, (g, v)) in sampler.cylinders.iter().zip(mg.iter().zip(&mf)) {
        let r = c.scale;
        on = on.max(r.powf(theta) * g);
        off = off.max(r.powf(2.0 - e1) * (r + c.center.vertical().sqrt()).powf(-e2) * v);
    }
    Ok((on, off))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub x1: f64,
    pub x2: f64,
    pub y_on: f64,
    pub y_off: f64,
    pub p: f64,
    pub sampler: String,
}

impl NormReport {
    pub fn x(&self) -> f64 {
        self.x1 + self.x2
    }

    pub fn y(&self) -> f64 {
        self.y_on.max(self.y_off)
    }

    pub fn csv_header() -> &'static str {
        "norm_name,p,value,sampler_fingerprint"
    }

    pub fn csv_rows(&self) -> Vec<String> {
        [("x1", self.x1), ("x2", self.x2), ("y_on", self.y_on), ("y_off", self.y_off)]
            .iter()
            .map(|(n, v)| format!("{n},{},{v:.10e},{}", self.p, self.sampler))
            .collect()
    }
}

/// Both norms of a solution `u` and its source `f`.
pub fn norm_report(u: &SampledField, f: &SampledField, p: f64, sampler: &CylinderSampler) -> Result<NormReport> {
    let (y_on, y_off) = y_norm(f, p, sampler)?;
    Ok(NormReport {
        x1: x1_norm(u, p, sampler)?,
        x2: x2_norm(u, p, sampler)?,
        y_on,
        y_off,
        p,
        sampler: sampler.fingerprint(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityReport {
    pub x1: f64,
    pub y: f64,
    pub radius: f64,
    /// `‖f[u]‖_Y (1−R)³ / ‖u‖²_{X⁽¹⁾}`.
    pub ratio: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(LabError::InvalidParameter(format!("ball radius R must lie in [0, 1), got {r}")));
    }
    Ok(())
}

/// Measures the quadratic bound `‖f[u]‖_Y ≤ c (1−R)^{−3} ‖u‖²_{X⁽¹⁾}`.
pub fn nonlinearity_bound_check(
    u: &SampledField,
    radius: f64,
    p: f64,
    sampler: &CylinderSampler,
    sigma: SigmaParam,
) -> Result<NonlinearityReport> {
    check_radius(radius)?;
    let f = nonlinearity_eval(u, sigma, 1.0 - radius)?;
    let x1 = x1_norm(u, p, sampler)?;
    let (on, off) = y_norm(&f, p, sampler)?;
    let y = on.max(off);
    let ratio = if x1 > 0.0 { y * (1.0 - radius).powi(3) / (x1 * x1) } else { 0.0 };
    Ok(NonlinearityReport { x1, y, radius, ratio })
}

/// Measures `‖f[u₁] − f[u₂]‖_Y ≤ c R (1−R)^{−6} ‖u₁ − u₂‖_{X⁽¹⁾}`; returns `c`.
pub fn nonlinearity_difference_check(
    u1: &SampledField,
    u2: &SampledField,
    radius: f64,
    p: f64,
    sampler: &CylinderSampler,
    sigma: SigmaParam,
) -> Result<f64> {
    check_radius(radius)?;
    let f1 = nonlinearity_eval(u1, sigma, 1.0 - radius)?;
    let f2 = nonlinearity_eval(u2, sigma, 1.0 - radius)?;
    let (on, off) = y_norm(&f1.sub(&f2), p, sampler)?;
    let x = x1_norm(&u1.sub(u2), p, sampler)?;
    if x == 0.0 || radius == 0.0 {
        return Ok(0.0);
    }
    Ok(on.max(off) * (1.0 - radius).powi(6) / (radius * x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearEstimateReport {
    pub x: f64,
    pub grad_u0: f64,
    pub y: f64,
    /// `‖u‖_X / (‖∇u₀‖_∞ + ‖f‖_Y)`.
    pub ratio: f64,
}

/// `p > max{2(n+1), (1+σ)^{−1}}`.
pub fn admissible_p(dim: usize, sigma: SigmaParam, p: f64) -> bool {
    p > (2.0 * (dim as f64 + 1.0)).max(1.0 / (1.0 + sigma.sigma()))
}

/// Solves the linear problem and compares `‖u‖_X` with `‖∇u₀‖_∞ + ‖f‖_Y`.
pub fn linear_estimate_check(
    u0: &SampledField,
    f: &SampledField,
    p: f64,
    sampler: &CylinderSampler,
    sigma: SigmaParam,
) -> Result<LinearEstimateReport> {
    let dim = u0.grid().dim();
    if !admissible_p(dim, sigma, p) {
        return Err(LabError::InvalidParameter(format!(
            "p = {p} outside the admissible range p > max(2(n+1), 1/(1+σ)) = {}",
            (2.0 * (dim as f64 + 1.0)).max(1.0 / (1.0 + sigma.sigma()))
        )));
    }
    let u = crate::green_semigroup::duhamel_solve(u0, f, sigma)?;
    let x = x1_norm(&u, p, sampler)? + x2_norm(&u, p, sampler)?;
    let g0 = node_sup(&tensor(&u0.frozen_at(0), 0, 1), |_, _| 1.0);
    let (on, off) = y_norm(f, p, sampler)?;
    let y = on.max(off);
    let rhs = g0 + y;
    Ok(LinearEstimateReport { x, grad_u0: g0, y, ratio: if rhs > 0.0 { x / rhs } else { 0.0 } })
}
