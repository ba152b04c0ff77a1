//! Energy identity, higher-order energy ratios and weak-form residual
//! batteries for solutions of `∂ₛu − L_σu = f`.
//!
//! On the truncated domain `[0, Y]` the energy identity picks up the flux
//! `∫ Y^{1+σ} u ∂ₙu` through the top boundary; the tangential box is periodic.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::green_semigroup::duhamel_solve;
use crate::weighted_measure::SigmaParam;

/// Space-time quadrature on a grid with vertical weight `y^w`.
struct Quadrature {
    time: Vec<f64>,
    vert: Vec<f64>,
    cell: f64,
    nv1: usize,
    ntang: usize,
}

impl Quadrature {
    fn new(g: &HalfSpaceGrid, w: f64) -> Self {
        Self {
            time: g.time_weights(),
            vert: g.vertical_weights(w),
            cell: g.tangential_cell(),
            nv1: g.nv() + 1,
            ntang: g.n_tang(),
        }
    }

    /// `∫_box ∫_0^Y g y^w` of one time slice given by `g(t, j)`.
    fn slice<F: Fn(usize, usize) -> f64>(&self, g: F) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.ntang {
            for j in 0..self.nv1 {
                acc += self.vert[j] * g(t, j);
            }
        }
        acc * self.cell
    }

    /// `∫_0^S ∫ g y^w` with `g(k, t, j)`.
    fn spacetime<F: Fn(usize, usize, usize) -> f64>(&self, g: F) -> f64 {
        self.time.iter().enumerate().map(|(k, wk)| wk * self.slice(|t, j| g(k, t, j))).sum()
    }
}

fn sq_sum(fields: &[SampledField], k: usize, t: usize, j: usize) -> f64 {
    fields.iter().map(|f| f.at(k, t, j).powi(2)).sum()
}

fn vertical_index(dim: usize, order: usize) -> Vec<usize> {
    let mut a = vec![0; dim];
    a[dim - 1] = order;
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// `½‖u(S)‖²_σ + ∫‖∇u‖²_{1+σ}`.
    pub lhs: f64,
    /// `½‖u(0)‖²_σ + ∫⟨f, u⟩_σ + ∫ Y^{1+σ} u ∂ₙu`.
    pub rhs: f64,
    pub boundary_flux: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`.
    pub mismatch: f64,
    /// `(∫‖∂ₛu‖²_σ + ∫‖∇u‖²_σ + ∫‖D²u‖²_{2+σ}) / ∫‖f‖²_σ`, for zero initial values.
    pub higher_order_c: Option<f64>,
    /// `∫‖∇∇'u‖²_{1+σ} / (∫‖∇'f‖²_σ + ∫‖f‖²_σ)`, for zero initial values and `n ≥ 2`.
    pub aux_c: Option<f64>,
}

/// Both sides of the energy identity on `(0, S)` plus the higher-order ratios.
pub fn energy_identity_check(u: &SampledField, f: &SampledField, sigma: SigmaParam) -> Result<EnergyReport> {
    let g = u.grid().clone();
    if f.grid() != u.grid() {
        return Err(LabError::InvalidParameter("solution and source live on different grids".into()));
    }
    if u.slope().iter().chain(f.slope()).any(|&a| a != 0.0) {
        return Err(LabError::InvalidParameter("energy identity needs tangentially periodic fields".into()));
    }
    let s = sigma.sigma();
    let dim = g.dim();
    let q0 = Quadrature::new(&g, s);
    let q1 = Quadrature::new(&g, 1.0 + s);
    let grad = u.gradient();
    let ns = g.ns();
    let top = g.nv();
    let y_top = g.y_max();
    let norm = |k: usize| q0.slice(|t, j| u.at(k, t, j).powi(2));
    let dissipation = q1.spacetime(|k, t, j| sq_sum(&grad, k, t, j));
    let source = q0.spacetime(|k, t, j| f.at(k, t, j) * u.at(k, t, j));
    let dn = &grad[dim - 1];
    let flux: f64 = q0
        .time
        .iter()
        .enumerate()
        .map(|(k, wk)| {
            wk * (0..g.n_tang()).map(|t| y_top.powf(1.0 + s) * u.at(k, t, top) * dn.at(k, t, top)).sum::<f64>()
                * g.tangential_cell()
        })
        .sum();
    let lhs = 0.5 * norm(ns) + dissipation;
    let rhs = 0.5 * norm(0) + source + flux;
    let scale = lhs.abs().max(rhs.abs());
    let mismatch = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };

    let zero_start = u.slice(0).iter().all(|&v| v == 0.0);
    let f2 = q0.spacetime(|k, t, j| f.at(k, t, j).powi(2));
    let (higher, aux) = if zero_start && f2 > 0.0 {
        let ds = u.deriv(1, &vec![0; dim]);
        let q2 = Quadrature::new(&g, 2.0 + s);
        let mut hess = Vec::new();
        for a in 0..dim {
            for b in a..dim {
                let mut al = vec![0; dim];
                al[a] += 1;
                al[b] += 1;
                // Off-diagonal entries appear twice in ‖D²u‖².
                let d = u.deriv(0, &al);
                hess.push(if a == b { d } else { d.scaled(std::f64::consts::SQRT_2) });
            }
        }
        let num = q0.spacetime(|k, t, j| ds.at(k, t, j).powi(2) + sq_sum(&grad, k, t, j))
            + q2.spacetime(|k, t, j| sq_sum(&hess, k, t, j));
        let aux = if dim >= 2 {
            let mut mixed = Vec::new();
            let mut tf = Vec::new();
            for a in 0..dim - 1 {
                let mut e = vec![0; dim];
                e[a] = 1;
                tf.push(f.deriv(0, &e));
                for gr in &grad {
                    mixed.push(gr.deriv(0, &e));
                }
            }
            let den = q0.spacetime(|k, t, j| sq_sum(&tf, k, t, j)) + f2;
            Some(q1.spacetime(|k, t, j| sq_sum(&mixed, k, t, j)) / den)
        } else {
            None
        };
        (Some(num / f2), aux)
    } else {
        (None, None)
    };
    Ok(EnergyReport { lhs, rhs, boundary_flux: flux, mismatch, higher_order_c: higher, aux_c: aux })
}

/// Smooth random source with compact support in `y ∈ (0, Y/2)`, vanishing
/// at `s = 0`.
pub fn random_compact_source(grid: &Arc<HalfSpaceGrid>, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y_half = 0.5 * grid.y_max();
    let l = grid.box_len();
    let bumps: Vec<(f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let r = y_half * (0.15 + 0.15 * rng.random::<f64>());
            let c = r + (y_half - 2.0 * r) * rng.random::<f64>();
            let amp = 2.0 * rng.random::<f64>() - 1.0;
            let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            let freq = 1.0 + (rng.random::<f64>() * 2.0).floor();
            (c, r, amp, phase, freq)
        })
        .collect();
    let horizon = grid.horizon();
    SampledField::from_fn(grid, move |s, y| {
        let ramp = (std::f64::consts::PI * s / (2.0 * horizon)).sin().powi(2);
        bumps
            .iter()
            .map(|&(c, r, amp, phase, freq)| {
                let x = (y.vertical() - c) / r;
                let prof = if x.abs() < 1.0 { (1.0 - x * x).powi(4) } else { 0.0 };
                let tang: f64 =
                    y.tangential().iter().map(|v| (2.0 * std::f64::consts::PI * freq * v / l + phase).cos()).product();
                amp * prof * tang
            })
            .sum::<f64>()
            * ramp
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRefinement {
    pub mismatches: Vec<f64>,
    /// `log₂` of successive mismatch ratios.
    pub orders: Vec<f64>,
}

/// Energy-identity mismatch of the Duhamel solution with zero initial value
/// for a random compact source over `levels` successive refinements.
pub fn energy_refinement_study(
    grid: &Arc<HalfSpaceGrid>,
    sigma: SigmaParam,
    seed: u64,
    levels: usize,
) -> Result<EnergyRefinement> {
    let mut g = grid.clone();
    let mut mismatches = Vec::new();
    for _ in 0..levels {
        let f = random_compact_source(&g, seed);
        let u = duhamel_solve(&SampledField::zeros(&g), &f, sigma)?;
        mismatches.push(energy_identity_check(&u, &f, sigma)?.mismatch);
        g = g.refined();
    }
    let orders = mismatches.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(EnergyRefinement { mismatches, orders })
}

/// Test function `B((s−s_c)/r_s) B((yₙ−c)/b) ∏ cos(mᵢ kᵢ yᵢ + θᵢ)` with
/// `B(x) = (1 − x²)⁸` on `|x| < 1`; `c = 0` gives functions that
/// do not vanish at `yₙ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeTest {
    pub s_center: f64,
    pub s_radius: f64,
    pub y_center: f64,
    pub y_radius: f64,
    pub wavenumbers: Vec<f64>,
    pub phases: Vec<f64>,
}

/// `(1 − x²)^8` and its derivative.
fn bump(x: f64) -> (f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - x * x;
    (d.powi(8), -16.0 * x * d.powi(7))
}

impl SpaceTimeTest {
    /// `(φ, ∂ₛφ, ∇φ)` at `(s, y', yₙ)`.
    fn eval(&self, s: f64, tang: &[f64], yn: f64) -> (f64, f64, Vec<f64>) {
        let (b, db) = bump((s - self.s_center) / self.s_radius);
        let (chi, dchi) = bump((yn - self.y_center) / self.y_radius);
        let dchi = dchi / self.y_radius;
        let trig: Vec<(f64, f64)> = tang
            .iter()
            .zip(self.wavenumbers.iter().zip(&self.phases))
            .map(|(y, (k, p))| ((k * y + p).cos(), -k * (k * y + p).sin()))
            .collect();
        let prod: f64 = trig.iter().map(|c| c.0).product();
        let mut grad = Vec::with_capacity(tang.len() + 1);
        for i in 0..trig.len() {
            let others: f64 = trig.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, c)| c.0).product();
            grad.push(b * chi * trig[i].1 * others);
        }
        grad.push(b * dchi * prod);
        (b * chi * prod, db / self.s_radius * chi * prod, grad)
    }
}

/// `count` seeded test functions; every other one is nonzero at `yₙ = 0`.
pub fn weak_battery(grid: &HalfSpaceGrid, count: usize, seed: u64) -> Vec<SpaceTimeTest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_max = grid.horizon();
    let y_lim = 0.45 * grid.y_max();
    let dim = grid.dim();
    let k0 = 2.0 * std::f64::consts::PI / grid.box_len();
    (0..count)
        .map(|i| {
            let (c, b) = if i % 2 == 0 {
                (0.0, y_lim * (0.3 + 0.7 * rng.random::<f64>()))
            } else {
                let b = y_lim * (0.1 + 0.3 * rng.random::<f64>());
                (b + (y_lim - 2.0 * b) * rng.random::<f64>(), b)
            };
            SpaceTimeTest {
                s_center: s_max * (0.45 + 0.1 * rng.random::<f64>()),
                s_radius: 0.4 * s_max,
                y_center: c,
                y_radius: b,
                wavenumbers: (0..dim - 1).map(|_| k0 * (rng.random::<f64>() * 3.0).floor()).collect(),
                phases: (0..dim - 1).map(|_| 2.0 * std::f64::consts::PI * rng.random::<f64>()).collect(),
            }
        })
        .collect()
}

/// Relative weak residuals
/// `(−∫⟨u, ∂ₛφ⟩_w + ∫⟨∇u, ∇φ⟩_{1+w} − ∫⟨f, φ⟩_w) / (sum of absolute terms)`.
pub fn weak_residuals(u: &SampledField, f: &SampledField, weight: f64, battery: &[SpaceTimeTest]) -> Result<Vec<f64>> {
    let g = u.grid().clone();
    if !(weight > -1.0) {
        return Err(LabError::InvalidParameter(format!("weak-form weight must exceed -1, got {weight}")));
    }
    let q0 = Quadrature::new(&g, weight);
    let q1 = Quadrature::new(&g, 1.0 + weight);
    let grad = u.gradient();
    let dim = g.dim();
    Ok(crate::par::map(battery, |phi| {
        let mut terms = [0.0f64; 3];
        let mut mags = [0.0f64; 3];
        for (k, wk) in q0.time.iter().enumerate() {
            if *wk == 0.0 {
                continue;
            }
            let s = g.time(k);
            for t in 0..g.n_tang() {
                let tang = g.tang_coords(t);
                for (j, &yn) in g.vertical_nodes().iter().enumerate() {
                    let (p, ps, pg) = phi.eval(s, &tang, yn);
                    if p == 0.0 && ps == 0.0 && pg.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    let c0 = wk * q0.vert[j] * q0.cell;
                    let c1 = wk * q1.vert[j] * q1.cell;
                    let a = -c0 * u.at(k, t, j) * ps;
                    let b: f64 = c1 * (0..dim).map(|d| grad[d].at(k, t, j) * pg[d]).sum::<f64>();
                    let c = -c0 * f.at(k, t, j) * p;
                    for (i, v) in [a, b, c].into_iter().enumerate() {
                        terms[i] += v;
                        mags[i] += v.abs();
                    }
                }
            }
        }
        let total: f64 = terms.iter().sum();
        let mag: f64 = mags.iter().sum();
        if mag > 0.0 {
            total / mag
        } else {
            0.0
        }
    }))
}

/// Weak residuals of `∂ₙu` as a `(1+σ)`-solution to `∂ₙf + Δ'u`.
pub fn iterated_weak_residuals(
    u: &SampledField,
    f: &SampledField,
    sigma: SigmaParam,
    battery: &[SpaceTimeTest],
) -> Result<Vec<f64>> {
    let g = u.grid();
    let dim = g.dim();
    let dn = vertical_index(dim, 1);
    let v = u.deriv(0, &dn);
    let mut src = f.deriv(0, &dn);
    for a in 0..dim - 1 {
        let mut e = vec![0; dim];
        e[a] = 2;
        src = src.add(&u.deriv(0, &e));
    }
    weak_residuals(&v, &src, 1.0 + sigma.sigma(), battery)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_balances() {
        let g = HalfSpaceGrid::one_d(12, 8.0, 8, 1.0).unwrap();
        let z = SampledField::zeros(&g);
        let r = energy_identity_check(&z, &z, SigmaParam::new(0.0).unwrap()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.mismatch), (0.0, 0.0, 0.0));
    }

    #[test]
    fn drift_solution_satisfies_the_identity() {
        let g = HalfSpaceGrid::one_d(16, 6.0, 8, 1.0).unwrap();
        for sg in [-0.5, 0.0, 1.0] {
            let s = SigmaParam::new(sg).unwrap();
            let u = SampledField::from_fn(&g, |t, y| y.vertical() + (1.0 + sg) * t);
            let r = energy_identity_check(&u, &SampledField::zeros(&g), s).unwrap();
            assert!(r.mismatch < 1e-12, "σ={sg}: {}", r.mismatch);
        }
    }
}
