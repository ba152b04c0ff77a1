//! Weighted decay, factorial growth and equivariance checks of solved
//! perturbation fields.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField, FD_WIDTH};
use crate::geometry::{least_squares_slope, HalfSpacePoint};
use crate::weighted_measure::SigmaParam;

use super::fixed_point::{grad_sup, linear_operator, pe_fixed_point, pe_residual, residual_sup, FixedPointConfig};
use super::nonlinearity::nonlinearity_eval;

/// Time levels below `INITIAL_LAYER·Δs` are excluded from decay suprema.
pub const INITIAL_LAYER: usize = 4;

/// One weighted supremum `sup_{s ≥ 4Δs} s^{k+|α|} |∂ₛᵏ∂^α∇u| / ‖∇u₀‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayConstant {
    pub k: usize,
    pub alpha: Vec<usize>,
    pub c: f64,
}

/// All `(k, α)` with `k + |α| ≤ max_total`, `α` ordered tangential first.
pub fn orders(dim: usize, max_total: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        for k in 0..=total {
            for alpha in multi_indices(dim, total - k) {
                out.push((k, alpha));
            }
        }
    }
    out
}

fn multi_indices(dim: usize, total: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|a| {
            multi_indices(dim - 1, total - a).into_iter().map(move |mut rest| {
                rest.insert(0, a);
                rest
            })
        })
        .collect()
}

fn weighted_sup(fields: &[SampledField], power: usize, k0: usize, top: f64) -> f64 {
    let g = fields[0].grid();
    let mut m: f64 = 0.0;
    for k in k0..=g.ns() {
        let w = g.time(k).powi(power as i32);
        for t in 0..g.n_tang() {
            for (j, &y) in g.vertical_nodes().iter().enumerate() {
                if y > top {
                    break;
                }
                let v: f64 = fields.iter().map(|f| f.at(k, t, j).powi(2)).sum::<f64>().sqrt();
                m = m.max(w * v);
            }
        }
    }
    m
}

/// Decay constants of a solved field, taken over heights up to half the grid.
pub fn decay_check(u_star: &SampledField, u0: &SampledField, max_total: usize) -> Result<Vec<DecayConstant>> {
    let s_min = INITIAL_LAYER as f64 * u_star.grid().ds();
    decay_check_from(u_star, u0, max_total, s_min)
}

/// As [`decay_check`] with the suprema taken over `s ≥ s_min`.
pub fn decay_check_from(
    u_star: &SampledField,
    u0: &SampledField,
    max_total: usize,
    s_min: f64,
) -> Result<Vec<DecayConstant>> {
    let g = u_star.grid().clone();
    if max_total > 2 {
        return Err(LabError::InvalidParameter(format!(
            "decay orders above k+|α| = 2 are not resolved (asked {max_total})"
        )));
    }
    if g.ns() < FD_WIDTH + INITIAL_LAYER {
        return Err(LabError::InvalidParameter(format!(
            "need at least {} time steps for decay suprema",
            FD_WIDTH + INITIAL_LAYER
        )));
    }
    let g0 = grad_sup(&u0.frozen_at(0));
    let dim = g.dim();
    let top = 0.5 * g.y_max();
    let k0 = (0..=g.ns()).find(|&k| g.time(k) >= s_min * (1.0 - 1e-12)).unwrap_or(g.ns()).max(INITIAL_LAYER);
    let grad = u_star.gradient();
    Ok(orders(dim, max_total)
        .into_iter()
        .map(|(k, alpha)| {
            let comps: Vec<SampledField> = grad.iter().map(|gr| gr.deriv(k, &alpha)).collect();
            let total = k + alpha.iter().sum::<usize>();
            let s = weighted_sup(&comps, total, k0, top);
            DecayConstant { k, alpha, c: if g0 > 0.0 { s / g0 } else { 0.0 } }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRefinement {
    pub coarse: Vec<DecayConstant>,
    pub fine: Vec<DecayConstant>,
    /// Largest `|c_fine/c_coarse − 1|` over orders with non-negligible constants.
    pub worst_change: f64,
    pub stable: bool,
}

/// Allowed relative change of a decay constant under refinement.
pub const REFINEMENT_TOL: f64 = 0.25;

/// Solves on `grid` and on `grid.refined()` and compares decay constants,
/// both taken beyond the initial layer of the coarse grid.
pub fn decay_refinement_study<F: Fn(&HalfSpacePoint) -> f64 + Copy>(
    grid: &Arc<HalfSpaceGrid>,
    init: F,
    cfg: &FixedPointConfig,
    sigma: SigmaParam,
    max_total: usize,
) -> Result<DecayRefinement> {
    let s_min = INITIAL_LAYER as f64 * grid.ds();
    let run = |g: &Arc<HalfSpaceGrid>| -> Result<Vec<DecayConstant>> {
        let u0 = SampledField::initial(g, &[], init);
        let (u, _) = pe_fixed_point(&u0, cfg, sigma)?;
        decay_check_from(&u, &u0, max_total, s_min)
    };
    let coarse = run(grid)?;
    let fine = run(&grid.refined())?;
    let scale = coarse.iter().map(|c| c.c).fold(0.0, f64::max);
    let worst = coarse
        .iter()
        .zip(&fine)
        .filter(|(a, _)| a.c > 1e-6 * scale)
        .map(|(a, b)| (b.c / a.c - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(DecayRefinement { coarse, fine, worst_change: worst, stable: worst <= REFINEMENT_TOL })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticityReport {
    /// `a_m = max_{k+|α'|=m} sup s^m |∂ₛᵏ∂^{α'}∇u| / (k! α'! ‖∇u₀‖)`.
    pub envelope: Vec<f64>,
    /// Fitted `Λ` of `a_m ≤ C Λ^{−m}`; `None` when all higher orders vanish.
    pub lambda: Option<f64>,
    pub c: f64,
    pub trivially_satisfied: bool,
    pub passed: bool,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Fits the geometric envelope of temporal and tangential derivatives up to `max_order`.
pub fn analyticity_factorial_check(
    u_star: &SampledField,
    u0: &SampledField,
    max_order: usize,
) -> Result<AnalyticityReport> {
    let g = u_star.grid().clone();
    if g.ns() + 1 < FD_WIDTH + max_order || g.nv() < FD_WIDTH {
        return Err(LabError::InvalidParameter(
            "insufficient resolution for order-3 derivatives; check skipped".into(),
        ));
    }
    let g0 = grad_sup(&u0.frozen_at(0));
    if g0 == 0.0 {
        return Ok(AnalyticityReport {
            envelope: vec![0.0; max_order + 1],
            lambda: None,
            c: 0.0,
            trivially_satisfied: true,
            passed: true,
        });
    }
    let dim = g.dim();
    let top = 0.5 * g.y_max();
    let grad = u_star.gradient();
    let mut env = vec![0.0f64; max_order + 1];
    for total in 0..=max_order {
        for k in 0..=total {
            for tang in multi_indices(dim, total - k).into_iter().filter(|a| a[dim - 1] == 0) {
                let comps: Vec<SampledField> = grad.iter().map(|gr| gr.deriv(k, &tang)).collect();
                let fac = factorial(k) * tang.iter().map(|&a| factorial(a)).product::<f64>();
                let a = weighted_sup(&comps, total, INITIAL_LAYER, top) / (fac * g0);
                env[total] = env[total].max(a);
            }
        }
    }
    let floor = 1e-9 * env[0].max(1e-300);
    let pts: Vec<(f64, f64)> =
        env.iter().enumerate().skip(1).filter(|(_, &a)| a > floor).map(|(m, &a)| (m as f64, a.ln())).collect();
    if pts.len() < 2 {
        return Ok(AnalyticityReport { envelope: env, lambda: None, c: 0.0, trivially_satisfied: true, passed: true });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, _, _) = least_squares_slope(&xs, &ys);
    let lambda = (-slope).exp();
    let c = env.iter().enumerate().map(|(m, a)| a * lambda.powi(m as i32)).fold(0.0, f64::max);
    let passed = lambda > 0.0 && c.is_finite();
    Ok(AnalyticityReport { envelope: env, lambda: Some(lambda), c, trivially_satisfied: false, passed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub tau: f64,
    pub xi: Vec<f64>,
    /// Residual of the untransformed field.
    pub base_residual: f64,
    /// Residual of `u ∘ U` in the modified equation.
    pub transformed_residual: f64,
    /// Relative mismatch of the `τ`-derivative of `∇(u ∘ U)` against `s∂ₛ∇u`.
    pub tau_derivative_error: f64,
    /// Per tangential direction, the mismatch against `−s∂ⱼ∇u`.
    pub xi_derivative_errors: Vec<f64>,
}

/// `u ∘ U(τ, ξ')` on a grid of horizon `S/(τ(1+pad))`, same resolution.
fn transformed(u: &SampledField, tau: f64, xi: &[f64], pad: f64) -> Result<SampledField> {
    let g = u.grid();
    let gv =
        HalfSpaceGrid::new(g.dim(), g.nv(), g.y_max(), g.nt(), g.box_len(), g.ns(), g.horizon() / (tau * (1.0 + pad)))?;
    let slope = u.slope().to_vec();
    let mut out = SampledField::zeros(&gv);
    out.set_slope(&slope);
    let vals = crate::par::map_range(gv.ns() + 1, |k| {
        let s = gv.time(k);
        let mut row = Vec::with_capacity(gv.slice_len());
        for t in 0..gv.n_tang() {
            let c = gv.tang_coords(t);
            let shifted: Vec<f64> = c.iter().zip(xi).map(|(y, x)| y - x * s).collect();
            for &yn in gv.vertical_nodes() {
                let p = HalfSpacePoint::new(&shifted, yn)?;
                let full = u.eval(tau * s, &p)?;
                row.push(full - c.iter().zip(&slope).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    out.values_mut().copy_from_slice(&vals.concat());
    Ok(out)
}

/// Residual `∂ₛv − L_σv − (τ f[v] − (1−τ)L_σv − ξ'·∇'v)`.
fn modified_residual(v: &SampledField, tau: f64, xi: &[f64], sigma: SigmaParam, margin: f64) -> Result<SampledField> {
    let dim = v.grid().dim();
    let ds = v.deriv(1, &vec![0; dim]);
    let lv = linear_operator(v, sigma);
    let f = nonlinearity_eval(v, sigma, margin)?;
    let mut rhs = f.scaled(tau).axpy(-(1.0 - tau), &lv);
    for (j, x) in xi.iter().enumerate() {
        let mut a = vec![0; dim];
        a[j] = 1;
        rhs = rhs.axpy(-x, &v.deriv(0, &a));
    }
    Ok(ds.sub(&lv).sub(&rhs))
}

const PAD: f64 = 0.05;
const FD_STEP: f64 = 1e-3;

/// Checks that `u ∘ U(τ, ξ')` solves the `(τ, ξ')`-modified equation and
/// that `(τ, ξ')`-derivatives at `(1, 0)` reproduce `s∂ₛ∇u` and `−s∂ⱼ∇u`.
pub fn parameter_family_equivariance(
    u_star: &SampledField,
    tau: f64,
    xi: &[f64],
    sigma: SigmaParam,
    margin: f64,
) -> Result<EquivarianceReport> {
    let g = u_star.grid().clone();
    let dim = g.dim();
    if xi.len() != dim - 1 {
        return Err(LabError::InvalidParameter(format!("ξ' needs {} components", dim - 1)));
    }
    if !(tau > 0.5 && tau < 1.5) || xi.iter().any(|x| x.abs() * g.horizon() > 0.25 * g.box_len()) {
        return Err(LabError::OutsideGrid("transform parameters move the field off the grid".into()));
    }
    let top = 0.5 * g.y_max();
    let base = residual_sup(&pe_residual(u_star, sigma, margin)?, INITIAL_LAYER, top);
    let v = transformed(u_star, tau, xi, PAD)?;
    let trans = residual_sup(&modified_residual(&v, tau, xi, sigma, margin)?, INITIAL_LAYER, top);

    // Derivatives at (1, 0) against the grid derivatives of ∇u.
    let grad = u_star.gradient();
    let dgrad_t: Vec<SampledField> = grad.iter().map(|gr| gr.deriv(1, &vec![0; dim])).collect();
    let h = FD_STEP;
    let k_max = ((g.ns() as f64) / (1.0 + h)).floor() as usize;
    let sample = |k: usize, t: usize, j: usize, tau_: f64, xi_: &[f64]| -> Result<Vec<f64>> {
        let s = g.time(k);
        let c: Vec<f64> = g.tang_coords(t).iter().zip(xi_).map(|(y, x)| y - x * s).collect();
        let p = HalfSpacePoint::new(&c, g.vertical_nodes()[j])?;
        grad.iter().map(|gr| gr.eval(tau_ * s, &p)).collect()
    };
    let zero = vec![0.0; dim - 1];
    let mut tau_err: f64 = 0.0;
    let mut tau_scale: f64 = 0.0;
    let mut xi_err = vec![0.0f64; dim - 1];
    let mut xi_scale = vec![0.0f64; dim - 1];
    for k in INITIAL_LAYER..=k_max {
        let s = g.time(k);
        for t in 0..g.n_tang() {
            for (j, &y) in g.vertical_nodes().iter().enumerate() {
                if y > top {
                    break;
                }
                let plus = sample(k, t, j, 1.0 + h, &zero)?;
                let minus = sample(k, t, j, 1.0 - h, &zero)?;
                for c in 0..dim {
                    let fd = (plus[c] - minus[c]) / (2.0 * h);
                    let exact = s * dgrad_t[c].at(k, t, j);
                    tau_err = tau_err.max((fd - exact).abs());
                    tau_scale = tau_scale.max(exact.abs());
                }
                for a in 0..dim - 1 {
                    let mut e = zero.clone();
                    e[a] = h;
                    let plus = sample(k, t, j, 1.0, &e)?;
                    e[a] = -h;
                    let minus = sample(k, t, j, 1.0, &e)?;
                    let mut al = vec![0; dim];
                    al[a] = 1;
                    for c in 0..dim {
                        let fd = (plus[c] - minus[c]) / (2.0 * h);
                        let exact = -s * grad[c].deriv(0, &al).at(k, t, j);
                        xi_err[a] = xi_err[a].max((fd - exact).abs());
                        xi_scale[a] = xi_scale[a].max(exact.abs());
                    }
                }
            }
        }
    }
    let rel = |e: f64, sc: f64| if sc > 1e-300 { e / sc } else { e };
    Ok(EquivarianceReport {
        tau,
        xi: xi.to_vec(),
        base_residual: base,
        transformed_residual: trans,
        tau_derivative_error: rel(tau_err, tau_scale),
        xi_derivative_errors: xi_err.iter().zip(&xi_scale).map(|(e, s)| rel(*e, *s)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub lambda: f64,
    pub base_residual: f64,
    pub scaled_residual: f64,
    /// The rescaled field `λ^{−1} u(λŝ, λŷ)`.
    pub scaled: SampledField,
}

/// Residual of the nonlinear equation with denominator margin `m`, or of the
/// linear one for `None`.
fn residual(u: &SampledField, sigma: SigmaParam, margin: Option<f64>) -> Result<SampledField> {
    match margin {
        Some(m) => pe_residual(u, sigma, m),
        None => Ok(u.deriv(1, &vec![0; u.grid().dim()]).sub(&linear_operator(u, sigma))),
    }
}

/// Rescales a solved field by `λ^{−1}(u ∘ A_λ)` onto the grid with extents
/// divided by `λ` and recomputes its residual there.
pub fn scaling_equivariance(
    u: &SampledField,
    lambda: f64,
    sigma: SigmaParam,
    margin: Option<f64>,
) -> Result<ScalingReport> {
    if !(lambda > 0.0) {
        return Err(LabError::InvalidParameter(format!("scaling factor must be positive, got {lambda}")));
    }
    let g = u.grid();
    let gs = HalfSpaceGrid::new(
        g.dim(),
        g.nv(),
        g.y_max() / lambda,
        g.nt(),
        g.box_len() / lambda,
        g.ns(),
        g.horizon() / lambda,
    )?;
    // Nodes of the rescaled grid are the images of the original nodes, and
    // the slope term a·y' is invariant under λ^{−1}(· ∘ A_λ).
    let vals: Vec<f64> = u.values().iter().map(|v| v / lambda).collect();
    let scaled = SampledField::from_values(&gs, vals, u.slope())?;
    let base = residual_sup(&residual(u, sigma, margin)?, INITIAL_LAYER, 0.5 * g.y_max());
    let res = residual_sup(&residual(&scaled, sigma, margin)?, INITIAL_LAYER, 0.5 * gs.y_max());
    Ok(ScalingReport { lambda, base_residual: base, scaled_residual: res, scaled })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_enumeration() {
        assert_eq!(orders(1, 2).len(), 6);
        assert_eq!(orders(2, 2).len(), 10);
        assert_eq!(multi_indices(3, 2).len(), 6);
    }

    #[test]
    fn drift_solution_is_scale_invariant() {
        let g = HalfSpaceGrid::one_d(16, 8.0, 12, 1.0).unwrap();
        let s = SigmaParam::new(0.0).unwrap();
        let u = SampledField::from_fn(&g, |t, y| y.vertical() + t);
        let r = scaling_equivariance(&u, 4.0, s, None).unwrap();
        assert!(r.scaled_residual < 1e-12);
        let gs = r.scaled.grid().clone();
        let exact = SampledField::from_fn(&gs, |t, y| y.vertical() + t);
        assert!(r.scaled.sub(&exact).max_abs() < 1e-13);
    }
}
