//! Exponentially weighted decay of homogeneous solutions.

use super::duhamel::{homogeneous_solve, semigroup_apply};
use crate::error::{LabError, Result};
use crate::field::SampledField;
use crate::geometry::{ball_measure, fd_gradient, psi_eval, IntrinsicBall, PsiWeight, C_L};
use crate::quad;
use crate::weighted_measure::SigmaParam;

/// Largest admissible `|Ψ|` on the grid before `e^Ψ` is considered to overflow.
const PSI_LIMIT: f64 = 300.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Exponential rate `2 c_L² ζ²` of the certified bound.
    pub rate: f64,
    /// Measured `c` in the pointwise bound, over all nodes with `s > 0`.
    pub pointwise_c: f64,
    /// `F(s_k)` of the monotone functional.
    pub functional: Vec<f64>,
    /// Largest relative increase `F(s_{k+1})/F(s_k) − 1` (≤ 0 when decreasing).
    pub max_increase: f64,
    /// Relative defect of `‖e^Ψu‖² + 2∫‖∇(e^Ψu)‖²_{1+σ} − 2∫‖e^Ψu∇Ψ‖²_{1+σ}` being constant.
    pub identity_defect: f64,
    /// Largest `‖e^Ψu∇Ψ‖²_{1+σ} / (c_L²ζ²‖e^Ψu‖²_σ)`; at most 1 by the weighted Lipschitz bound.
    pub gradient_bound_ratio: f64,
    /// `F` never rises by more than the measured conservation defect of the
    /// same quadrature.
    pub monotone: bool,
}

/// Solves the homogeneous problem from `u0` and evaluates the weighted bounds.
pub fn exp_weight_decay_check(u0: &SampledField, w: &PsiWeight, sigma: SigmaParam) -> Result<DecayReport> {
    let grid = u0.grid().clone();
    let s = sigma.sigma();
    let nv1 = grid.vertical_nodes().len();
    let nt = grid.n_tang();
    let zeta = w.amplitude;
    let rate = 2.0 * C_L * C_L * zeta * zeta;
    let mut psi = vec![0.0; nt * nv1];
    let mut dpsi2 = vec![0.0; nt * nv1];
    for t in 0..nt {
        for j in 0..nv1 {
            let p = grid.point(t, j);
            let v = psi_eval(w, &p);
            if v.abs() > PSI_LIMIT {
                return Err(LabError::InvalidParameter(format!(
                    "weight exponent {v:.1} at height {:.2} overflows; reduce |ζ| or the grid extent",
                    p.vertical()
                )));
            }
            psi[t * nv1 + j] = v;
            let h = 1e-6 * (1.0 + p.vertical());
            dpsi2[t * nv1 + j] = fd_gradient(|q| psi_eval(w, q), &p, h).iter().map(|g| g * g).sum();
        }
    }
    let u = homogeneous_solve(u0, sigma)?;
    let w0 = grid.vertical_weights(s);
    let w1 = grid.vertical_weights(1.0 + s);
    let cell = grid.tangential_cell();
    let level = nt * nv1;
    // ‖e^Ψv‖²_σ, ‖∇(e^Ψv)‖²_{1+σ} and ‖e^Ψv∇Ψ‖²_{1+σ} at every time level of `v`.
    let terms = |v: &SampledField| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut ew = v.clone();
        for (i, x) in ew.values_mut().iter_mut().enumerate() {
            *x *= psi[i % level].exp();
        }
        let grads = ew.gradient();
        let integ = |wts: &[f64], f: &dyn Fn(usize) -> f64| -> f64 {
            (0..nt).map(|t| (0..nv1).map(|j| wts[j] * f(t * nv1 + j)).sum::<f64>()).sum::<f64>() * cell
        };
        let n = v.grid().ns() + 1;
        let (mut a, mut b, mut c) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let e = ew.slice(k);
            a.push(integ(&w0, &|i| e[i] * e[i]));
            b.push(integ(&w1, &|i| grads.iter().map(|g| g.slice(k)[i].powi(2)).sum::<f64>()));
            c.push(integ(&w1, &|i| e[i] * e[i] * dpsi2[i]));
        }
        (a, b, c)
    };
    let ns = grid.ns();
    let ds = grid.ds();
    let (norm2, _, psi_nodes) = terms(&u);
    // Time integrals use 4-point Gauss–Legendre on every step; the fields at
    // the interior nodes come from the semigroup applied to the step start.
    let (gx, gw) = quad::gauss_legendre(4);
    let stacked = grid.with_time_steps(ns);
    let mut inner = Vec::with_capacity(gx.len());
    for x in &gx {
        let tau = 0.5 * ds * (1.0 + x);
        let mut vals = Vec::with_capacity(grid.len());
        for k in 0..ns {
            vals.extend(semigroup_apply(&grid, u.slice(k), sigma, tau)?);
        }
        vals.extend_from_slice(u.slice(ns));
        let (_, g2, pt) = terms(&SampledField::from_values(&stacked, vals, &[])?);
        inner.push((tau, g2, pt));
    }
    let mut functional = vec![norm2[0]];
    let mut identity = vec![norm2[0]];
    let (mut acc_f, mut acc_i) = (0.0, 0.0);
    for k in 1..=ns {
        for ((tau, g2, pt), w) in inner.iter().zip(&gw) {
            let wq = ds * w;
            acc_f += wq * (-rate * (grid.time(k - 1) + tau)).exp() * g2[k - 1];
            acc_i += wq * (g2[k - 1] - pt[k - 1]);
        }
        functional.push((-rate * grid.time(k)).exp() * norm2[k] + acc_f);
        identity.push(norm2[k] + acc_i);
    }
    let max_increase = functional
        .windows(2)
        .map(|p| if p[0] > 0.0 { p[1] / p[0] - 1.0 } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max);
    let identity_defect = identity.iter().map(|v| (v / identity[0] - 1.0).abs()).fold(0.0, f64::max);
    let gradient_bound_ratio = if zeta == 0.0 {
        0.0
    } else {
        (0..=ns)
            .filter(|&k| norm2[k] > 0.0)
            .map(|k| psi_nodes[k] / (C_L * C_L * zeta * zeta * norm2[k]))
            .fold(0.0, f64::max)
    };
    let ln_init = 0.5 * norm2[0].ln();
    let mut ln_c = f64::NEG_INFINITY;
    for k in 1..=ns {
        let r = grid.time(k).sqrt();
        let sl = u.slice(k);
        for t in 0..nt {
            for j in 0..nv1 {
                let v = sl[t * nv1 + j].abs();
                if v == 0.0 {
                    continue;
                }
                let b = ball_measure(&IntrinsicBall::new(grid.point(t, j), r)?, sigma)?;
                let l = v.ln() + 0.5 * b.ln() - rate * r * r + psi[t * nv1 + j] - ln_init;
                ln_c = ln_c.max(l);
            }
        }
    }
    Ok(DecayReport {
        rate,
        pointwise_c: ln_c.exp(),
        functional,
        max_increase,
        identity_defect,
        gradient_bound_ratio,
        monotone: max_increase <= identity_defect.max(1e-6),
    })
}
