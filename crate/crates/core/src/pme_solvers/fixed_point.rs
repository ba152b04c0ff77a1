//! Picard iteration `u ↦ duhamel(u₀, f[u])` for the perturbation equation.

use crate::error::{LabError, Result};
use crate::field::SampledField;
use crate::function_norms::{x1_norm, x2_norm, CylinderSampler};
use crate::green_semigroup::duhamel_solve;
use crate::weighted_measure::SigmaParam;

use super::nonlinearity::nonlinearity_eval;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointConfig {
    /// Bound on `‖∇u₀‖_∞`.
    pub epsilon: f64,
    /// Radius of the ball `‖∇u‖_∞ ≤ R` the iterates must stay in.
    pub radius: f64,
    /// Stop once the normalised `X(p)` difference of successive iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
    pub p: f64,
    pub sampler_levels: usize,
    pub sampler_per_regime: usize,
    pub seed: u64,
}

impl FixedPointConfig {
    /// Defaults for dimension `n`: `ε = 10⁻²`, `R = 1/4`, `p = 2(n+1)+1`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            epsilon: 1e-2,
            radius: 0.25,
            tol: 1e-8,
            max_iter: 40,
            p: 2.0 * (dim as f64 + 1.0) + 1.0,
            sampler_levels: 3,
            sampler_per_regime: 2,
            seed: crate::DEFAULT_SEED,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius < 1.0) {
            return Err(LabError::InvalidParameter(format!("ball radius R must lie in (0, 1), got {}", self.radius)));
        }
        if !(self.epsilon >= 0.0) || !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(LabError::InvalidParameter("fixed-point tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖u^{(k+1)} − u^{(k)}‖_{X(p)} / ‖∇u₀‖_∞`.
    pub difference: f64,
    /// Ratio to the previous difference.
    pub ratio: Option<f64>,
    pub grad_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointTrace {
    pub records: Vec<IterationRecord>,
    /// Largest ratio of successive differences above the round-off floor.
    pub contraction_factor: f64,
    /// `‖u_*‖_{X(p)} / ‖∇u₀‖_∞`.
    pub c1: f64,
    pub grad_u0: f64,
}

impl FixedPointTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }
}

/// Differences below this multiple of the field scale are round-off.
const NOISE_FLOOR: f64 = 1e-12;

/// Sup over the grid of `|∇u|`.
pub fn grad_sup(u: &SampledField) -> f64 {
    let grad = u.gradient();
    let n = u.values().len();
    (0..n).map(|i| grad.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

fn x_norm(u: &SampledField, p: f64, sampler: &CylinderSampler) -> Result<f64> {
    Ok(x1_norm(u, p, sampler)? + x2_norm(u, p, sampler)?)
}

/// Fixed point of `u = duhamel(u₀, f[u])` started from the linear solution.
///
/// Fails with [`LabError::Contraction`] when an iterate leaves the ball
/// `‖∇u‖_∞ ≤ R`, when successive differences stop shrinking, or when
/// `max_iter` is exhausted.
pub fn pe_fixed_point(
    u0: &SampledField,
    cfg: &FixedPointConfig,
    sigma: SigmaParam,
) -> Result<(SampledField, FixedPointTrace)> {
    cfg.validate()?;
    let grid = u0.grid().clone();
    let start = u0.frozen_at(0);
    let g0 = grad_sup(&start);
    if g0 > cfg.epsilon * (1.0 + 1e-9) {
        return Err(LabError::InvalidParameter(format!(
            "‖∇u₀‖_∞ = {g0:.3e} exceeds the Lipschitz bound ε = {:.3e}",
            cfg.epsilon
        )));
    }
    let sampler = CylinderSampler::new(&grid, cfg.sampler_levels, cfg.sampler_per_regime, cfg.seed)?;
    let margin = 1.0 - cfg.radius;
    let zero = SampledField::zeros(&grid);
    let mut u = duhamel_solve(&start, &zero, sigma)?;
    if g0 == 0.0 {
        let trace = FixedPointTrace {
            records: vec![IterationRecord { iteration: 1, difference: 0.0, ratio: None, grad_sup: 0.0 }],
            contraction_factor: 0.0,
            c1: 0.0,
            grad_u0: 0.0,
        };
        return Ok((u, trace));
    }
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut factor: f64 = 0.0;
    for it in 1..=cfg.max_iter {
        let gs = grad_sup(&u);
        if gs > cfg.radius {
            return Err(LabError::Contraction(format!(
                "iterate {it} left the ball: ‖∇u‖_∞ = {gs:.3e} > R = {:.3e} (ε = {:.3e} is outside the admissible range)",
                cfg.radius, cfg.epsilon
            )));
        }
        let f = nonlinearity_eval(&u, sigma, margin)?;
        let next = duhamel_solve(&start, &f, sigma)?;
        let diff = x_norm(&next.sub(&u), cfg.p, &sampler)? / g0;
        let ratio = records.last().map(|r| if r.difference > 0.0 { diff / r.difference } else { 0.0 });
        if let (Some(q), Some(prev)) = (ratio, records.last()) {
            if prev.difference > NOISE_FLOOR {
                factor = factor.max(q);
                if q >= 1.0 {
                    return Err(LabError::Contraction(format!(
                        "successive differences grew by a factor {q:.3} at iteration {it} (ε = {:.3e})",
                        cfg.epsilon
                    )));
                }
            }
        }
        records.push(IterationRecord { iteration: it, difference: diff, ratio, grad_sup: gs });
        u = next;
        if diff < cfg.tol {
            let c1 = x_norm(&u, cfg.p, &sampler)? / g0;
            return Ok((u, FixedPointTrace { records, contraction_factor: factor, c1, grad_u0: g0 }));
        }
    }
    Err(LabError::Contraction(format!(
        "no convergence within {} iterations (last difference {:.3e})",
        cfg.max_iter,
        records.last().map(|r| r.difference).unwrap_or(f64::NAN)
    )))
}

/// `L_σu = yₙΔu + (1+σ)∂ₙu`.
pub fn linear_operator(u: &SampledField, sigma: SigmaParam) -> SampledField {
    let dim = u.grid().dim();
    let mut lap = SampledField::zeros(u.grid());
    for i in 0..dim {
        let mut a = vec![0; dim];
        a[i] = 2;
        lap = lap.add(&u.deriv(0, &a));
    }
    let mut a = vec![0; dim];
    a[dim - 1] = 1;
    let dn = u.deriv(0, &a);
    let p = 1.0 + sigma.sigma();
    lap.map_nodes(|_, y, v| y.vertical() * v).axpy(p, &dn)
}

/// `∂ₛu − L_σu − f[u]` on the nodes.
pub fn pe_residual(u: &SampledField, sigma: SigmaParam, margin: f64) -> Result<SampledField> {
    let dim = u.grid().dim();
    let ds = u.deriv(1, &vec![0; dim]);
    let f = nonlinearity_eval(u, sigma, margin)?;
    Ok(ds.sub(&linear_operator(u, sigma)).sub(&f))
}

/// Largest nodal residual over time levels `k ≥ k0` and heights up to `top`.
pub fn residual_sup(r: &SampledField, k0: usize, top: f64) -> f64 {
    let g = r.grid();
    let mut m: f64 = 0.0;
    for k in k0..=g.ns() {
        for t in 0..g.n_tang() {
            for (j, &y) in g.vertical_nodes().iter().enumerate() {
                if y <= top {
                    m = m.max(r.at(k, t, j).abs());
                }
            }
        }
    }
    m
}

/// Smooth data with `‖∇u₀‖_∞ = ε`: `ε(1 − e^{−yₙ})` in one dimension, plus
/// a mollified periodic `|y₁|` kink in higher dimensions.
pub fn generic_initial(grid: &std::sync::Arc<crate::field::HalfSpaceGrid>, epsilon: f64) -> SampledField {
    let l = grid.box_len();
    let dim = grid.dim();
    let raw = SampledField::initial(grid, &[], |y| {
        let v = 1.0 - (-y.vertical()).exp();
        if dim == 1 {
            v
        } else {
            let s = l / std::f64::consts::PI * (std::f64::consts::PI * y.tangential()[0] / l).sin();
            0.6 * v + 0.6 * ((4.0 + s * s).sqrt() - 2.0)
        }
    });
    let g = grad_sup(&raw);
    raw.scaled(epsilon / g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::HalfSpaceGrid;

    #[test]
    fn zero_datum_converges_immediately() {
        let g = HalfSpaceGrid::one_d(24, 16.0, 8, 1.0).unwrap();
        let cfg = FixedPointConfig::for_dim(1);
        let (u, tr) = pe_fixed_point(&SampledField::zeros(&g), &cfg, SigmaParam::new(0.0).unwrap()).unwrap();
        assert_eq!(tr.iterations(), 1);
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn stretched_wave_is_reached() {
        let g = HalfSpaceGrid::one_d(24, 16.0, 8, 1.0).unwrap();
        let beta = 1e-2;
        let s = SigmaParam::new(0.5).unwrap();
        let u0 = SampledField::initial(&g, &[], |y| beta * y.vertical());
        let (u, _) = pe_fixed_point(&u0, &FixedPointConfig::for_dim(1), s).unwrap();
        let c = 1.5 * beta / (1.0 + beta);
        let exact = SampledField::from_fn(&g, |t, y| beta * y.vertical() + c * t);
        assert!(u.sub(&exact).max_abs() < 1e-9 * beta, "{}", u.sub(&exact).max_abs());
    }
}
