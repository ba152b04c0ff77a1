//! The quadratic nonlinearity of the perturbation equation.

use crate::error::{LabError, Result};
use crate::field::SampledField;
use crate::weighted_measure::SigmaParam;

/// `q = |∇u|² / (∂ₙu + 1)` on the nodes, with the smallest denominator.
fn flux_density(u: &SampledField) -> (SampledField, f64) {
    let grad = u.gradient();
    let dn = &grad[grad.len() - 1];
    let mut min_den = f64::INFINITY;
    let mut q = SampledField::zeros(u.grid());
    {
        let vals = q.values_mut();
        for i in 0..vals.len() {
            let g2: f64 = grad.iter().map(|g| g.values()[i].powi(2)).sum();
            let den = 1.0 + dn.values()[i];
            min_den = min_den.min(den);
            vals[i] = g2 / den;
        }
    }
    (q, min_den)
}

fn check_margin(min_den: f64, margin: f64) -> Result<()> {
    if !(min_den >= margin) {
        return Err(LabError::MarginViolated(min_den));
    }
    Ok(())
}

/// `f[u] = −(1+σ) |∇u|²/(∂ₙu+1) − yₙ ∂ₙ(|∇u|²/(∂ₙu+1))`.
///
/// Fails when `∂ₙu + 1` drops below `margin` anywhere on the grid.
pub fn nonlinearity_eval(u: &SampledField, sigma: SigmaParam, margin: f64) -> Result<SampledField> {
    let (q, min_den) = flux_density(u);
    check_margin(min_den, margin)?;
    let dim = u.grid().dim();
    let mut a = vec![0; dim];
    a[dim - 1] = 1;
    let dq = q.deriv(0, &a);
    let p = 1.0 + sigma.sigma();
    Ok(q.map_nodes(|_, _, v| -p * v).axpy(-1.0, &dq.map_nodes(|_, y, v| y.vertical() * v)))
}

/// The same source written as `−yₙ^{−σ} ∂ₙ(yₙ^{1+σ} q)`, differentiated as a
/// whole; at `yₙ = 0` the value falls back to `−(1+σ)q`.
pub fn nonlinearity_divergence_form(u: &SampledField, sigma: SigmaParam, margin: f64) -> Result<SampledField> {
    let (q, min_den) = flux_density(u);
    check_margin(min_den, margin)?;
    let s = sigma.sigma();
    let dim = u.grid().dim();
    let mut a = vec![0; dim];
    a[dim - 1] = 1;
    let flux = q.map_nodes(|_, y, v| y.vertical().powf(1.0 + s) * v);
    let d = flux.deriv(0, &a);
    let grid = u.grid().clone();
    let y = grid.vertical_nodes();
    let nv1 = y.len();
    let mut out = SampledField::zeros(&grid);
    for (i, o) in out.values_mut().iter_mut().enumerate() {
        let yn = y[i % nv1];
        *o = if yn == 0.0 { -(1.0 + s) * q.values()[i] } else { -yn.powf(-s) * d.values()[i] };
    }
    Ok(out)
}
