//! Duhamel solves `u(s) = P(s)u₀ + ∫_0^s P(s−τ) f(τ) dτ` on a sampled grid.
//!
//! Tangential directions are handled by FFT; each frequency uses its own
//! vertical propagator. The time integral is the trapezoid rule on the grid
//! steps, with `P(0) = I`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::propagator::{propagator, Propagator};
use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::par;
use crate::weighted_measure::SigmaParam;

/// Largest admissible growth exponent of `u₀` at the top of the grid.
const MAX_GROWTH: f64 = 3.5;

/// Tangential spectrum of one time slice, laid out `[mode][vertical]`.
pub(crate) fn forward(grid: &HalfSpaceGrid, slice: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = slice.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(grid, &mut data, false);
    data
}

pub(crate) fn inverse(grid: &HalfSpaceGrid, mut data: Vec<Complex64>) -> Vec<f64> {
    transform(grid, &mut data, true);
    let norm = grid.n_tang() as f64;
    data.iter().map(|c| c.re / norm).collect()
}

fn transform(grid: &HalfSpaceGrid, data: &mut [Complex64], inverse: bool) {
    if grid.dim() == 1 {
        return;
    }
    let nt = grid.nt();
    let nv1 = grid.vertical_nodes().len();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(nt) } else { planner.plan_fft_forward(nt) };
    let mut buf = vec![Complex64::new(0.0, 0.0); nt];
    for axis in 0..grid.dim() - 1 {
        let stride = if axis == 0 { 1 } else { nt };
        let outer = grid.n_tang() / nt;
        for o in 0..outer {
            let base = if axis == 0 { o * nt } else { o };
            for j in 0..nv1 {
                for (q, b) in buf.iter_mut().enumerate() {
                    *b = data[(base + q * stride) * nv1 + j];
                }
                fft.process(&mut buf);
                for (q, b) in buf.iter().enumerate() {
                    data[(base + q * stride) * nv1 + j] = *b;
                }
            }
        }
    }
}

/// `|ξ|` of every flat tangential mode.
pub(crate) fn mode_frequencies(grid: &HalfSpaceGrid) -> Vec<f64> {
    let k = grid.wavenumbers();
    (0..grid.n_tang())
        .map(|t| {
            let m = grid.tang_multi(t);
            (0..grid.dim() - 1).map(|a| k[m[a]] * k[m[a]]).sum::<f64>().sqrt()
        })
        .collect()
}

/// Propagators of every distinct frequency at one lag, indexed by mode.
struct ModeTable {
    by_mode: Vec<usize>,
    props: Vec<Arc<Propagator>>,
}

fn mode_table(sigma: f64, grid: &HalfSpaceGrid, t: f64, freqs: &[f64], classes: &[f64]) -> Result<ModeTable> {
    let props =
        classes.iter().map(|&xi| propagator(sigma, grid.vertical_nodes(), t, xi)).collect::<Result<Vec<_>>>()?;
    let by_mode = freqs.iter().map(|f| classes.iter().position(|c| c == f).unwrap()).collect();
    Ok(ModeTable { by_mode, props })
}

fn distinct(freqs: &[f64]) -> Vec<f64> {
    let mut m = BTreeMap::new();
    for f in freqs {
        m.insert(f.to_bits(), *f);
    }
    m.into_values().collect()
}

fn apply_modes(table: &ModeTable, nv1: usize, c: f64, v: &[Complex64], out: &mut [Complex64]) {
    for (mode, &cls) in table.by_mode.iter().enumerate() {
        let p = &table.props[cls];
        let src = &v[mode * nv1..(mode + 1) * nv1];
        let re: Vec<f64> = src.iter().map(|z| z.re).collect();
        let im: Vec<f64> = src.iter().map(|z| z.im).collect();
        let (pr, pi) = (p.apply(&re), p.apply(&im));
        for j in 0..nv1 {
            out[mode * nv1 + j] += c * Complex64::new(pr[j], pi[j]);
        }
    }
}

fn check_growth(u0: &SampledField) -> Result<()> {
    let grid = u0.grid();
    let y = grid.vertical_nodes();
    let nv = y.len() - 1;
    let quarter = y.iter().position(|&v| v >= 0.25 * grid.y_max()).unwrap_or(nv / 2).max(1);
    let scale = u0.slice(0).iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for t in 0..grid.n_tang() {
        let top = u0.at(0, t, nv).abs();
        let mid = u0.at(0, t, quarter).abs();
        if top > 1e-8 * scale && mid > 0.0 {
            let p = (top / mid).ln() / (y[nv] / y[quarter]).ln();
            if p > MAX_GROWTH {
                return Err(LabError::InvalidParameter(format!(
                    "initial datum grows like y^{p:.2} near the top of the grid; the representation integral diverges"
                )));
            }
        }
    }
    Ok(())
}

/// Solves `∂ₛu = L_σu + f` with `u(0) = u₀` (slice 0 of `u0`) on the grid of `f`.
pub fn duhamel_solve(u0: &SampledField, f: &SampledField, sigma: SigmaParam) -> Result<SampledField> {
    if u0.grid() != f.grid() {
        return Err(LabError::InvalidParameter("initial datum and source live on different grids".into()));
    }
    if f.slope().iter().any(|&a| a != 0.0) {
        return Err(LabError::InvalidParameter("source must not carry a tangential slope".into()));
    }
    check_growth(u0)?;
    let grid = f.grid().clone();
    let s = sigma.sigma();
    let (ns, ds) = (grid.ns(), grid.ds());
    let nv1 = grid.vertical_nodes().len();
    let freqs = mode_frequencies(&grid);
    let classes = distinct(&freqs);
    let tables = par::map_range(ns + 1, |lag| mode_table(s, &grid, ds * lag as f64, &freqs, &classes))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let u_hat = forward(&grid, u0.slice(0));
    let f_zero = f.values().iter().all(|&v| v == 0.0);
    let f_hat: Vec<Vec<Complex64>> =
        if f_zero { Vec::new() } else { par::map_range(ns + 1, |k| forward(&grid, f.slice(k))) };
    let slices = par::map_range(ns + 1, |k| {
        let mut acc = vec![Complex64::new(0.0, 0.0); u_hat.len()];
        apply_modes(&tables[k], nv1, 1.0, &u_hat, &mut acc);
        if !f_zero && k > 0 {
            for m in 0..=k {
                let w = if m == 0 || m == k { 0.5 * ds } else { ds };
                apply_modes(&tables[k - m], nv1, w, &f_hat[m], &mut acc);
            }
        }
        inverse(&grid, acc)
    });
    let values: Vec<f64> = slices.into_iter().flatten().collect();
    SampledField::from_values(&grid, values, u0.slope())
}

/// Homogeneous solve `u(s) = P(s)u₀`.
pub fn homogeneous_solve(u0: &SampledField, sigma: SigmaParam) -> Result<SampledField> {
    duhamel_solve(u0, &SampledField::zeros(u0.grid()), sigma)
}

/// `P(t)` applied to one time slice (periodic part only).
pub fn semigroup_apply(grid: &Arc<HalfSpaceGrid>, slice: &[f64], sigma: SigmaParam, t: f64) -> Result<Vec<f64>> {
    let freqs = mode_frequencies(grid);
    let classes = distinct(&freqs);
    let table = mode_table(sigma.sigma(), grid, t, &freqs, &classes)?;
    let v = forward(grid, slice);
    let mut acc = vec![Complex64::new(0.0, 0.0); v.len()];
    apply_modes(&table, grid.vertical_nodes().len(), 1.0, &v, &mut acc);
    Ok(inverse(grid, acc))
}
