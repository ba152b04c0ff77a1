//! Discrete semigroup matrices `P(t)_{ij} = ∫ K_ξ(t, y_i, z) ℓ_j(z) dz`.
//!
//! `ℓ_j` are the local degree-5 Lagrange cardinal functions of the vertical
//! grid (the same stencils as the grid quadrature), so `P(t)` applied to
//! nodal values integrates the kernel against the piecewise interpolant
//! exactly up to quadrature tolerance. Above `Y` the interpolant of the last
//! four nodes is extended as a cubic.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::kernel::ln_h;
use crate::error::Result;
use crate::field::{lagrange_monomials, INTERP_WIDTH};
use crate::par;
use crate::quad::{integrate_vec, stencil_start};

/// Cells farther than this many `t` (in `(√y − √z)²`) are skipped.
const FAR_FIELD: f64 = 45.0;
const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-12;
const TAIL_WIDTH: usize = 4;

#[derive(Debug, Clone)]
pub struct Propagator {
    n: usize,
    data: Vec<f64>,
}

impl Propagator {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `out += c · P v`.
    pub fn apply_add(&self, c: f64, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o += c * self.row(i).iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

type Key = (u64, usize, u64, u64, u64, u64);

fn cache() -> &'static RwLock<HashMap<Key, Arc<Propagator>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<Propagator>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached propagator for order `σ`, vertical nodes `y`, lag `t ≥ 0`, frequency `|ξ|`.
pub fn propagator(sigma: f64, y: &[f64], t: f64, xi: f64) -> Result<Arc<Propagator>> {
    if t == 0.0 {
        return Ok(Arc::new(Propagator::identity(y.len())));
    }
    let key = (sigma.to_bits(), y.len(), y[1].to_bits(), y[y.len() - 1].to_bits(), t.to_bits(), xi.abs().to_bits());
    if let Some(p) = cache().read().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let p = Arc::new(build(sigma, y, t, xi.abs())?);
    cache().write().unwrap().entry(key).or_insert_with(|| p.clone());
    Ok(p)
}

/// Drops all cached propagators.
pub fn clear_cache() {
    cache().write().unwrap().clear();
}

fn build(sigma: f64, y: &[f64], t: f64, xi: f64) -> Result<Propagator> {
    let n = y.len();
    // Stencils and monomial bases are per cell, shared by all rows.
    let cells: Vec<(usize, Vec<Vec<f64>>)> = (0..n - 1)
        .map(|c| {
            let (a, b) = (y[c], y[c + 1]);
            let h = b - a;
            let s0 = stencil_start(y, 0.5 * (a + b), INTERP_WIDTH);
            let scaled: Vec<f64> = y[s0..s0 + INTERP_WIDTH].iter().map(|v| (v - a) / h).collect();
            (s0, lagrange_monomials(&scaled))
        })
        .collect();
    let tail_s0 = n - TAIL_WIDTH;
    let h_tail = y[n - 1] - y[n - 2];
    let tail_nodes: Vec<f64> = y[tail_s0..].iter().map(|v| (v - y[n - 1]) / h_tail).collect();
    let tail_basis = lagrange_monomials(&tail_nodes);
    let rows = par::map_range(n, |i| -> Result<Vec<f64>> {
        let yi = y[i];
        let mut row = vec![0.0; n];
        let sy = yi.sqrt();
        let far = |a: f64, b: f64| {
            let (sa, sb) = (a.sqrt(), b.sqrt());
            let d = if sy < sa {
                sa - sy
            } else if sy > sb {
                sy - sb
            } else {
                0.0
            };
            d * d > FAR_FIELD * t
        };
        for (c, (s0, basis)) in cells.iter().enumerate() {
            let (a, b) = (y[c], y[c + 1]);
            if far(a, b) {
                continue;
            }
            let h = b - a;
            let m = if c == 0 {
                // z = b v^{1/(1+σ)} absorbs the z^σ factor.
                let p = 1.0 + sigma;
                let jac = b.powf(p) / p;
                integrate_vec::<INTERP_WIDTH, _>(
                    |v| {
                        let z = b * v.powf(1.0 / p);
                        let k = jac * ln_h(sigma, t, yi, z, xi).exp();
                        powers(k, z / h)
                    },
                    0.0,
                    1.0,
                    ABS_TOL,
                    REL_TOL,
                )?
            } else {
                integrate_vec::<INTERP_WIDTH, _>(
                    |z| powers((sigma * z.ln() + ln_h(sigma, t, yi, z, xi)).exp(), (z - a) / h),
                    a,
                    b,
                    ABS_TOL,
                    REL_TOL,
                )?
            };
            for (q, coef) in basis.iter().enumerate() {
                row[s0 + q] += coef.iter().zip(&m).map(|(c, m)| c * m).sum::<f64>();
            }
        }
        let top = y[n - 1];
        if !far(top, f64::INFINITY) {
            let m = integrate_vec::<TAIL_WIDTH, _>(
                |u| {
                    if u >= 1.0 {
                        return [0.0; TAIL_WIDTH];
                    }
                    let d = 1.0 - u;
                    let z = top + h_tail * u / d;
                    let k = (sigma * z.ln() + ln_h(sigma, t, yi, z, xi)).exp() * h_tail / (d * d);
                    let s = (z - top) / h_tail;
                    let mut out = [0.0; TAIL_WIDTH];
                    let mut p = k;
                    for o in out.iter_mut() {
                        *o = if p.is_finite() { p } else { 0.0 };
                        p *= s;
                    }
                    out
                },
                0.0,
                1.0,
                ABS_TOL,
                REL_TOL,
            )?;
            for (q, coef) in tail_basis.iter().enumerate() {
                row[tail_s0 + q] += coef.iter().zip(&m).map(|(c, m)| c * m).sum::<f64>();
            }
        }
        Ok(row)
    });
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        data.extend(r?);
    }
    Ok(Propagator { n, data })
}

fn powers(k: f64, s: f64) -> [f64; INTERP_WIDTH] {
    let mut out = [0.0; INTERP_WIDTH];
    let mut p = k;
    for o in out.iter_mut() {
        *o = p;
        p *= s;
    }
    out
}
