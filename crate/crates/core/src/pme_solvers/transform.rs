//! The von Mises transformation `(s, y) ↦ (t, x) = ((1+σ)s, y', w(s, y))`
//! from graph heights to the pressure, and from the pressure to the density.
//!
//! The pressure is the inverse of `yₙ ↦ w(s, y', yₙ)`: `v(t, x', w(s, y)) = yₙ`.
//! It is sampled on a uniform `xₙ` grid with `v = 0` below the interface
//! `xₙ = w(s, y', 0)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField, INTERP_WIDTH};
use crate::geometry::HalfSpacePoint;
use crate::quad::{fornberg, lagrange_weights, stencil_start, uniform_weights};
use crate::weighted_measure::SigmaParam;

use super::waves::pressure_to_density;

/// Pressure values at or below this count as the empty region.
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;
/// Tolerance of the monotone root finder.
pub const ROOT_TOL: f64 = 1e-12;
const FD: usize = 7;

/// Root of a continuous `f` with `f(a) ≤ 0 ≤ f(b)` (Illinois variant of regula falsi).
pub fn monotone_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = if (fb - fa).abs() > 0.0 { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
        let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() < tol * (1.0 + c.abs()) {
            return c;
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol * (1.0 + a.abs()) {
            return 0.5 * (a + b);
        }
    }
    0.5 * (a + b)
}

/// Local degree-5 interpolant of nodal data.
fn interp(nodes: &[f64], vals: &[f64], z: f64) -> f64 {
    let s0 = stencil_start(nodes, z, INTERP_WIDTH);
    let w = lagrange_weights(z, &nodes[s0..s0 + INTERP_WIDTH]);
    w.iter().zip(&vals[s0..s0 + INTERP_WIDTH]).map(|(a, b)| a * b).sum()
}

/// Solves `col(y) = x` on the interpolated column; `None` below its first value.
fn invert_column(nodes: &[f64], col: &[f64], x: f64) -> Result<Option<f64>> {
    let n = col.len();
    if x < col[0] {
        return Ok(None);
    }
    if x > col[n - 1] {
        return Err(LabError::OutsideGrid(format!("target xₙ = {x:.6} above the column range {:.6}", col[n - 1])));
    }
    let j = col.partition_point(|c| *c <= x).saturating_sub(1).min(n - 2);
    let y = monotone_root(|y| interp(nodes, col, y) - x, nodes[j], nodes[j + 1], ROOT_TOL);
    Ok(Some(y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryReport {
    /// `sup |∇w − eₙ|` over the nodes, the measured `cε`.
    pub c_eps: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pairs: usize,
    /// Ratios lie in `[1 − cε, (1 − cε)^{−1}]`.
    pub within: bool,
}

/// Pressure on `(t, x', xₙ)` coordinates, `t = (1+σ)s`.
#[derive(Debug, Clone)]
pub struct PressureField {
    pub sigma: SigmaParam,
    grid: Arc<HalfSpaceGrid>,
    /// Columns `w(s_k, y'_t, ·)` flattened `[k][t][j]`.
    columns: Vec<f64>,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// `v` flattened `[k][t][i]`.
    pub values: Vec<f64>,
    /// Interface height `w(s_k, y'_t, 0)`, flattened `[k][t]`.
    pub interface: Vec<f64>,
}

impl PressureField {
    pub fn grid(&self) -> &Arc<HalfSpaceGrid> {
        &self.grid
    }
    pub fn nx(&self) -> usize {
        self.x.len()
    }
    fn column(&self, k: usize, t: usize) -> &[f64] {
        let nv1 = self.grid.nv() + 1;
        let c = k * self.grid.n_tang() + t;
        &self.columns[c * nv1..(c + 1) * nv1]
    }
    pub fn at(&self, k: usize, t: usize, i: usize) -> f64 {
        self.values[(k * self.grid.n_tang() + t) * self.nx() + i]
    }
    pub fn interface_at(&self, k: usize, t: usize) -> f64 {
        self.interface[k * self.grid.n_tang() + t]
    }

    /// Pressure at an arbitrary `xₙ` of a grid column, by root finding.
    pub fn eval(&self, k: usize, t: usize, xn: f64) -> Result<f64> {
        Ok(invert_column(self.grid.vertical_nodes(), self.column(k, t), xn)?.unwrap_or(0.0))
    }

    pub fn density_at(&self, k: usize, t: usize, i: usize) -> f64 {
        pressure_to_density(self.at(k, t, i), self.sigma)
    }

    /// Largest density on the sampled grid.
    pub fn max_density(&self) -> f64 {
        self.values.iter().map(|&v| pressure_to_density(v, self.sigma)).fold(0.0, f64::max)
    }
}

/// Builds the pressure of a graph height `w` with `nx` uniform `xₙ` nodes.
///
/// The `xₙ` range reaches from below the lowest interface up to the lowest
/// value of `w` at half the grid height. Also measures the bi-Lipschitz
/// constants of `y ↦ (y', w(s, y))` over `pairs` seeded point pairs.
pub fn von_mises(
    w: &SampledField,
    sigma: SigmaParam,
    nx: usize,
    pairs: usize,
    seed: u64,
) -> Result<(PressureField, IsometryReport)> {
    let g = w.grid().clone();
    if w.slope().iter().any(|&a| a != 0.0) {
        return Err(LabError::InvalidParameter("von Mises transform needs a tangentially periodic height".into()));
    }
    if nx < FD {
        return Err(LabError::InvalidParameter(format!("need at least {FD} pressure nodes, got {nx}")));
    }
    let nv1 = g.nv() + 1;
    let dim = g.dim();
    let mut a = vec![0; dim];
    a[dim - 1] = 1;
    let dn = w.deriv(0, &a);
    let min_dn = dn.values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_dn > 0.0) {
        return Err(LabError::Monotonicity(format!("min ∂ₙw = {min_dn:.3e}; the height is not invertible")));
    }
    let mut columns = Vec::with_capacity(g.len());
    for k in 0..=g.ns() {
        for t in 0..g.n_tang() {
            let col = w.column(k, t);
            if col.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(LabError::Monotonicity(format!("column (k={k}, t={t}) is not increasing")));
            }
            columns.extend(col);
        }
    }
    let top = g.vertical_nodes().partition_point(|&y| y <= 0.5 * g.y_max()) - 1;
    let ncol = (g.ns() + 1) * g.n_tang();
    let interface: Vec<f64> = (0..ncol).map(|c| columns[c * nv1]).collect();
    let x_hi = (0..ncol).map(|c| columns[c * nv1 + top]).fold(f64::INFINITY, f64::min);
    let (i_lo, i_hi) = interface.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let room = x_hi - i_hi;
    if !(room > 0.0) {
        return Err(LabError::OutsideGrid("the pressure window above the interface is empty".into()));
    }
    let x_lo = i_lo - 0.5 * room;
    let x: Vec<f64> = (0..nx).map(|i| x_lo + (x_hi - x_lo) * i as f64 / (nx - 1) as f64).collect();
    let y = g.vertical_nodes();
    let values = crate::par::map_range(ncol, |c| {
        let col = &columns[c * nv1..(c + 1) * nv1];
        x.iter().map(|&xn| invert_column(y, col, xn).map(|v| v.unwrap_or(0.0))).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?
    .concat();
    let times = g.times().iter().map(|s| sigma.wave_speed() * s).collect();
    let pf = PressureField { sigma, grid: g.clone(), columns, times, x, values, interface };

    // cε from the nodal gradient of u = w − w_tw.
    let grad = w.gradient();
    let c_eps = (0..w.values().len())
        .map(|i| {
            grad.iter()
                .enumerate()
                .map(|(d, gr)| (gr.values()[i] - if d == dim - 1 { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let l = g.box_len();
    let ytop = y[top];
    for _ in 0..pairs {
        let s = g.horizon() * rng.random::<f64>();
        let p = |rng: &mut ChaCha8Rng| {
            let tang: Vec<f64> = (0..dim - 1).map(|_| l * (rng.random::<f64>() - 0.5)).collect();
            HalfSpacePoint::new(&tang, ytop * rng.random::<f64>()).unwrap()
        };
        let (y1, y2) = (p(&mut rng), p(&mut rng));
        let (w1, w2) = (w.eval(s, &y1)?, w.eval(s, &y2)?);
        let dt: f64 = y1.tangential().iter().zip(y2.tangential()).map(|(a, b)| (a - b).powi(2)).sum();
        let img = (dt + (w1 - w2).powi(2)).sqrt();
        let src = y1.euclid_dist(&y2);
        if src > 1e-9 {
            lo = lo.min(img / src);
            hi = hi.max(img / src);
        }
    }
    let slack = 1e-9;
    let within = c_eps < 1.0 && lo >= 1.0 - c_eps - slack && hi <= 1.0 / (1.0 - c_eps) + slack;
    Ok((pf, IsometryReport { c_eps, min_ratio: lo, max_ratio: hi, pairs, within }))
}

/// Largest `|w − w'|` over nodes where `w'` re-inverts the sampled pressure.
///
/// Only heights at least `FD` pressure cells above the interface are used,
/// where the sampled column is smooth.
pub fn round_trip_error(pf: &PressureField) -> Result<f64> {
    let g = pf.grid().clone();
    let h = pf.x[1] - pf.x[0];
    let nx = pf.nx();
    let mut worst: f64 = 0.0;
    for k in 0..=g.ns() {
        for t in 0..g.n_tang() {
            let c = k * g.n_tang() + t;
            let vcol = &pf.values[c * nx..(c + 1) * nx];
            let wcol = pf.column(k, t);
            let floor = pf.interface_at(k, t) + FD as f64 * h;
            for (j, &xw) in wcol.iter().enumerate() {
                if xw < floor || xw > pf.x[nx - 1] {
                    continue;
                }
                let target = g.vertical_nodes()[j];
                let i = pf.x.partition_point(|v| *v <= xw).saturating_sub(1).min(nx - 2);
                let f = |x: f64| interp(&pf.x, vcol, x) - target;
                // Widen the bracket by one cell to absorb interpolation wiggle.
                let (a, b) = (pf.x[i.saturating_sub(1)], pf.x[(i + 2).min(nx - 1)]);
                if f(a) > 0.0 || f(b) < 0.0 {
                    return Err(LabError::Monotonicity(format!("sampled pressure not monotone near xₙ = {xw:.4}")));
                }
                let x = monotone_root(f, a, b, ROOT_TOL);
                worst = worst.max((x - xw).abs());
            }
        }
    }
    Ok(worst)
}

/// Periodic central weights of order 6 for the first and second derivative.
const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

#[derive(Debug, Clone, PartialEq)]
pub struct PmpeResidual {
    /// Largest `|∂ₜv − (m−1)vΔv − |∇v|²|` over the checked nodes.
    pub max_abs: f64,
    pub nodes: usize,
}

/// Strong pressure-equation residual at nodes whose finite-difference
/// stencils lie inside the positivity set.
pub fn pmpe_residual(pf: &PressureField) -> Result<PmpeResidual> {
    let g = pf.grid().clone();
    let nx = pf.nx();
    let nk = pf.times.len();
    let ntg = g.n_tang();
    let nt = g.nt();
    let dim = g.dim();
    let m1 = pf.sigma.exponent_m() - 1.0;
    let ht = g.box_len() / nt as f64;
    let width_t = FD.min(nk);
    if nk < 3 {
        return Err(LabError::InvalidParameter("pressure residual needs at least 3 time levels".into()));
    }
    let positive = |k: usize, t: usize, i: usize| pf.at(k, t, i) > POSITIVITY_THRESHOLD;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in 0..nk {
        let k0 = k.saturating_sub(width_t / 2).min(nk - width_t);
        let wt = &fornberg(pf.times[k], &pf.times[k0..k0 + width_t], 1)[1];
        for t in 0..ntg {
            let m = g.tang_multi(t);
            let shift = |axis: usize, d: isize| -> usize {
                let mut mm = m;
                mm[axis] = ((m[axis] as isize + d).rem_euclid(nt as isize)) as usize;
                mm[0] + mm[1] * nt
            };
            for i in 0..nx {
                let i0 = i.saturating_sub(FD / 2).min(nx - FD);
                let mut ok = (i0..i0 + FD).all(|q| positive(k, t, q)) && (k0..k0 + width_t).all(|q| positive(q, t, i));
                for axis in 0..dim - 1 {
                    ok = ok && (-3..=3).all(|d| positive(k, shift(axis, d), i));
                }
                if !ok {
                    continue;
                }
                let xs = &pf.x[i0..i0 + FD];
                let wx = fornberg(pf.x[i], xs, 2);
                let col = |q: usize| pf.at(k, t, q);
                let vx: f64 = (0..FD).map(|q| wx[1][q] * col(i0 + q)).sum();
                let vxx: f64 = (0..FD).map(|q| wx[2][q] * col(i0 + q)).sum();
                let vt: f64 = (0..width_t).map(|q| wt[q] * pf.at(k0 + q, t, i)).sum();
                let mut grad2 = vx * vx;
                let mut lap = vxx;
                for axis in 0..dim - 1 {
                    let d1: f64 = (0..7).map(|q| D1[q] * pf.at(k, shift(axis, q as isize - 3), i)).sum::<f64>() / ht;
                    let d2: f64 =
                        (0..7).map(|q| D2[q] * pf.at(k, shift(axis, q as isize - 3), i)).sum::<f64>() / (ht * ht);
                    grad2 += d1 * d1;
                    lap += d2;
                }
                let v = pf.at(k, t, i);
                worst = worst.max((vt - m1 * v * lap - grad2).abs());
                count += 1;
            }
        }
    }
    Ok(PmpeResidual { max_abs: worst, nodes: count })
}

/// Test function `B((t−t_c)/r_t) B((xₙ−c)/r) ∏ ½(1 + cos(2π(xᵢ−θᵢ)/L))`
/// with `B(ξ) = (1 − ξ²)⁸` on `|ξ| < 1`; the tangential factors are periodic
/// on the box of side `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub tangential_shift: Vec<f64>,
    pub period: f64,
    pub xn_center: f64,
    pub xn_radius: f64,
}

/// `(B, B', B'')` for `B(ξ) = (1 − ξ²)⁸`.
fn bump(x: f64) -> (f64, f64, f64) {
    if x.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 - x * x;
    (d.powi(8), -16.0 * x * d.powi(7), -16.0 * d.powi(7) + 224.0 * x * x * d.powi(6))
}

impl TestFunction {
    /// `(∂ₜφ, Δφ)` at `(t, x)`.
    pub fn derivatives(&self, t: f64, x: &[f64]) -> (f64, f64) {
        let (bt, dbt, _) = bump((t - self.t_center) / self.t_radius);
        let n = x.len() - 1;
        let (bn, _, ddbn) = bump((x[n] - self.xn_center) / self.xn_radius);
        if bt == 0.0 || (bn == 0.0 && ddbn == 0.0) {
            return (0.0, 0.0);
        }
        let k = 2.0 * std::f64::consts::PI / self.period;
        let cosines: Vec<f64> = x[..n].iter().zip(&self.tangential_shift).map(|(xi, c)| (k * (xi - c)).cos()).collect();
        let tang: f64 = cosines.iter().map(|c| 0.5 * (1.0 + c)).product();
        let mut lap_t = 0.0;
        for (i, c) in cosines.iter().enumerate() {
            let others: f64 =
                cosines.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| 0.5 * (1.0 + q)).product();
            lap_t += -0.5 * k * k * c * others;
        }
        let lap = ddbn / self.xn_radius.powi(2) * tang + bn * lap_t;
        (dbt / self.t_radius * bn * tang, bt * lap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    pub function: TestFunction,
    /// `∫ρ∂ₜφ + ρᵐΔφ`.
    pub value: f64,
    /// `value` over `∫|ρ∂ₜφ| + |ρᵐΔφ|`, zero when both vanish.
    pub relative: f64,
}

/// Weak porous-medium residual of the density against each test function.
pub fn pme_weak_residuals(pf: &PressureField, battery: &[TestFunction]) -> Vec<WeakResidual> {
    let g = pf.grid().clone();
    let nx = pf.nx();
    let m = pf.sigma.exponent_m();
    let tw = uniform_weights(pf.times.len() - 1, pf.times[1] - pf.times[0]);
    let xw = uniform_weights(nx - 1, pf.x[1] - pf.x[0]);
    let cell = g.tangential_cell();
    crate::par::map(battery, |phi| {
        let (mut val, mut mag) = (0.0, 0.0);
        for (k, &t) in pf.times.iter().enumerate() {
            for tg in 0..g.n_tang() {
                let mut coords = g.tang_coords(tg);
                coords.push(0.0);
                let last = coords.len() - 1;
                for i in 0..nx {
                    let rho = pf.density_at(k, tg, i);
                    if rho == 0.0 {
                        continue;
                    }
                    coords[last] = pf.x[i];
                    let (pt, lap) = phi.derivatives(t, &coords);
                    let w = tw[k] * xw[i] * cell;
                    let (a, b) = (rho * pt, rho.powf(m) * lap);
                    val += w * (a + b);
                    mag += w * (a.abs() + b.abs());
                }
            }
        }
        WeakResidual { function: phi.clone(), value: val, relative: if mag > 0.0 { val / mag } else { 0.0 } }
    })
}

/// `count` test functions straddling the interface plus one supported in
/// the empty region (always the last entry).
pub fn interface_battery(pf: &PressureField, count: usize, seed: u64) -> Vec<TestFunction> {
    let g = pf.grid().clone();
    let dim = g.dim();
    let t_end = *pf.times.last().unwrap();
    let (x_lo, x_hi) = (pf.x[0], *pf.x.last().unwrap());
    let i_lo = pf.interface.iter().copied().fold(f64::INFINITY, f64::min);
    let i_hi = pf.interface.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rx = (0.45 * (i_lo - x_lo)).min(0.3 * (x_hi - i_hi)).min(1.0);
    let rt = 0.4 * t_end;
    let l = g.box_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 1);
    for _ in 0..count {
        let tc = t_end * (0.4 + 0.2 * rng.random::<f64>());
        let k = ((tc / t_end) * (pf.times.len() - 1) as f64).round() as usize;
        let shift: Vec<f64> = (0..dim - 1).map(|_| l * (rng.random::<f64>() - 0.5)).collect();
        let iface = (0..g.n_tang()).map(|t| pf.interface_at(k, t)).sum::<f64>() / g.n_tang() as f64;
        out.push(TestFunction {
            t_center: tc,
            t_radius: rt,
            tangential_shift: shift,
            period: l,
            xn_center: iface + 0.5 * rx * (rng.random::<f64>() - 0.5),
            xn_radius: rx,
        });
    }
    out.push(TestFunction {
        t_center: 0.5 * t_end,
        t_radius: rt,
        tangential_shift: vec![0.0; dim - 1],
        period: l,
        xn_center: x_lo + rx * 1.01,
        xn_radius: rx,
    });
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfacePoint {
    pub t: f64,
    pub tangential: Vec<f64>,
    pub xn: f64,
}

/// Level set `ρ = level` sampled on every `(t, x')` column by monotone
/// bracketing along `xₙ`.
pub fn interface_extract(pf: &PressureField, level: f64) -> Result<Vec<InterfacePoint>> {
    if !(level >= 0.0) {
        return Err(LabError::InvalidParameter(format!("level must be nonnegative, got {level}")));
    }
    let g = pf.grid().clone();
    let (x_lo, x_hi) = (pf.x[0], *pf.x.last().unwrap());
    let sigma = pf.sigma;
    let mut out = Vec::new();
    for k in 0..pf.times.len() {
        for t in 0..g.n_tang() {
            let rho = |x: f64| pf.eval(k, t, x).map(|v| pressure_to_density(v, sigma));
            let top = rho(x_hi)?;
            if level >= top {
                return Err(LabError::InvalidParameter(format!(
                    "level {level} is not below the field maximum {top:.6} on column (k={k}, t={t})"
                )));
            }
            let xn = if level == 0.0 {
                // Boundary of the positivity set: bisection on `ρ > 0`.
                let (mut a, mut b) = (x_lo, x_hi);
                while b - a > ROOT_TOL * (1.0 + a.abs()) {
                    let c = 0.5 * (a + b);
                    if rho(c)? > 0.0 {
                        b = c;
                    } else {
                        a = c;
                    }
                }
                0.5 * (a + b)
            } else {
                let f = |x: f64| rho(x).unwrap_or(f64::NAN) - level;
                monotone_root(f, x_lo, x_hi, ROOT_TOL)
            };
            out.push(InterfacePoint { t: pf.times[k], tangential: g.tang_coords(t), xn });
        }
    }
    Ok(out)
}

/// Largest tangential difference quotient of an extracted level set.
pub fn level_set_lipschitz(pf: &PressureField, pts: &[InterfacePoint]) -> f64 {
    let g = pf.grid();
    if g.dim() == 1 {
        return 0.0;
    }
    let nt = g.nt();
    let ntg = g.n_tang();
    let h = g.box_len() / nt as f64;
    let mut worst: f64 = 0.0;
    for k in 0..pf.times.len() {
        for t in 0..ntg {
            let m = g.tang_multi(t);
            for axis in 0..g.dim() - 1 {
                let mut mm = m;
                mm[axis] = (m[axis] + 1) % nt;
                let n = mm[0] + mm[1] * nt;
                let d = (pts[k * ntg + n].xn - pts[k * ntg + t].xn).abs() / h;
                worst = worst.max(d);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pme_solvers::waves::WaveFamily;

    #[test]
    fn flat_wave_maps_to_linear_pressure() {
        let g = HalfSpaceGrid::one_d(16, 8.0, 8, 1.0).unwrap();
        let s = SigmaParam::new(0.0).unwrap();
        let fam = WaveFamily::flat(s, 1);
        let (pf, iso) = von_mises(&fam.w_field(&g), s, 41, 50, 1).unwrap();
        for k in 0..pf.times.len() {
            for i in 0..pf.nx() {
                let exact = (pf.x[i] + pf.times[k]).max(0.0);
                assert!((pf.at(k, 0, i) - exact).abs() < 1e-10);
            }
        }
        assert!(iso.c_eps < 1e-12);
        assert!((iso.min_ratio - 1.0).abs() < 1e-12 && (iso.max_ratio - 1.0).abs() < 1e-12);
        let lvl = interface_extract(&pf, 0.5).unwrap();
        for p in lvl {
            assert!((p.xn - (1.0 - p.t)).abs() < 1e-9);
        }
    }
}
