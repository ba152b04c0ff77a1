//! Discrete time-space fields on the upper half-space.
//!
//! Vertical nodes are graded quadratically, `y_j = Y (j/N_v)²`, tangential
//! directions live on a periodic box of side `L` and time is uniform. A field
//! stores its periodic part on the nodes plus a constant tangential slope
//! `a·y'`, so tilted waves are represented exactly.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{LabError, Result};
use crate::geometry::HalfSpacePoint;
use crate::quad::{fornberg, lagrange_weights, stencil_start, uniform_weights};

/// Width of the vertical and temporal finite-difference stencils.
pub const FD_WIDTH: usize = 7;
/// Width of the interpolation stencils.
pub const INTERP_WIDTH: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGrid {
    dim: usize,
    box_len: f64,
    nt: usize,
    y: Vec<f64>,
    y_max: f64,
    ns: usize,
    ds: f64,
    tang: Vec<f64>,
}

impl HalfSpaceGrid {
    /// `nv` vertical cells on `[0, y_max]`, `nt` tangential nodes per
    /// direction on a box of side `box_len`, `ns` uniform steps on `[0, horizon]`.
    pub fn new(
        dim: usize,
        nv: usize,
        y_max: f64,
        nt: usize,
        box_len: f64,
        ns: usize,
        horizon: f64,
    ) -> Result<Arc<Self>> {
        if !(1..=3).contains(&dim) {
            return Err(LabError::InvalidParameter(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if nv < FD_WIDTH || ns < 1 || !(y_max > 0.0) || !(horizon > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "grid needs nv ≥ {FD_WIDTH}, ns ≥ 1 and positive extents (nv={nv}, ns={ns}, Y={y_max}, S={horizon})"
            )));
        }
        let nt = if dim == 1 { 1 } else { nt };
        if dim > 1 && (nt < 4 || nt % 2 != 0 || !(box_len > 0.0)) {
            return Err(LabError::InvalidParameter(format!("tangential node count must be even and ≥ 4, got {nt}")));
        }
        let y = (0..=nv).map(|j| y_max * (j as f64 / nv as f64).powi(2)).collect();
        let tang = (0..nt).map(|i| -0.5 * box_len + box_len * i as f64 / nt as f64).collect();
        Ok(Arc::new(Self { dim, box_len, nt, y, y_max, ns, ds: horizon / ns as f64, tang }))
    }

    pub fn one_d(nv: usize, y_max: f64, ns: usize, horizon: f64) -> Result<Arc<Self>> {
        Self::new(1, nv, y_max, 1, 1.0, ns, horizon)
    }

    /// Same extents with every resolution doubled; the vertical and time
    /// nodes of `self` are a subset of the refined ones.
    pub fn refined(&self) -> Arc<Self> {
        let nt = if self.dim == 1 { 1 } else { 2 * self.nt };
        Self::new(self.dim, 2 * self.nv(), self.y_max, nt, self.box_len, 2 * self.ns, self.horizon()).unwrap()
    }

    /// Same grid with a different number of time steps over the same horizon.
    pub fn with_time_steps(&self, ns: usize) -> Arc<Self> {
        Self::new(self.dim, self.nv(), self.y_max, self.nt, self.box_len, ns, self.horizon()).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn box_len(&self) -> f64 {
        self.box_len
    }
    pub fn nt(&self) -> usize {
        self.nt
    }
    pub fn n_tang(&self) -> usize {
        self.nt.pow(self.dim as u32 - 1)
    }
    pub fn nv(&self) -> usize {
        self.y.len() - 1
    }
    pub fn vertical_nodes(&self) -> &[f64] {
        &self.y
    }
    pub fn tangential_nodes(&self) -> &[f64] {
        &self.tang
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn ds(&self) -> f64 {
        self.ds
    }
    pub fn horizon(&self) -> f64 {
        self.ds * self.ns as f64
    }
    pub fn time(&self, k: usize) -> f64 {
        self.ds * k as f64
    }
    pub fn times(&self) -> Vec<f64> {
        (0..=self.ns).map(|k| self.time(k)).collect()
    }
    pub fn slice_len(&self) -> usize {
        self.n_tang() * self.y.len()
    }
    pub fn len(&self) -> usize {
        (self.ns + 1) * self.slice_len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn index(&self, k: usize, t: usize, j: usize) -> usize {
        (k * self.n_tang() + t) * self.y.len() + j
    }

    /// Tangential multi-index of the flat index `t`.
    pub fn tang_multi(&self, t: usize) -> [usize; 2] {
        [t % self.nt, (t / self.nt) % self.nt]
    }

    pub fn tang_coords(&self, t: usize) -> Vec<f64> {
        let m = self.tang_multi(t);
        (0..self.dim - 1).map(|a| self.tang[m[a]]).collect()
    }

    pub fn point(&self, t: usize, j: usize) -> HalfSpacePoint {
        HalfSpacePoint::new(&self.tang_coords(t), self.y[j]).unwrap()
    }

    /// Angular wavenumbers `2π m / L` per FFT index.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.nt as i64;
        (0..n)
            .map(|m| {
                let mm = if m <= n / 2 { m } else { m - n };
                2.0 * std::f64::consts::PI * mm as f64 / self.box_len
            })
            .collect()
    }

    /// Uniform time quadrature weights on `[0, S]`.
    pub fn time_weights(&self) -> Vec<f64> {
        uniform_weights(self.ns, self.ds)
    }

    /// Tangential cell measure of one node.
    pub fn tangential_cell(&self) -> f64 {
        (self.box_len / self.nt as f64).powi(self.dim as i32 - 1)
    }

    pub fn fingerprint(&self) -> String {
        format!(
            "n{}-nv{}-Y{}-nt{}-L{}-ns{}-S{}",
            self.dim,
            self.nv(),
            self.y_max,
            self.nt,
            self.box_len,
            self.ns,
            self.horizon()
        )
    }

    /// Stencil of one interpolation point: per-axis start index and weights.
    pub fn point_stencil(&self, s: f64, y: &HalfSpacePoint) -> Result<PointStencil> {
        let eps = 1e-12 * self.horizon();
        if s < -eps || s > self.horizon() + eps {
            return Err(LabError::OutsideGrid(format!("time {s} outside [0, {}]", self.horizon())));
        }
        let yn = y.vertical();
        if yn > self.y_max * (1.0 + 1e-12) {
            return Err(LabError::OutsideGrid(format!("height {yn} above Y_max = {}", self.y_max)));
        }
        let times = self.times();
        let tw = INTERP_WIDTH.min(times.len());
        let t0 = stencil_start(&times, s, tw);
        let time = (t0, lagrange_weights(s, &times[t0..t0 + tw]));
        let v0 = stencil_start(&self.y, yn, INTERP_WIDTH);
        let vert = (v0, lagrange_weights(yn, &self.y[v0..v0 + INTERP_WIDTH]));
        let mut tang = Vec::new();
        let h = self.box_len / self.nt as f64;
        for &c in y.tangential() {
            // Trigonometric interpolation, exact for the resolved modes.
            let nt = self.nt;
            let mut idx = Vec::with_capacity(nt);
            let mut w = Vec::with_capacity(nt);
            for q in 0..nt {
                let d = (c - self.tang[q]) / h;
                let wq = if d.rem_euclid(nt as f64).abs() < 1e-14 || (d.rem_euclid(nt as f64) - nt as f64).abs() < 1e-14
                {
                    1.0
                } else {
                    let pd = std::f64::consts::PI * d;
                    pd.sin() / (nt as f64 * (pd / nt as f64).tan())
                };
                idx.push(q);
                w.push(wq);
            }
            tang.push((idx, w));
        }
        Ok(PointStencil { time, vert, tang, tangential: y.tangential().to_vec() })
    }

    /// Weights for `∫_0^Y g(y) y^w dy`, exact when `g` is a polynomial of
    /// degree ≤ 5 on each 6-node stencil.
    pub fn vertical_weights(&self, w: f64) -> Vec<f64> {
        vertical_weights(&self.y, w)
    }
}

/// Precomputed interpolation stencil of a single time-space point.
#[derive(Debug, Clone)]
pub struct PointStencil {
    time: (usize, Vec<f64>),
    vert: (usize, Vec<f64>),
    tang: Vec<(Vec<usize>, Vec<f64>)>,
    tangential: Vec<f64>,
}

/// Quadrature weights `∫_0^{y_N} g y^w dy` for nodal values of `g`, built from
/// cell moments of local degree-5 Lagrange interpolants.
pub fn vertical_weights(y: &[f64], w: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    let (gx, gw) = crate::quad::gauss_legendre(16);
    for c in 0..n - 1 {
        let (a, b) = (y[c], y[c + 1]);
        let mid = 0.5 * (a + b);
        let s0 = stencil_start(y, mid, INTERP_WIDTH);
        let nodes = &y[s0..s0 + INTERP_WIDTH];
        if a == 0.0 {
            // Closed-form moments ∫_0^b y^{w+k} dy of the monomial expansion.
            let coeffs = lagrange_monomials(nodes);
            for (i, cf) in coeffs.iter().enumerate() {
                let mut v = 0.0;
                for (k, ck) in cf.iter().enumerate() {
                    v += ck * b.powf(w + k as f64 + 1.0) / (w + k as f64 + 1.0);
                }
                out[s0 + i] += v;
            }
        } else {
            for (x, gwk) in gx.iter().zip(&gw) {
                let yy = mid + 0.5 * (b - a) * x;
                let base = 0.5 * (b - a) * gwk * yy.powf(w);
                let l = lagrange_weights(yy, nodes);
                for i in 0..INTERP_WIDTH {
                    out[s0 + i] += base * l[i];
                }
            }
        }
    }
    out
}

/// Monomial coefficients (in `y`) of the Lagrange basis polynomials.
pub(crate) fn lagrange_monomials(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                denom *= nodes[i] - nodes[j];
                let mut next = vec![0.0; poly.len() + 1];
                for (k, c) in poly.iter().enumerate() {
                    next[k + 1] += c;
                    next[k] -= c * nodes[j];
                }
                poly = next;
            }
            poly.iter().map(|c| c / denom).collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Arc<HalfSpaceGrid>,
    values: Vec<f64>,
    slope: [f64; 2],
}

impl SampledField {
    pub fn zeros(grid: &Arc<HalfSpaceGrid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()], slope: [0.0; 2] }
    }

    pub fn from_values(grid: &Arc<HalfSpaceGrid>, values: Vec<f64>, slope: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidParameter(format!(
                "value array has {} entries, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(LabError::InvalidParameter(format!("non-finite field value {v}")));
        }
        let mut s = [0.0; 2];
        s[..slope.len()].copy_from_slice(slope);
        Ok(Self { grid: grid.clone(), values, slope: s })
    }

    /// Samples a tangentially periodic function.
    pub fn from_fn<F: Fn(f64, &HalfSpacePoint) -> f64>(grid: &Arc<HalfSpaceGrid>, f: F) -> Self {
        Self::from_fn_with_slope(grid, &[], f)
    }

    /// Field `slope·y' + f(s, y)` with `f` tangentially periodic.
    pub fn from_fn_with_slope<F: Fn(f64, &HalfSpacePoint) -> f64>(
        grid: &Arc<HalfSpaceGrid>,
        slope: &[f64],
        f: F,
    ) -> Self {
        let mut out = Self::zeros(grid);
        out.slope[..slope.len()].copy_from_slice(slope);
        for k in 0..=grid.ns() {
            let s = grid.time(k);
            for t in 0..grid.n_tang() {
                for j in 0..=grid.nv() {
                    let i = grid.index(k, t, j);
                    out.values[i] = f(s, &grid.point(t, j));
                }
            }
        }
        out
    }

    /// Time-independent field from an initial profile.
    pub fn initial<F: Fn(&HalfSpacePoint) -> f64>(grid: &Arc<HalfSpaceGrid>, slope: &[f64], f: F) -> Self {
        Self::from_fn_with_slope(grid, slope, |_, y| f(y))
    }

    pub fn grid(&self) -> &Arc<HalfSpaceGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn slope(&self) -> &[f64] {
        &self.slope[..self.grid.dim() - 1]
    }
    pub fn set_slope(&mut self, slope: &[f64]) {
        self.slope = [0.0; 2];
        self.slope[..slope.len()].copy_from_slice(slope);
    }

    /// Periodic part at a node.
    pub fn periodic(&self, k: usize, t: usize, j: usize) -> f64 {
        self.values[self.grid.index(k, t, j)]
    }

    fn slope_term(&self, coords: &[f64]) -> f64 {
        coords.iter().zip(&self.slope).map(|(c, a)| c * a).sum()
    }

    /// Full value at a node, slope included.
    pub fn at(&self, k: usize, t: usize, j: usize) -> f64 {
        self.periodic(k, t, j) + self.slope_term(&self.grid.tang_coords(t))
    }

    /// Periodic values of one time level, `[t][j]` flattened.
    pub fn slice(&self, k: usize) -> &[f64] {
        let l = self.grid.slice_len();
        &self.values[k * l..(k + 1) * l]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let l = self.grid.slice_len();
        &mut self.values[k * l..(k + 1) * l]
    }

    /// Field holding only time level `k`, repeated at every time.
    pub fn frozen_at(&self, k: usize) -> Self {
        let mut out = self.clone();
        let src = self.slice(k).to_vec();
        for kk in 0..=self.grid.ns() {
            out.slice_mut(kk).copy_from_slice(&src);
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out.slope.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid);
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(a, b)| *a += c * b);
        for i in 0..2 {
            out.slope[i] += c * other.slope[i];
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    /// Pointwise map of the full nodal values; the result has no slope part
    /// and is only meaningful when `f(value)` is tangentially periodic.
    pub fn map_nodes<F: Fn(f64, &HalfSpacePoint, f64) -> f64>(&self, f: F) -> Self {
        let g = &self.grid;
        let mut out = Self::zeros(g);
        for k in 0..=g.ns() {
            for t in 0..g.n_tang() {
                for j in 0..=g.nv() {
                    out.values[g.index(k, t, j)] = f(g.time(k), &g.point(t, j), self.at(k, t, j));
                }
            }
        }
        out
    }

    /// Largest absolute nodal value (slope included, over the box).
    pub fn max_abs(&self) -> f64 {
        self.max_abs_from(0)
    }

    /// Largest absolute nodal value over time levels `k ≥ k0`.
    pub fn max_abs_from(&self, k0: usize) -> f64 {
        let g = &self.grid;
        let mut m: f64 = 0.0;
        for k in k0..=g.ns() {
            for t in 0..g.n_tang() {
                let st = self.slope_term(&g.tang_coords(t));
                for j in 0..=g.nv() {
                    m = m.max((self.values[g.index(k, t, j)] + st).abs());
                }
            }
        }
        m
    }

    /// Mixed derivative `∂_s^k ∂_y^α` with `α` ordered tangential first,
    /// vertical last. Tangential derivatives are spectral, vertical and
    /// temporal ones use `FD_WIDTH`-point finite differences.
    pub fn deriv(&self, k_time: usize, alpha: &[usize]) -> Self {
        let dim = self.grid.dim();
        assert_eq!(alpha.len(), dim, "multi-index length must equal the dimension");
        let mut out = self.clone();
        let tang_order: usize = alpha[..dim - 1].iter().sum();
        // Slope contributions: ∂_i (a·y') = a_i, higher derivatives vanish.
        let mut constant = 0.0;
        if k_time == 0 && alpha[dim - 1] == 0 && tang_order == 1 {
            let i = alpha.iter().position(|a| *a == 1).unwrap();
            constant = self.slope[i];
        }
        if tang_order > 0 || k_time > 0 || alpha[dim - 1] > 0 {
            out.slope = [0.0; 2];
        }
        for (axis, &m) in alpha[..dim - 1].iter().enumerate() {
            if m > 0 {
                out.spectral_deriv(axis, m);
            }
        }
        if alpha[dim - 1] > 0 {
            out.vertical_deriv(alpha[dim - 1]);
        }
        if k_time > 0 {
            out.time_deriv(k_time);
        }
        if constant != 0.0 {
            out.values.iter_mut().for_each(|v| *v += constant);
        }
        out
    }

    /// Gradient components (tangential first, vertical last).
    pub fn gradient(&self) -> Vec<Self> {
        let dim = self.grid.dim();
        (0..dim)
            .map(|i| {
                let mut a = vec![0; dim];
                a[i] = 1;
                self.deriv(0, &a)
            })
            .collect()
    }

    fn vertical_deriv(&mut self, m: usize) {
        let g = self.grid.clone();
        let y = g.vertical_nodes();
        let nv1 = y.len();
        let stencils: Vec<(usize, Vec<f64>)> = (0..nv1)
            .map(|j| {
                let s0 = j.saturating_sub(FD_WIDTH / 2).min(nv1 - FD_WIDTH);
                (s0, fornberg(y[j], &y[s0..s0 + FD_WIDTH], m)[m].clone())
            })
            .collect();
        let src = self.values.clone();
        crate::par::for_each_chunk_mut(&mut self.values, nv1, |c, out| {
            let col = &src[c * nv1..(c + 1) * nv1];
            for j in 0..nv1 {
                let (s0, w) = &stencils[j];
                out[j] = w.iter().enumerate().map(|(i, wi)| wi * col[s0 + i]).sum();
            }
        });
    }

    fn time_deriv(&mut self, m: usize) {
        let g = self.grid.clone();
        let times = g.times();
        let nk = times.len();
        let width = FD_WIDTH.min(nk);
        if nk <= m {
            self.values.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let l = g.slice_len();
        let src = self.values.clone();
        for k in 0..nk {
            let s0 = k.saturating_sub(width / 2).min(nk - width);
            let w = fornberg(times[k], &times[s0..s0 + width], m)[m].clone();
            let dst = &mut self.values[k * l..(k + 1) * l];
            for (i, d) in dst.iter_mut().enumerate() {
                *d = w.iter().enumerate().map(|(q, wq)| wq * src[(s0 + q) * l + i]).sum();
            }
        }
    }

    fn spectral_deriv(&mut self, axis: usize, m: usize) {
        let g = self.grid.clone();
        let kx = g.wavenumbers();
        let nt = g.nt();
        let mult: Vec<Complex64> = kx
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if m % 2 == 1 && i == nt / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(m as u32)
                }
            })
            .collect();
        self.apply_tangential_multiplier(axis, |i| mult[i]);
    }

    /// Applies a Fourier multiplier along one tangential axis.
    pub fn apply_tangential_multiplier<M: Fn(usize) -> Complex64>(&mut self, axis: usize, mult: M) {
        let g = self.grid.clone();
        let nt = g.nt();
        let nv1 = g.nv() + 1;
        let stride_t = if axis == 0 { 1 } else { nt };
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(nt);
        let inv = planner.plan_fft_inverse(nt);
        let mut buf = vec![Complex64::new(0.0, 0.0); nt];
        let others = g.n_tang() / nt;
        for k in 0..=g.ns() {
            for o in 0..others {
                // Index of the first node along the axis for this line.
                let base = if axis == 0 { o * nt } else { o % nt + (o / nt) * nt * nt };
                for j in 0..nv1 {
                    for (q, b) in buf.iter_mut().enumerate() {
                        *b = Complex64::new(self.values[g.index(k, base + q * stride_t, j)], 0.0);
                    }
                    fwd.process(&mut buf);
                    for (q, b) in buf.iter_mut().enumerate() {
                        *b *= mult(q);
                    }
                    inv.process(&mut buf);
                    for (q, b) in buf.iter().enumerate() {
                        self.values[g.index(k, base + q * stride_t, j)] = b.re / nt as f64;
                    }
                }
            }
        }
    }

    pub fn stencil(&self, s: f64, y: &HalfSpacePoint) -> Result<PointStencil> {
        self.grid.point_stencil(s, y)
    }

    /// Value at a precomputed stencil.
    pub fn apply(&self, st: &PointStencil) -> f64 {
        let g = &self.grid;
        let (t0, tw) = &st.time;
        let (v0, vw) = &st.vert;
        let mut acc = 0.0;
        match st.tang.len() {
            0 => {
                for (a, wa) in tw.iter().enumerate() {
                    let base = g.index(t0 + a, 0, *v0);
                    let mut s = 0.0;
                    for (b, wb) in vw.iter().enumerate() {
                        s += wb * self.values[base + b];
                    }
                    acc += wa * s;
                }
            }
            1 => {
                let (ti, tww) = &st.tang[0];
                for (a, wa) in tw.iter().enumerate() {
                    for (c, wc) in ti.iter().zip(tww) {
                        let base = g.index(t0 + a, *c, *v0);
                        let mut s = 0.0;
                        for (b, wb) in vw.iter().enumerate() {
                            s += wb * self.values[base + b];
                        }
                        acc += wa * wc * s;
                    }
                }
            }
            _ => {
                let (ti, tww) = &st.tang[0];
                let (ui, uww) = &st.tang[1];
                let nt = g.nt();
                for (a, wa) in tw.iter().enumerate() {
                    for (c, wc) in ti.iter().zip(tww) {
                        for (d, wd) in ui.iter().zip(uww) {
                            let base = g.index(t0 + a, c + d * nt, *v0);
                            let mut s = 0.0;
                            for (b, wb) in vw.iter().enumerate() {
                                s += wb * self.values[base + b];
                            }
                            acc += wa * wc * wd * s;
                        }
                    }
                }
            }
        }
        acc + self.slope_term(&st.tangential)
    }

    /// Interpolated value at an arbitrary time-space point of the grid.
    pub fn eval(&self, s: f64, y: &HalfSpacePoint) -> Result<f64> {
        Ok(self.apply(&self.stencil(s, y)?))
    }

    /// Vertical profile `y ↦ u(s_k, y', y)` at a tangential node.
    pub fn column(&self, k: usize, t: usize) -> Vec<f64> {
        let g = &self.grid;
        let st = self.slope_term(&g.tang_coords(t));
        (0..=g.nv()).map(|j| self.periodic(k, t, j) + st).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertical_weights_integrate_weighted_polynomials() {
        let g = HalfSpaceGrid::one_d(16, 4.0, 4, 1.0).unwrap();
        for &w in &[-0.5, 0.0, 1.0] {
            let q = g.vertical_weights(w);
            let s: f64 = g.vertical_nodes().iter().zip(&q).map(|(y, q)| q * y.powi(3)).sum();
            let exact = 4f64.powf(w + 4.0) / (w + 4.0);
            assert!((s / exact - 1.0).abs() < 1e-12, "w={w}: {s} vs {exact}");
        }
    }

    #[test]
    fn derivatives_of_polynomials_are_exact() {
        let g = HalfSpaceGrid::one_d(12, 3.0, 8, 1.0).unwrap();
        let u = SampledField::from_fn(&g, |s, y| y.vertical().powi(3) + s * s * y.vertical());
        let d2 = u.deriv(0, &[2]);
        let ds = u.deriv(1, &[0]);
        for k in 0..=8 {
            for j in 0..=12 {
                let (s, y) = (g.time(k), g.vertical_nodes()[j]);
                assert!((d2.at(k, 0, j) - 6.0 * y).abs() < 1e-8);
                assert!((ds.at(k, 0, j) - 2.0 * s * y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tangential_derivative_and_slope() {
        let g = HalfSpaceGrid::new(2, 8, 2.0, 16, 16.0, 2, 1.0).unwrap();
        let kk = 2.0 * std::f64::consts::PI / 16.0;
        let u = SampledField::from_fn_with_slope(&g, &[0.3], |_, y| (kk * y.tangential()[0]).sin() * y.vertical());
        let d = u.deriv(0, &[1, 0]);
        for t in 0..16 {
            let x = g.tang_coords(t)[0];
            let exact = 0.3 + kk * (kk * x).cos() * g.vertical_nodes()[4];
            assert!((d.at(1, t, 4) - exact).abs() < 1e-12);
        }
        let p = HalfSpacePoint::new(&[0.37], 0.81).unwrap();
        let v = u.eval(0.5, &p).unwrap();
        let exact = 0.3 * 0.37 + (kk * 0.37).sin() * 0.81;
        assert!((v - exact).abs() < 1e-12);
    }
}
