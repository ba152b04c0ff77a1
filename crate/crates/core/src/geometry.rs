//! Intrinsic geometry of the closed upper half-space `H̄ = {y_n ≥ 0}`.
//!
//! The working metric is the explicit expression
//! `|y−z| / (√y_n + √z_n + √|y−z|)`, which is comparable to the intrinsic
//! distance up to the factor `C_D`. Balls, cylinders, cutoffs and the
//! exponential weight are all built on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::quad;
use crate::weighted_measure::SigmaParam;

/// Comparability constant between the intrinsic and the working metric.
pub const C_D: f64 = 12.0;
/// Lipschitz constant of the exponential weight.
pub const C_L: f64 = 64.0;
/// Admissible ratio `δ₂/δ₁` for cutoff functions.
pub const CUTOFF_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpacePoint {
    dim: usize,
    tangential: [f64; 2],
    vertical: f64,
}

impl HalfSpacePoint {
    /// Point with `tangential.len() == dim − 1` and `vertical ≥ 0`.
    pub fn new(tangential: &[f64], vertical: f64) -> Result<Self> {
        let dim = tangential.len() + 1;
        if dim > 3 {
            return Err(LabError::InvalidParameter(format!("dimension {dim} not supported (n ≤ 3)")));
        }
        if !(vertical >= 0.0) || !vertical.is_finite() {
            return Err(LabError::InvalidParameter(format!("vertical coordinate must be ≥ 0, got {vertical}")));
        }
        let mut t = [0.0; 2];
        t[..tangential.len()].copy_from_slice(tangential);
        Ok(Self { dim, tangential: t, vertical })
    }

    /// One-dimensional point `y_n`.
    pub fn vertical_only(vertical: f64) -> Result<Self> {
        Self::new(&[], vertical)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tangential(&self) -> &[f64] {
        &self.tangential[..self.dim - 1]
    }

    pub fn vertical(&self) -> f64 {
        self.vertical
    }

    /// Same tangential part, different height (clamped at 0).
    pub fn with_vertical(&self, v: f64) -> Self {
        Self { vertical: v.max(0.0), ..*self }
    }

    pub fn with_tangential(&self, t: &[f64]) -> Self {
        let mut p = *self;
        p.tangential[..t.len()].copy_from_slice(t);
        p
    }

    /// All coordinates, vertical last.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.tangential().to_vec();
        c.push(self.vertical);
        c
    }

    pub fn euclid_dist(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = (self.vertical - other.vertical).powi(2);
        for i in 0..self.dim - 1 {
            s += (self.tangential[i] - other.tangential[i]).powi(2);
        }
        s.sqrt()
    }
}

/// `d̃(y,z) = |y−z| / (y_n² + z_n² + |y−z|²)^{1/4}`.
pub fn quasi_dist(y: &HalfSpacePoint, z: &HalfSpacePoint) -> f64 {
    let d = y.euclid_dist(z);
    if d == 0.0 {
        return 0.0;
    }
    d / (y.vertical.powi(2) + z.vertical.powi(2) + d * d).powf(0.25)
}

/// Working metric `|y−z| / (√y_n + √z_n + √|y−z|)`.
pub fn ref_dist(y: &HalfSpacePoint, z: &HalfSpacePoint) -> f64 {
    let d = y.euclid_dist(z);
    if d == 0.0 {
        return 0.0;
    }
    d / (y.vertical.sqrt() + z.vertical.sqrt() + d.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpacePoint {
    pub time: f64,
    pub point: HalfSpacePoint,
}

/// `√(|s − τ| + ref_dist(y,z)²)`.
pub fn timespace_dist(a: &TimeSpacePoint, b: &TimeSpacePoint) -> f64 {
    ((a.time - b.time).abs() + ref_dist(&a.point, &b.point).powi(2)).sqrt()
}

/// Largest Euclidean distance `D` from `z` admitted at height `y_n`:
/// the positive root of `D = r (√y_n + √z_n + √D)`.
fn admitted_distance(r: f64, y_n: f64, z_n: f64) -> f64 {
    let a = y_n.sqrt() + z_n.sqrt();
    let q = 0.5 * (r + (r * r + 4.0 * r * a).sqrt());
    q * q
}

fn bisect<F: Fn(f64) -> bool>(inside: F, mut a: f64, mut b: f64) -> f64 {
    // `inside(a)` holds, `inside(b)` fails; `a > b` is allowed.
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if inside(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicBall {
    pub center: HalfSpacePoint,
    pub radius: f64,
}

impl IntrinsicBall {
    pub fn new(center: HalfSpacePoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(LabError::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, y: &HalfSpacePoint) -> bool {
        ref_dist(y, &self.center) <= self.radius
    }

    /// Vertical range `[lo, hi]` of the ball.
    pub fn vertical_extent(&self) -> (f64, f64) {
        let (r, z) = (self.radius, self.center.vertical);
        let inside = |y: f64| (y - z).abs() <= admitted_distance(r, y, z);
        let lo = if inside(0.0) { 0.0 } else { bisect(inside, z, 0.0) };
        let mut top = z + 1.0 + 8.0 * r * (r + z.sqrt());
        while inside(top) {
            top *= 2.0;
        }
        let hi = bisect(inside, z, top);
        (lo, hi)
    }

    /// Tangential Euclidean radius of the section at height `y_n`, if the
    /// section is nonempty.
    pub fn section_radius(&self, y_n: f64) -> Option<f64> {
        let big_d = admitted_distance(self.radius, y_n, self.center.vertical);
        let dv = y_n - self.center.vertical;
        let s = big_d * big_d - dv * dv;
        if s >= 0.0 {
            Some(s.sqrt())
        } else {
            None
        }
    }

    /// Euclidean radius of a ball contained in this one: `c_d^{−2} r(r+√z_n)`.
    pub fn inner_euclid_radius(&self) -> f64 {
        self.radius * (self.radius + self.center.vertical.sqrt()) / (C_D * C_D)
    }

    /// Euclidean radius containing the ball for the working metric:
    /// `4 r (r + √z_n)`.
    pub fn outer_euclid_radius(&self) -> f64 {
        4.0 * self.radius * (self.radius + self.center.vertical.sqrt())
    }

    /// Outer radius `2r(r + 2√z_n)` as stated for the intrinsic metric.
    pub fn outer_euclid_radius_intrinsic(&self) -> f64 {
        2.0 * self.radius * (self.radius + 2.0 * self.center.vertical.sqrt())
    }

    /// Intrinsic outer radius with the comparability slack applied to `r`:
    /// `2 c_d r (c_d r + 2√z_n)`.
    pub fn outer_euclid_radius_with_slack(&self) -> f64 {
        2.0 * C_D * self.radius * (C_D * self.radius + 2.0 * self.center.vertical.sqrt())
    }

    /// Euclidean diameter of the ball (largest extent over all directions is
    /// attained vertically or horizontally; both are checked).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.vertical_extent();
        let mut best = hi - lo;
        if self.center.dim > 1 {
            let n = 64;
            for k in 0..=n {
                let y = lo + (hi - lo) * k as f64 / n as f64;
                if let Some(rr) = self.section_radius(y) {
                    best = best.max(2.0 * rr);
                }
            }
        }
        best
    }
}

/// `|B|_σ = ∫_B y_n^σ dy`.
///
/// The vertical integral is taken in the variable `t = y_n^{1+σ}/(1+σ)`,
/// which absorbs the weight; sections contribute `ω_{n−1} R(y_n)^{n−1}`.
pub fn ball_measure(ball: &IntrinsicBall, sigma: SigmaParam) -> Result<f64> {
    let s = sigma.sigma();
    let (lo, hi) = ball.vertical_extent();
    let n = ball.center.dim;
    let a1 = 1.0 + s;
    if n == 1 {
        return Ok((hi.powf(a1) - lo.powf(a1)) / a1);
    }
    let (tlo, thi) = (lo.powf(a1) / a1, hi.powf(a1) / a1);
    let section = |t: f64| {
        let y = (a1 * t).max(0.0).powf(1.0 / a1);
        match ball.section_radius(y) {
            Some(r) if n == 2 => 2.0 * r,
            Some(r) => std::f64::consts::PI * r * r,
            None => 0.0,
        }
    };
    // Square-root behaviour at both ends of the section profile.
    let tz = ball.center.vertical.powf(a1) / a1;
    quad::integrate_split(section, tlo, thi, &[tz], 0.0, 1e-9)
}

/// Reference scale `rⁿ (r + √z_n)^{n+2σ}` of the ball measure.
pub fn ball_measure_scale(ball: &IntrinsicBall, sigma: SigmaParam) -> f64 {
    let n = ball.center.dim as f64;
    let r = ball.radius;
    r.powf(n) * (r + ball.center.vertical.sqrt()).powf(n + 2.0 * sigma.sigma())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderKind {
    /// `(r²/2, r²) × B_r(z)`.
    Standard,
    /// `(r²/4, r²) × B_{2r}(z)`.
    Increased,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicCylinder {
    pub center: HalfSpacePoint,
    pub scale: f64,
    pub kind: CylinderKind,
}

impl ParabolicCylinder {
    pub fn new(center: HalfSpacePoint, scale: f64, kind: CylinderKind) -> Result<Self> {
        IntrinsicBall::new(center, scale)?;
        Ok(Self { center, scale, kind })
    }

    pub fn time_window(&self) -> (f64, f64) {
        let r2 = self.scale * self.scale;
        match self.kind {
            CylinderKind::Standard => (0.5 * r2, r2),
            CylinderKind::Increased => (0.25 * r2, r2),
        }
    }

    pub fn ball(&self) -> IntrinsicBall {
        let r = match self.kind {
            CylinderKind::Standard => self.scale,
            CylinderKind::Increased => 2.0 * self.scale,
        };
        IntrinsicBall { center: self.center, radius: r }
    }

    /// Lebesgue measure of the cylinder.
    pub fn lebesgue_measure(&self) -> Result<f64> {
        let (a, b) = self.time_window();
        Ok((b - a) * ball_measure(&self.ball(), SigmaParam::new(0.0)?)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub center: HalfSpacePoint,
    pub scale: f64,
    pub outer_fraction: f64,
    pub inner_fraction: f64,
}

/// Smooth cutoff equal to 1 on `B_{δ₂ r}(y₀)` and 0 outside `B_{δ₁ r}(y₀)`.
///
/// The profile is a `C^∞` step in the smooth surrogate
/// `ρ(y) = |y−y₀| / √(y_n + y₀ₙ + |y−y₀|)`, which satisfies
/// `ref_dist ≤ ρ ≤ √3 ref_dist` and is smooth up to the boundary.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub spec: CutoffSpec,
    lo: f64,
    hi: f64,
}

pub fn build_cutoff(spec: CutoffSpec) -> Result<Cutoff> {
    let (d1, d2) = (spec.outer_fraction, spec.inner_fraction);
    if !(spec.scale > 0.0) {
        return Err(LabError::InvalidParameter(format!("cutoff scale must be positive, got {}", spec.scale)));
    }
    if !(d1 > 0.0 && d1 <= 1.0) {
        return Err(LabError::InvalidParameter(format!("outer fraction must lie in (0,1], got {d1}")));
    }
    if !(d2 > 0.0) || d2 >= d1 {
        return Err(LabError::InvalidParameter(format!("inner fraction {d2} must lie in (0, outer fraction {d1})")));
    }
    if d2 > CUTOFF_RATIO * d1 {
        return Err(LabError::InvalidParameter(format!(
            "inner fraction {d2} exceeds the admissible threshold {CUTOFF_RATIO}·δ₁ = {}",
            CUTOFF_RATIO * d1
        )));
    }
    Ok(Cutoff { spec, lo: 3f64.sqrt() * d2 * spec.scale, hi: d1 * spec.scale })
}

/// `C^∞` step: 1 for `t ≤ a`, 0 for `t ≥ b`.
pub fn smooth_step(t: f64, a: f64, b: f64) -> f64 {
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let u = (t - a) / (b - a);
    let p = g(1.0 - u);
    let q = g(u);
    if p + q == 0.0 {
        return if u < 0.5 { 1.0 } else { 0.0 };
    }
    p / (p + q)
}

impl Cutoff {
    pub fn surrogate_dist(&self, y: &HalfSpacePoint) -> f64 {
        let c = &self.spec.center;
        let d = y.euclid_dist(c);
        if d == 0.0 {
            return 0.0;
        }
        d / (y.vertical + c.vertical + d).sqrt()
    }

    pub fn eval(&self, y: &HalfSpacePoint) -> f64 {
        smooth_step(self.surrogate_dist(y), self.lo, self.hi)
    }

    /// Derivative scale `r (r + √y₀ₙ)` used to normalise `|∂^α η|`.
    pub fn derivative_scale(&self) -> f64 {
        self.spec.scale * (self.spec.scale + self.spec.center.vertical.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiWeight {
    pub amplitude: f64,
    pub regularizer: f64,
    pub anchor: HalfSpacePoint,
}

impl PsiWeight {
    pub fn new(amplitude: f64, regularizer: f64, anchor: HalfSpacePoint) -> Result<Self> {
        if !(regularizer > 0.0) {
            return Err(LabError::InvalidParameter(format!("regularizer must be positive, got {regularizer}")));
        }
        Ok(Self { amplitude, regularizer, anchor })
    }

    pub fn lipschitz_constant(&self) -> f64 {
        C_L
    }
}

/// `Ψ(y) = ζ d̃(y,z)² / √(ε + d̃(y,z)²)`.
pub fn psi_eval(w: &PsiWeight, y: &HalfSpacePoint) -> f64 {
    let q = quasi_dist(y, &w.anchor).powi(2);
    w.amplitude * q / (w.regularizer + q).sqrt()
}

/// Central-difference gradient of `f` at `y`; vertical steps stay in `H̄`.
pub fn fd_gradient<F: Fn(&HalfSpacePoint) -> f64>(f: F, y: &HalfSpacePoint, h: f64) -> Vec<f64> {
    let c = y.coords();
    let n = c.len();
    let mut g = vec![0.0; n];
    for i in 0..n {
        let mut p = c.clone();
        let mut m = c.clone();
        let (mut hp, mut hm) = (h, h);
        if i == n - 1 && c[i] < h {
            hm = c[i];
        }
        p[i] += hp;
        m[i] -= hm;
        if hm == 0.0 {
            hp = h;
        }
        let pt = |v: &Vec<f64>| HalfSpacePoint::new(&v[..n - 1], v[n - 1].max(0.0)).unwrap();
        g[i] = (f(&pt(&p)) - f(&pt(&m))) / (hp + hm);
    }
    g
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, spread: f64) -> HalfSpacePoint {
    let t: Vec<f64> = (0..dim - 1).map(|_| rng.random_range(-spread..spread)).collect();
    // Heights log-uniform over many decades, with some exact boundary points.
    let v = if rng.random_bool(0.1) { 0.0 } else { 10f64.powf(rng.random_range(-6.0..2.0)) };
    HalfSpacePoint::new(&t, v).unwrap()
}

/// Seeded random pair of points; tangential offsets and heights both span
/// many scales so that boundary and interior configurations are mixed.
pub fn random_pair(rng: &mut ChaCha8Rng, dim: usize) -> (HalfSpacePoint, HalfSpacePoint) {
    let y = random_point(rng, dim, 1.0);
    let scale = 10f64.powf(rng.random_range(-5.0..2.0));
    let mut z = random_point(rng, dim, scale);
    let t: Vec<f64> = y.tangential().iter().zip(z.tangential()).map(|(a, b)| a + b).collect();
    z = z.with_tangential(&t);
    if rng.random_bool(0.3) {
        z = z.with_vertical(y.vertical + scale * rng.random_range(-1.0..1.0));
    }
    (y, z)
}

/// Extreme ratios `ref/quasi` and `quasi/ref` over seeded random pairs.
#[derive(Debug, Clone, Copy)]
pub struct EquivalenceReport {
    pub pairs: usize,
    pub max_ref_over_quasi: f64,
    pub max_quasi_over_ref: f64,
}

pub fn metric_equivalence(dim: usize, pairs: usize, seed: u64) -> EquivalenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ dim as u64);
    let mut rep = EquivalenceReport { pairs: 0, max_ref_over_quasi: 0.0, max_quasi_over_ref: 0.0 };
    while rep.pairs < pairs {
        let (y, z) = random_pair(&mut rng, dim);
        let (a, b) = (ref_dist(&y, &z), quasi_dist(&y, &z));
        if a == 0.0 || b == 0.0 {
            continue;
        }
        rep.pairs += 1;
        rep.max_ref_over_quasi = rep.max_ref_over_quasi.max(a / b);
        rep.max_quasi_over_ref = rep.max_quasi_over_ref.max(b / a);
    }
    rep
}

/// Largest observed `ref(x,z) / (ref(x,y) + ref(y,z))` over seeded triples.
pub fn quasi_triangle_constant(dim: usize, triples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7 * dim as u64));
    let mut k: f64 = 0.0;
    for _ in 0..triples {
        let (x, y) = random_pair(&mut rng, dim);
        let (_, mut z) = random_pair(&mut rng, dim);
        if rng.random_bool(0.5) {
            // Third point at a comparable scale to the first pair.
            let s = x.euclid_dist(&y).max(1e-12);
            let t: Vec<f64> = y.tangential().iter().map(|a| a + s * rng.random_range(-1.0..1.0)).collect();
            z = y.with_tangential(&t).with_vertical(y.vertical + s * rng.random_range(-1.0..1.0));
        }
        let lhs = ref_dist(&x, &z);
        let rhs = ref_dist(&x, &y) + ref_dist(&y, &z);
        if rhs > 0.0 {
            k = k.max(lhs / rhs);
        }
    }
    k
}

/// Fitted slopes of `log diam(B_r(z))` against `log r` in the regimes
/// `r ≫ √z_n` and `r ≪ √z_n`.
#[derive(Debug, Clone, Copy)]
pub struct RegimeSlopes {
    pub boundary: f64,
    pub interior: f64,
}

impl RegimeSlopes {
    pub fn ratio(&self) -> f64 {
        self.boundary / self.interior
    }
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

pub fn regime_slopes(dim: usize, z_n: f64) -> Result<RegimeSlopes> {
    let sz = z_n.sqrt();
    let center = HalfSpacePoint::new(&vec![0.0; dim - 1], z_n)?;
    let fit = |lo: f64, hi: f64| -> Result<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..=12 {
            let r = lo * (hi / lo).powf(k as f64 / 12.0);
            let b = IntrinsicBall::new(center, r)?;
            xs.push(r.ln());
            ys.push(b.diameter().ln());
        }
        Ok(least_squares_slope(&xs, &ys).0)
    };
    Ok(RegimeSlopes { boundary: fit(1e3 * sz, 1e5 * sz)?, interior: fit(1e-5 * sz, 1e-3 * sz)? })
}

/// Counts of the Euclidean sandwich check over seeded balls and points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichReport {
    pub checked: usize,
    /// Points in the intrinsic ball outside the outer Euclidean ball.
    pub outer_violations: usize,
    /// Points in the inner Euclidean ball outside the intrinsic ball.
    pub inner_violations: usize,
}

/// Checks `B^E_{r(r+√z)/c_d²}(z) ⊂ B_r(z) ⊂ B^E_{4r(r+√z)}(z)` at seeded
/// points placed at random fractions of both radii.
pub fn euclidean_sandwich(dim: usize, balls: usize, points: usize, seed: u64) -> Result<SandwichReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(13 * dim as u64));
    let mut rep = SandwichReport { checked: 0, outer_violations: 0, inner_violations: 0 };
    for _ in 0..balls {
        let z = if rng.random_bool(0.2) { 0.0 } else { 10f64.powf(rng.random_range(-4.0..2.0)) };
        let center = HalfSpacePoint::new(&vec![0.0; dim - 1], z)?;
        let ball = IntrinsicBall::new(center, 10f64.powf(rng.random_range(-3.0..1.0)))?;
        let (inner, outer) = (ball.inner_euclid_radius(), ball.outer_euclid_radius());
        for _ in 0..points {
            let dir: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let rad = if rng.random_bool(0.5) { inner } else { outer } * rng.random_range(0.0..1.5);
            let mut c: Vec<f64> = dir.iter().map(|v| v / norm * rad).collect();
            c[dim - 1] = (c[dim - 1] + z).abs();
            let y = HalfSpacePoint::new(&c[..dim - 1], c[dim - 1])?;
            let d = y.euclid_dist(&center);
            rep.checked += 1;
            if ball.contains(&y) && d > outer * (1.0 + 1e-12) {
                rep.outer_violations += 1;
            }
            if d <= inner && !ball.contains(&y) {
                rep.inner_violations += 1;
            }
        }
    }
    Ok(rep)
}

/// Extreme values of `|B_r(z)|_σ / (rⁿ(r+√z_n)^{n+2σ})` and of the doubling
/// constant over a dyadic `(r, z_n)` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureSweep {
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max |B_{κr}|_σ / (κⁿ(1+κ^{n+2σ}) |B_r|_σ)`.
    pub doubling_c: f64,
}

/// Sweeps `r = 2^i` and `z_n ∈ {0} ∪ {2^j}` over `decades` decades centred
/// at one, and the doubling ratio at factor `kappa`.
pub fn ball_measure_sweep(dim: usize, sigma: SigmaParam, decades: f64, kappa: f64) -> Result<MeasureSweep> {
    // Even half-width keeps narrower sweeps nested inside wider ones.
    let half = 2 * (0.25 * decades * std::f64::consts::LOG2_10).ceil() as i32;
    let n = dim as f64;
    let growth = kappa.powf(n) * (1.0 + kappa.powf(n + 2.0 * sigma.sigma()));
    let mut heights = vec![0.0];
    heights.extend((-half..=half).step_by(2).map(|j| 2f64.powi(j)));
    let mut out = MeasureSweep { samples: 0, min_ratio: f64::INFINITY, max_ratio: 0.0, doubling_c: 0.0 };
    for &z in &heights {
        let center = HalfSpacePoint::new(&vec![0.0; dim - 1], z)?;
        for i in (-half..=half).step_by(2) {
            let ball = IntrinsicBall::new(center, 2f64.powi(i))?;
            let m = ball_measure(&ball, sigma)?;
            let ratio = m / ball_measure_scale(&ball, sigma);
            let big = ball_measure(&IntrinsicBall::new(center, kappa * ball.radius)?, sigma)?;
            out.samples += 1;
            out.min_ratio = out.min_ratio.min(ratio);
            out.max_ratio = out.max_ratio.max(ratio);
            out.doubling_c = out.doubling_c.max(big / (growth * m));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(v: f64) -> HalfSpacePoint {
        HalfSpacePoint::vertical_only(v).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert!((quasi_dist(&p1(1.0), &p1(0.0)) - 2f64.powf(-0.25)).abs() < 1e-15);
        assert!((ref_dist(&p1(1.0), &p1(0.0)) - 0.5).abs() < 1e-15);
        assert_eq!(ref_dist(&p1(3.0), &p1(3.0)), 0.0);
        let a = TimeSpacePoint { time: 0.0, point: p1(2.0) };
        let b = TimeSpacePoint { time: 4.0, point: p1(2.0) };
        assert!((timespace_dist(&a, &b) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn vertical_extent_matches_membership() {
        let b = IntrinsicBall::new(p1(2.0), 0.3).unwrap();
        let (lo, hi) = b.vertical_extent();
        assert!((ref_dist(&p1(lo), &b.center) - 0.3).abs() < 1e-9);
        assert!((ref_dist(&p1(hi), &b.center) - 0.3).abs() < 1e-9);
        let b0 = IntrinsicBall::new(p1(0.0), 0.5).unwrap();
        let (lo, hi) = b0.vertical_extent();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0).abs() < 1e-9, "extent at the boundary is 4r²");
    }

    #[test]
    fn ball_measure_n1_sigma0_is_length() {
        let b = IntrinsicBall::new(p1(5.0), 0.2).unwrap();
        let (lo, hi) = b.vertical_extent();
        let m = ball_measure(&b, SigmaParam::new(0.0).unwrap()).unwrap();
        assert!((m - (hi - lo)).abs() < 1e-12);
    }

    #[test]
    fn ball_measure_n2_matches_direct_area() {
        let c = HalfSpacePoint::new(&[0.0], 1.0).unwrap();
        let b = IntrinsicBall::new(c, 0.4).unwrap();
        let m = ball_measure(&b, SigmaParam::new(0.0).unwrap()).unwrap();
        let (lo, hi) = b.vertical_extent();
        let direct = quad::integrate(|y| 2.0 * b.section_radius(y).unwrap_or(0.0), lo, hi, 1e-12, 1e-10).unwrap();
        assert!((m / direct - 1.0).abs() < 1e-7);
    }

    #[test]
    fn cutoff_rejects_thresholds() {
        let c = p1(1.0);
        let spec = CutoffSpec { center: c, scale: 1.0, outer_fraction: 0.8, inner_fraction: 0.3 };
        let e = build_cutoff(spec).unwrap_err();
        assert!(e.to_string().contains("threshold"));
        let spec = CutoffSpec { inner_fraction: 0.9, ..spec };
        assert!(build_cutoff(spec).is_err());
        let ok = build_cutoff(CutoffSpec { inner_fraction: 0.2, ..spec }).unwrap();
        assert_eq!(ok.eval(&c), 1.0);
    }

    #[test]
    fn psi_zero_at_anchor_and_sign() {
        let a = p1(1.0);
        let w = PsiWeight::new(-0.5, 0.1, a).unwrap();
        assert_eq!(psi_eval(&w, &a), 0.0);
        assert!(psi_eval(&w, &p1(3.0)) < 0.0);
        assert!(PsiWeight::new(1.0, 0.0, a).is_err());
    }
}
