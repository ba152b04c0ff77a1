//! Weighted measures `μ_σ = y_n^σ dy`, weighted Lebesgue norms of sampled
//! fields, the Muckenhoupt window and the Hardy-inequality check.

use crate::error::{LabError, Result};
use crate::field::SampledField;
use crate::geometry::{HalfSpacePoint, IntrinsicBall, ParabolicCylinder};
use crate::quad::gauss_legendre;

/// Degeneracy exponent `σ > −1` with the derived porous-medium constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaParam {
    sigma: f64,
}

impl SigmaParam {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > -1.0) || !sigma.is_finite() {
            return Err(LabError::InvalidSigma(sigma));
        }
        Ok(Self { sigma })
    }

    /// From the porous-medium exponent `m > 1`: `σ = (2−m)/(m−1)`.
    pub fn from_exponent_m(m: f64) -> Result<Self> {
        if !(m > 1.0) {
            return Err(LabError::InvalidParameter(format!("porous-medium exponent must exceed 1, got {m}")));
        }
        Self::new((2.0 - m) / (m - 1.0))
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `m = (2+σ)/(1+σ)`.
    pub fn exponent_m(&self) -> f64 {
        (2.0 + self.sigma) / (1.0 + self.sigma)
    }

    /// `c_m = m/(m−1)`, which equals `2+σ`.
    pub fn pressure_constant(&self) -> f64 {
        let m = self.exponent_m();
        m / (m - 1.0)
    }

    /// Normal speed `1+σ` of the graph travelling wave.
    pub fn wave_speed(&self) -> f64 {
        1.0 + self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Whole grid (tangential box times `[0, Y]`) at one time level.
    WholeGrid {
        time_index: usize,
    },
    Ball {
        ball: IntrinsicBall,
        time_index: usize,
    },
    /// Time-space cylinder; integrates over its time window as well.
    Cylinder(ParabolicCylinder),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormSpec {
    /// Exponent `p ∈ [1, ∞]`; use `f64::INFINITY` for the sup norm.
    pub p: f64,
    /// Weight exponent `w` of `y_n^w`.
    pub weight: f64,
    pub region: Region,
}

/// Quadrature nodes and weights for `∫_B g(y) y_n^w dy`.
///
/// The vertical variable is `t = y_n^{1+w}/(1+w)`, mapped to `θ ∈ [0, π]`
/// by `t = a + (b−a)(1−cos θ)/2` so the square-root behaviour of the ball
/// sections at both ends is resolved.
pub fn ball_rule(ball: &IntrinsicBall, weight: f64, order: usize) -> Vec<(HalfSpacePoint, f64)> {
    let (lo, hi) = ball.vertical_extent();
    let a1 = 1.0 + weight;
    let (ta, tb) = (lo.powf(a1) / a1, hi.powf(a1) / a1);
    let (gx, gw) = gauss_legendre(order);
    let n = ball.center.dim();
    let c = ball.center.tangential().to_vec();
    let mut out = Vec::with_capacity(order * if n == 1 { 1 } else { order });
    for (x, w) in gx.iter().zip(&gw) {
        let th = 0.5 * std::f64::consts::PI * (x + 1.0);
        let t = ta + (tb - ta) * 0.5 * (1.0 - th.cos());
        let jac = (tb - ta) * 0.5 * th.sin() * 0.5 * std::f64::consts::PI * w;
        let y = (a1 * t).max(0.0).powf(1.0 / a1).clamp(lo, hi);
        if n == 1 {
            out.push((ball.center.with_vertical(y), jac));
            continue;
        }
        let r = match ball.section_radius(y) {
            Some(r) => r,
            None => continue,
        };
        if n == 2 {
            for (u, wu) in gx.iter().zip(&gw) {
                let p = ball.center.with_tangential(&[c[0] + r * u]).with_vertical(y);
                out.push((p, jac * r * wu));
            }
        } else {
            // Polar coordinates on the disc section.
            let na = 2 * order;
            for (u, wu) in gx.iter().zip(&gw) {
                let rho = 0.5 * r * (u + 1.0);
                for q in 0..na {
                    let phi = 2.0 * std::f64::consts::PI * q as f64 / na as f64;
                    let p =
                        ball.center.with_tangential(&[c[0] + rho * phi.cos(), c[1] + rho * phi.sin()]).with_vertical(y);
                    out.push((p, jac * 0.5 * r * wu * rho * 2.0 * std::f64::consts::PI / na as f64));
                }
            }
        }
    }
    out
}

fn check_spec(spec: &WeightedNormSpec) -> Result<()> {
    if !(spec.p >= 1.0) {
        return Err(LabError::InvalidParameter(format!("norm exponent must be ≥ 1, got {}", spec.p)));
    }
    if spec.p.is_finite() && spec.weight <= -1.0 {
        return Err(LabError::InvalidParameter(format!(
            "weight exponent {} is not locally integrable at the boundary",
            spec.weight
        )));
    }
    Ok(())
}

fn ball_inside_grid(field: &SampledField, ball: &IntrinsicBall) -> Result<()> {
    let (_, hi) = ball.vertical_extent();
    if hi > field.grid().y_max() {
        return Err(LabError::OutsideGrid(format!(
            "ball reaches height {hi:.4} above Y_max = {}",
            field.grid().y_max()
        )));
    }
    if ball.center.dim() != field.grid().dim() {
        return Err(LabError::OutsideGrid("ball dimension differs from the grid".into()));
    }
    Ok(())
}

/// `(∫_Ω |u|^p y_n^w)^{1/p}`, or the sup over nodes and quadrature points for
/// `p = ∞` (where the weight plays no role).
pub fn weighted_norm(field: &SampledField, spec: &WeightedNormSpec) -> Result<f64> {
    check_spec(spec)?;
    let g = field.grid();
    let p = spec.p;
    let acc = |v: f64| if p.is_finite() { v.abs().powf(p) } else { v.abs() };
    let finish = |s: f64| if p.is_finite() { s.powf(1.0 / p) } else { s };
    match spec.region {
        Region::WholeGrid { time_index: k } => {
            if k > g.ns() {
                return Err(LabError::OutsideGrid(format!("time index {k} beyond {}", g.ns())));
            }
            if !p.is_finite() {
                let mut m: f64 = 0.0;
                for t in 0..g.n_tang() {
                    for j in 0..=g.nv() {
                        m = m.max(field.at(k, t, j).abs());
                    }
                }
                return Ok(m);
            }
            let wv = g.vertical_weights(spec.weight);
            let cell = g.tangential_cell();
            let mut s = 0.0;
            for t in 0..g.n_tang() {
                for (j, w) in wv.iter().enumerate() {
                    s += cell * w * acc(field.at(k, t, j));
                }
            }
            Ok(finish(s))
        }
        Region::Ball { ball, time_index: k } => {
            ball_inside_grid(field, &ball)?;
            let time = g.time(k.min(g.ns()));
            let rule = ball_rule(&ball, if p.is_finite() { spec.weight } else { 0.0 }, 32);
            let mut s: f64 = 0.0;
            for (pt, w) in &rule {
                let v = field.eval(time, pt)?;
                s = if p.is_finite() { s + w * acc(v) } else { s.max(v.abs()) };
            }
            if !p.is_finite() {
                for t in 0..g.n_tang() {
                    for j in 0..=g.nv() {
                        if ball.contains(&g.point(t, j)) {
                            s = s.max(field.at(k.min(g.ns()), t, j).abs());
                        }
                    }
                }
            }
            Ok(finish(s))
        }
        Region::Cylinder(cyl) => {
            let ball = cyl.ball();
            ball_inside_grid(field, &ball)?;
            let (a, b) = cyl.time_window();
            if b > g.horizon() * (1.0 + 1e-12) {
                return Err(LabError::OutsideGrid(format!("cylinder ends at s = {b}, horizon is {}", g.horizon())));
            }
            let rule = ball_rule(&ball, if p.is_finite() { spec.weight } else { 0.0 }, 24);
            let (tx, tw) = gauss_legendre(8);
            let mut s: f64 = 0.0;
            for (x, wt) in tx.iter().zip(&tw) {
                let time = 0.5 * (a + b) + 0.5 * (b - a) * x;
                for (pt, w) in &rule {
                    let v = field.eval(time, pt)?;
                    s = if p.is_finite() { s + 0.5 * (b - a) * wt * w * acc(v) } else { s.max(v.abs()) };
                }
            }
            Ok(finish(s))
        }
    }
}

/// Open interval `(−1, p(σ+1) − 1)` of admissible power weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuckenhouptWindow {
    pub lower: f64,
    pub upper: f64,
}

impl MuckenhouptWindow {
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lower && theta < self.upper
    }

    /// Whether the unweighted case `ϑ = 0` is admissible, i.e. `p > 1/(1+σ)`.
    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }
}

pub fn muckenhoupt_window(sigma: SigmaParam, p: f64) -> Result<MuckenhouptWindow> {
    if !(p > 1.0) {
        return Err(LabError::InvalidParameter(format!("Muckenhoupt window needs p > 1, got {p}")));
    }
    Ok(MuckenhouptWindow { lower: -1.0, upper: p * (sigma.sigma() + 1.0) - 1.0 })
}

#[derive(Debug, Clone, Copy)]
pub struct HardyReport {
    pub shift: usize,
    /// `‖u‖_{L²_σ}`.
    pub lhs: f64,
    /// `‖∂_n^shift u‖_{L²_{2·shift+σ}}`.
    pub rhs: f64,
    /// Measured `lhs / rhs` (0 when both sides vanish).
    pub constant: f64,
}

/// Compares `‖u‖_{L²_σ}` with `‖∂_n^k u‖_{L²_{2k+σ}}` on one time level.
/// The field must vanish near the top of the grid.
pub fn hardy_check(field: &SampledField, sigma: SigmaParam, shift: usize, time_index: usize) -> Result<HardyReport> {
    if !(1..=2).contains(&shift) {
        return Err(LabError::InvalidParameter(format!("shift must be 1 or 2, got {shift}")));
    }
    let g = field.grid();
    let scale = field.max_abs();
    let nv = g.nv();
    for t in 0..g.n_tang() {
        for j in nv.saturating_sub(3)..=nv {
            if field.at(time_index, t, j).abs() > 1e-12 * scale.max(1e-300) {
                return Err(LabError::InvalidParameter(
                    "Hardy check needs vertically compact support inside the grid".into(),
                ));
            }
        }
    }
    let dim = g.dim();
    let mut alpha = vec![0; dim];
    alpha[dim - 1] = shift;
    let d = field.deriv(0, &alpha);
    let s = sigma.sigma();
    let lhs = weighted_norm(field, &WeightedNormSpec { p: 2.0, weight: s, region: Region::WholeGrid { time_index } })?;
    let rhs = weighted_norm(
        &d,
        &WeightedNormSpec { p: 2.0, weight: 2.0 * shift as f64 + s, region: Region::WholeGrid { time_index } },
    )?;
    let constant = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(HardyReport { shift, lhs, rhs, constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::HalfSpaceGrid;
    use crate::geometry::ball_measure;

    #[test]
    fn sigma_constants_round_trip() {
        let s = SigmaParam::new(0.0).unwrap();
        assert_eq!(s.exponent_m(), 2.0);
        assert_eq!(s.pressure_constant(), 2.0);
        let t = SigmaParam::from_exponent_m(1.5).unwrap();
        assert!((t.sigma() - 1.0).abs() < 1e-15);
        assert!(matches!(SigmaParam::new(-1.0), Err(LabError::InvalidSigma(_))));
    }

    #[test]
    fn muckenhoupt_examples() {
        let w = muckenhoupt_window(SigmaParam::new(0.0).unwrap(), 2.0).unwrap();
        assert_eq!((w.lower, w.upper), (-1.0, 1.0));
        assert!(w.contains_zero());
        let w = muckenhoupt_window(SigmaParam::new(-0.5).unwrap(), 2.0).unwrap();
        assert_eq!(w.upper, 0.0);
        assert!(!w.contains_zero());
        assert_eq!(muckenhoupt_window(SigmaParam::new(1.0).unwrap(), 4.0).unwrap().upper, 7.0);
        assert!(muckenhoupt_window(SigmaParam::new(1.0).unwrap(), 1.0).is_err());
    }

    #[test]
    fn linear_profile_norm() {
        let g = HalfSpaceGrid::one_d(16, 1.0, 1, 1.0).unwrap();
        let u = SampledField::initial(&g, &[], |y| y.vertical());
        let v =
            weighted_norm(&u, &WeightedNormSpec { p: 2.0, weight: 0.0, region: Region::WholeGrid { time_index: 0 } })
                .unwrap();
        assert!((v - 1.0 / 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn unit_field_on_ball_gives_ball_measure() {
        for dim in 1..=3 {
            let g = HalfSpaceGrid::new(dim, 16, 8.0, 8, 16.0, 1, 1.0).unwrap();
            let u = SampledField::initial(&g, &[], |_| 1.0);
            let c = HalfSpacePoint::new(&vec![0.0; dim - 1], 0.5).unwrap();
            let ball = IntrinsicBall::new(c, 0.7).unwrap();
            let s = SigmaParam::new(0.5).unwrap();
            let v = weighted_norm(
                &u,
                &WeightedNormSpec { p: 1.0, weight: 0.5, region: Region::Ball { ball, time_index: 0 } },
            )
            .unwrap();
            let m = ball_measure(&ball, s).unwrap();
            assert!((v / m - 1.0).abs() < 1e-5, "dim {dim}: {v} vs {m}");
        }
    }
}
