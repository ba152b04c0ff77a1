//! Closed-form travelling waves of the transformed pressure equation, the
//! pressure equation and the porous medium equation.
//!
//! The family `w = (1+β)yₙ + a·y' − (1+σ)(1+|a|²)s/(1+β)` solves the TPE
//! exactly; `a = 0, β = 0` is the flat wave `yₙ − (1+σ)s`.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::weighted_measure::SigmaParam;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFamily {
    pub sigma: SigmaParam,
    /// Tangential tilt `a ∈ R^{n−1}`.
    pub tilt: Vec<f64>,
    /// Vertical stretch `β > −1`.
    pub stretch: f64,
}

impl WaveFamily {
    pub fn flat(sigma: SigmaParam, dim: usize) -> Self {
        Self { sigma, tilt: vec![0.0; dim - 1], stretch: 0.0 }
    }

    pub fn new(sigma: SigmaParam, tilt: &[f64], stretch: f64) -> Result<Self> {
        if !(stretch > -1.0) {
            return Err(LabError::InvalidParameter(format!("stretch must exceed -1, got {stretch}")));
        }
        Ok(Self { sigma, tilt: tilt.to_vec(), stretch })
    }

    fn tilt2(&self) -> f64 {
        self.tilt.iter().map(|a| a * a).sum()
    }

    /// Speed `(1+σ)(1+|a|²)/(1+β)` of the graph height.
    pub fn height_speed(&self) -> f64 {
        self.sigma.wave_speed() * (1.0 + self.tilt2()) / (1.0 + self.stretch)
    }

    /// Graph height `w(s, y)`.
    pub fn w(&self, s: f64, y: &[f64], yn: f64) -> f64 {
        (1.0 + self.stretch) * yn + dot(&self.tilt, y) - self.height_speed() * s
    }

    /// Perturbation `u = w − w_tw`.
    pub fn u(&self, s: f64, y: &[f64], yn: f64) -> f64 {
        self.w(s, y, yn) - (yn - self.sigma.wave_speed() * s)
    }

    /// Pressure `v(t, x) = (xₙ − a·x' + (1+|a|²)t/(1+β))/(1+β)`, `t = (1+σ)s`,
    /// without the positive-part cut.
    pub fn v_raw(&self, t: f64, x: &[f64], xn: f64) -> f64 {
        let b = 1.0 + self.stretch;
        (xn - dot(&self.tilt, x) + (1.0 + self.tilt2()) * t / b) / b
    }

    pub fn v(&self, t: f64, x: &[f64], xn: f64) -> f64 {
        self.v_raw(t, x, xn).max(0.0)
    }

    /// Density `(v/c_m)^{1/(m−1)}`.
    pub fn rho(&self, t: f64, x: &[f64], xn: f64) -> f64 {
        pressure_to_density(self.v(t, x, xn), self.sigma)
    }

    /// Sampled perturbation `u` (slope part `a`) on a grid.
    pub fn u_field(&self, grid: &Arc<HalfSpaceGrid>) -> SampledField {
        let b = self.stretch;
        let c = self.sigma.wave_speed() - self.height_speed();
        SampledField::from_fn_with_slope(grid, &self.tilt, |s, y| b * y.vertical() + c * s)
    }

    /// Sampled graph height `w`.
    pub fn w_field(&self, grid: &Arc<HalfSpaceGrid>) -> SampledField {
        let b = 1.0 + self.stretch;
        let c = self.height_speed();
        SampledField::from_fn_with_slope(grid, &self.tilt, |s, y| b * y.vertical() - c * s)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ρ = (v/c_m)^{1/(m−1)}` for `v > 0`, zero otherwise.
pub fn pressure_to_density(v: f64, sigma: SigmaParam) -> f64 {
    if v > 0.0 {
        (v / sigma.pressure_constant()).powf(1.0 + sigma.sigma())
    } else {
        0.0
    }
}

/// Closed forms of one family member.
#[derive(Debug, Clone)]
pub struct TravellingWave {
    pub family: WaveFamily,
    pub w: SampledField,
    pub u: SampledField,
}

pub fn travelling_wave(family: &WaveFamily, grid: &Arc<HalfSpaceGrid>) -> Result<TravellingWave> {
    if family.tilt.len() + 1 != grid.dim() {
        return Err(LabError::InvalidParameter(format!(
            "tilt has {} components, grid dimension is {}",
            family.tilt.len(),
            grid.dim()
        )));
    }
    Ok(TravellingWave { family: family.clone(), w: family.w_field(grid), u: family.u_field(grid) })
}

/// `∂ₛw − yₙΔ'w + (1+σ)q + yₙ∂ₙq` with `q = (1+|∇'w|²)/∂ₙw`, which is the
/// TPE with its divergence term expanded.
pub fn tpe_residual(w: &SampledField, sigma: SigmaParam) -> Result<SampledField> {
    let g = w.grid().clone();
    let dim = g.dim();
    let grad = w.gradient();
    let dn = &grad[dim - 1];
    let mut q = SampledField::zeros(&g);
    {
        let vals = q.values_mut();
        for i in 0..vals.len() {
            let t2: f64 = grad[..dim - 1].iter().map(|gr| gr.values()[i].powi(2)).sum();
            let d = dn.values()[i];
            if !(d > 0.0) {
                return Err(LabError::Monotonicity(format!("∂ₙw = {d:.3e} is not positive")));
            }
            vals[i] = (1.0 + t2) / d;
        }
    }
    let mut a = vec![0; dim];
    a[dim - 1] = 1;
    let dq = q.deriv(0, &a);
    let mut lap_t = SampledField::zeros(&g);
    for i in 0..dim - 1 {
        let mut b = vec![0; dim];
        b[i] = 2;
        lap_t = lap_t.add(&w.deriv(0, &b));
    }
    let ds = w.deriv(1, &vec![0; dim]);
    let p = 1.0 + sigma.sigma();
    let mut out = ds;
    let vals = out.values_mut();
    let y = g.vertical_nodes();
    let nv1 = y.len();
    for i in 0..vals.len() {
        let yn = y[i % nv1];
        vals[i] += -yn * lap_t.values()[i] + p * q.values()[i] + yn * dq.values()[i];
    }
    out.set_slope(&[]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_wave_values() {
        let s = SigmaParam::new(0.0).unwrap();
        let f = WaveFamily::flat(s, 1);
        assert_eq!(f.w(1.0, &[], 3.0), 2.0);
        assert!((f.rho(0.4, &[], 0.6) - 0.5).abs() < 1e-15);
        assert_eq!(f.rho(0.4, &[], -0.5), 0.0);
    }

    #[test]
    fn tilted_member_has_no_tpe_residual() {
        let g = HalfSpaceGrid::new(2, 12, 6.0, 8, 8.0, 6, 1.0).unwrap();
        for sg in [-0.5, 0.0, 1.0] {
            let s = SigmaParam::new(sg).unwrap();
            let f = WaveFamily::new(s, &[0.3], 0.2).unwrap();
            let r = tpe_residual(&f.w_field(&g), s).unwrap();
            assert!(r.max_abs() < 1e-11, "σ={sg}: {}", r.max_abs());
        }
    }
}
