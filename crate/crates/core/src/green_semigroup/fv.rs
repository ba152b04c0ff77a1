//! Conservative finite-volume oracle for `∂_t u = y^{−σ}∂_y(y^{1+σ}∂_y u) − |ξ|² y u`.
//!
//! Uniform cells on `[0, Y]`, face fluxes `y^{1+σ}(u_{i+1} − u_i)/h`, zero flux
//! at both ends, exact cell masses `∫ y^σ`, Crank–Nicolson in time. This is
//! independent of the closed-form kernels and is used only to cross-check them.

use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
pub struct FvSolution {
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
}

impl FvSolution {
    /// Linear interpolation between cell centres.
    pub fn eval(&self, y: f64) -> f64 {
        let c = &self.centers;
        let h = c[1] - c[0];
        let i = (((y - c[0]) / h).floor().max(0.0) as usize).min(c.len() - 2);
        let w = (y - c[i]) / h;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}

/// Evolves `initial` for time `t` with `cells` cells and step `dt`.
pub fn fv_evolve<F: Fn(f64) -> f64>(
    sigma: f64,
    xi: f64,
    y_max: f64,
    cells: usize,
    initial: F,
    t: f64,
    dt: f64,
) -> Result<FvSolution> {
    if sigma <= -1.0 {
        return Err(LabError::InvalidSigma(sigma));
    }
    if cells < 3 || !(t >= 0.0) || !(dt > 0.0) {
        return Err(LabError::InvalidParameter("finite-volume oracle needs ≥ 3 cells and positive steps".into()));
    }
    let h = y_max / cells as f64;
    let p = 1.0 + sigma;
    let mass: Vec<f64> = (0..cells).map(|i| ((h * (i + 1) as f64).powf(p) - (h * i as f64).powf(p)) / p).collect();
    let react: Vec<f64> = (0..cells)
        .map(|i| xi * xi * ((h * (i + 1) as f64).powf(p + 1.0) - (h * i as f64).powf(p + 1.0)) / (p + 1.0))
        .collect();
    // Face conductances between cells i and i+1.
    let cond: Vec<f64> = (1..cells).map(|i| (h * i as f64).powf(p) / h).collect();
    let centers: Vec<f64> = (0..cells).map(|i| h * (i as f64 + 0.5)).collect();
    let mut u: Vec<f64> = centers.iter().map(|&y| initial(y)).collect();
    let steps = (t / dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let apply = |u: &[f64], i: usize| -> f64 {
        let mut r = -react[i] * u[i];
        if i > 0 {
            r += cond[i - 1] * (u[i - 1] - u[i]);
        }
        if i + 1 < cells {
            r += cond[i] * (u[i + 1] - u[i]);
        }
        r
    };
    let (mut lo, mut di, mut up) = (vec![0.0; cells], vec![0.0; cells], vec![0.0; cells]);
    for i in 0..cells {
        di[i] = mass[i] + 0.5 * dt * react[i];
        if i > 0 {
            lo[i] = -0.5 * dt * cond[i - 1];
            di[i] += 0.5 * dt * cond[i - 1];
        }
        if i + 1 < cells {
            up[i] = -0.5 * dt * cond[i];
            di[i] += 0.5 * dt * cond[i];
        }
    }
    let mut rhs = vec![0.0; cells];
    let mut cp = vec![0.0; cells];
    for _ in 0..steps {
        for i in 0..cells {
            rhs[i] = mass[i] * u[i] + 0.5 * dt * apply(&u, i);
        }
        // Thomas algorithm.
        cp[0] = up[0] / di[0];
        rhs[0] /= di[0];
        for i in 1..cells {
            let m = di[i] - lo[i] * cp[i - 1];
            cp[i] = up[i] / m;
            rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / m;
        }
        u[cells - 1] = rhs[cells - 1];
        for i in (0..cells - 1).rev() {
            u[i] = rhs[i] - cp[i] * u[i + 1];
        }
    }
    Ok(FvSolution { centers, values: u })
}
