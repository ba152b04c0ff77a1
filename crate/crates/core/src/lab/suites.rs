//! The six verification suites. Each check runs over the configured
//! dimension and `σ` sweeps and reduces them to one verdict.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use super::config::{ExperimentConfig, Suite};
use super::report::{Series, Verdict};
use crate::bessel_core::{
    first_order_kernel_norms, ode_bound_constants, schur_integrals, BesselSystem, KernelNormMode,
};
use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::function_norms::{linear_estimate_check, nonlinearity_bound_check, CylinderSampler};
use crate::geometry::{
    ball_measure_sweep, euclidean_sandwich, least_squares_slope, metric_equivalence, quasi_triangle_constant,
    regime_slopes, HalfSpacePoint, PsiWeight,
};
use crate::green_semigroup::{
    duhamel_solve, exp_weight_decay_check, gaussian_verify, homogeneous_solve, kernel_invariants,
    offdiag_and_lq_checks, DerivOrder, Regime,
};
use crate::pme_solvers::energy::{
    energy_identity_check, energy_refinement_study, iterated_weak_residuals, random_compact_source, weak_battery,
    weak_residuals,
};
use crate::pme_solvers::regularity::{
    analyticity_factorial_check, decay_refinement_study, parameter_family_equivariance, scaling_equivariance,
};
use crate::pme_solvers::transform::{
    interface_battery, interface_extract, level_set_lipschitz, pme_weak_residuals, pmpe_residual, round_trip_error,
    von_mises, IsometryReport, PressureField,
};
use crate::pme_solvers::waves::{pressure_to_density, tpe_residual, WaveFamily};
use crate::pme_solvers::{
    fixed_point::residual_sup, generic_initial, pe_fixed_point, pe_residual, FixedPointConfig, FixedPointTrace,
};
use crate::weighted_measure::{hardy_check, SigmaParam};

/// What one check measured and how it compares with its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub measured: f64,
    pub limit: Option<f64>,
    pub tolerance_source: String,
    pub detail: String,
    pub constants: Vec<(String, f64)>,
    pub series: Vec<Series>,
}

impl Outcome {
    fn new(ok: bool, measured: f64, limit: Option<f64>, source: String, detail: impl Into<String>) -> Self {
        Self {
            verdict: if ok && measured.is_finite() { Verdict::Pass } else { Verdict::Fail },
            measured,
            limit,
            tolerance_source: source,
            detail: detail.into(),
            constants: Vec::new(),
            series: Vec::new(),
        }
    }

    /// Passes when `measured ≤` the configured tolerance `key`.
    fn at_most(ctx: &Ctx, key: &str, measured: f64, detail: impl Into<String>) -> Self {
        let t = ctx.cfg.tolerance(key);
        Self::new(measured <= t.value, measured, Some(t.value), t.provenance(), detail)
    }

    fn at_least(ctx: &Ctx, key: &str, measured: f64, detail: impl Into<String>) -> Self {
        let t = ctx.cfg.tolerance(key);
        Self::new(measured >= t.value, measured, Some(t.value), t.provenance(), detail)
    }

    /// Passes when `measured ≤ limit` for a limit derived inside the check.
    fn below(measured: f64, limit: f64, source: &str, detail: impl Into<String>) -> Self {
        Self::new(measured <= limit, measured, Some(limit), format!("derived: {source}"), detail)
    }

    /// Exact property without a tolerance.
    fn holds(ok: bool, measured: f64, detail: impl Into<String>) -> Self {
        Self::new(ok, measured, None, "exact".into(), detail)
    }

    fn skipped(detail: impl Into<String>) -> Self {
        let mut o = Self::holds(true, f64::NAN, detail);
        o.verdict = Verdict::Skipped;
        o
    }

    /// Adds a further requirement; a failed one is appended to the detail.
    fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok && self.verdict != Verdict::Skipped {
            self.verdict = Verdict::Fail;
            self.detail = format!("{}; failed: {why}", self.detail);
        }
        self
    }

    fn constants(mut self, c: Vec<(String, f64)>) -> Self {
        self.constants.extend(c);
        self
    }

    fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }
}

type CheckFn = fn(&Ctx) -> Result<Outcome>;

pub struct CheckSpec {
    pub name: &'static str,
    pub anchor: &'static str,
    run: CheckFn,
}

impl CheckSpec {
    pub fn run(&self, ctx: &Ctx) -> Outcome {
        match (self.run)(ctx) {
            Ok(o) => o,
            Err(e) => Outcome::holds(false, f64::NAN, e.to_string()),
        }
    }
}

const fn spec(name: &'static str, anchor: &'static str, run: CheckFn) -> CheckSpec {
    CheckSpec { name, anchor, run }
}

static GEOMETRY: [CheckSpec; 6] = [
    spec("quasi_triangle", "Lemma quasi-triangle inequality", quasi_triangle),
    spec("metric_equivalence", "Lemma intrinsic metric comparability", metric_equiv),
    spec("euclidean_sandwich", "Lemma Euclidean ball inclusions", sandwich),
    spec("ball_measure_bracket", "Lemma ball measure asymptotics", measure_bracket),
    spec("doubling", "Cor. doubling property", doubling),
    spec("regime_slopes", "Lemma boundary and interior ball scaling", slopes),
];

static BESSEL: [CheckSpec; 4] = [
    spec("wronskian", "Bessel fundamental system", wronskian),
    spec("first_order_kernel_norms", "Prop. weighted energy estimates (first-order kernel)", kernel_norms),
    spec("schur_bounds", "Prop. weighted energy estimates (Schur test)", schur),
    spec("ode_bound_constants", "Prop. weighted energy estimates (Bessel ODE)", ode_bounds),
];

static GREEN: [CheckSpec; 5] = [
    spec("kernel_invariants", "Prop. Green function properties", invariants),
    spec("fv_oracle", "Green function against a finite-volume oracle", fv_oracle),
    spec("gaussian_verify", "Prop. Gaussian estimate", gaussian),
    spec("offdiag_and_lq", "Cor. off-diagonal and Lq kernel bounds", offdiag),
    spec("exp_weight_decay", "Prop. exponentially weighted decay", exp_decay),
];

static LINEAR: [CheckSpec; 5] = [
    spec("exact_linear", "Remark explicit linear solutions", exact_linear),
    spec("energy_identity", "Prop. energy identity", energy),
    spec("sigma_solution", "Def. sigma-solution and its iterated form", sigma_solution),
    spec("linear_estimate", "Theorem linear estimate in X(p)", linear_estimate),
    spec("hardy", "Lemma weighted Hardy inequality", hardy),
];

static NONLINEAR: [CheckSpec; 6] = [
    spec("nonlinearity_scaling", "Lemma quadratic nonlinearity bound", nonlinearity),
    spec("closed_form_fixed_points", "Remark tilted and stretched waves", closed_forms),
    spec("contraction", "Theorem existence by contraction", contraction),
    spec("decay_refinement", "Theorem decay of derivatives", decay),
    spec("equivariance", "Lemma scaling and parameter-family invariance", equivariance),
    spec("analyticity", "Theorem tangential and temporal analyticity", analyticity),
];

static TRANSFORM: [CheckSpec; 6] = [
    spec("travelling_wave_chain", "Travelling waves of TPE, PMPE and PME", wave_chain),
    spec("quasi_isometry", "Lemma von Mises quasi-isometry", quasi_isometry),
    spec("round_trip", "von Mises transformation and its inverse", round_trip),
    spec("pmpe_residual", "Pressure equation on the positivity set", pmpe),
    spec("pme_weak_residual", "Weak solution of the porous medium equation", pme_weak),
    spec("interface_lipschitz", "Interface as a Lipschitz graph", interface),
];

/// Checks of a suite in execution order.
pub fn checks(suite: Suite) -> &'static [CheckSpec] {
    match suite {
        Suite::GeometrySuite => &GEOMETRY,
        Suite::BesselSuite => &BESSEL,
        Suite::GreenSuite => &GREEN,
        Suite::LinearSuite => &LINEAR,
        Suite::NonlinearSuite => &NONLINEAR,
        Suite::TransformSuite => &TRANSFORM,
    }
}

type FixedPoint = Arc<(SampledField, SampledField, FixedPointTrace)>;
type Pressure = Arc<(PressureField, IsometryReport)>;

/// Shared state of one suite run. Fixed points and pressure fields are
/// computed once per `(n, σ, refinement level)`.
pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    fixed_points: Mutex<HashMap<(usize, u64, usize), FixedPoint>>,
    pressures: Mutex<HashMap<(usize, u64, usize), Pressure>>,
}

fn label(dim: usize, s: SigmaParam) -> String {
    format!("n={dim},sigma={}", s.sigma())
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Self { cfg, fixed_points: Mutex::new(HashMap::new()), pressures: Mutex::new(HashMap::new()) }
    }

    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    fn cases(&self) -> Vec<(usize, SigmaParam)> {
        self.cfg.dimensions.iter().flat_map(|&d| self.cfg.sigmas.iter().map(move |&s| (d, s))).collect()
    }

    fn grid(&self, dim: usize, level: usize) -> Result<Arc<HalfSpaceGrid>> {
        let mut g = self.cfg.grid(dim)?;
        for _ in 0..level {
            g = g.refined();
        }
        Ok(g)
    }

    fn fp_config(&self, dim: usize) -> FixedPointConfig {
        let nl = &self.cfg.nonlinear;
        FixedPointConfig {
            epsilon: nl.epsilon,
            radius: nl.radius,
            tol: nl.tol,
            max_iter: nl.max_iter,
            sampler_levels: self.cfg.sampler.levels,
            sampler_per_regime: self.cfg.sampler.per_regime,
            seed: self.seed(),
            ..FixedPointConfig::for_dim(dim)
        }
    }

    fn sampler(&self, g: &HalfSpaceGrid) -> Result<CylinderSampler> {
        CylinderSampler::new(g, self.cfg.sampler.levels, self.cfg.sampler.per_regime, self.seed())
    }

    /// `(u₀, u_*, trace)` for the generic initial datum of size `ε`.
    fn fixed_point(&self, dim: usize, s: SigmaParam, level: usize) -> Result<FixedPoint> {
        let key = (dim, s.sigma().to_bits(), level);
        if let Some(v) = self.fixed_points.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let g = self.grid(dim, level)?;
        let u0 = generic_initial(&g, self.cfg.nonlinear.epsilon);
        let (u, trace) = pe_fixed_point(&u0, &self.fp_config(dim), s)?;
        let v = Arc::new((u0, u, trace));
        self.fixed_points.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// Pressure of the perturbed wave `u_* + w_tw`.
    fn pressure(&self, dim: usize, s: SigmaParam, level: usize) -> Result<Pressure> {
        let key = (dim, s.sigma().to_bits(), level);
        if let Some(v) = self.pressures.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let fp = self.fixed_point(dim, s, level)?;
        let g = fp.1.grid().clone();
        let c = s.wave_speed();
        let w = fp.1.axpy(1.0, &SampledField::from_fn(&g, |t, y| y.vertical() - c * t));
        let nx = 40 * (1 << level) + 1;
        let v = Arc::new(von_mises(&w, s, nx, 200, self.seed())?);
        self.pressures.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

// ---------------------------------------------------------------- geometry

fn quasi_triangle(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &d in &ctx.cfg.dimensions {
        let k = quasi_triangle_constant(d, ctx.cfg.sampler.pairs, ctx.seed());
        worst = fmax(worst, k);
        c.push((format!("K_triangle[n={d}]"), k));
    }
    Ok(Outcome::at_most(ctx, "quasi_triangle", worst, "largest d(x,z)/(d(x,y)+d(y,z))").constants(c))
}

fn metric_equiv(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &d in &ctx.cfg.dimensions {
        let r = metric_equivalence(d, ctx.cfg.sampler.pairs, ctx.seed());
        worst = fmax(worst, fmax(r.max_ref_over_quasi, r.max_quasi_over_ref));
        c.push((format!("max_ref_over_quasi[n={d}]"), r.max_ref_over_quasi));
        c.push((format!("max_quasi_over_ref[n={d}]"), r.max_quasi_over_ref));
    }
    Ok(Outcome::at_most(ctx, "metric_factor", worst, "largest ratio of the two metrics in either order").constants(c))
}

fn sandwich(ctx: &Ctx) -> Result<Outcome> {
    let (mut bad, mut checked) = (0, 0);
    for &d in &ctx.cfg.dimensions {
        let r = euclidean_sandwich(d, 200, 100, ctx.seed())?;
        bad += r.inner_violations + r.outer_violations;
        checked += r.checked;
    }
    Ok(Outcome::holds(bad == 0, bad as f64, format!("violations among {checked} points")))
}

fn measure_bracket(ctx: &Ctx) -> Result<Outcome> {
    let mut drift = 0.0f64;
    let mut c = Vec::new();
    let mut ok = true;
    for (d, s) in ctx.cases() {
        let a = ball_measure_sweep(d, s, 6.0, 2.0)?;
        let b = ball_measure_sweep(d, s, 10.0, 2.0)?;
        ok &= a.min_ratio > 0.0 && a.max_ratio.is_finite();
        drift = fmax(drift, fmax((b.min_ratio / a.min_ratio - 1.0).abs(), (b.max_ratio / a.max_ratio - 1.0).abs()));
        c.push((format!("bracket_min[{}]", label(d, s)), a.min_ratio));
        c.push((format!("bracket_max[{}]", label(d, s)), a.max_ratio));
    }
    Ok(Outcome::at_most(ctx, "bracket_drift", drift, "relative change of the bracket from 6 to 10 decades")
        .require(ok, "bracket degenerate")
        .constants(c))
}

fn doubling(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for (d, s) in ctx.cases() {
        let base = ball_measure_sweep(d, s, 6.0, 2.0)?;
        let allowed = base.max_ratio / base.min_ratio;
        let mut pts = Vec::new();
        for kappa in [2.0, 4.0, 8.0] {
            let r = if kappa == 2.0 { base } else { ball_measure_sweep(d, s, 6.0, kappa)? };
            worst = fmax(worst, r.doubling_c / allowed);
            c.push((format!("doubling_c[{},kappa={kappa}]", label(d, s)), r.doubling_c));
            pts.push((kappa, r.doubling_c));
        }
        lines.push((label(d, s), pts));
    }
    Ok(Outcome::below(
        worst,
        1.0,
        "the bracket ratio max/min bounds the doubling constant",
        "largest doubling constant over the bracket ratio, kappa in {2,4,8}",
    )
    .constants(c)
    .series(Series {
        title: "doubling constant against the dilation factor".into(),
        x_label: "kappa".into(),
        y_label: "doubling constant".into(),
        log_y: false,
        lines,
    }))
}

fn slopes(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &d in &ctx.cfg.dimensions {
        let r = regime_slopes(d, 1.0)?;
        worst = fmax(worst, (r.ratio() / 2.0 - 1.0).abs());
        c.push((format!("slope_boundary[n={d}]"), r.boundary));
        c.push((format!("slope_interior[n={d}]"), r.interior));
    }
    Ok(Outcome::at_most(ctx, "slope_ratio", worst, "relative gap of the diameter slope ratio to 2").constants(c))
}

// ---------------------------------------------------------------- bessel

fn wronskian(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &s in &ctx.cfg.sigmas {
        let sys = BesselSystem::new(s);
        for i in 0..=200 {
            let z = 0.1 * 100f64.powf(i as f64 / 200.0);
            worst = fmax(worst, (sys.wronskian(z).abs() * z.powf(1.0 + s.sigma()) - 1.0).abs());
        }
    }
    Ok(Outcome::at_most(ctx, "wronskian", worst, "largest relative gap of |W| to z^(-1-sigma) on [0.1, 10]"))
}

fn kernel_norms(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        let sg = s.sigma();
        for d1 in [0.0, 0.5 * (1.0 + sg)] {
            let v = first_order_kernel_norms(s, d1, KernelNormMode::SupRow)?;
            worst = fmax(worst, (v * (1.0 + sg - d1) - 1.0).abs());
            c.push((format!("row[sigma={sg},delta={d1}]"), v));
        }
        for d2 in [sg - 1.0, sg - 0.5] {
            let v = first_order_kernel_norms(s, d2, KernelNormMode::SupCol)?;
            worst = fmax(worst, (v * (sg - d2) - 1.0).abs());
            c.push((format!("col[sigma={sg},delta={d2}]"), v));
        }
    }
    Ok(Outcome::at_most(ctx, "kernel_norm", worst, "largest relative gap to 1/(1+sigma-delta) and 1/(sigma-delta)")
        .constants(c))
}

fn schur(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        for l in [0, 1] {
            let r = schur_integrals(s, l)?;
            ok &= r.bounded;
            worst = fmax(worst, fmax(r.sup_over_z, r.sup_over_x));
            c.push((format!("sup_over_z[sigma={},l={l}]", s.sigma()), r.sup_over_z));
            c.push((format!("sup_over_x[sigma={},l={l}]", s.sigma()), r.sup_over_x));
        }
    }
    Ok(Outcome::holds(ok, worst, "largest Schur integral; both profiles settle at each end of the sweep").constants(c))
}

fn ode_bounds(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    let f = |z: f64| z * (-z).exp();
    for &s in &ctx.cfg.sigmas {
        let a = ode_bound_constants(f, s, 40.0, 40)?;
        let b = ode_bound_constants(f, s, 40.0, 80)?;
        for (name, x, y) in
            [("zeroth", a.zeroth, b.zeroth), ("first", a.first, b.first), ("second", a.second, b.second)]
        {
            worst = fmax(worst, (y / x - 1.0).abs());
            c.push((format!("{name}[sigma={}]", s.sigma()), y));
        }
    }
    Ok(Outcome::at_most(ctx, "ode_refinement", worst, "relative change of the bound constants from 40 to 80 panels")
        .constants(c))
}

// ---------------------------------------------------------------- green

const HEIGHTS: [f64; 4] = [0.1, 1.0, 3.0, 10.0];

fn invariants(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        let r = kernel_invariants(s, 1.0, &HEIGHTS)?;
        for (name, v) in [
            ("constants", r.constants),
            ("mu_mass", r.mu_mass),
            ("symmetry", r.symmetry),
            ("chapman_kolmogorov", r.chapman_kolmogorov),
        ] {
            worst = fmax(worst, v);
            c.push((format!("{name}[sigma={}]", s.sigma()), v));
        }
    }
    Ok(Outcome::at_most(ctx, "kernel_invariant", worst, "n=1; largest relative defect of the four kernel identities")
        .constants(c))
}

fn fv_oracle(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &s in &ctx.cfg.sigmas {
        worst = fmax(worst, kernel_invariants(s, 1.0, &HEIGHTS)?.fv_oracle);
    }
    Ok(Outcome::at_most(ctx, "fv_oracle", worst, "n=1; relative gap on interior samples"))
}

fn gaussian(ctx: &Ctx) -> Result<Outcome> {
    let orders = [
        DerivOrder::ZERO,
        DerivOrder { k: 1, alpha: 0, j: 0, beta: 0 },
        DerivOrder { k: 0, alpha: 1, j: 0, beta: 1 },
        DerivOrder { k: 0, alpha: 2, j: 0, beta: 0 },
    ];
    let mut min_r2 = f64::INFINITY;
    let (mut violations, mut min_samples) = (0, usize::MAX);
    let mut finite = true;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        let fits = gaussian_verify(s, &orders, ctx.cfg.sampler.gaussian_per_regime, ctx.seed())?;
        let zero: Vec<_> = fits.iter().filter(|f| f.order == DerivOrder::ZERO).collect();
        min_samples = min_samples.min(zero.iter().map(|f| f.samples).sum());
        for f in &fits {
            violations += f.violations;
            let o = f.order;
            let tag =
                format!("sigma={},{},k={},j={},a={},b={}", s.sigma(), f.regime.label(), o.k, o.j, o.alpha, o.beta);
            c.push((format!("c_fit[{tag}]"), f.c_fit));
            c.push((format!("C_fit[{tag}]"), f.big_c_fit));
        }
        for f in zero.iter().filter(|f| f.regime == Regime::Boundary) {
            min_r2 = min_r2.min(f.r_squared);
            finite &= f.c_fit.is_finite() && f.big_c_fit.is_finite();
        }
    }
    let samples_needed = ctx.cfg.tolerance("gaussian_samples").value;
    Ok(Outcome::at_least(
        ctx,
        "gaussian_r2",
        min_r2,
        format!(
            "boundary-regime R^2; {violations} violations with C = 32 c_d^2 c_L^2; {min_samples} zero-order samples"
        ),
    )
    .require(violations == 0, "bound violated")
    .require(min_samples as f64 >= samples_needed, "too few samples")
    .require(finite, "fitted constants not finite")
    .constants(c))
}

fn offdiag(ctx: &Ctx) -> Result<Outcome> {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        let r = offdiag_and_lq_checks(s, 1.0, ctx.seed())?;
        ok &= r.passed;
        worst = fmax(worst, r.mass_consistency);
        for ((l, k, a), v) in &r.offdiag {
            c.push((format!("offdiag[sigma={},l={l},k={k},a={a}]", s.sigma()), *v));
        }
        c.push((format!("v_bound[sigma={}]", s.sigma()), r.v_bound_c));
    }
    Ok(Outcome::holds(ok, worst, "off-diagonal decay and Lq window verdicts; measured is the L1 mass defect")
        .constants(c))
}

fn bump(y: f64) -> f64 {
    let x = (y - 2.0) / 1.5;
    if x.abs() < 1.0 {
        (1.0 - x * x).powi(8)
    } else {
        0.0
    }
}

fn exp_decay(ctx: &Ctx) -> Result<Outcome> {
    let g = HalfSpaceGrid::one_d(32, 16.0, 16, 1.0)?;
    let u0 = SampledField::initial(&g, &[], |p| bump(p.vertical()));
    let anchor = HalfSpacePoint::vertical_only(2.0)?;
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for &s in &ctx.cfg.sigmas {
        for zeta in [0.0, 0.005, -0.005] {
            let r = exp_weight_decay_check(&u0, &PsiWeight::new(zeta, 0.1, anchor)?, s)?;
            ok &= r.monotone && r.gradient_bound_ratio <= 1.0;
            worst = worst.max(r.max_increase - r.identity_defect);
            c.push((format!("pointwise_c[sigma={},zeta={zeta}]", s.sigma()), r.pointwise_c));
            c.push((format!("identity_defect[sigma={},zeta={zeta}]", s.sigma()), r.identity_defect));
            let pts = r.functional.iter().enumerate().map(|(k, v)| (g.time(k), *v)).collect();
            lines.push((format!("sigma={} zeta={zeta}", s.sigma()), pts));
        }
    }
    Ok(Outcome::holds(ok, worst, "largest rise of the weighted functional beyond the quadrature defect")
        .constants(c)
        .series(Series {
            title: "exponentially weighted functional".into(),
            x_label: "s".into(),
            y_label: "F(s)".into(),
            log_y: false,
            lines,
        }))
}

// ---------------------------------------------------------------- linear

fn rel_err(u: &SampledField, exact: &SampledField) -> f64 {
    u.sub(exact).max_abs() / exact.max_abs().max(f64::MIN_POSITIVE)
}

fn exact_linear(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let sg = s.sigma();
        let drift = homogeneous_solve(&SampledField::initial(&g, &[], |p| p.vertical()), s)?;
        let e1 = rel_err(&drift, &SampledField::from_fn(&g, |t, p| p.vertical() + (1.0 + sg) * t));
        let quad = homogeneous_solve(&SampledField::initial(&g, &[], |p| p.vertical().powi(2)), s)?;
        let e2 = rel_err(
            &quad,
            &SampledField::from_fn(&g, |t, p| {
                let y = p.vertical();
                y * y + 2.0 * (2.0 + sg) * t * y + (2.0 + sg) * (1.0 + sg) * t * t
            }),
        );
        let src = duhamel_solve(&SampledField::zeros(&g), &SampledField::from_fn(&g, |_, _| 1.0), s)?;
        let e3 = rel_err(&src, &SampledField::from_fn(&g, |t, _| t));
        worst = fmax(worst, fmax(e1, fmax(e2, e3)));
        c.push((format!("drift[{}]", label(d, s)), e1));
        c.push((format!("quadratic[{}]", label(d, s)), e2));
        c.push((format!("constant_source[{}]", label(d, s)), e3));
    }
    Ok(Outcome::at_most(ctx, "exact_linear", worst, "drift, quadratic and constant-source solutions").constants(c))
}

fn energy(ctx: &Ctx) -> Result<Outcome> {
    let mut closed = 0.0f64;
    let mut min_order = f64::INFINITY;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let sg = s.sigma();
        let zero = SampledField::zeros(&g);
        let drift = SampledField::from_fn(&g, |t, p| p.vertical() + (1.0 + sg) * t);
        let quad = SampledField::from_fn(&g, |t, p| {
            let y = p.vertical();
            y * y + 2.0 * (2.0 + sg) * t * y + (2.0 + sg) * (1.0 + sg) * t * t
        });
        for u in [&drift, &quad] {
            closed = fmax(closed, energy_identity_check(u, &zero, s)?.mismatch);
        }
        let f = random_compact_source(&g, ctx.seed());
        let u = duhamel_solve(&zero, &f, s)?;
        let r = energy_identity_check(&u, &f, s)?;
        if let Some(h) = r.higher_order_c {
            c.push((format!("higher_order_c[{}]", label(d, s)), h));
        }
        if let Some(a) = r.aux_c {
            c.push((format!("aux_c[{}]", label(d, s)), a));
        }
    }
    for &s in &ctx.cfg.sigmas {
        let study = energy_refinement_study(&ctx.grid(1, 0)?, s, ctx.seed(), 3)?;
        // The coarsest pair is pre-asymptotic; the finest pair carries the order.
        let finest = *study
            .orders
            .last()
            .ok_or_else(|| LabError::InvalidParameter("refinement study needs two levels".into()))?;
        min_order = min_order.min(finest);
        for (i, m) in study.mismatches.iter().enumerate() {
            c.push((format!("mismatch[n=1,sigma={},level={i}]", s.sigma()), *m));
        }
        let pts = study.mismatches.iter().enumerate().map(|(i, m)| (i as f64, *m)).collect();
        lines.push((format!("sigma={}", s.sigma()), pts));
    }
    let tol = ctx.cfg.tolerance("energy_closed_form");
    Ok(Outcome::at_least(ctx, "energy_order", min_order, format!(
        "observed order of the random-source mismatch over the finest of three levels (n=1); closed-form mismatch {closed:.3e}"
    ))
    .require(closed <= tol.value, "closed-form mismatch above energy_closed_form")
    .constants(c)
    .series(Series {
        title: "energy identity mismatch under refinement".into(),
        x_label: "refinement level".into(),
        y_label: "relative mismatch".into(),
        log_y: true,
        lines,
    }))
}

fn sigma_solution(ctx: &Ctx) -> Result<Outcome> {
    let mut coarse = 0.0f64;
    let mut fine = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let mut per_level = Vec::new();
        for level in 1..3 {
            let g = ctx.grid(d, level)?;
            let f = random_compact_source(&g, ctx.seed());
            let u = duhamel_solve(&SampledField::zeros(&g), &f, s)?;
            let bat = weak_battery(&g, 8, ctx.seed());
            let a = weak_residuals(&u, &f, s.sigma(), &bat)?.into_iter().fold(0.0, f64::max);
            let b = iterated_weak_residuals(&u, &f, s, &bat)?.into_iter().fold(0.0, f64::max);
            c.push((format!("weak[{},level={level}]", label(d, s)), a));
            c.push((format!("iterated[{},level={level}]", label(d, s)), b));
            per_level.push(a.max(b));
        }
        coarse = fmax(coarse, per_level[0]);
        fine = fmax(fine, per_level[1]);
    }
    Ok(Outcome::at_most(
        ctx,
        "weak_residual",
        fine,
        format!("largest relative weak residual on the twice-refined grid (once-refined {coarse:.3e})"),
    )
    .require(2.0 * fine < coarse, "residual did not halve under refinement")
    .constants(c))
}

fn linear_estimate(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for (d, s) in ctx.cases() {
        let p = 2.0 * (d as f64 + 1.0) + 1.0;
        let mut pts = Vec::new();
        for seed in 0..5u64 {
            let mut ratios = [0.0; 2];
            for (level, r) in ratios.iter_mut().enumerate() {
                let g = ctx.grid(d, level)?;
                let sampler = ctx.sampler(&g)?;
                let u0 = generic_initial(&g, 1e-2 * (1.0 + seed as f64));
                let f = random_compact_source(&g, ctx.seed().wrapping_add(seed)).scaled(1e-2);
                *r = linear_estimate_check(&u0, &f, p, &sampler, s)?.ratio;
            }
            worst = fmax(worst, (ratios[1] / ratios[0] - 1.0).abs());
            c.push((format!("ratio[{},pair={seed}]", label(d, s)), ratios[0]));
            c.push((format!("ratio_refined[{},pair={seed}]", label(d, s)), ratios[1]));
            pts.push((ratios[0], ratios[1]));
        }
        lines.push((label(d, s), pts));
    }
    Ok(Outcome::at_most(
        ctx,
        "linear_estimate_refinement",
        worst,
        "largest relative ratio change under 2x refinement, 5 pairs, p = 2(n+1)+1",
    )
    .constants(c)
    .series(Series {
        title: "linear estimate ratio, base against refined grid".into(),
        x_label: "base ratio".into(),
        y_label: "refined ratio".into(),
        log_y: false,
        lines,
    }))
}

fn hardy(ctx: &Ctx) -> Result<Outcome> {
    let g = HalfSpaceGrid::one_d(32, 16.0, 4, 1.0)?;
    let u = SampledField::initial(&g, &[], |p| bump(p.vertical()));
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for &s in &ctx.cfg.sigmas {
        let sg = s.sigma();
        for (shift, bound) in [(1, 2.0 / (1.0 + sg)), (2, 4.0 / ((1.0 + sg) * (3.0 + sg)))] {
            let r = hardy_check(&u, s, shift, 0)?;
            worst = fmax(worst, r.constant / bound);
            c.push((format!("hardy[sigma={sg},shift={shift}]"), r.constant));
        }
    }
    Ok(Outcome::below(worst, 1.0, "classical weighted Hardy constants", "largest measured constant over its bound")
        .constants(c))
}

// ---------------------------------------------------------------- nonlinear

fn nonlinearity(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    let eps = [1e-3, 1e-2, 1e-1];
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let p = 2.0 * (d as f64 + 1.0) + 1.0;
        let sampler = ctx.sampler(&g)?;
        let base = homogeneous_solve(&generic_initial(&g, 1.0), s)?;
        let mut ly = Vec::new();
        for e in eps {
            ly.push(nonlinearity_bound_check(&base.scaled(e), ctx.cfg.nonlinear.radius, p, &sampler, s)?.y.ln());
        }
        let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let (slope, _, r2) = least_squares_slope(&lx, &ly);
        worst = fmax(worst, (slope - 2.0).abs());
        c.push((format!("slope[{}]", label(d, s)), slope));
        c.push((format!("r_squared[{}]", label(d, s)), r2));
        lines.push((label(d, s), lx.iter().zip(&ly).map(|(a, b)| (*a, *b)).collect()));
    }
    Ok(Outcome::at_most(ctx, "quadratic_slope", worst, "gap of the log-log slope of ||f[u]||_Y against eps to 2")
        .constants(c)
        .series(Series {
            title: "nonlinearity scaling".into(),
            x_label: "ln eps".into(),
            y_label: "ln ||f[u]||_Y".into(),
            log_y: false,
            lines,
        }))
}

fn closed_forms(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let mut members = vec![("stretched", WaveFamily::new(s, &vec![0.0; d - 1], 1e-2)?)];
        if d > 1 {
            let mut tilt = vec![0.0; d - 1];
            tilt[0] = 1e-2;
            members.push(("tilted", WaveFamily::new(s, &tilt, 0.0)?));
        }
        let cfg = FixedPointConfig { epsilon: 1e-2, ..ctx.fp_config(d) };
        for (name, fam) in members {
            let exact = fam.u_field(&g);
            let (u, _) = pe_fixed_point(&exact.frozen_at(0), &cfg, s)?;
            let err = u.sub(&exact).max_abs();
            let res = residual_sup(&pe_residual(&u, s, 1.0 - cfg.radius)?, 0, 0.5 * g.y_max());
            worst = fmax(worst, fmax(err, res));
            c.push((format!("{name}_error[{}]", label(d, s)), err));
            c.push((format!("{name}_residual[{}]", label(d, s)), res));
        }
    }
    Ok(Outcome::at_most(ctx, "fixed_point_residual", worst, "distance to the closed form and PE residual"))
}

fn contraction(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for (d, s) in ctx.cases() {
        let fp = ctx.fixed_point(d, s, 0)?;
        let tr = &fp.2;
        worst = fmax(worst, tr.contraction_factor);
        c.push((format!("contraction_factor[{}]", label(d, s)), tr.contraction_factor));
        c.push((format!("c1[{}]", label(d, s)), tr.c1));
        c.push((format!("iterations[{}]", label(d, s)), tr.iterations() as f64));
        let pts = tr.records.iter().map(|r| (r.iteration as f64, r.difference.max(1e-300))).collect();
        lines.push((label(d, s), pts));
    }
    Ok(Outcome::below(
        worst,
        1.0,
        "contraction",
        format!("largest contraction factor at eps = {}", ctx.cfg.nonlinear.epsilon),
    )
    .constants(c)
    .series(Series {
        title: "fixed-point differences".into(),
        x_label: "iteration".into(),
        y_label: "X(p) difference / ||grad u0||".into(),
        log_y: true,
        lines,
    }))
}

fn decay(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let l = g.box_len();
        let eps = ctx.cfg.nonlinear.epsilon;
        // Same profile as `generic_initial`, with its gradient scale folded in.
        let init = move |y: &HalfSpacePoint| {
            let v = 1.0 - (-y.vertical()).exp();
            if d == 1 {
                eps * v
            } else {
                let sn = l / PI * (PI * y.tangential()[0] / l).sin();
                0.6 * eps * (v + (4.0 + sn * sn).sqrt() - 2.0)
            }
        };
        let r = decay_refinement_study(&g, init, &ctx.fp_config(d), s, 2)?;
        worst = fmax(worst, r.worst_change);
        for (a, b) in r.coarse.iter().zip(&r.fine) {
            let tag = format!("{},k={},alpha={:?}", label(d, s), a.k, a.alpha).replace(' ', "");
            c.push((format!("c[{tag}]"), a.c));
            c.push((format!("c_refined[{tag}]"), b.c));
        }
    }
    Ok(Outcome::at_most(
        ctx,
        "decay_refinement",
        worst,
        "largest relative change of the decay constants, k+|alpha| <= 2",
    )
    .constants(c))
}

fn equivariance(ctx: &Ctx) -> Result<Outcome> {
    let mut deriv = 0.0f64;
    let mut growth = 0.0f64;
    let mut c = Vec::new();
    let margin = 1.0 - ctx.cfg.nonlinear.radius;
    for (d, s) in ctx.cases() {
        let fp = ctx.fixed_point(d, s, 0)?;
        let xi = vec![0.1; d - 1];
        let eq = parameter_family_equivariance(&fp.1, 1.1, &xi, s, margin)?;
        let sc = scaling_equivariance(&fp.1, 2.0, s, Some(margin))?;
        let base = eq.base_residual.max(f64::MIN_POSITIVE);
        deriv = fmax(deriv, eq.xi_derivative_errors.iter().copied().fold(eq.tau_derivative_error, fmax));
        growth = fmax(growth, fmax(eq.transformed_residual, sc.scaled_residual) / base);
        c.push((format!("base_residual[{}]", label(d, s)), eq.base_residual));
        c.push((format!("family_residual[{}]", label(d, s)), eq.transformed_residual));
        c.push((format!("scaled_residual[{}]", label(d, s)), sc.scaled_residual));
        c.push((format!("tau_derivative_error[{}]", label(d, s)), eq.tau_derivative_error));
    }
    let limit = ctx.cfg.tolerance("equivariance_residual").value;
    Ok(Outcome::at_most(
        ctx,
        "equivariance_derivative",
        deriv,
        format!("largest (tau, xi) derivative mismatch; residual growth {growth:.3}"),
    )
    .require(growth <= limit, "transformed residual above equivariance_residual times the base residual")
    .constants(c))
}

fn analyticity(ctx: &Ctx) -> Result<Outcome> {
    let mut lambda = f64::INFINITY;
    let mut ok = true;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let fp = ctx.fixed_point(d, s, 0)?;
        let r = match analyticity_factorial_check(&fp.1, &fp.0, 3) {
            Ok(r) => r,
            Err(LabError::InvalidParameter(msg)) => return Ok(Outcome::skipped(msg)),
            Err(e) => return Err(e),
        };
        ok &= r.passed;
        if let Some(l) = r.lambda {
            lambda = lambda.min(l);
            c.push((format!("lambda[{}]", label(d, s)), l));
        }
        c.push((format!("c[{}]", label(d, s)), r.c));
    }
    Ok(Outcome::holds(ok, lambda, "smallest fitted Lambda of the factorial envelope, orders up to 3").constants(c))
}

// ---------------------------------------------------------------- transform

fn wave_chain(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (d, s) in ctx.cases() {
        let g = ctx.grid(d, 0)?;
        let fam = WaveFamily::flat(s, d);
        let w = fam.w_field(&g);
        worst = fmax(worst, tpe_residual(&w, s)?.max_abs());
        let (pf, _) = von_mises(&w, s, 41, 50, ctx.seed())?;
        for (k, &t) in pf.times.iter().enumerate() {
            for tt in 0..g.n_tang() {
                for (i, &x) in pf.x.iter().enumerate() {
                    let v = pf.at(k, tt, i);
                    let exact = (x + t).max(0.0);
                    worst = fmax(worst, (v - exact).abs());
                    worst = fmax(worst, (pressure_to_density(v, s) - fam.rho(t, &[], x)).abs());
                }
            }
        }
    }
    Ok(Outcome::at_most(ctx, "root_tolerance", worst, "flat wave: TPE residual and v = (x_n + t)+, rho from v"))
}

fn quasi_isometry(ctx: &Ctx) -> Result<Outcome> {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let p = ctx.pressure(d, s, 0)?;
        let iso = &p.1;
        ok &= iso.within;
        worst = fmax(worst, iso.c_eps);
        c.push((format!("c_eps[{}]", label(d, s)), iso.c_eps));
        c.push((format!("min_ratio[{}]", label(d, s)), iso.min_ratio));
        c.push((format!("max_ratio[{}]", label(d, s)), iso.max_ratio));
    }
    Ok(Outcome::holds(ok, worst, "distance ratios inside [1 - c eps, 1/(1 - c eps)]; measured is c eps").constants(c))
}

fn round_trip(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for (d, s) in ctx.cases() {
        worst = fmax(worst, round_trip_error(&ctx.pressure(d, s, 0)?.0)?);
    }
    Ok(Outcome::at_most(ctx, "round_trip", worst, "graph height recovered from the pressure"))
}

fn pmpe(ctx: &Ctx) -> Result<Outcome> {
    let (mut coarse, mut fine) = (0.0f64, 0.0f64);
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let a = pmpe_residual(&ctx.pressure(d, s, 0)?.0)?.max_abs;
        let b = pmpe_residual(&ctx.pressure(d, s, 1)?.0)?.max_abs;
        coarse = fmax(coarse, a);
        fine = fmax(fine, b);
        c.push((format!("pmpe[{},level=0]", label(d, s)), a));
        c.push((format!("pmpe[{},level=1]", label(d, s)), b));
    }
    Ok(Outcome::at_most(
        ctx,
        "pmpe_residual",
        fine,
        format!("largest strong residual on the refined grid (base {coarse:.3e})"),
    )
    .require(fine < coarse, "residual did not decrease under refinement")
    .constants(c))
}

fn pme_weak(ctx: &Ctx) -> Result<Outcome> {
    let mut finest = 0.0f64;
    let mut monotone = true;
    let mut empty = 0.0f64;
    let mut c = Vec::new();
    let mut lines = Vec::new();
    for (d, s) in ctx.cases() {
        let mut prev = f64::INFINITY;
        let mut pts = Vec::new();
        for level in 0..3 {
            let p = ctx.pressure(d, s, level)?;
            let bat = interface_battery(&p.0, ctx.cfg.sampler.battery, ctx.seed());
            let res = pme_weak_residuals(&p.0, &bat);
            let (last, straddling) = res.split_last().expect("battery is never empty");
            empty = fmax(empty, last.value.abs());
            let m = straddling.iter().map(|r| r.relative.abs()).fold(0.0, f64::max);
            monotone &= m < prev;
            prev = m;
            c.push((format!("weak[{},level={level}]", label(d, s)), m));
            pts.push((level as f64, m));
        }
        finest = fmax(finest, prev);
        lines.push((label(d, s), pts));
    }
    Ok(Outcome::at_most(
        ctx,
        "pme_weak_residual",
        finest,
        format!(
            "largest relative weak residual on the finest of three grids, {} test functions",
            ctx.cfg.sampler.battery + 1
        ),
    )
    .require(monotone, "residual did not decrease at every refinement")
    .require(empty == 0.0, "test function in the empty region sees mass")
    .constants(c)
    .series(Series {
        title: "weak PME residual under refinement".into(),
        x_label: "refinement level".into(),
        y_label: "max relative residual".into(),
        log_y: true,
        lines,
    }))
}

fn interface(ctx: &Ctx) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut c = Vec::new();
    for (d, s) in ctx.cases() {
        let p = ctx.pressure(d, s, 0)?;
        let lip = level_set_lipschitz(&p.0, &interface_extract(&p.0, 0.0)?);
        let ce = p.1.c_eps;
        worst = fmax(worst, lip / (ce / (1.0 - ce)).max(f64::MIN_POSITIVE));
        c.push((format!("lipschitz[{}]", label(d, s)), lip));
    }
    Ok(Outcome::below(
        worst,
        1.0,
        "Lipschitz bound c eps/(1 - c eps)",
        "largest interface Lipschitz constant over its bound",
    )
    .constants(c))
}
