//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "green-suite"
//! sigma = 0.0
//! dimension = 1
//! seed = 24301
//! output = "out/green"
//!
//! [sweep]
//! sigmas = [-0.5, 0.0, 1.0]
//!
//! [tolerances]
//! kernel_invariant = 1e-4
//! ```
//!
//! Unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{LabError, Result};
use crate::field::HalfSpaceGrid;
use crate::weighted_measure::SigmaParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GeometrySuite,
    BesselSuite,
    GreenSuite,
    LinearSuite,
    NonlinearSuite,
    TransformSuite,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::GeometrySuite,
        Suite::BesselSuite,
        Suite::GreenSuite,
        Suite::LinearSuite,
        Suite::NonlinearSuite,
        Suite::TransformSuite,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::GeometrySuite => "geometry-suite",
            Suite::BesselSuite => "bessel-suite",
            Suite::GreenSuite => "green-suite",
            Suite::LinearSuite => "linear-suite",
            Suite::NonlinearSuite => "nonlinear-suite",
            Suite::TransformSuite => "transform-suite",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every tunable tolerance with its default and where the default comes from.
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("quasi_triangle", 48.0, "4 c_d comparability slack"),
    ("metric_factor", 48.0, "4 c_d comparability slack"),
    ("bracket_drift", 0.05, "bracket change from 6 to 10 decades"),
    ("slope_ratio", 0.05, "relative gap to the boundary/interior ratio 2"),
    ("wronskian", 1e-8, "relative, acceptance"),
    ("kernel_norm", 1e-6, "relative to the closed forms, acceptance"),
    ("ode_refinement", 1e-6, "relative change under doubled panels"),
    ("kernel_invariant", 1e-4, "relative, acceptance"),
    ("fv_oracle", 1e-4, "relative on interior samples, acceptance"),
    ("gaussian_r2", 0.95, "boundary-regime regression, acceptance"),
    ("gaussian_samples", 600.0, "zero-order samples, acceptance"),
    ("exact_linear", 1e-6, "relative, acceptance"),
    ("energy_closed_form", 1e-6, "relative mismatch, acceptance"),
    ("energy_order", 0.9, "O(ds + h^2) under joint halving, 10% slack"),
    ("weak_residual", 2e-2, "relative, twice-refined grid"),
    ("linear_estimate_refinement", 0.2, "relative ratio change, acceptance"),
    ("quadratic_slope", 0.05, "absolute gap to slope 2, acceptance"),
    ("fixed_point_residual", 1e-8, "closed-form fixed points, acceptance"),
    ("decay_refinement", 0.25, "relative change of decay constants, acceptance"),
    ("equivariance_derivative", 1e-3, "relative derivative mismatch, acceptance"),
    ("equivariance_residual", 10.0, "residual growth factor, acceptance"),
    ("root_tolerance", 1e-8, "closed-form transformation chain"),
    ("round_trip", 1e-6, "absolute, graph height to pressure and back"),
    ("pmpe_residual", 1e-3, "absolute, refined grid"),
    ("pme_weak_residual", 0.05, "relative, finest grid"),
];

pub fn default_tolerance(key: &str) -> Option<(f64, &'static str)> {
    TOLERANCES.iter().find(|t| t.0 == key).map(|t| (t.1, t.2))
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub nv: Option<usize>,
    pub y_max: Option<f64>,
    pub nt: Option<usize>,
    pub box_len: Option<f64>,
    pub ns: Option<usize>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    /// Dyadic cylinder levels of the norm sampler.
    pub levels: usize,
    /// Cylinders per level and regime.
    pub per_regime: usize,
    /// Seeded pairs and triples of the metric checks.
    pub pairs: usize,
    /// Gaussian-estimate samples per regime.
    pub gaussian_per_regime: usize,
    /// Test functions straddling the interface.
    pub battery: usize,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self { levels: 3, per_regime: 2, pairs: 100_000, gaussian_per_regime: 200, battery: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearSection {
    pub epsilon: f64,
    pub radius: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NonlinearSection {
    fn default() -> Self {
        Self { epsilon: 1e-2, radius: 0.25, max_iter: 40, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub sigmas: Option<Vec<f64>>,
    pub dimensions: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Suite,
    #[serde(default)]
    sigma: f64,
    #[serde(default = "one")]
    dimension: usize,
    seed: Option<u64>,
    output: Option<PathBuf>,
    #[serde(default)]
    grid: GridSection,
    #[serde(default)]
    sampler: SamplerSection,
    #[serde(default)]
    nonlinear: NonlinearSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub value: f64,
    /// Set in the config file rather than taken from [`TOLERANCES`].
    pub from_config: bool,
    pub note: &'static str,
}

impl Tolerance {
    pub fn provenance(&self) -> String {
        if self.from_config {
            "config".to_string()
        } else {
            format!("default: {}", self.note)
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Suite,
    pub sigma: SigmaParam,
    pub dimension: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub grid: GridSection,
    pub sampler: SamplerSection,
    pub nonlinear: NonlinearSection,
    /// Values of `σ` swept by the suite; `[sigma]` unless overridden.
    pub sigmas: Vec<SigmaParam>,
    /// Dimensions swept by the suite; `[dimension]` unless overridden.
    pub dimensions: Vec<usize>,
    tolerances: BTreeMap<&'static str, Tolerance>,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

fn check_sigma(key: &str, s: f64) -> Result<SigmaParam> {
    if !(s > -1.0) || !s.is_finite() {
        return Err(bad(format!("{key}: sigma must exceed -1 (got {s})")));
    }
    SigmaParam::new(s)
}

fn check_dim(key: &str, d: usize) -> Result<usize> {
    if !(1..=3).contains(&d) {
        return Err(bad(format!("{key}: dimension must be 1, 2 or 3 (got {d})")));
    }
    Ok(d)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| bad(e.message().to_string() + &span_hint(text, e.span())))?;
        Self::validate(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Minimal configuration for `suite` with every default.
    pub fn defaults(suite: Suite) -> Self {
        Self::parse(&format!("experiment = \"{}\"", suite.name())).expect("defaults validate")
    }

    fn validate(raw: RawConfig) -> Result<Self> {
        let sigma = check_sigma("sigma", raw.sigma)?;
        let dimension = check_dim("dimension", raw.dimension)?;
        let sigmas = match &raw.sweep.sigmas {
            Some(v) if v.is_empty() => return Err(bad("sweep.sigmas: list is empty")),
            Some(v) => v.iter().map(|&s| check_sigma("sweep.sigmas", s)).collect::<Result<_>>()?,
            None => vec![sigma],
        };
        let dimensions = match &raw.sweep.dimensions {
            Some(v) if v.is_empty() => return Err(bad("sweep.dimensions: list is empty")),
            Some(v) => v.iter().map(|&d| check_dim("sweep.dimensions", d)).collect::<Result<_>>()?,
            None => vec![dimension],
        };
        let mut tolerances = BTreeMap::new();
        for &(key, value, note) in TOLERANCES {
            tolerances.insert(key, Tolerance { value, from_config: false, note });
        }
        for (key, &value) in &raw.tolerances {
            let Some(entry) = TOLERANCES.iter().find(|t| t.0 == key) else {
                return Err(bad(format!("unknown key tolerances.{key}")));
            };
            if !(value > 0.0) || !value.is_finite() {
                return Err(bad(format!("tolerances.{key} must be positive (got {value})")));
            }
            tolerances.insert(entry.0, Tolerance { value, from_config: true, note: entry.2 });
        }
        let s = &raw.sampler;
        for (key, v) in [
            ("sampler.per_regime", s.per_regime),
            ("sampler.pairs", s.pairs),
            ("sampler.gaussian_per_regime", s.gaussian_per_regime),
            ("sampler.battery", s.battery),
        ] {
            if v == 0 {
                return Err(bad(format!("{key} must be positive")));
            }
        }
        let nl = &raw.nonlinear;
        if !(nl.epsilon > 0.0) || !nl.epsilon.is_finite() {
            return Err(bad(format!("nonlinear.epsilon must be positive (got {})", nl.epsilon)));
        }
        if !(nl.radius > 0.0 && nl.radius < 1.0) {
            return Err(bad(format!("nonlinear.radius must lie in (0, 1) (got {})", nl.radius)));
        }
        if !(nl.tol > 0.0) || nl.max_iter == 0 {
            return Err(bad("nonlinear.tol and nonlinear.max_iter must be positive"));
        }
        let cfg = Self {
            experiment: raw.experiment,
            sigma,
            dimension,
            seed: raw.seed.unwrap_or(crate::DEFAULT_SEED),
            output: raw.output.unwrap_or_else(|| PathBuf::from("pme-lab-out").join(raw.experiment.name())),
            grid: raw.grid,
            sampler: raw.sampler,
            nonlinear: raw.nonlinear,
            sigmas,
            dimensions,
            tolerances,
        };
        for &d in &cfg.dimensions {
            cfg.grid(d).map_err(|e| bad(format!("grid: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn tolerance(&self, key: &str) -> Tolerance {
        *self.tolerances.get(key).unwrap_or_else(|| panic!("unregistered tolerance {key}"))
    }

    /// Base grid in dimension `dim`: per-dimension defaults overridden by `[grid]`.
    pub fn grid(&self, dim: usize) -> Result<Arc<HalfSpaceGrid>> {
        let (nv, y_max, nt, box_len, ns, horizon) = match dim {
            1 => (24, 16.0, 1, 8.0, 16, 1.0),
            2 => (16, 8.0, 8, 8.0, 12, 0.5),
            _ => (12, 8.0, 6, 8.0, 12, 0.5),
        };
        let g = &self.grid;
        let nt = if dim == 1 { 1 } else { g.nt.unwrap_or(nt) };
        HalfSpaceGrid::new(
            dim,
            g.nv.unwrap_or(nv),
            g.y_max.unwrap_or(y_max),
            nt,
            g.box_len.unwrap_or(box_len),
            g.ns.unwrap_or(ns),
            g.horizon.unwrap_or(horizon),
        )
    }
}

/// ` (line L)` for a byte span, empty without one.
fn span_hint(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => format!(" (line {})", text[..r.start.min(text.len())].matches('\n').count() + 1),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::parse("experiment = \"geometry-suite\"").unwrap();
        assert_eq!(c.experiment, Suite::GeometrySuite);
        assert_eq!(c.sigma.sigma(), 0.0);
        assert_eq!(c.dimensions, vec![1]);
        assert_eq!(c.seed, crate::DEFAULT_SEED);
        assert!(!c.tolerance("wronskian").from_config);
    }

    #[test]
    fn sigma_at_minus_one_is_rejected() {
        let e = ExperimentConfig::parse("experiment = \"bessel-suite\"\nsigma = -1.0").unwrap_err();
        assert!(e.to_string().contains("sigma must exceed -1"), "{e}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = ExperimentConfig::parse("experiment = \"green-suite\"\nsigmaa = 0.0").unwrap_err();
        assert!(e.to_string().contains("sigmaa"), "{e}");
        let e = ExperimentConfig::parse("experiment = \"green-suite\"\n[tolerances]\nfoo = 1.0").unwrap_err();
        assert!(e.to_string().contains("tolerances.foo"), "{e}");
        let e = ExperimentConfig::parse("experiment = \"green-suite\"\n[grid]\nnx = 3").unwrap_err();
        assert!(e.to_string().contains("nx"), "{e}");
    }

    #[test]
    fn tolerance_overrides_are_tagged() {
        let c = ExperimentConfig::parse("experiment = \"green-suite\"\n[tolerances]\nfv_oracle = 1e-3").unwrap();
        let t = c.tolerance("fv_oracle");
        assert_eq!(t.value, 1e-3);
        assert_eq!(t.provenance(), "config");
        let e = ExperimentConfig::parse("experiment = \"green-suite\"\n[tolerances]\nfv_oracle = 0.0").unwrap_err();
        assert!(e.to_string().contains("tolerances.fv_oracle"), "{e}");
    }

    #[test]
    fn bad_dimension_and_grid_are_rejected() {
        assert!(ExperimentConfig::parse("experiment = \"linear-suite\"\ndimension = 4").is_err());
        let e = ExperimentConfig::parse("experiment = \"linear-suite\"\n[grid]\nnv = 3").unwrap_err();
        assert!(e.to_string().contains("grid"), "{e}");
    }
}
