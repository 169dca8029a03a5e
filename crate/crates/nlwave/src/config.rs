//! JSON run configurations and the preset catalogue.
//!
//! Configs are strict: unknown keys are rejected so typos in numerics
//! configs fail loudly, and every validation error names the offending
//! field. Presets cover the initial conditions, velocities, and forcings
//! used by the experiments instead of embedding an expression language.

use serde::Deserialize;

use crate::analysis::Manufactured;
use crate::assembly::A2Mode;
use crate::basis;
use crate::error::{Error, Result};
use crate::evolve::Scheme;
use crate::kernel::KernelSpec;

fn invalid(field: &str, msg: impl AsRef<str>) -> Error {
    Error::InvalidConfig(format!("{field}: {}", msg.as_ref()))
}

/// Kernel block: exactly one of `s` / `delta` selects the Gaussian scale.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub periodic: Option<bool>,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default, rename = "wrapRadius")]
    pub wrap_radius: Option<usize>,
}

impl KernelConfig {
    pub fn build(&self, field: &str) -> Result<KernelSpec> {
        if let Some(f) = &self.family {
            if f != "gaussian" {
                return Err(invalid(&format!("{field}.family"), "only \"gaussian\" is supported"));
            }
        }
        let scale = match (self.s, self.delta) {
            (Some(s), None) => {
                if s <= 0.0 {
                    return Err(invalid(&format!("{field}.s"), "must be positive"));
                }
                s
            }
            (None, Some(d)) => {
                if d <= 0.0 {
                    return Err(invalid(&format!("{field}.delta"), "must be positive"));
                }
                1.0 / (2.0 * d * d)
            }
            (Some(_), Some(_)) => {
                return Err(invalid(field, "give exactly one of s or delta, not both"))
            }
            (None, None) => return Err(invalid(field, "give exactly one of s or delta")),
        };
        let spec = KernelSpec::gaussian(scale);
        if self.periodic.unwrap_or(false) {
            let period = self
                .period
                .ok_or_else(|| invalid(&format!("{field}.period"), "required when periodic"))?;
            if period <= 0.0 {
                return Err(invalid(&format!("{field}.period"), "must be positive"));
            }
            Ok(match self.wrap_radius {
                Some(r) => spec.periodized_with_radius(period, r),
                None => spec.periodized(period),
            })
        } else {
            if self.period.is_some() {
                return Err(invalid(&format!("{field}.period"), "only valid with periodic = true"));
            }
            Ok(spec)
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lo: f64,
    pub hi: f64,
}

impl DomainConfig {
    pub fn validate(&self, field: &str) -> Result<()> {
        if self.lo.is_nan() || self.hi.is_nan() || self.lo >= self.hi {
            return Err(invalid(field, "requires lo < hi"));
        }
        Ok(())
    }
}

/// Initial-condition presets (1D unless noted).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum FieldPreset {
    /// amp * exp(-width (x - center)^2)
    #[serde(rename = "gaussianBump")]
    GaussianBump { amp: f64, width: f64, center: f64 },
    /// The k-th basis polynomial mapped onto the domain.
    #[serde(rename = "legendreMode")]
    LegendreMode { k: usize },
    #[serde(rename = "constant")]
    Constant { value: f64 },
    #[serde(rename = "zero")]
    Zero,
    /// amp * exp(-width ((x - centerX)^2 + (y - centerY)^2)), 2D runs only.
    #[serde(rename = "gaussianBump2d")]
    GaussianBump2d { amp: f64, width: f64, #[serde(rename = "centerX")] center_x: f64, #[serde(rename = "centerY")] center_y: f64 },
}

impl FieldPreset {
    /// 1D closure; errors when the preset is 2D-only.
    pub fn function_1d(&self, field: &str, interval: (f64, f64)) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            FieldPreset::GaussianBump { amp, width, center } => {
                if *width <= 0.0 {
                    return Err(invalid(&format!("{field}.width"), "must be positive"));
                }
                let (a, w, c) = (*amp, *width, *center);
                Ok(Box::new(move |x| a * (-w * (x - c) * (x - c)).exp()))
            }
            FieldPreset::LegendreMode { k } => {
                let k = *k;
                Ok(Box::new(move |x| basis::legendre_eval(k, basis::to_reference(interval, x))))
            }
            FieldPreset::Constant { value } => {
                let v = *value;
                Ok(Box::new(move |_| v))
            }
            FieldPreset::Zero => Ok(Box::new(|_| 0.0)),
            FieldPreset::GaussianBump2d { .. } => {
                Err(invalid(field, "gaussianBump2d is only valid for the midpoint2d solver"))
            }
        }
    }

    /// 2D closure; errors when the preset is 1D-only.
    pub fn function_2d(&self, field: &str) -> Result<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> {
        match self {
            FieldPreset::GaussianBump2d { amp, width, center_x, center_y } => {
                if *width <= 0.0 {
                    return Err(invalid(&format!("{field}.width"), "must be positive"));
                }
                let (a, w, cx, cy) = (*amp, *width, *center_x, *center_y);
                Ok(Box::new(move |x, y| {
                    a * (-w * ((x - cx) * (x - cx) + (y - cy) * (y - cy))).exp()
                }))
            }
            FieldPreset::Constant { value } => {
                let v = *value;
                Ok(Box::new(move |_, _| v))
            }
            FieldPreset::Zero => Ok(Box::new(|_, _| 0.0)),
            _ => Err(invalid(field, "preset is not valid for the midpoint2d solver")),
        }
    }
}

fn default_zero() -> FieldPreset {
    FieldPreset::Zero
}

/// Forcing presets.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum ForcingPreset {
    #[serde(rename = "none")]
    None,
    /// amp * cos(2 pi freq x), time-independent.
    #[serde(rename = "cosine")]
    Cosine { amp: f64, freq: f64 },
    /// Forcing induced by a manufactured solution from the catalogue.
    #[serde(rename = "manufactured")]
    Manufactured { id: String },
}

impl ForcingPreset {
    pub fn validate(&self, field: &str) -> Result<()> {
        if let ForcingPreset::Manufactured { id } = self {
            if Manufactured::by_id(id).is_none() {
                return Err(invalid(
                    &format!("{field}.id"),
                    format!("unknown manufactured solution \"{id}\""),
                ));
            }
        }
        Ok(())
    }

    pub fn function(&self) -> Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> {
        match self {
            ForcingPreset::None => Some(Box::new(|_, _| 0.0)),
            ForcingPreset::Cosine { amp, freq } => {
                let (a, f) = (*amp, *freq);
                Some(Box::new(move |x, _| a * (2.0 * std::f64::consts::PI * f * x).cos()))
            }
            // manufactured forcing needs the kernel and rho; handled by the
            // caller through analysis::manufactured_errors
            ForcingPreset::Manufactured { .. } => None,
        }
    }
}

fn default_forcing() -> ForcingPreset {
    ForcingPreset::None
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub panels: Option<usize>,
}

/// Collocation grid block.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "structure", deny_unknown_fields)]
pub enum GridConfig {
    #[serde(rename = "singleGauss")]
    SingleGauss { points: usize },
    #[serde(rename = "compositeGauss")]
    CompositeGauss { subdomains: usize, points: usize },
    #[serde(rename = "uniformMidpoint")]
    UniformMidpoint { cells: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleGridConfig {
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
}

pub fn parse_scheme(name: &str, field: &str) -> Result<Scheme> {
    match name {
        "paperImplicit" => Ok(Scheme::PaperImplicit),
        "explicitCentral" => Ok(Scheme::ExplicitCentral),
        "averagedImplicit" => Ok(Scheme::AveragedImplicit),
        other => Err(invalid(field, format!("unknown scheme \"{other}\""))),
    }
}

pub fn parse_a2_mode(name: &str, field: &str) -> Result<A2Mode> {
    match name {
        "unitMass" => Ok(A2Mode::UnitMass),
        "exactMass" => Ok(A2Mode::ExactMass),
        other => Err(invalid(field, format!("unknown a2Mode \"{other}\""))),
    }
}

/// Config for `nlwave run`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RunConfig {
    /// galerkin | collocation1d | midpoint2d
    pub solver: String,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
    pub kernel: KernelConfig,
    pub rho: f64,
    /// Basis degree N (galerkin only).
    #[serde(default)]
    pub degree: Option<usize>,
    /// Collocation grid (collocation1d only).
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// Cells per side (midpoint2d only).
    #[serde(default)]
    pub cells: Option<usize>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub a2_mode: Option<String>,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub u0: FieldPreset,
    #[serde(default = "default_zero")]
    pub v0: FieldPreset,
    #[serde(default = "default_forcing")]
    pub g: ForcingPreset,
    #[serde(default)]
    pub sample_grid: Option<SampleGridConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.solver.as_str() {
            "galerkin" => {
                if self.degree.is_none() {
                    return Err(invalid("degree", "required for the galerkin solver"));
                }
                self.domain_checked()?;
            }
            "collocation1d" => {
                if self.grid.is_none() {
                    return Err(invalid("grid", "required for the collocation1d solver"));
                }
                self.domain_checked()?;
            }
            "midpoint2d" => {
                let n = self.cells.ok_or_else(|| invalid("cells", "required for midpoint2d"))?;
                if n < 4 {
                    return Err(invalid("cells", "must be at least 4"));
                }
                if self.domain.is_some() {
                    return Err(invalid("domain", "midpoint2d always runs on the unit square"));
                }
                if !matches!(self.g, ForcingPreset::None) {
                    return Err(invalid("g", "midpoint2d supports no forcing"));
                }
            }
            other => return Err(invalid("solver", format!("unknown solver \"{other}\""))),
        }
        self.kernel.build("kernel")?;
        if self.rho.is_nan() || self.rho < 0.0 {
            return Err(invalid("rho", "must be nonnegative"));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(invalid("dt", "must be positive"));
        }
        if self.t_end.is_nan() || self.t_end < 0.0 {
            return Err(invalid("T", "must be nonnegative"));
        }
        if self.snapshot_times.is_empty() {
            return Err(invalid("snapshotTimes", "must not be empty"));
        }
        for (i, &t) in self.snapshot_times.iter().enumerate() {
            if t < 0.0 || t > self.t_end + 1e-9 {
                return Err(invalid(
                    &format!("snapshotTimes[{i}]"),
                    "must lie within [0, T]",
                ));
            }
        }
        if let Some(q) = &self.quadrature {
            if q.points == Some(0) || q.panels == Some(0) {
                return Err(invalid("quadrature", "points and panels must be positive"));
            }
        }
        if let Some(s) = &self.scheme {
            parse_scheme(s, "scheme")?;
        }
        if let Some(m) = &self.a2_mode {
            parse_a2_mode(m, "a2Mode")?;
        }
        self.g.validate("g")?;
        if matches!(self.g, ForcingPreset::Manufactured { .. }) {
            return Err(invalid("g", "manufactured forcing runs under the convergence command"));
        }
        Ok(())
    }

    fn domain_checked(&self) -> Result<DomainConfig> {
        let d = self.domain.ok_or_else(|| invalid("domain", "required for 1D solvers"))?;
        d.validate("domain")?;
        Ok(d)
    }

    pub fn domain(&self) -> DomainConfig {
        self.domain.unwrap_or(DomainConfig { lo: 0.0, hi: 1.0 })
    }

    pub fn scheme_parsed(&self) -> Scheme {
        self.scheme
            .as_deref()
            .map(|s| parse_scheme(s, "scheme").expect("validated"))
            .unwrap_or(Scheme::PaperImplicit)
    }

    pub fn a2_mode_parsed(&self) -> A2Mode {
        self.a2_mode
            .as_deref()
            .map(|m| parse_a2_mode(m, "a2Mode").expect("validated"))
            .unwrap_or(A2Mode::ExactMass)
    }
}

/// One sweep block of the convergence config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct SpatialSweepConfig {
    pub ns: Vec<usize>,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct TemporalSweepConfig {
    pub n: usize,
    pub dts: Vec<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub scheme: String,
}

/// Config for `nlwave convergence`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ConvergenceConfig {
    pub kernel: KernelConfig,
    pub rho: f64,
    pub domain: DomainConfig,
    pub manufactured: String,
    #[serde(default)]
    pub spatial: Option<SpatialSweepConfig>,
    #[serde(default)]
    pub temporal: Option<TemporalSweepConfig>,
    #[serde(default)]
    pub a2_mode: Option<String>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate("domain")?;
        self.kernel.build("kernel")?;
        if Manufactured::by_id(&self.manufactured).is_none() {
            return Err(invalid("manufactured", format!("unknown id \"{}\"", self.manufactured)));
        }
        if self.spatial.is_none() && self.temporal.is_none() {
            return Err(invalid("spatial/temporal", "at least one sweep block is required"));
        }
        if let Some(sp) = &self.spatial {
            if sp.ns.len() < 2 {
                return Err(invalid("spatial.ns", "need at least two degrees to assess decay"));
            }
            if sp.ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("spatial.ns", "must be strictly increasing"));
            }
            if sp.dt.is_nan() || sp.dt <= 0.0 {
                return Err(invalid("spatial.dt", "must be positive"));
            }
            if sp.t_end.is_nan() || sp.t_end <= 0.0 {
                return Err(invalid("spatial.T", "must be positive"));
            }
        }
        if let Some(tp) = &self.temporal {
            if tp.dts.len() < 2 {
                return Err(invalid("temporal.dts", "need at least two steps to fit an order"));
            }
            if tp.dts.iter().any(|&d| d <= 0.0) {
                return Err(invalid("temporal.dts", "must be positive"));
            }
            if tp.t_end.is_nan() || tp.t_end <= 0.0 {
                return Err(invalid("temporal.T", "must be positive"));
            }
            parse_scheme(&tp.scheme, "temporal.scheme")?;
        }
        if let Some(m) = &self.a2_mode {
            parse_a2_mode(m, "a2Mode")?;
        }
        Ok(())
    }
}

/// Config for `nlwave stability`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct StabilityConfig {
    pub kernel: KernelConfig,
    pub rho: f64,
    pub domain: DomainConfig,
    pub ns: Vec<usize>,
    pub dts: Vec<f64>,
    #[serde(default)]
    pub schemes: Option<Vec<String>>,
    #[serde(default)]
    pub a2_mode: Option<String>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate("domain")?;
        self.kernel.build("kernel")?;
        if self.ns.is_empty() {
            return Err(invalid("ns", "must not be empty"));
        }
        if self.dts.is_empty() {
            return Err(invalid("dts", "must not be empty"));
        }
        if self.dts.iter().any(|&d| d <= 0.0) {
            return Err(invalid("dts", "must be positive"));
        }
        if let Some(schemes) = &self.schemes {
            if schemes.is_empty() {
                return Err(invalid("schemes", "must not be empty"));
            }
            for s in schemes {
                parse_scheme(s, "schemes")?;
            }
        }
        if let Some(m) = &self.a2_mode {
            parse_a2_mode(m, "a2Mode")?;
        }
        Ok(())
    }

    pub fn schemes_parsed(&self) -> Vec<Scheme> {
        match &self.schemes {
            None => vec![Scheme::PaperImplicit],
            Some(list) => list
                .iter()
                .map(|s| parse_scheme(s, "schemes").expect("validated"))
                .collect(),
        }
    }
}

/// One solver block of the compare config.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CompareSolverConfig {
    /// galerkin | collocation1d
    pub solver: String,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default)]
    pub a2_mode: Option<String>,
    /// Optional override; must match the problem domain when given.
    #[serde(default)]
    pub domain: Option<DomainConfig>,
}

impl CompareSolverConfig {
    fn validate(&self, field: &str) -> Result<()> {
        match self.solver.as_str() {
            "galerkin" => {
                if self.degree.is_none() {
                    return Err(invalid(&format!("{field}.degree"), "required for galerkin"));
                }
            }
            "collocation1d" => {
                if self.grid.is_none() {
                    return Err(invalid(&format!("{field}.grid"), "required for collocation1d"));
                }
            }
            other => {
                return Err(invalid(&format!("{field}.solver"), format!("unknown solver \"{other}\"")))
            }
        }
        if let Some(s) = &self.scheme {
            parse_scheme(s, &format!("{field}.scheme"))?;
        }
        if let Some(m) = &self.a2_mode {
            parse_a2_mode(m, &format!("{field}.a2Mode"))?;
        }
        Ok(())
    }
}

/// The shared physical problem of a compare run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CompareProblemConfig {
    pub domain: DomainConfig,
    pub kernel: KernelConfig,
    pub rho: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub u0: FieldPreset,
    #[serde(default = "default_zero")]
    pub v0: FieldPreset,
    #[serde(default = "default_forcing")]
    pub g: ForcingPreset,
}

/// Config for `nlwave compare`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CompareConfig {
    pub problem: CompareProblemConfig,
    pub solver_a: CompareSolverConfig,
    pub solver_b: CompareSolverConfig,
    #[serde(default)]
    pub sample_grid: Option<SampleGridConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        self.problem.domain.validate("problem.domain")?;
        self.problem.kernel.build("problem.kernel")?;
        if self.problem.dt.is_nan() || self.problem.dt <= 0.0 {
            return Err(invalid("problem.dt", "must be positive"));
        }
        if self.problem.t_end.is_nan() || self.problem.t_end < 0.0 {
            return Err(invalid("problem.T", "must be nonnegative"));
        }
        if self.problem.snapshot_times.is_empty() {
            return Err(invalid("problem.snapshotTimes", "must not be empty"));
        }
        if matches!(self.problem.g, ForcingPreset::Manufactured { .. }) {
            return Err(invalid("problem.g", "manufactured forcing is not supported here"));
        }
        self.problem.g.validate("problem.g")?;
        self.solver_a.validate("solverA")?;
        self.solver_b.validate("solverB")?;
        for (block, field) in [(&self.solver_a, "solverA"), (&self.solver_b, "solverB")] {
            if let Some(d) = block.domain {
                if (d.lo - self.problem.domain.lo).abs() > 1e-12
                    || (d.hi - self.problem.domain.hi).abs() > 1e-12
                {
                    return Err(invalid(
                        &format!("{field}.domain"),
                        "does not match problem.domain",
                    ));
                }
            }
        }
        Ok(())
    }
}
